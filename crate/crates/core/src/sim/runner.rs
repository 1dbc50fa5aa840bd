//! Runs a schedule through the gait engine and writes CSV.

use std::io::Write;

use crate::error::SimError;
use crate::gait::{
    check_constraints, Channel, ChannelJump, GaitConfig, GaitEngine, GaitEvent, GaitEventKind,
    GaitSample, StrideCheck,
};
use crate::kinematics::SagittalPose;
use crate::sim::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub gait: GaitConfig,
    /// Write joint angles in degrees instead of radians.
    pub degrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: usize,
    pub strides: Vec<StrideCheck>,
    pub channels: Vec<ChannelJump>,
    pub events: Vec<GaitEvent>,
    pub max_overreach: f64,
    pub final_pose: SagittalPose,
    pub finished: bool,
    pub violations: Vec<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rejected(&self) -> impl Iterator<Item = (f64, &str)> {
        self.events.iter().filter_map(|e| match &e.kind {
            GaitEventKind::Rejected(r) => Some((e.t, r.as_str())),
            _ => None,
        })
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("rows: {}\n", self.rows));
        for c in &self.strides {
            s.push_str(&format!(
                "stride {} {:?} [{:.3}, {:.3}] s: hip peak {:.4} m, clearance {:.4} m (target {:.4}), advance {:.4} m{}\n",
                c.index,
                c.swing,
                c.t0,
                c.tf,
                c.hip_peak,
                c.clearance_peak,
                c.clearance_target,
                c.swing_advance,
                if c.violations.is_empty() { "" } else { "  FAIL" }
            ));
        }
        for c in &self.channels {
            s.push_str(&format!(
                "{:>4}: max acc jump {:.3e} (limit {:.3e}) {}\n",
                c.channel.name(),
                c.max_jump,
                c.tolerance,
                if c.passed() { "ok" } else { "FAIL" }
            ));
        }
        for e in &self.events {
            s.push_str(&format!("t={:.3}: {:?}\n", e.t, e.kind));
        }
        if self.max_overreach > 0.0 {
            s.push_str(&format!("max straight-leg overreach: {:.3e} m\n", self.max_overreach));
        }
        let (xr, xl) = (self.final_pose.ankle_r.0, self.final_pose.ankle_l.0);
        s.push_str(&format!("final ankles: right x {xr:.4} m, left x {xl:.4} m\n"));
        for v in &self.violations {
            s.push_str(&format!("violation: {v}\n"));
        }
        s.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        s
    }
}

pub fn csv_header() -> Vec<String> {
    let names: Vec<&str> = Channel::ALL.iter().map(|c| c.name()).collect();
    let mut h = vec!["t".to_string()];
    for prefix in ["", "d", "dd"] {
        h.extend(names.iter().map(|n| format!("{prefix}{n}")));
    }
    h.extend(["thRh", "thRk", "thLh", "thLk"].map(String::from));
    h.extend(names.iter().map(|n| format!("ddd{n}")));
    h
}

fn csv_row(s: &GaitSample, degrees: bool) -> Vec<String> {
    let mut row = Vec::with_capacity(29);
    row.push(s.t.to_string());
    row.extend(s.states.iter().map(|x| x.pos.to_string()));
    row.extend(s.states.iter().map(|x| x.vel.to_string()));
    row.extend(s.states.iter().map(|x| x.acc.to_string()));
    let a = if degrees { s.angles.to_degrees() } else { s.angles };
    row.extend([a.hip_r, a.knee_r, a.hip_l, a.knee_l].map(|v| v.to_string()));
    row.extend(s.jerks.iter().map(|u| u.to_string()));
    row
}

fn io(e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => SimError::Io(e),
        other => SimError::MalformedCsv(format!("{other:?}")),
    }
}

/// Steps the gait over the schedule and streams one CSV row per control
/// step, `t = dt, 2 dt, ..., duration`.
///
/// Parameter changes are applied at the first control instant at or after
/// their timestamp. Rejected changes are logged in the report and the run
/// continues.
pub fn run<W: Write>(schedule: &Schedule, config: &RunConfig, out: W) -> Result<RunReport, SimError> {
    let gait = config.gait;
    schedule
        .initial
        .validate(&gait.geometry)
        .map_err(|e| SimError::Feasibility(e.to_string()))?;
    let mut engine = GaitEngine::new(gait, schedule.initial)?;
    let dt = gait.dt;
    let steps = (schedule.duration / dt).round() as usize;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(csv_header()).map_err(io)?;

    let mut commanded = schedule.initial;
    let mut events = schedule.events.iter().peekable();
    let mut stop = schedule.stop.as_ref();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(engine.initial_sample());
    let mut max_overreach: f64 = 0.0;
    let due = |te: f64, t: f64| te <= t + dt * 1e-6;

    for i in 0..steps {
        let t = i as f64 * dt;
        while let Some(e) = events.next_if(|e| due(e.t, t)) {
            e.field.apply(&mut commanded, e.value);
            // rejections are recorded in the engine's event log
            let _ = engine.update_params(t, commanded);
        }
        if let Some(s) = stop.filter(|s| due(s.t, t)) {
            for &(f, v) in &s.overrides {
                f.apply(&mut commanded, v);
            }
            let _ = engine.request_stop(t, commanded);
            stop = None;
        }
        let sample = engine.tick(t)?;
        max_overreach = max_overreach.max(sample.overreach);
        writer.write_record(csv_row(&sample, config.degrees)).map_err(io)?;
        samples.push(sample);
    }
    writer.flush()?;

    let mut report = RunReport {
        rows: steps,
        strides: Vec::new(),
        channels: Vec::new(),
        events: engine.events().to_vec(),
        max_overreach,
        final_pose: samples.last().map(|s| s.pose).unwrap_or_default(),
        finished: engine.finished(),
        violations: Vec::new(),
    };
    if steps == 0 {
        return Ok(report);
    }
    let constraints = check_constraints(&samples, engine.strides(), &gait.geometry, dt);
    report.violations = constraints.violations().collect();
    report.strides = constraints.strides;
    report.channels = constraints.channels;
    Ok(report)
}

/// Runs into memory, returning the CSV text with the report.
pub fn run_to_string(schedule: &Schedule, config: &RunConfig) -> Result<(String, RunReport), SimError> {
    let mut buf = Vec::new();
    let report = run(schedule, config, &mut buf)?;
    let text = String::from_utf8(buf).expect("CSV output is UTF-8");
    Ok((text, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::schedule::parse_schedule;

    #[test]
    fn zero_duration_is_header_only() {
        let s = parse_schedule("init Ls 0.6 Hs 0.1 ts 2\nduration 0\n").unwrap();
        let (csv, report) = run_to_string(&s, &RunConfig::default()).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 29);
        assert_eq!(report.rows, 0);
        assert!(report.strides.is_empty() && report.channels.is_empty());
        assert!(report.passed());
    }

    #[test]
    fn infeasible_geometry_reported_at_run_start() {
        let s = parse_schedule("init Ls 3.3 Hs 0.1 ts 2\nduration 1\n").unwrap();
        assert!(matches!(
            run_to_string(&s, &RunConfig::default()),
            Err(SimError::Feasibility(_))
        ));
    }

    #[test]
    fn header_layout() {
        let h = csv_header();
        assert_eq!(h[0], "t");
        assert_eq!(&h[1..7], &["Xh", "Yh", "XRa", "YRa", "XLa", "YLa"]);
        assert_eq!(h[7], "dXh");
        assert_eq!(h[13], "ddXh");
        assert_eq!(&h[19..23], &["thRh", "thRk", "thLh", "thLk"]);
        assert_eq!(h[28], "dddYLa");
    }
}

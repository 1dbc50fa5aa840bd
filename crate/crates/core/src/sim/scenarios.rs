//! Single-channel planner scenarios with scheduled boundary changes.

use std::io::Write;

use crate::error::SimError;
use crate::oracle;
use crate::trajectory::{exact_peak_gain, Boundary, Integration, PeakGain, PlannerChannel, State3, XBoundary, YBoundary};

/// A boundary change applied during a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Change {
    /// New x endpoint; `tf` is taken from the boundary.
    X(XBoundary),
    /// New y peak, endpoint and horizon; the gain is recomputed from the
    /// current state.
    Y { yp: f64, yf: f64, tf: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerScenario {
    pub name: &'static str,
    pub start: State3,
    pub initial: Boundary,
    pub changes: Vec<(f64, Change)>,
}

impl PlannerScenario {
    pub fn is_vertical(&self) -> bool {
        matches!(self.initial, Boundary::Y(_))
    }
}

pub const PLANNER_SCENARIOS: [&str; 4] = ["fig10", "fig11", "fig12", "fig13"];

pub fn planner_scenario(name: &str) -> Option<PlannerScenario> {
    let fig12 = YBoundary::new(0.0, 5.0, 0.0, 2.0, 1.0).expect("valid boundary");
    let sc = match name {
        "fig10" => PlannerScenario {
            name: "fig10",
            start: State3::ZERO,
            initial: Boundary::X(XBoundary::new(5.0, 2.0, 1.0, 1.0)),
            changes: Vec::new(),
        },
        "fig11" => PlannerScenario {
            name: "fig11",
            start: State3::ZERO,
            initial: Boundary::X(XBoundary::new(5.0, 2.0, 1.0, 1.0)),
            changes: vec![
                (2.0, Change::X(XBoundary::new(5.0, 1.0, -0.5, -1.0))),
                (3.0, Change::X(XBoundary::new(4.0, 1.0, -0.5, -1.0))),
            ],
        },
        "fig12" => PlannerScenario {
            name: "fig12",
            start: State3::ZERO,
            initial: Boundary::Y(fig12),
            changes: Vec::new(),
        },
        "fig13" => PlannerScenario {
            name: "fig13",
            start: State3::ZERO,
            initial: Boundary::Y(fig12),
            changes: vec![
                (1.0, Change::Y { yp: 2.5, yf: 1.0, tf: 5.0 }),
                (2.0, Change::Y { yp: 2.5, yf: 0.5, tf: 5.0 }),
                (3.0, Change::Y { yp: 2.5, yf: 0.5, tf: 4.5 }),
            ],
        },
        _ => return None,
    };
    Some(sc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub rows: usize,
    pub final_state: State3,
    pub target: State3,
    pub terminal_error: f64,
    pub max_jump: f64,
    pub max_jerk: f64,
    pub jump_tolerance: f64,
    pub peak: f64,
    /// Largest deviation from the open-loop solution, for scenarios without
    /// boundary changes.
    pub reference_error: Option<f64>,
    pub notes: Vec<String>,
}

pub const TERMINAL_TOLERANCE: f64 = 1e-3;

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.terminal_error <= TERMINAL_TOLERANCE && self.max_jump <= self.jump_tolerance
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} rows, final ({:.6}, {:.6}, {:.6}) target ({}, {}, {}), terminal error {:.3e}\n\
             max acc jump {:.3e} (limit {:.3e}), peak {:.6}\n",
            self.name,
            self.rows,
            self.final_state.pos,
            self.final_state.vel,
            self.final_state.acc,
            self.target.pos,
            self.target.vel,
            self.target.acc,
            self.terminal_error,
            self.max_jump,
            self.jump_tolerance,
            self.peak,
        );
        if let Some(e) = self.reference_error {
            s.push_str(&format!("max deviation from open-loop solution {e:.3e}\n"));
        }
        for n in &self.notes {
            s.push_str(n);
            s.push('\n');
        }
        s.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        s
    }
}

/// Runs a scenario from `t = 0` to the final horizon and writes
/// `t, x, dx, ddx, dddx` rows (or `y...`), including the initial row.
///
/// `peak_gain` picks the gain of the initial y-boundary and of every
/// re-targeting.
pub fn run_planner_scenario<W: Write>(
    sc: &PlannerScenario,
    dt: f64,
    integration: Integration,
    peak_gain: PeakGain,
    out: W,
) -> Result<ScenarioReport, SimError> {
    let mut ch = match sc.initial {
        Boundary::X(b) => PlannerChannel::new_x(sc.start, b),
        Boundary::Y(mut b) => {
            if peak_gain == PeakGain::Exact {
                b.k = exact_peak_gain(sc.start, b.t0, b.tf, b.yp, b.yf)?;
            }
            PlannerChannel::new_y(sc.start, b)
        }
    }
    .with_integration(integration);
    let axis = if sc.is_vertical() { "y" } else { "x" };
    let mut w = csv::Writer::from_writer(out);
    let header = ["t", "", "d", "dd", "ddd"].map(|p| if p == "t" { p.to_string() } else { format!("{p}{axis}") });
    w.write_record(&header).map_err(csv_err)?;

    let end = sc
        .changes
        .iter()
        .fold(sc.initial.tf(), |_, (_, c)| match c {
            Change::X(b) => b.tf,
            Change::Y { tf, .. } => *tf,
        });
    let steps = (end / dt).round() as usize;
    let row = |t: f64, s: State3, u: f64| [t, s.pos, s.vel, s.acc, u].map(|v| v.to_string());
    w.write_record(row(0.0, ch.state, 0.0)).map_err(csv_err)?;

    let reference = match (sc.changes.is_empty(), sc.initial) {
        (true, Boundary::X(b)) => Some(oracle::x_reference(sc.start, &b, 0.0)?.1),
        (true, Boundary::Y(_)) => match ch.boundary {
            Boundary::Y(b) => Some(oracle::y_reference(sc.start, &b)?.1),
            Boundary::X(_) => None,
        },
        _ => None,
    };

    let mut notes = Vec::new();
    let mut pending = sc.changes.iter().peekable();
    let (mut max_jump, mut max_jerk, mut peak) = (0.0_f64, 0.0_f64, sc.start.pos);
    let mut reference_error: f64 = 0.0;
    let eps = dt;
    for i in 0..steps {
        let t = i as f64 * dt;
        while let Some((tc, change)) = pending.next_if(|(tc, _)| *tc <= t + dt * 1e-6) {
            let applied = match *change {
                Change::X(b) => ch.set_boundary(t, Boundary::X(b), eps).map(|_| None),
                Change::Y { yp, yf, tf } => ch
                    .retarget_y(t, yp, yf, tf, peak_gain, eps)
                    .map(|r| Some(r)),
            };
            match applied {
                Ok(Some(r)) => {
                    notes.push(format!("t={tc}: k -> {:.6}", r.boundary.k));
                    if let Some(req) = r.clamped_peak {
                        notes.push(format!("t={tc}: peak {req} below current position, raised to {}", r.boundary.yp));
                    }
                }
                Ok(None) => notes.push(format!("t={tc}: boundary changed")),
                Err(e) => notes.push(format!("t={tc}: change rejected: {e}")),
            }
        }
        let before = ch.state;
        let s = ch.step(t, dt)?;
        max_jump = max_jump.max((s.acc - before.acc).abs());
        max_jerk = max_jerk.max(ch.last_jerk.abs());
        peak = peak.max(s.pos);
        if let Some(r) = &reference {
            reference_error = reference_error.max((s.pos - r.eval(t + dt)).abs());
        }
        w.write_record(row(t + dt, s, ch.last_jerk)).map_err(csv_err)?;
    }
    w.flush()?;
    let target = ch.boundary.target();
    Ok(ScenarioReport {
        name: sc.name.to_string(),
        rows: steps + 1,
        final_state: ch.state,
        target,
        terminal_error: ch.state.max_abs_diff(&target),
        max_jump,
        max_jerk,
        jump_tolerance: crate::gait::jump_tolerance(max_jerk, dt),
        peak,
        reference_error: reference.map(|_| reference_error),
        notes,
    })
}

fn csv_err(e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => SimError::Io(e),
        other => SimError::MalformedCsv(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str) -> ScenarioReport {
        let sc = planner_scenario(name).unwrap();
        run_planner_scenario(&sc, 1e-3, Integration::ExactFlow, PeakGain::Approximate, std::io::sink()).unwrap()
    }

    #[test]
    fn all_scenarios_pass() {
        for name in PLANNER_SCENARIOS {
            let r = run(name);
            assert!(r.passed(), "{}", r.summary());
        }
        assert!(planner_scenario("fig99").is_none());
    }

    #[test]
    fn fig11_ends_on_shortened_horizon() {
        let r = run("fig11");
        assert_eq!(r.rows, 4001);
        assert_eq!(r.target, State3::new(1.0, -0.5, -1.0));
    }
}

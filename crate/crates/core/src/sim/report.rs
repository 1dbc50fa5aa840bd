//! Acceleration continuity checks on CSV output.

use std::io::Read;

use crate::error::SimError;
use crate::gait::jump_tolerance;

/// Continuity of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelContinuity {
    pub name: String,
    pub max_jump: f64,
    /// 1-based data row (header excluded) ending the largest jump.
    pub row: usize,
    pub max_jerk: f64,
    pub tolerance: f64,
}

impl ChannelContinuity {
    pub fn passed(&self) -> bool {
        self.max_jump <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub dt: f64,
    pub rows: usize,
    pub channels: Vec<ChannelContinuity>,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.channels.iter().all(ChannelContinuity::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = String> + '_ {
        self.channels.iter().filter(|c| !c.passed()).map(|c| {
            format!(
                "{}: acceleration jump {:.3e} at row {} exceeds {:.3e}",
                c.name, c.max_jump, c.row, c.tolerance
            )
        })
    }
}

fn malformed(m: impl Into<String>) -> SimError {
    SimError::MalformedCsv(m.into())
}

/// Reads a CSV with a `t` column and, per channel `X`, columns `ddX`
/// (acceleration) and `dddX` (jerk), and reports the largest
/// inter-sample acceleration jump of each channel against
/// `max |jerk| * dt * 1.01`.
pub fn continuity_report(input: impl Read) -> Result<ContinuityReport, SimError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| malformed(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t").ok_or_else(|| malformed("missing `t` column"))?;
    let mut channels = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if let Some(base) = h.strip_prefix("dd") {
            if base.starts_with('d') || base.is_empty() {
                continue;
            }
            let jerk = col(&format!("ddd{base}"))
                .ok_or_else(|| malformed(format!("column `{h}` has no matching `ddd{base}`")))?;
            channels.push((base.to_string(), i, jerk));
        }
    }
    if channels.is_empty() {
        return Err(malformed("no acceleration columns"));
    }

    let mut prev: Option<Vec<f64>> = None;
    let mut times = [None, None];
    let mut jumps = vec![(0.0_f64, 0_usize); channels.len()];
    let mut jerks = vec![0.0_f64; channels.len()];
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let row = r + 1;
        let get = |c: usize| -> Result<f64, SimError> {
            let s = record
                .get(c)
                .ok_or_else(|| malformed(format!("row {row}: missing column {c}")))?;
            s.parse()
                .map_err(|_| malformed(format!("row {row}: `{s}` is not a number")))
        };
        let t = get(t_col)?;
        if row <= 2 {
            times[row - 1] = Some(t);
        }
        let mut accs = Vec::with_capacity(channels.len());
        for (ci, (_, acc_col, jerk_col)) in channels.iter().enumerate() {
            let a = get(*acc_col)?;
            jerks[ci] = jerks[ci].max(get(*jerk_col)?.abs());
            if let Some(p) = &prev {
                let jump = (a - p[ci]).abs();
                if jump > jumps[ci].0 {
                    jumps[ci] = (jump, row);
                }
            }
            accs.push(a);
        }
        prev = Some(accs);
        rows = row;
    }
    let dt = match times {
        [Some(a), Some(b)] => b - a,
        _ => 0.0,
    };
    let channels = channels
        .into_iter()
        .zip(jumps.into_iter().zip(jerks))
        .map(|((name, _, _), ((max_jump, row), max_jerk))| ChannelContinuity {
            name,
            max_jump,
            row,
            max_jerk,
            tolerance: jump_tolerance(max_jerk, dt),
        })
        .collect();
    Ok(ContinuityReport { dt, rows, channels })
}

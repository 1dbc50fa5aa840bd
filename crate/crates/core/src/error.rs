use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("horizon expired: remaining time {remaining:.3e} s is within the snap window {window:.3e} s")]
    HorizonExpired { remaining: f64, window: f64 },
    #[error("degenerate peak geometry: yp={yp}, y0={y0}, yf={yf}")]
    DegeneratePeak { y0: f64, yp: f64, yf: f64 },
    #[error("invalid horizon: tf={tf} must exceed t0={t0}")]
    InvalidHorizon { t0: f64, tf: f64 },
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("channel holds a {found} boundary, expected {expected}")]
    WrongBoundary {
        expected: &'static str,
        found: &'static str,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("could not bracket a peak gain for yp={yp}")]
    GainBracket { yp: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("acos argument {0} outside [-1, 1] beyond the guard band")]
    OutOfDomain(f64),
    #[error("target at radius {radius:.6} m is outside the workspace [{min:.6}, {max:.6}]")]
    Unreachable { radius: f64, min: f64, max: f64 },
    #[error("target coincides with the hip joint")]
    Degenerate,
    #[error("invalid geometry: link lengths must be positive (thigh={thigh}, shin={shin})")]
    InvalidGeometry { thigh: f64, shin: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaitError {
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("invalid walking parameters: {0}")]
    InvalidParams(String),
    #[error("parameter change rejected at t={t}: {reason}")]
    RejectedChange { t: f64, reason: String },
    #[error("planner: {0}")]
    Plan(#[from] PlanError),
    #[error("kinematics at t={t}: {source}")]
    Kinematics { t: f64, source: KinematicsError },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("singular KKT system: endpoint constraints are inconsistent")]
    Singular,
    #[error("bracket failure: peak {yp} cannot be straddled")]
    Bracket { yp: f64 },
    #[error("invalid oracle input: {0}")]
    Invalid(String),
    #[error("planner: {0}")]
    Plan(#[from] PlanError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("infeasible schedule: {0}")]
    Feasibility(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Gait(#[from] GaitError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

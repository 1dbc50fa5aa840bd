//! Closed-loop minimum-jerk planners for a single trajectory channel.
//!
//! A channel is a triple integrator `(pos, vel, acc)` driven by jerk. The
//! x-planner steers it to an endpoint state `(xf, vxf, axf)` at `tf` while
//! minimising the integral of squared jerk. The y-planner steers to
//! `(yf, 0, 0)` and adds a linear term `k * y` to the cost, which bulges the
//! trajectory into a peak whose height is set by `k`.
//!
//! The feedback laws are re-evaluated from the current state at every control
//! step, so a boundary can be swapped at any time without a jump in position,
//! velocity or acceleration.

use crate::error::PlanError;

/// Default control period.
pub const DEFAULT_DT: f64 = 1e-3;

/// `5 * 8!`, the scale relating the peak gain to the trajectory integral.
pub const GAIN_INTEGRAL_SCALE: f64 = 201_600.0;

// peak gaps below this are treated as a flat trajectory
const FLAT_GAP: f64 = 1e-12;
// smallest peak raise reported as a clamp
const CLAMP_REPORT_GAP: f64 = 1e-9;

/// Position, velocity and acceleration of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State3 {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

impl State3 {
    pub const ZERO: State3 = State3 {
        pos: 0.0,
        vel: 0.0,
        acc: 0.0,
    };

    pub const fn new(pos: f64, vel: f64, acc: f64) -> Self {
        Self { pos, vel, acc }
    }

    /// Resting at `pos`.
    pub const fn at_rest(pos: f64) -> Self {
        Self::new(pos, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite() && self.acc.is_finite()
    }

    /// Largest component-wise absolute difference.
    pub fn max_abs_diff(&self, other: &State3) -> f64 {
        (self.pos - other.pos)
            .abs()
            .max((self.vel - other.vel).abs())
            .max((self.acc - other.acc).abs())
    }
}

/// Endpoint of the x-planner; `tf` is absolute time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XBoundary {
    pub tf: f64,
    pub xf: f64,
    pub vxf: f64,
    pub axf: f64,
}

impl XBoundary {
    pub const fn new(tf: f64, xf: f64, vxf: f64, axf: f64) -> Self {
        Self { tf, xf, vxf, axf }
    }

    /// Rest-to-rest target.
    pub const fn rest(tf: f64, xf: f64) -> Self {
        Self::new(tf, xf, 0.0, 0.0)
    }

    pub fn target(&self) -> State3 {
        State3::new(self.xf, self.vxf, self.axf)
    }
}

/// Boundary of the y-planner. `k` is the peak-shaping gain; see [`kstar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YBoundary {
    pub t0: f64,
    pub tf: f64,
    pub y0: f64,
    pub yp: f64,
    pub yf: f64,
    pub k: f64,
}

impl YBoundary {
    /// Builds a boundary with `k` from [`kstar`].
    pub fn new(t0: f64, tf: f64, y0: f64, yp: f64, yf: f64) -> Result<Self, PlanError> {
        let k = kstar(t0, tf, y0, yp, yf)?;
        Self::with_gain(t0, tf, y0, yp, yf, k)
    }

    pub fn with_gain(t0: f64, tf: f64, y0: f64, yp: f64, yf: f64, k: f64) -> Result<Self, PlanError> {
        if !(tf > t0) {
            return Err(PlanError::InvalidHorizon { t0, tf });
        }
        if !(y0.is_finite() && yp.is_finite() && yf.is_finite() && k.is_finite()) {
            return Err(PlanError::NonFinite("YBoundary"));
        }
        if yp < y0.max(yf) {
            return Err(PlanError::InvalidBoundary(format!(
                "peak {yp} below endpoints ({y0}, {yf})"
            )));
        }
        Ok(Self {
            t0,
            tf,
            y0,
            yp,
            yf,
            k,
        })
    }

    pub fn target(&self) -> State3 {
        State3::at_rest(self.yf)
    }
}

/// Boundary held by a [`PlannerChannel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    X(XBoundary),
    Y(YBoundary),
}

impl Boundary {
    pub fn tf(&self) -> f64 {
        match self {
            Boundary::X(b) => b.tf,
            Boundary::Y(b) => b.tf,
        }
    }

    pub fn target(&self) -> State3 {
        match self {
            Boundary::X(b) => b.target(),
            Boundary::Y(b) => b.target(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Boundary::X(_) => "x",
            Boundary::Y(_) => "y",
        }
    }
}

/// How the closed loop is advanced over one control period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integration {
    /// Integrate the closed-loop system exactly over the step: the feedback
    /// law, re-anchored at the step start, is followed continuously.
    #[default]
    ExactFlow,
    /// Sample the feedback law at the step start and hold the jerk constant.
    ZeroOrderHold,
}

/// How a y-channel's gain is chosen from a commanded peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakGain {
    /// The closed-form approximation [`kstar`].
    Approximate,
    /// Solve for the gain whose planned trajectory peaks exactly at `yp`,
    /// see [`exact_peak_gain`].
    #[default]
    Exact,
}

fn check_remaining(tf: f64, t: f64, window: f64) -> Result<f64, PlanError> {
    let window = snap_window(window);
    let remaining = tf - t;
    if remaining <= window {
        return Err(PlanError::HorizonExpired { remaining, window });
    }
    Ok(remaining)
}

/// Jerk commanded by the x-planner feedback law at time `t`.
///
/// `epsilon_snap` is the terminal window in which the law is not evaluated
/// (the caller snaps to the boundary instead).
pub fn ux_feedback(state: State3, bc: &XBoundary, t: f64, epsilon_snap: f64) -> Result<f64, PlanError> {
    let r = check_remaining(bc.tf, t, epsilon_snap)?;
    let u = 60.0 * (bc.xf - state.pos) / r.powi(3) - 12.0 * (2.0 * bc.vxf + 3.0 * state.vel) / r.powi(2)
        + 3.0 * (bc.axf - 3.0 * state.acc) / r;
    finite(u, "ux_feedback")
}

/// Jerk commanded by the y-planner feedback law at time `t`.
pub fn uy_feedback(state: State3, yf: f64, k: f64, tf: f64, t: f64, epsilon_snap: f64) -> Result<f64, PlanError> {
    let r = check_remaining(tf, t, epsilon_snap)?;
    let u = 60.0 * (yf - state.pos) / r.powi(3)
        - 36.0 * state.vel / r.powi(2)
        - 9.0 * state.acc / r
        - k * r.powi(3) / 240.0;
    finite(u, "uy_feedback")
}

fn finite(v: f64, what: &'static str) -> Result<f64, PlanError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PlanError::NonFinite(what))
    }
}

/// Gain that places the peak of the y-trajectory near `yp`.
///
/// Derived from an area argument, so the achieved peak is approximate. Returns
/// zero for a flat trajectory and a zero gain whenever one endpoint already
/// sits at the peak.
pub fn kstar(t0: f64, tf: f64, y0: f64, yp: f64, yf: f64) -> Result<f64, PlanError> {
    if !(tf > t0) {
        return Err(PlanError::InvalidHorizon { t0, tf });
    }
    let rise = yp - y0;
    let fall = yp - yf;
    if rise.abs() < FLAT_GAP && fall.abs() < FLAT_GAP {
        return Ok(0.0);
    }
    let num = rise * fall;
    let den = rise + fall;
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(PlanError::DegeneratePeak { y0, yp, yf });
    }
    let k = -GAIN_INTEGRAL_SCALE / (tf - t0).powi(6) * num / den;
    // normalise -0.0
    Ok(if k == 0.0 { 0.0 } else { k })
}

/// Exact update of the triple integrator under jerk `u` held for `dt`.
pub fn propagate(state: State3, u: f64, dt: f64) -> State3 {
    let dt2 = dt * dt;
    State3 {
        pos: state.pos + state.vel * dt + state.acc * dt2 / 2.0 + u * dt2 * dt / 6.0,
        vel: state.vel + state.acc * dt + u * dt2 / 2.0,
        acc: state.acc + u * dt,
    }
}

/// Jerk polynomial re-planned from a state, valid on `[0, horizon]` in local
/// time. The closed-loop system follows this segment exactly until the next
/// re-plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: State3,
    /// Jerk coefficients for `tau^0 .. tau^3`.
    pub jerk: [f64; 4],
    pub horizon: f64,
}

// m! / (m + n)! for n = 1..=3 (rows) and m = 0..=2 (columns)
const MOMENTS: [[f64; 3]; 3] = [
    [1.0, 1.0 / 2.0, 1.0 / 3.0],
    [1.0 / 2.0, 1.0 / 6.0, 1.0 / 12.0],
    [1.0 / 6.0, 1.0 / 24.0, 1.0 / 60.0],
];

const FACT: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

impl Segment {
    /// Minimum-jerk segment to an x-boundary.
    pub fn to_x(state: State3, bc: &XBoundary, t: f64) -> Result<Self, PlanError> {
        Self::solve(state, bc.target(), 0.0, bc.tf - t)
    }

    /// Minimum-jerk segment to `(yf, 0, 0)` with the linear cost weight `k`.
    pub fn to_y(state: State3, yf: f64, k: f64, tf: f64, t: f64) -> Result<Self, PlanError> {
        Self::solve(state, State3::at_rest(yf), k / 12.0, tf - t)
    }

    /// Solves the terminal conditions for the quadratic part of the jerk
    /// given a fixed cubic coefficient.
    fn solve(start: State3, target: State3, cubic: f64, horizon: f64) -> Result<Self, PlanError> {
        if !(horizon > 0.0) {
            return Err(PlanError::HorizonExpired {
                remaining: horizon,
                window: 0.0,
            });
        }
        let h = horizon;
        // scaled unknowns z_m = c_m h^m
        let z3 = cubic * h.powi(3);
        let rhs = [
            (target.acc - start.acc) / h - z3 / 4.0,
            (target.vel - start.vel - start.acc * h) / (h * h) - z3 * FACT[3] / FACT[5],
            (target.pos - start.pos - start.vel * h - start.acc * h * h / 2.0) / h.powi(3)
                - z3 * FACT[3] / FACT[6],
        ];
        let z = solve3(MOMENTS, rhs);
        let jerk = [z[0], z[1] / h, z[2] / (h * h), cubic];
        if jerk.iter().any(|c| !c.is_finite()) {
            return Err(PlanError::NonFinite("segment"));
        }
        Ok(Self {
            start,
            jerk,
            horizon,
        })
    }

    pub fn jerk_at(&self, tau: f64) -> f64 {
        self.jerk.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    /// Jerk of largest magnitude on `[0, until]`, with its sign.
    pub fn peak_jerk(&self, until: f64) -> f64 {
        let [_, c1, c2, c3] = self.jerk;
        // stationary points of the cubic jerk
        let mut cands = vec![0.0, until];
        if c3.abs() > 0.0 {
            let disc = 4.0 * c2 * c2 - 12.0 * c3 * c1;
            if disc >= 0.0 {
                let r = disc.sqrt();
                cands.push((-2.0 * c2 + r) / (6.0 * c3));
                cands.push((-2.0 * c2 - r) / (6.0 * c3));
            }
        } else if c2.abs() > 0.0 {
            cands.push(-c1 / (2.0 * c2));
        }
        cands
            .into_iter()
            .filter(|tau| (0.0..=until).contains(tau))
            .map(|tau| self.jerk_at(tau))
            .fold(0.0, |best: f64, u| if u.abs() > best.abs() { u } else { best })
    }

    /// State after following the segment for `tau`.
    pub fn state_at(&self, tau: f64) -> State3 {
        let s = self.start;
        let mut acc = s.acc;
        let mut vel = s.vel + s.acc * tau;
        let mut pos = s.pos + s.vel * tau + s.acc * tau * tau / 2.0;
        for (m, c) in self.jerk.iter().enumerate() {
            let tm = tau.powi(m as i32);
            acc += c * tm * tau * FACT[m] / FACT[m + 1];
            vel += c * tm * tau * tau * FACT[m] / FACT[m + 2];
            pos += c * tm * tau.powi(3) * FACT[m] / fact(m + 3);
        }
        State3 { pos, vel, acc }
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Maximum of the planned y-position over the remaining horizon.
fn segment_peak(seg0: &Segment, seg1: &Segment, k: f64) -> f64 {
    const SAMPLES: usize = 512;
    let h = seg0.horizon;
    let pos = |tau: f64| {
        let p0 = seg0.state_at(tau).pos;
        p0 + k * (seg1.state_at(tau).pos - p0)
    };
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..=SAMPLES {
        let p = pos(h * i as f64 / SAMPLES as f64);
        if p > best {
            best = p;
            best_i = i;
        }
    }
    // golden-section refinement around the best sample
    let step = h / SAMPLES as f64;
    let mut lo = (best_i as f64 - 1.0).max(0.0) * step;
    let mut hi = (best_i as f64 + 1.0).min(SAMPLES as f64) * step;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if pos(a) > pos(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.max(pos(0.5 * (lo + hi)))
}

/// Gain whose re-planned trajectory from `state` at time `t` peaks at `yp`.
///
/// The planned position is affine in `k` and the peak is non-increasing in
/// `k`, so the gain is found by bracketing and bisection over `k <= 0`. When
/// the gain-free plan already reaches `yp` the gain is zero.
pub fn exact_peak_gain(state: State3, t: f64, tf: f64, yp: f64, yf: f64) -> Result<f64, PlanError> {
    let seg0 = Segment::to_y(state, yf, 0.0, tf, t)?;
    let seg1 = Segment::to_y(state, yf, 1.0, tf, t)?;
    let tol = 1e-12 * yp.abs().max(1.0);
    let peak = |k: f64| segment_peak(&seg0, &seg1, k);
    if peak(0.0) >= yp - tol {
        return Ok(0.0);
    }
    let h = tf - t;
    let mut lo = -1.0 / h.powi(6);
    let mut expansions = 0;
    while peak(lo) < yp {
        lo *= 2.0;
        expansions += 1;
        if expansions > 200 || !lo.is_finite() {
            return Err(PlanError::GainBracket { yp });
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let p = peak(mid);
        if (p - yp).abs() <= tol {
            return Ok(mid);
        }
        if p > yp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of re-targeting a y-channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retarget {
    pub boundary: YBoundary,
    /// Set when the commanded peak was below the current position and was
    /// raised to it.
    pub clamped_peak: Option<f64>,
}

/// One closed-loop planner instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerChannel {
    pub state: State3,
    pub boundary: Boundary,
    pub last_jerk: f64,
    pub integration: Integration,
    /// Highest position since the current arc began. Re-targeting keeps the
    /// arc; replacing the boundary starts a new one.
    pub arc_peak: f64,
}

impl PlannerChannel {
    pub fn new_x(state: State3, bc: XBoundary) -> Self {
        Self {
            state,
            boundary: Boundary::X(bc),
            last_jerk: 0.0,
            integration: Integration::default(),
            arc_peak: state.pos,
        }
    }

    pub fn new_y(state: State3, bc: YBoundary) -> Self {
        Self {
            state,
            boundary: Boundary::Y(bc),
            last_jerk: 0.0,
            integration: Integration::default(),
            arc_peak: state.pos,
        }
    }

    pub fn with_integration(mut self, integration: Integration) -> Self {
        self.integration = integration;
        self
    }

    /// Replaces the boundary. Rejected when `tf` is within `epsilon_snap` of
    /// `t` or in the past; the previous boundary is kept in that case.
    pub fn set_boundary(&mut self, t: f64, boundary: Boundary, epsilon_snap: f64) -> Result<(), PlanError> {
        if boundary.kind() != self.boundary.kind() {
            return Err(PlanError::WrongBoundary {
                expected: self.boundary.kind(),
                found: boundary.kind(),
            });
        }
        check_remaining(boundary.tf(), t, epsilon_snap)?;
        self.boundary = boundary;
        self.arc_peak = self.state.pos;
        Ok(())
    }

    /// Re-anchors a y-channel at time `t` on a new `(yp, yf, tf)`.
    ///
    /// `t0` and `y0` are taken from the current time and position and the gain
    /// is recomputed with `rule`. A peak below the current position is raised
    /// to it. With [`PeakGain::Exact`] a peak the arc has already reached, or
    /// will reach with zero gain, is raised to that height and the gain is
    /// zero, so the trajectory never rises a second time.
    pub fn retarget_y(
        &mut self,
        t: f64,
        yp: f64,
        yf: f64,
        tf: f64,
        rule: PeakGain,
        epsilon_snap: f64,
    ) -> Result<Retarget, PlanError> {
        if !matches!(self.boundary, Boundary::Y(_)) {
            return Err(PlanError::WrongBoundary {
                expected: self.boundary.kind(),
                found: "y",
            });
        }
        check_remaining(tf, t, epsilon_snap)?;
        let y0 = self.state.pos;
        let requested = yp;
        let mut yp = yp.max(y0);
        let k = match rule {
            PeakGain::Approximate => kstar(t, tf, y0, yp, yf)?,
            PeakGain::Exact => {
                let seg0 = Segment::to_y(self.state, yf, 0.0, tf, t)?;
                let seg1 = Segment::to_y(self.state, yf, 1.0, tf, t)?;
                let reached = self.arc_peak.max(segment_peak(&seg0, &seg1, 0.0));
                if reached >= yp - FLAT_GAP {
                    yp = yp.max(reached);
                    0.0
                } else {
                    exact_peak_gain(self.state, t, tf, yp, yf)?
                }
            }
        };
        let clamped_peak = (yp > requested + CLAMP_REPORT_GAP).then_some(requested);
        let boundary = YBoundary::with_gain(t, tf, y0, yp, yf, k)?;
        self.boundary = Boundary::Y(boundary);
        Ok(Retarget {
            boundary,
            clamped_peak,
        })
    }

    /// Advances the channel from `t` to `t + dt`.
    ///
    /// Inside the terminal window the state is set to the boundary triple and
    /// held there. The jerk reported for that step is the largest-magnitude
    /// jerk of the plan over the remaining time, zero once the horizon has
    /// passed.
    pub fn step(&mut self, t: f64, dt: f64) -> Result<State3, PlanError> {
        let window = snap_window(dt);
        let remaining = self.boundary.tf() - t;
        if remaining <= window {
            self.last_jerk = if remaining > window * 1e-6 {
                self.segment(t)?.peak_jerk(remaining)
            } else {
                0.0
            };
            self.state = self.boundary.target();
            self.arc_peak = self.arc_peak.max(self.state.pos);
            return Ok(self.state);
        }
        let (next, jerk) = match (self.integration, self.boundary) {
            (Integration::ExactFlow, _) => {
                let seg = self.segment(t)?;
                (seg.state_at(dt), seg.jerk_at(0.0))
            }
            (Integration::ZeroOrderHold, Boundary::X(bc)) => {
                let u = ux_feedback(self.state, &bc, t, dt)?;
                (propagate(self.state, u, dt), u)
            }
            (Integration::ZeroOrderHold, Boundary::Y(bc)) => {
                let u = uy_feedback(self.state, bc.yf, bc.k, bc.tf, t, dt)?;
                (propagate(self.state, u, dt), u)
            }
        };
        if !next.is_finite() {
            return Err(PlanError::NonFinite("channel state"));
        }
        self.state = next;
        self.last_jerk = jerk;
        self.arc_peak = self.arc_peak.max(next.pos);
        Ok(next)
    }

    /// Minimum-cost plan from the current state at `t` to the boundary.
    pub fn segment(&self, t: f64) -> Result<Segment, PlanError> {
        match self.boundary {
            Boundary::X(bc) => Segment::to_x(self.state, &bc, t),
            Boundary::Y(bc) => Segment::to_y(self.state, bc.yf, bc.k, bc.tf, t),
        }
    }
}

// tolerance on the snap comparison so grid-aligned horizons snap on time
fn snap_window(epsilon_snap: f64) -> f64 {
    epsilon_snap * (1.0 + 1e-9)
}

/// Steps an x-channel; see [`PlannerChannel::step`].
pub fn plan_step_x(channel: &mut PlannerChannel, t: f64, dt: f64) -> Result<State3, PlanError> {
    match channel.boundary {
        Boundary::X(_) => channel.step(t, dt),
        Boundary::Y(_) => Err(PlanError::WrongBoundary {
            expected: "x",
            found: "y",
        }),
    }
}

/// Steps a y-channel; see [`PlannerChannel::step`].
pub fn plan_step_y(channel: &mut PlannerChannel, t: f64, dt: f64) -> Result<State3, PlanError> {
    match channel.boundary {
        Boundary::Y(_) => channel.step(t, dt),
        Boundary::X(_) => Err(PlanError::WrongBoundary {
            expected: "y",
            found: "x",
        }),
    }
}

//! Independent reference solutions used to check the closed-loop planners.
//!
//! These are deliberately separate from [`crate::trajectory`]: open-loop
//! polynomial solutions written from their printed coefficient formulas, a
//! dense quadratic program over piecewise-constant jerk, and brute-force
//! search for peak gains.

use nalgebra::{DMatrix, DVector};

use crate::error::OracleError;
use crate::trajectory::{
    propagate, Boundary, Integration, PlannerChannel, State3, XBoundary, YBoundary,
    GAIN_INTEGRAL_SCALE,
};

/// Polynomial in local time `tau = t - t0`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTraj {
    pub coefficients: Vec<f64>,
    pub t0: f64,
    pub tf: f64,
}

impl PolyTraj {
    pub fn new(coefficients: Vec<f64>, t0: f64, tf: f64) -> Self {
        Self {
            coefficients,
            t0,
            tf,
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Value at absolute time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let tau = t - self.t0;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn derivative(&self) -> PolyTraj {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        PolyTraj::new(coefficients, self.t0, self.tf)
    }

    /// Antiderivative taking the value `c0` at `t0`.
    pub fn antiderivative(&self, c0: f64) -> PolyTraj {
        let mut coefficients = Vec::with_capacity(self.coefficients.len() + 1);
        coefficients.push(c0);
        coefficients.extend(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(n, c)| c / (n as f64 + 1.0)),
        );
        PolyTraj::new(coefficients, self.t0, self.tf)
    }

    pub fn mul(&self, other: &PolyTraj) -> PolyTraj {
        if self.coefficients.is_empty() || other.coefficients.is_empty() {
            return PolyTraj::new(Vec::new(), self.t0, self.tf);
        }
        let mut c = vec![0.0; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyTraj::new(c, self.t0, self.tf)
    }

    /// Exact integral over `[t0, tf]`.
    pub fn integral(&self) -> f64 {
        self.antiderivative(0.0).eval(self.tf)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// `(pos, vel, acc)` read from this polynomial and its derivatives.
    pub fn state_at(&self, t: f64) -> State3 {
        let d1 = self.derivative();
        State3::new(self.eval(t), d1.eval(t), d1.derivative().eval(t))
    }
}

/// Open-loop minimum-jerk control of the x-planner, `a tau^2 - b tau + c`.
pub fn vx_open_loop(x0: State3, xf: State3, t0: f64, tf: f64) -> Result<PolyTraj, OracleError> {
    let h = horizon(t0, tf)?;
    let dx = xf.pos - x0.pos;
    let a = 360.0 * dx / h.powi(5) - 180.0 * (xf.vel + x0.vel) / h.powi(4)
        + 30.0 * (xf.acc - x0.acc) / h.powi(3);
    let b = 360.0 * dx / h.powi(4) - 24.0 * (7.0 * xf.vel + 8.0 * x0.vel) / h.powi(3)
        + 12.0 * (2.0 * xf.acc - 3.0 * x0.acc) / h.powi(2);
    let c = 60.0 * dx / h.powi(3) - 12.0 * (2.0 * xf.vel + 3.0 * x0.vel) / h.powi(2)
        + 3.0 * (xf.acc - 3.0 * x0.acc) / h;
    Ok(PolyTraj::new(vec![c, -b, a], t0, tf))
}

/// Open-loop control of the y-planner,
/// `(k/12) tau^3 - a tau^2 + b tau - c`.
pub fn vy_open_loop(y0: State3, yf: f64, k: f64, t0: f64, tf: f64) -> Result<PolyTraj, OracleError> {
    let h = horizon(t0, tf)?;
    let dy = y0.pos - yf;
    let a = 360.0 * dy / h.powi(5) + 180.0 * y0.vel / h.powi(4) + 30.0 * y0.acc / h.powi(3)
        + k * h / 8.0;
    let b = 360.0 * dy / h.powi(4) + 192.0 * y0.vel / h.powi(3) + 36.0 * y0.acc / h.powi(2)
        + k * h * h / 20.0;
    let c = 60.0 * dy / h.powi(3) + 36.0 * y0.vel / h.powi(2) + 9.0 * y0.acc / h
        + k * h.powi(3) / 240.0;
    Ok(PolyTraj::new(vec![-c, b, -a, k / 12.0], t0, tf))
}

fn horizon(t0: f64, tf: f64) -> Result<f64, OracleError> {
    if !(tf > t0) || !tf.is_finite() || !t0.is_finite() {
        return Err(OracleError::Invalid(format!("horizon needs tf > t0 (t0={t0}, tf={tf})")));
    }
    Ok(tf - t0)
}

/// Position polynomial reached from `init` under the jerk polynomial.
pub fn integrate_thrice(jerk: &PolyTraj, init: State3) -> PolyTraj {
    jerk.antiderivative(init.acc)
        .antiderivative(init.vel)
        .antiderivative(init.pos)
}

/// Exact cost `int u^2 + k y` of a polynomial solution.
pub fn poly_cost(jerk: &PolyTraj, position: &PolyTraj, k: f64) -> f64 {
    jerk.mul(jerk).integral() + k * position.integral()
}

/// Trapezoidal cost of a uniformly sampled trajectory. `positions` may be
/// empty when `k == 0`.
pub fn eval_cost(jerk: &[f64], k: f64, positions: &[f64], dt: f64) -> f64 {
    let trapz = |v: &mut dyn Iterator<Item = f64>, n: usize| {
        v.enumerate()
            .map(|(i, x)| if i == 0 || i + 1 == n { 0.5 * x } else { x })
            .sum::<f64>()
            * dt
    };
    let effort = trapz(&mut jerk.iter().map(|u| u * u), jerk.len());
    if k == 0.0 {
        return effort;
    }
    effort + k * trapz(&mut positions.iter().copied(), positions.len())
}

/// Discretised optimal control problem over piecewise-constant jerk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteOCP {
    pub t0: f64,
    pub tf: f64,
    pub intervals: usize,
    pub start: State3,
    pub target: State3,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub jerk: Vec<f64>,
    /// States at the `intervals + 1` grid points.
    pub states: Vec<State3>,
    pub cost: f64,
}

impl QpSolution {
    pub fn peak(&self) -> f64 {
        self.states.iter().map(|s| s.pos).fold(f64::NEG_INFINITY, f64::max)
    }
}

// free motion of a triple integrator over `s`
fn coast(s: State3, dur: f64) -> State3 {
    propagate(s, 0.0, dur)
}

// integral of position over free motion of `dur`
fn coast_integral(s: State3, dur: f64) -> f64 {
    s.pos * dur + s.vel * dur * dur / 2.0 + s.acc * dur.powi(3) / 6.0
}

/// Minimises `h sum u_i^2 + k int y` subject to exact triple-integrator
/// dynamics and the terminal state, by solving the KKT system.
pub fn qp_minjerk(ocp: &DiscreteOCP) -> Result<QpSolution, OracleError> {
    let n = ocp.intervals;
    if n < 10 {
        return Err(OracleError::Invalid(format!("need at least 10 intervals, got {n}")));
    }
    let total = horizon(ocp.t0, ocp.tf)?;
    let h = total / n as f64;

    // terminal state and position integral are affine in u:
    // x_N = free(x0) + B u,  int y = c0 + w . u
    let unit = propagate(State3::ZERO, 1.0, h);
    let mut b = DMatrix::<f64>::zeros(3, n);
    let mut w = DVector::<f64>::zeros(n);
    for i in 0..n {
        let rest = (n - 1 - i) as f64 * h;
        let end = coast(unit, rest);
        b[(0, i)] = end.pos;
        b[(1, i)] = end.vel;
        b[(2, i)] = end.acc;
        w[i] = h.powi(4) / 24.0 + coast_integral(unit, rest);
    }
    let free_end = coast(ocp.start, total);
    let c0 = coast_integral(ocp.start, total);

    let m = n + 3;
    let mut kkt = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        kkt[(i, i)] = 2.0 * h;
        rhs[i] = -ocp.k * w[i];
        for r in 0..3 {
            kkt[(n + r, i)] = b[(r, i)];
            kkt[(i, n + r)] = b[(r, i)];
        }
    }
    rhs[n] = ocp.target.pos - free_end.pos;
    rhs[n + 1] = ocp.target.vel - free_end.vel;
    rhs[n + 2] = ocp.target.acc - free_end.acc;

    let sol = kkt.lu().solve(&rhs).ok_or(OracleError::Singular)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::Singular);
    }
    let jerk: Vec<f64> = sol.iter().take(n).copied().collect();
    let mut states = Vec::with_capacity(n + 1);
    let mut s = ocp.start;
    states.push(s);
    for &u in &jerk {
        s = propagate(s, u, h);
        states.push(s);
    }
    let u = DVector::from_column_slice(&jerk);
    let cost = h * u.dot(&u) + ocp.k * (c0 + w.dot(&u));
    Ok(QpSolution {
        jerk,
        states,
        cost,
    })
}

/// Closed-loop run of one channel from `t0` to its boundary's `tf` on the grid
/// `t0 + i dt`. Returns the states at every grid point and the jerk applied
/// over each step.
pub fn closed_loop_run(
    start: State3,
    boundary: Boundary,
    t0: f64,
    dt: f64,
    integration: Integration,
) -> Result<(Vec<State3>, Vec<f64>), OracleError> {
    let steps = ((boundary.tf() - t0) / dt).round() as usize;
    if steps == 0 {
        return Err(OracleError::Invalid("horizon shorter than one step".into()));
    }
    let mut ch = match boundary {
        Boundary::X(b) => PlannerChannel::new_x(start, b),
        Boundary::Y(b) => PlannerChannel::new_y(start, b),
    }
    .with_integration(integration);
    let mut states = Vec::with_capacity(steps + 1);
    let mut jerks = Vec::with_capacity(steps);
    states.push(start);
    for i in 0..steps {
        states.push(ch.step(t0 + i as f64 * dt, dt)?);
        jerks.push(ch.last_jerk);
    }
    Ok((states, jerks))
}

fn y_run(bc: &YBoundary, k: f64, dt: f64, integration: Integration) -> Result<Vec<State3>, OracleError> {
    let bc = YBoundary { k, ..*bc };
    let (states, _) = closed_loop_run(State3::at_rest(bc.y0), Boundary::Y(bc), bc.t0, dt, integration)?;
    Ok(states)
}

/// Peak of the simulated y-trajectory from rest at `y0`.
pub fn simulated_peak(bc: &YBoundary, dt: f64, integration: Integration) -> Result<f64, OracleError> {
    Ok(y_run(bc, bc.k, dt, integration)?
        .iter()
        .map(|s| s.pos)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub const PEAK_TOLERANCE: f64 = 1e-6;
const MAX_EXPANSIONS: usize = 60;

/// Gain whose simulated trajectory peaks at `yp` within [`PEAK_TOLERANCE`].
pub fn bisect_k_for_peak(
    t0: f64,
    tf: f64,
    y0: f64,
    yp: f64,
    yf: f64,
    dt: f64,
    integration: Integration,
) -> Result<f64, OracleError> {
    if !(yp > y0.max(yf)) {
        return Err(OracleError::Invalid(format!(
            "peak {yp} must exceed both endpoints ({y0}, {yf})"
        )));
    }
    let base = YBoundary::with_gain(t0, tf, y0, yp, yf, 0.0)?;
    let peak = |k: f64| simulated_peak(&YBoundary { k, ..base }, dt, integration);

    let mut lo = -1.0;
    let mut expansions = 0;
    while peak(lo)? < yp {
        lo *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(OracleError::Bracket { yp });
        }
    }
    let mut hi = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        let p = peak(mid)?;
        if (p - yp).abs() <= PEAK_TOLERANCE || mid == lo || mid == hi {
            return Ok(mid);
        }
        if p > yp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dt: f64) -> f64 {
    let n = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v })
        .sum::<f64>()
        * dt
}

/// `(measured, predicted)` difference of the position integral between the
/// gain in `bc` and zero gain. The prediction is `-k T^7 / 201600`.
pub fn integral_identity_gap(bc: &YBoundary, dt: f64, integration: Integration) -> Result<(f64, f64), OracleError> {
    let with_k = y_run(bc, bc.k, dt, integration)?;
    let without = y_run(bc, 0.0, dt, integration)?;
    let measured = trapezoid(with_k.iter().zip(&without).map(|(a, b)| a.pos - b.pos), dt);
    let predicted = -bc.k * (bc.tf - bc.t0).powi(7) / GAIN_INTEGRAL_SCALE;
    Ok((measured, predicted))
}

/// Open-loop x solution for a boundary, as `(jerk, position)` polynomials.
pub fn x_reference(start: State3, bc: &XBoundary, t0: f64) -> Result<(PolyTraj, PolyTraj), OracleError> {
    let jerk = vx_open_loop(start, bc.target(), t0, bc.tf)?;
    let pos = integrate_thrice(&jerk, start);
    Ok((jerk, pos))
}

/// Open-loop y solution for a boundary, as `(jerk, position)` polynomials.
pub fn y_reference(start: State3, bc: &YBoundary) -> Result<(PolyTraj, PolyTraj), OracleError> {
    let jerk = vy_open_loop(start, bc.yf, bc.k, bc.t0, bc.tf)?;
    let pos = integrate_thrice(&jerk, start);
    Ok((jerk, pos))
}

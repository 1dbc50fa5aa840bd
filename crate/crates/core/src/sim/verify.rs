//! Oracle cross-checks behind the `verify` subcommand.

use crate::error::SimError;
use crate::kinematics::{forward, inverse, HipRelative, RobotGeometry};
use crate::oracle::{self, DiscreteOCP};
use crate::sim::scenarios::{planner_scenario, run_planner_scenario};
use crate::trajectory::{kstar, Integration, PeakGain, State3, YBoundary};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn verify(dt: f64, integration: Integration, geometry: &RobotGeometry) -> Result<Vec<Check>, SimError> {
    let mut out = Vec::new();

    let fig10 = planner_scenario("fig10").expect("built in");
    let r = run_planner_scenario(&fig10, dt, integration, PeakGain::Approximate, std::io::sink())?;
    let e = r.reference_error.unwrap_or(f64::INFINITY);
    out.push(check(
        "closed loop follows open-loop x solution",
        e <= 1e-4 && r.terminal_error <= 1e-3,
        format!("max deviation {e:.3e} m, terminal error {:.3e}", r.terminal_error),
    ));

    let fig12 = planner_scenario("fig12").expect("built in");
    let r = run_planner_scenario(&fig12, dt, integration, PeakGain::Approximate, std::io::sink())?;
    let e = r.reference_error.unwrap_or(f64::INFINITY);
    out.push(check(
        "closed loop follows open-loop y solution",
        e <= 1e-4 && r.terminal_error <= 1e-3,
        format!("max deviation {e:.3e} m, peak {:.5}", r.peak),
    ));

    for (name, t0, tf, y0, yp, yf) in [
        ("bisected gain near closed form (peak 2 over 5 s)", 0.0, 5.0, 0.0, 2.0, 1.0),
        ("bisected gain near closed form (10 cm over 2 s)", 0.0, 2.0, 0.0, 0.1, 0.0),
    ] {
        let k_bis = oracle::bisect_k_for_peak(t0, tf, y0, yp, yf, dt, integration)?;
        let k_star = kstar(t0, tf, y0, yp, yf)?;
        let d = rel(k_star, k_bis);
        out.push(check(
            name,
            d <= 0.10,
            format!("bisection {k_bis:.5}, closed form {k_star:.5}, difference {:.2}%", 100.0 * d),
        ));
    }

    let mut worst: f64 = 0.0;
    for (t0, tf, y0, yp, yf) in [
        (0.0, 5.0, 0.0, 2.0, 1.0),
        (1.0, 3.0, 0.5, 0.9, -0.2),
        (0.0, 0.5, -1.0, 0.0, -0.5),
        (2.0, 12.0, 0.2, 1.8, 1.7),
    ] {
        let bc = YBoundary::new(t0, tf, y0, yp, yf)?;
        let (measured, predicted) = oracle::integral_identity_gap(&bc, dt, integration)?;
        worst = worst.max(rel(measured, predicted));
    }
    out.push(check(
        "integral gap matches gain identity",
        worst <= 1e-6,
        format!("worst relative error {worst:.3e}"),
    ));

    let mut worst: f64 = 0.0;
    for (start, target, tf, k) in [
        (State3::ZERO, State3::new(2.0, 1.0, 1.0), 5.0, 0.0),
        (State3::ZERO, State3::at_rest(1.0), 5.0, kstar(0.0, 5.0, 0.0, 2.0, 1.0)?),
    ] {
        let jerk = if k == 0.0 {
            oracle::vx_open_loop(start, target, 0.0, tf)?
        } else {
            oracle::vy_open_loop(start, target.pos, k, 0.0, tf)?
        };
        let pos = oracle::integrate_thrice(&jerk, start);
        let closed = oracle::poly_cost(&jerk, &pos, k);
        let qp = oracle::qp_minjerk(&DiscreteOCP {
            t0: 0.0,
            tf,
            intervals: 200,
            start,
            target,
            k,
        })?;
        worst = worst.max(rel(qp.cost, closed));
    }
    out.push(check(
        "discretised QP cost matches closed form",
        worst <= 0.01,
        format!("worst relative difference {:.3e}", worst),
    ));

    let l = geometry.leg_length();
    let (mut worst, mut knee_ok) = (0.0_f64, true);
    let n = 50;
    for i in 0..n {
        for j in 0..n {
            let x = -0.95 * l + 1.9 * l * i as f64 / (n - 1) as f64;
            let y = -0.05 * l - 0.9 * l * j as f64 / (n - 1) as f64;
            let r = x.hypot(y);
            if r > l * 0.999 || r < geometry.min_reach() + 1e-3 {
                continue;
            }
            let rel_pos = HipRelative { right: (x, y), left: (x, y) };
            let a = inverse(&rel_pos, geometry).map_err(|e| SimError::Feasibility(e.to_string()))?;
            let back = forward(&a, geometry);
            worst = worst.max((back.right.0 - x).abs()).max((back.right.1 - y).abs());
            knee_ok &= a.knee_r <= 0.0;
        }
    }
    out.push(check(
        "inverse kinematics round trip",
        worst <= 1e-9 && knee_ok,
        format!("worst position error {worst:.3e} m, knee non-positive: {knee_ok}"),
    ));

    Ok(out)
}

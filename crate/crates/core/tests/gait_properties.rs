use gaitplan::gait::{check_constraints, Channel, GaitEventKind, UpdateOutcome};
use gaitplan::kinematics::{forward, hip_relative, inverse, HipRelative};
use gaitplan::{GaitConfig, GaitEngine, GaitSample, Leg, RobotGeometry, WalkParams};
use proptest::prelude::*;

const DT: f64 = 1e-3;

fn params() -> impl Strategy<Value = WalkParams> {
    (0.0..0.6f64, 0.02..0.15f64, 100usize..=400).prop_map(|(l, h, n)| WalkParams::new(l, h, n as f64 * 0.01))
}

struct Walk {
    samples: Vec<GaitSample>,
    engine: GaitEngine,
}

/// Walks `strides` full strides, applying `update` at `update_at` if given,
/// then requests a stop.
fn walk(start: WalkParams, strides: usize, update: Option<(f64, WalkParams)>) -> Walk {
    let mut engine = GaitEngine::new(GaitConfig::default(), start).unwrap();
    let mut samples = vec![engine.initial_sample()];
    let mut pending = update;
    let mut stop_requested = false;
    let mut i = 0usize;
    while !engine.finished() {
        let t = i as f64 * DT;
        if let Some((tu, p)) = pending.filter(|(tu, _)| *tu <= t + 1e-9) {
            let _ = engine.update_params(tu.max(t), p);
            pending = None;
        }
        if !stop_requested && engine.stride().index + 1 >= strides {
            let p = engine.params();
            engine.request_stop(t, WalkParams { step_length: 0.0, ..p }).unwrap();
            stop_requested = true;
        }
        samples.push(engine.tick(t).unwrap());
        i += 1;
        assert!(i < 200_000, "walk does not terminate");
    }
    Walk { samples, engine }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constraints_hold_through_a_walk(p in params(), strides in 2usize..5) {
        let w = walk(p, strides, None);
        let report = check_constraints(&w.samples, w.engine.strides(), &GaitConfig::default().geometry, DT);
        let violations: Vec<String> = report.violations().collect();
        prop_assert!(report.passed(), "{violations:?}");
        prop_assert!(w.samples.iter().all(|s| s.angles.knee_r <= 0.0 && s.angles.knee_l <= 0.0));
    }

    #[test]
    fn strides_close_with_hip_midway(p in params(), strides in 2usize..5) {
        let w = walk(p, strides, None);
        let recs = w.engine.strides();
        for (n, rec) in recs.iter().enumerate() {
            let end = rec.end_states;
            let (xr, xl) = (end[Channel::XRa.index()].pos, end[Channel::XLa.index()].pos);
            let xh = end[Channel::Xh.index()].pos;
            prop_assert!((xh - 0.5 * (xr + xl)).abs() <= 1e-3, "stride {n}: hip {xh}, feet {xr} {xl}");
            for ch in Channel::ALL {
                prop_assert!(end[ch.index()].vel.abs() <= 1e-3 && end[ch.index()].acc.abs() <= 1e-3);
            }
            prop_assert!(end[Channel::YRa.index()].pos.abs() <= 1e-3);
            prop_assert!(end[Channel::YLa.index()].pos.abs() <= 1e-3);
            if let Some(next) = recs.get(n + 1) {
                prop_assert_eq!(next.stride.swing, rec.stride.swing.other());
                prop_assert_eq!(next.start_states, rec.end_states);
                let swing_x = Channel::ankle_x(next.stride.swing).index();
                let stance_x = Channel::ankle_x(next.stride.swing.other()).index();
                prop_assert_eq!(next.stride.anchor_swing0, next.start_states[swing_x].pos);
                prop_assert_eq!(next.stride.anchor_stance0, next.start_states[stance_x].pos);
            }
        }
        // an interior stride carries the swing foot one full step
        if recs.len() >= 3 {
            let rec = &recs[1];
            let x = Channel::ankle_x(rec.stride.swing).index();
            let advance = rec.end_states[x].pos - rec.start_states[x].pos;
            prop_assert!((advance - rec.params.step_length).abs() <= 5e-3, "{advance}");
        }
        let last = w.samples.last().unwrap();
        prop_assert!((last.pose.ankle_r.0 - last.pose.ankle_l.0).abs() <= 1e-3);
    }

    #[test]
    fn stance_foot_stays_planted(p in params()) {
        let w = walk(p, 3, None);
        for rec in w.engine.strides() {
            let stance = rec.stride.swing.other();
            let x = Channel::ankle_x(stance).index();
            let y = Channel::ankle_y(stance).index();
            let moving = w
                .samples
                .iter()
                .filter(|s| s.stride == rec.stride.index)
                .any(|s| (s.states[x].pos - rec.start_states[x].pos).abs() > 1e-9 || s.states[y].pos.abs() > 1e-9);
            prop_assert!(!moving, "stance foot moved in stride {}", rec.stride.index);
        }
    }

    #[test]
    fn joint_angles_reproduce_pose(p in params()) {
        let w = walk(p, 3, None);
        let g = GaitConfig::default().geometry;
        for s in w.samples.iter().filter(|s| s.overreach == 0.0) {
            let rel = hip_relative(&s.pose);
            let back = forward(&s.angles, &g);
            let err = [
                back.right.0 - rel.right.0,
                back.right.1 - rel.right.1,
                back.left.0 - rel.left.0,
                back.left.1 - rel.left.1,
            ]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()));
            prop_assert!(err <= 1e-9, "t={}: {err}", s.t);
        }
    }

    #[test]
    fn mid_stride_updates_keep_constraints(p in params(), q in params(), frac in 0.0..1.0f64) {
        let first_stride = p.stride_time;
        // land the change somewhere in the second stride
        let tu = ((first_stride + frac * p.stride_time) / DT).round() * DT;
        let w = walk(p, 4, Some((tu, q)));
        let report = check_constraints(&w.samples, w.engine.strides(), &GaitConfig::default().geometry, DT);
        let violations: Vec<String> = report.violations().collect();
        prop_assert!(report.passed(), "{violations:?}");
        let logged = w.engine.events().iter().any(|e| {
            matches!(e.kind, GaitEventKind::Applied(_) | GaitEventKind::Deferred(_) | GaitEventKind::Rejected(_))
        });
        prop_assert!(logged);
    }

    #[test]
    fn inverse_kinematics_round_trip(r in 0.05..0.79f64, phi in -1.4..1.4f64, r2 in 0.05..0.79f64, phi2 in -1.4..1.4f64) {
        let g = RobotGeometry::default();
        let rel = HipRelative {
            right: (r * phi.sin(), -r * phi.cos()),
            left: (r2 * phi2.sin(), -r2 * phi2.cos()),
        };
        let a = inverse(&rel, &g).unwrap();
        prop_assert!(a.knee_r <= 0.0 && a.knee_l <= 0.0);
        let back = forward(&a, &g);
        prop_assert!((back.right.0 - rel.right.0).abs() <= 1e-9 && (back.right.1 - rel.right.1).abs() <= 1e-9);
        prop_assert!((back.left.0 - rel.left.0).abs() <= 1e-9 && (back.left.1 - rel.left.1).abs() <= 1e-9);
    }

    #[test]
    fn mirrored_target_reached_by_mirrored_leg(lt in 0.2..0.6f64, ls in 0.2..0.6f64, frac in 0.1..0.99f64, phi in -1.2..1.2f64) {
        let g = RobotGeometry::new(lt, ls).unwrap();
        let r = g.min_reach() + frac * (g.leg_length() - g.min_reach());
        let (x, y) = (r * phi.sin(), -r * phi.cos());
        let a = inverse(&HipRelative { right: (x, y), left: (-x, y) }, &g).unwrap();
        // the knee bend depends only on reach
        let back = forward(&a, &g);
        prop_assert!((back.left.0 + back.right.0).abs() <= 1e-9);
        prop_assert!((back.left.1 - back.right.1).abs() <= 1e-9);
        prop_assert!((a.knee_r - a.knee_l).abs() <= 1e-9);
    }
}

#[test]
fn update_identical_to_current_is_invisible() {
    let p = WalkParams::new(0.4, 0.08, 1.5);
    let base = walk(p, 3, None);
    let same = walk(p, 3, Some((2.0, p)));
    assert_eq!(base.samples.len(), same.samples.len());
    for (a, b) in base.samples.iter().zip(&same.samples) {
        assert_eq!(a.states, b.states);
    }
}

#[test]
fn repeated_walks_are_deterministic() {
    let p = WalkParams::new(0.5, 0.1, 2.0);
    let a = walk(p, 3, Some((2.7, WalkParams::new(0.3, 0.05, 1.8))));
    let b = walk(p, 3, Some((2.7, WalkParams::new(0.3, 0.05, 1.8))));
    assert_eq!(a.samples.len(), b.samples.len());
    assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| x.states == y.states && x.angles == y.angles));
}

#[test]
fn first_stride_swings_the_right_leg() {
    let w = walk(WalkParams::new(0.6, 0.1, 2.0), 2, None);
    let first = &w.engine.strides()[0];
    assert_eq!(first.stride.swing, Leg::Right);
    let x = Channel::XRa.index();
    assert!((first.end_states[x].pos - first.start_states[x].pos - 0.3).abs() <= 1e-3);
}

#[test]
fn infeasible_update_is_rejected_and_walk_continues() {
    let mut engine = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.4, 0.08, 1.5)).unwrap();
    for i in 0..500 {
        engine.tick(i as f64 * DT).unwrap();
    }
    assert!(engine.update_params(0.5, WalkParams::new(4.0, 0.08, 1.5)).is_err());
    assert!(matches!(engine.events().last().unwrap().kind, GaitEventKind::Rejected(_)));
    assert_eq!(engine.params(), WalkParams::new(0.4, 0.08, 1.5));
    let out = engine.update_params(0.5, WalkParams::new(0.4, 0.1, 1.5)).unwrap();
    assert_eq!(out, UpdateOutcome::Applied);
    for i in 500..1500 {
        engine.tick(i as f64 * DT).unwrap();
    }
}

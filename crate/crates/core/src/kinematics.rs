//! Sagittal-plane kinematics of a two-link-per-leg exoskeleton.
//!
//! Angles are measured from the downward vertical: with all joints at zero
//! the legs hang straight below the hip. Knee flexion is non-positive.

use crate::error::KinematicsError;

const ACOS_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    pub l_thigh: f64,
    pub l_shin: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            l_thigh: 0.4,
            l_shin: 0.4,
        }
    }
}

impl RobotGeometry {
    pub fn new(l_thigh: f64, l_shin: f64) -> Result<Self, KinematicsError> {
        if !(l_thigh > 0.0 && l_shin > 0.0) || !l_thigh.is_finite() || !l_shin.is_finite() {
            return Err(KinematicsError::InvalidGeometry {
                thigh: l_thigh,
                shin: l_shin,
            });
        }
        Ok(Self { l_thigh, l_shin })
    }

    /// Full leg length.
    pub fn leg_length(&self) -> f64 {
        self.l_thigh + self.l_shin
    }

    pub fn min_reach(&self) -> f64 {
        (self.l_thigh - self.l_shin).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub hip_r: f64,
    pub knee_r: f64,
    pub hip_l: f64,
    pub knee_l: f64,
}

impl JointAngles {
    pub fn to_degrees(self) -> Self {
        Self {
            hip_r: self.hip_r.to_degrees(),
            knee_r: self.knee_r.to_degrees(),
            hip_l: self.hip_l.to_degrees(),
            knee_l: self.knee_l.to_degrees(),
        }
    }
}

/// World positions in the sagittal plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SagittalPose {
    pub hip: (f64, f64),
    pub ankle_r: (f64, f64),
    pub ankle_l: (f64, f64),
}

/// Ankle positions relative to the hip, `(X_R, Y_R, X_L, Y_L)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HipRelative {
    pub right: (f64, f64),
    pub left: (f64, f64),
}

pub fn hip_relative(pose: &SagittalPose) -> HipRelative {
    let (xh, yh) = pose.hip;
    HipRelative {
        right: (pose.ankle_r.0 - xh, pose.ankle_r.1 - yh),
        left: (pose.ankle_l.0 - xh, pose.ankle_l.1 - yh),
    }
}

/// Ankle position of one leg relative to the hip.
pub fn leg_forward(hip: f64, knee: f64, g: &RobotGeometry) -> (f64, f64) {
    (
        g.l_thigh * hip.sin() + g.l_shin * (hip + knee).sin(),
        -g.l_thigh * hip.cos() - g.l_shin * (hip + knee).cos(),
    )
}

pub fn forward(angles: &JointAngles, g: &RobotGeometry) -> HipRelative {
    HipRelative {
        right: leg_forward(angles.hip_r, angles.knee_r, g),
        left: leg_forward(angles.hip_l, angles.knee_l, g),
    }
}

/// Clamps an arccos argument into `[-1, 1]`, rejecting values beyond a
/// `1e-9` rounding band.
pub fn clamp_acos_arg(v: f64) -> Result<f64, KinematicsError> {
    if !v.is_finite() || v.abs() > 1.0 + ACOS_GUARD {
        return Err(KinematicsError::OutOfDomain(v));
    }
    Ok(v.clamp(-1.0, 1.0))
}

/// Joint angles `(hip, knee)` placing the ankle at `(x, y)` relative to the
/// hip, on the non-positive knee branch.
pub fn leg_inverse(x: f64, y: f64, g: &RobotGeometry) -> Result<(f64, f64), KinematicsError> {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(KinematicsError::Degenerate);
    }
    let r = r2.sqrt();
    let (lt, ls) = (g.l_thigh, g.l_shin);
    let at_hip = clamp_acos_arg((r2 + lt * lt - ls * ls) / (2.0 * lt * r)).map_err(|_| unreachable(r, g))?;
    let at_ankle = clamp_acos_arg((r2 + ls * ls - lt * lt) / (2.0 * ls * r)).map_err(|_| unreachable(r, g))?;
    let alpha = at_hip.acos();
    let beta = at_ankle.acos();
    let direction = x.atan2(-y);
    Ok((direction + alpha, -alpha - beta))
}

fn unreachable(radius: f64, g: &RobotGeometry) -> KinematicsError {
    KinematicsError::Unreachable {
        radius,
        min: g.min_reach(),
        max: g.leg_length(),
    }
}

pub fn inverse(rel: &HipRelative, g: &RobotGeometry) -> Result<JointAngles, KinematicsError> {
    let (hip_r, knee_r) = leg_inverse(rel.right.0, rel.right.1, g)?;
    let (hip_l, knee_l) = leg_inverse(rel.left.0, rel.left.1, g)?;
    Ok(JointAngles {
        hip_r,
        knee_r,
        hip_l,
        knee_l,
    })
}

/// Like [`leg_inverse`], but a target up to `margin` beyond full extension
/// is reached with a straight leg pointing at it. Returns the overreach
/// distance (zero when the target was reachable).
pub fn leg_inverse_saturating(
    x: f64,
    y: f64,
    g: &RobotGeometry,
    margin: f64,
) -> Result<(f64, f64, f64), KinematicsError> {
    let r = x.hypot(y);
    let over = r - g.leg_length();
    if over > 0.0 && clamp_acos_arg(r / g.leg_length()).is_err() {
        if over > margin {
            return Err(unreachable(r, g));
        }
        return Ok((x.atan2(-y), 0.0, over));
    }
    let (hip, knee) = leg_inverse(x, y, g)?;
    Ok((hip, knee, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn g() -> RobotGeometry {
        RobotGeometry::default()
    }

    #[test]
    fn hip_relative_examples() {
        let pose = SagittalPose {
            hip: (0.0, 0.0),
            ankle_r: (0.3, -0.7),
            ankle_l: (-0.1, -0.7),
        };
        let rel = hip_relative(&pose);
        assert_eq!(rel.right, (0.3, -0.7));
        assert_eq!(rel.left, (-0.1, -0.7));

        let pose = SagittalPose {
            hip: (1.0, 1.0),
            ankle_r: (1.0, 0.2),
            ankle_l: (1.0, 0.0),
        };
        let rel = hip_relative(&pose);
        assert_eq!(rel.right.0, 0.0);
        assert!((rel.right.1 + 0.8).abs() < 1e-15);

        let l = g().leg_length();
        let standing = SagittalPose {
            hip: (0.0, l),
            ankle_r: (0.0, 0.0),
            ankle_l: (0.0, 0.0),
        };
        let rel = hip_relative(&standing);
        assert_eq!((rel.right, rel.left), ((0.0, -l), (0.0, -l)));
    }

    #[test]
    fn forward_examples() {
        let rel = forward(&JointAngles::default(), &g());
        assert_eq!(rel.right, (0.0, -0.8));
        assert_eq!(rel.left, (0.0, -0.8));

        let (x, y) = leg_forward(FRAC_PI_2, 0.0, &g());
        assert!((x - 0.8).abs() < 1e-15 && y.abs() < 1e-15);

        let (x, y) = leg_forward(FRAC_PI_2, -FRAC_PI_2, &g());
        assert!((x - 0.4).abs() < 1e-15 && (y + 0.4).abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let (hip, knee) = leg_inverse(0.0, -0.8, &g()).unwrap();
        assert_eq!((hip, knee), (0.0, 0.0));
        let (hip, knee) = leg_inverse(0.8, 0.0, &g()).unwrap();
        assert!((hip - FRAC_PI_2).abs() < 1e-12 && knee.abs() < 1e-12);
        let (hip, knee) = leg_inverse(0.4, -0.4, &g()).unwrap();
        assert!((hip - FRAC_PI_2).abs() < 1e-12);
        assert!((knee + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn inverse_errors() {
        assert_eq!(leg_inverse(0.0, 0.0, &g()), Err(KinematicsError::Degenerate));
        assert!(matches!(
            leg_inverse(0.0, -0.81, &g()),
            Err(KinematicsError::Unreachable { .. })
        ));
        let uneven = RobotGeometry::new(0.5, 0.3).unwrap();
        assert!(matches!(
            leg_inverse(0.0, -0.1, &uneven),
            Err(KinematicsError::Unreachable { .. })
        ));
    }

    #[test]
    fn clamp_acos_examples() {
        assert_eq!(clamp_acos_arg(1.0 + 1e-12).unwrap(), 1.0);
        assert_eq!(clamp_acos_arg(-0.5).unwrap(), -0.5);
        assert!(clamp_acos_arg(1.1).is_err());
        assert!(clamp_acos_arg(f64::NAN).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(RobotGeometry::new(0.0, 0.4).is_err());
        assert!(RobotGeometry::new(0.4, -1.0).is_err());
        assert!((RobotGeometry::new(0.45, 0.4).unwrap().leg_length() - 0.85).abs() < 1e-15);
    }

    #[test]
    fn saturating_inverse_straightens_slight_overreach() {
        let (hip, knee, over) = leg_inverse_saturating(0.0, -0.8005, &g(), 0.001).unwrap();
        assert_eq!((hip, knee), (0.0, 0.0));
        assert!((over - 0.0005).abs() < 1e-12);
        assert!(leg_inverse_saturating(0.0, -0.81, &g(), 0.001).is_err());
        let (_, _, over) = leg_inverse_saturating(0.1, -0.7, &g(), 0.001).unwrap();
        assert_eq!(over, 0.0);
    }

    #[test]
    fn mirrored_target_keeps_knee_and_mirrors_forward() {
        let (x, y) = (0.23, -0.61);
        let (h1, k1) = leg_inverse(x, y, &g()).unwrap();
        let (_, k2) = leg_inverse(-x, y, &g()).unwrap();
        assert!((k1 - k2).abs() < 1e-12);
        let (mx, my) = leg_forward(-h1, -k1, &g());
        assert!((mx + x).abs() < 1e-12 && (my - y).abs() < 1e-12);
    }
}

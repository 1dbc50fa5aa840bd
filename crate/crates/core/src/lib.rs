//! Real-time minimum-jerk gait planning.
//!
//! Each Cartesian coordinate of the hip and both ankles is produced by a
//! feedback-controlled triple integrator. The x-channels steer to an endpoint
//! state; the y-channels additionally carry a linear cost weight `k` that
//! shapes a peak (hip height, foot clearance). Because the planners are
//! closed-loop, walking parameters can be changed mid-stride and every
//! trajectory stays continuous up to its second derivative.
//!
//! Modules:
//! - [`trajectory`]: feedback jerk laws, peak gain, per-channel stepping.
//! - [`kinematics`]: planar forward/inverse kinematics of the legs.
//! - [`gait`]: stride boundary conditions and the six-channel engine.
//! - [`oracle`]: open-loop solutions, a discretised QP and other
//!   independent cross-checks.
//! - [`sim`]: schedules, built-in scenarios, CSV output and reports.

pub mod error;
pub mod gait;
pub mod kinematics;
pub mod oracle;
pub mod sim;
pub mod trajectory;

pub use error::{GaitError, KinematicsError, OracleError, PlanError, SimError};
pub use gait::{GaitConfig, GaitEngine, GaitSample, Leg, WalkParams};
pub use kinematics::{JointAngles, RobotGeometry, SagittalPose};
pub use trajectory::{
    kstar, propagate, Integration, PeakGain, PlannerChannel, State3, XBoundary, YBoundary,
};

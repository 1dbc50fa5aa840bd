//! C interface to `gaitplan`.
//!
//! Every fallible function returns a `GpStatus`; on failure a message is
//! kept per thread and can be read with `gp_last_error_message`. Planner
//! channels and gait engines are opaque handles created by `*_new` and
//! released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gaitplan::gait::Channel;
use gaitplan::kinematics::{self, HipRelative};
use gaitplan::trajectory::{self, Boundary};
use gaitplan::{
    GaitConfig, GaitEngine, GaitError, Integration, KinematicsError, Leg, PeakGain, PlanError, PlannerChannel,
    RobotGeometry, State3, WalkParams, XBoundary, YBoundary,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    HorizonExpired = 3,
    Unreachable = 4,
    Infeasible = 5,
    Rejected = 6,
    Finished = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpIntegration {
    ExactFlow = 0,
    ZeroOrderHold = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpPeakGain {
    Approximate = 0,
    Exact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpLeg {
    Right = 0,
    Left = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpState3 {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpXBoundary {
    pub tf: f64,
    pub xf: f64,
    pub vxf: f64,
    pub axf: f64,
}

/// `k` is used as given; compute it with `gp_kstar` or
/// `gp_exact_peak_gain`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpYBoundary {
    pub t0: f64,
    pub tf: f64,
    pub y0: f64,
    pub yp: f64,
    pub yf: f64,
    pub k: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpGeometry {
    pub l_thigh: f64,
    pub l_shin: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpJointAngles {
    pub hip_r: f64,
    pub knee_r: f64,
    pub hip_l: f64,
    pub knee_l: f64,
}

/// Ankle positions relative to the hip.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpHipRelative {
    pub right_x: f64,
    pub right_y: f64,
    pub left_x: f64,
    pub left_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GpWalkParams {
    pub step_length: f64,
    pub clearance: f64,
    pub stride_time: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpEngineConfig {
    pub geometry: GpGeometry,
    pub dt: f64,
    pub peak_gain: GpPeakGain,
    pub integration: GpIntegration,
    /// Overreach tolerated by straightening the leg, in meters.
    pub reach_margin: f64,
}

/// Channels are ordered `Xh, Yh, XRa, YRa, XLa, YLa`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpGaitSample {
    pub t: f64,
    pub stride: usize,
    pub swing: GpLeg,
    pub states: [GpState3; 6],
    pub jerks: [f64; 6],
    pub angles: GpJointAngles,
    pub overreach: f64,
}

/// Opaque single-channel planner.
pub struct GpChannel(PlannerChannel);

/// Opaque walking pattern generator.
pub struct GpEngine(GaitEngine);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(GpStatus, String);

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let code = match e {
            PlanError::HorizonExpired { .. } => GpStatus::HorizonExpired,
            _ => GpStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

impl From<KinematicsError> for Failure {
    fn from(e: KinematicsError) -> Self {
        let code = match e {
            KinematicsError::InvalidGeometry { .. } => GpStatus::InvalidArgument,
            _ => GpStatus::Unreachable,
        };
        Failure(code, e.to_string())
    }
}

impl From<GaitError> for Failure {
    fn from(e: GaitError) -> Self {
        let code = match &e {
            GaitError::InfeasibleGeometry(_) => GpStatus::Infeasible,
            GaitError::InvalidParams(_) => GpStatus::InvalidArgument,
            GaitError::RejectedChange { .. } => GpStatus::Rejected,
            GaitError::Plan(PlanError::HorizonExpired { .. }) => GpStatus::HorizonExpired,
            GaitError::Plan(_) => GpStatus::InvalidArgument,
            GaitError::Kinematics { .. } => GpStatus::Unreachable,
        };
        Failure(code, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording failures and caught panics in the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            GpStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn state(s: GpState3) -> State3 {
    State3::new(s.pos, s.vel, s.acc)
}

fn gp_state(s: State3) -> GpState3 {
    GpState3 {
        pos: s.pos,
        vel: s.vel,
        acc: s.acc,
    }
}

fn geometry(g: GpGeometry) -> Result<RobotGeometry, Failure> {
    Ok(RobotGeometry::new(g.l_thigh, g.l_shin)?)
}

fn integration(i: GpIntegration) -> Integration {
    match i {
        GpIntegration::ExactFlow => Integration::ExactFlow,
        GpIntegration::ZeroOrderHold => Integration::ZeroOrderHold,
    }
}

fn peak_gain(p: GpPeakGain) -> PeakGain {
    match p {
        GpPeakGain::Approximate => PeakGain::Approximate,
        GpPeakGain::Exact => PeakGain::Exact,
    }
}

fn params(p: GpWalkParams) -> WalkParams {
    WalkParams::new(p.step_length, p.clearance, p.stride_time)
}

fn angles(a: gaitplan::JointAngles) -> GpJointAngles {
    GpJointAngles {
        hip_r: a.hip_r,
        knee_r: a.knee_r,
        hip_l: a.hip_l,
        knee_l: a.knee_l,
    }
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
/// message length without the terminator; zero when there is no message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Closed-form peak gain for a y-boundary.
///
/// # Safety
/// `k` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_kstar(t0: f64, tf: f64, y0: f64, yp: f64, yf: f64, k: *mut f64) -> GpStatus {
    guard(|| {
        *out(k, "k")? = trajectory::kstar(t0, tf, y0, yp, yf)?;
        Ok(())
    })
}

/// Gain whose plan from `start` at `t` peaks exactly at `yp`.
///
/// # Safety
/// `k` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_exact_peak_gain(
    start: GpState3,
    t: f64,
    tf: f64,
    yp: f64,
    yf: f64,
    k: *mut f64,
) -> GpStatus {
    guard(|| {
        *out(k, "k")? = trajectory::exact_peak_gain(state(start), t, tf, yp, yf)?;
        Ok(())
    })
}

/// Joint angles placing both ankles at `rel`.
///
/// # Safety
/// `angles_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_inverse(
    geom: GpGeometry,
    rel: GpHipRelative,
    angles_out: *mut GpJointAngles,
) -> GpStatus {
    guard(|| {
        let g = geometry(geom)?;
        let a = kinematics::inverse(
            &HipRelative {
                right: (rel.right_x, rel.right_y),
                left: (rel.left_x, rel.left_y),
            },
            &g,
        )?;
        *out(angles_out, "angles_out")? = angles(a);
        Ok(())
    })
}

/// Ankle positions relative to the hip for the given joint angles.
///
/// # Safety
/// `rel_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_forward(geom: GpGeometry, a: GpJointAngles, rel_out: *mut GpHipRelative) -> GpStatus {
    guard(|| {
        let g = geometry(geom)?;
        let rel = kinematics::forward(
            &gaitplan::JointAngles {
                hip_r: a.hip_r,
                knee_r: a.knee_r,
                hip_l: a.hip_l,
                knee_l: a.knee_l,
            },
            &g,
        );
        *out(rel_out, "rel_out")? = GpHipRelative {
            right_x: rel.right.0,
            right_y: rel.right.1,
            left_x: rel.left.0,
            left_y: rel.left.1,
        };
        Ok(())
    })
}

fn new_channel(ch: *mut *mut GpChannel, make: impl FnOnce() -> Result<PlannerChannel, Failure>) -> GpStatus {
    guard(|| {
        let slot = unsafe { out(ch, "channel_out")? };
        *slot = ptr::null_mut();
        *slot = Box::into_raw(Box::new(GpChannel(make()?)));
        Ok(())
    })
}

/// Creates an x-channel at `start` steering to `bc`.
///
/// # Safety
/// `channel_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_new_x(
    start: GpState3,
    bc: GpXBoundary,
    mode: GpIntegration,
    channel_out: *mut *mut GpChannel,
) -> GpStatus {
    new_channel(channel_out, || {
        if !(bc.tf.is_finite() && bc.xf.is_finite() && bc.vxf.is_finite() && bc.axf.is_finite()) {
            return Err(Failure(GpStatus::InvalidArgument, "non-finite x-boundary".into()));
        }
        let b = XBoundary::new(bc.tf, bc.xf, bc.vxf, bc.axf);
        Ok(PlannerChannel::new_x(state(start), b).with_integration(integration(mode)))
    })
}

/// Creates a y-channel at `start` on `bc`.
///
/// # Safety
/// `channel_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_new_y(
    start: GpState3,
    bc: GpYBoundary,
    mode: GpIntegration,
    channel_out: *mut *mut GpChannel,
) -> GpStatus {
    new_channel(channel_out, || {
        let b = YBoundary::with_gain(bc.t0, bc.tf, bc.y0, bc.yp, bc.yf, bc.k)?;
        Ok(PlannerChannel::new_y(state(start), b).with_integration(integration(mode)))
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must be null or come from `gp_channel_new_*` and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_free(channel: *mut GpChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Advances the channel from `t` to `t + dt`.
///
/// # Safety
/// `channel` must be a live handle; outputs must be null or valid for writes.
/// A null output is skipped.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_step(
    channel: *mut GpChannel,
    t: f64,
    dt: f64,
    state_out: *mut GpState3,
    jerk_out: *mut f64,
) -> GpStatus {
    guard(|| {
        let ch = &mut out(channel, "channel")?.0;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Failure(GpStatus::InvalidArgument, format!("dt must be positive, got {dt}")));
        }
        let s = ch.step(t, dt)?;
        if let Some(o) = state_out.as_mut() {
            *o = gp_state(s);
        }
        if let Some(o) = jerk_out.as_mut() {
            *o = ch.last_jerk;
        }
        Ok(())
    })
}

/// Current state of the channel.
///
/// # Safety
/// `channel` must be a live handle; `state_out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_state(channel: *const GpChannel, state_out: *mut GpState3) -> GpStatus {
    guard(|| {
        let ch = &channel.as_ref().ok_or_else(|| null("channel"))?.0;
        *out(state_out, "state_out")? = gp_state(ch.state);
        Ok(())
    })
}

/// Replaces an x-channel's boundary at time `t`. The state is untouched.
///
/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_set_x_boundary(
    channel: *mut GpChannel,
    t: f64,
    bc: GpXBoundary,
    epsilon_snap: f64,
) -> GpStatus {
    guard(|| {
        let ch = &mut out(channel, "channel")?.0;
        let b = XBoundary::new(bc.tf, bc.xf, bc.vxf, bc.axf);
        ch.set_boundary(t, Boundary::X(b), epsilon_snap)?;
        Ok(())
    })
}

/// Re-anchors a y-channel at `t` on a new peak, endpoint and horizon and
/// writes the gain in use. The peak actually used, which may be higher than
/// `yp`, goes to `used_peak_out`.
///
/// # Safety
/// `channel` must be a live handle; outputs must be null or valid for writes.
/// A null output is skipped.
#[no_mangle]
pub unsafe extern "C" fn gp_channel_retarget_y(
    channel: *mut GpChannel,
    t: f64,
    yp: f64,
    yf: f64,
    tf: f64,
    rule: GpPeakGain,
    epsilon_snap: f64,
    k_out: *mut f64,
    used_peak_out: *mut f64,
) -> GpStatus {
    guard(|| {
        let ch = &mut out(channel, "channel")?.0;
        let r = ch.retarget_y(t, yp, yf, tf, peak_gain(rule), epsilon_snap)?;
        if let Some(o) = k_out.as_mut() {
            *o = r.boundary.k;
        }
        if let Some(o) = used_peak_out.as_mut() {
            *o = r.boundary.yp;
        }
        Ok(())
    })
}

/// Engine configuration with the library defaults.
#[no_mangle]
pub extern "C" fn gp_engine_config_default() -> GpEngineConfig {
    let d = GaitConfig::default();
    GpEngineConfig {
        geometry: GpGeometry {
            l_thigh: d.geometry.l_thigh,
            l_shin: d.geometry.l_shin,
        },
        dt: d.dt,
        peak_gain: match d.peak_gain {
            PeakGain::Approximate => GpPeakGain::Approximate,
            PeakGain::Exact => GpPeakGain::Exact,
        },
        integration: match d.integration {
            Integration::ExactFlow => GpIntegration::ExactFlow,
            Integration::ZeroOrderHold => GpIntegration::ZeroOrderHold,
        },
        reach_margin: d.reach_margin,
    }
}

/// Creates a gait engine standing at the origin.
///
/// # Safety
/// `engine_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_new(
    config: GpEngineConfig,
    initial: GpWalkParams,
    engine_out: *mut *mut GpEngine,
) -> GpStatus {
    guard(|| {
        let slot = out(engine_out, "engine_out")?;
        *slot = ptr::null_mut();
        if !(config.reach_margin >= 0.0 && config.reach_margin.is_finite()) {
            return Err(Failure(GpStatus::InvalidArgument, "reach margin must be non-negative".into()));
        }
        let cfg = GaitConfig {
            geometry: geometry(config.geometry)?,
            dt: config.dt,
            peak_gain: peak_gain(config.peak_gain),
            integration: integration(config.integration),
            reach_margin: config.reach_margin,
        };
        let engine = GaitEngine::new(cfg, params(initial))?;
        *slot = Box::into_raw(Box::new(GpEngine(engine)));
        Ok(())
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must be null or come from `gp_engine_new` and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_free(engine: *mut GpEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Advances every channel from `t` to `t + dt`. Returns
/// `GpStatus::Finished` without stepping once the closing stride has
/// ended.
///
/// # Safety
/// `engine` must be a live handle; `sample_out` null or valid for writes.
/// A null output is skipped.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_tick(engine: *mut GpEngine, t: f64, sample_out: *mut GpGaitSample) -> GpStatus {
    guard(|| {
        let e = &mut out(engine, "engine")?.0;
        if e.finished() {
            return Err(Failure(GpStatus::Finished, "gait has finished".into()));
        }
        let s = e.tick(t)?;
        if let Some(o) = sample_out.as_mut() {
            *o = GpGaitSample {
                t: s.t,
                stride: s.stride,
                swing: match s.swing {
                    Leg::Right => GpLeg::Right,
                    Leg::Left => GpLeg::Left,
                },
                states: s.states.map(gp_state),
                jerks: s.jerks,
                angles: angles(s.angles),
                overreach: s.overreach,
            };
        }
        Ok(())
    })
}

/// Changes the walking parameters at `t`. `deferred_out` receives 1 when
/// the change takes effect at the next stride and 0 when applied at once.
/// A rejected change returns `GpStatus::Rejected` and leaves the gait
/// unchanged.
///
/// # Safety
/// `engine` must be a live handle; `deferred_out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_update_params(
    engine: *mut GpEngine,
    t: f64,
    new_params: GpWalkParams,
    deferred_out: *mut i32,
) -> GpStatus {
    guard(|| {
        let e = &mut out(engine, "engine")?.0;
        let outcome = e.update_params(t, params(new_params))?;
        if let Some(o) = deferred_out.as_mut() {
            *o = i32::from(outcome == gaitplan::gait::UpdateOutcome::Deferred);
        }
        Ok(())
    })
}

/// Makes the stride carrying `closing` the last one.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_request_stop(engine: *mut GpEngine, t: f64, closing: GpWalkParams) -> GpStatus {
    guard(|| {
        out(engine, "engine")?.0.request_stop(t, params(closing))?;
        Ok(())
    })
}

/// 1 once the closing stride has ended, 0 otherwise or for a null handle.
///
/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_finished(engine: *const GpEngine) -> i32 {
    engine.as_ref().map_or(0, |e| i32::from(e.0.finished()))
}

/// Number of completed strides; zero for a null handle.
///
/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_stride_count(engine: *const GpEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.0.strides().len())
}

/// State of one channel (index 0..6, ordered as in `GpGaitSample`).
///
/// # Safety
/// `engine` must be a live handle; `state_out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gp_engine_channel_state(
    engine: *const GpEngine,
    index: usize,
    state_out: *mut GpState3,
) -> GpStatus {
    guard(|| {
        let e = &engine.as_ref().ok_or_else(|| null("engine"))?.0;
        let ch = Channel::ALL
            .get(index)
            .ok_or_else(|| Failure(GpStatus::InvalidArgument, format!("channel index {index} out of range")))?;
        *out(state_out, "state_out")? = gp_state(e.channels().get(*ch).state);
        Ok(())
    })
}

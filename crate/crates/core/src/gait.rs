//! Stride-level walking pattern generator.
//!
//! Six planner channels (hip, right ankle and left ankle, x and y each) are
//! driven stride by stride. Each stride swings one leg: the swing ankle lifts
//! to the foot clearance and lands half a step length ahead of the stance
//! ankle, while the hip moves to a quarter step ahead and rises to full leg
//! length over the stance foot. The first stride starts from standing with
//! the right leg swinging, which makes it a half step.

use crate::error::{GaitError, PlanError};
use crate::kinematics::{self, hip_relative, JointAngles, RobotGeometry, SagittalPose};
use crate::trajectory::{
    exact_peak_gain, kstar, Boundary, Integration, PeakGain, PlannerChannel, State3, XBoundary,
    YBoundary, DEFAULT_DT,
};

// peak gaps below this count as a flat hip trajectory
const FLAT_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leg {
    Right,
    Left,
}

impl Leg {
    pub fn other(self) -> Leg {
        match self {
            Leg::Right => Leg::Left,
            Leg::Left => Leg::Right,
        }
    }
}

/// Step length `L_s`, maximum foot clearance `H_s` and stride time `t_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub step_length: f64,
    pub clearance: f64,
    pub stride_time: f64,
}

impl WalkParams {
    pub const fn new(step_length: f64, clearance: f64, stride_time: f64) -> Self {
        Self {
            step_length,
            clearance,
            stride_time,
        }
    }

    /// Checks the sign constraints that do not depend on geometry.
    pub fn validate_signs(&self) -> Result<(), GaitError> {
        if !(self.stride_time > 0.0 && self.stride_time.is_finite()) {
            return Err(GaitError::InvalidParams(format!(
                "stride time must be positive, got {}",
                self.stride_time
            )));
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(GaitError::InvalidParams(format!(
                "foot clearance must be non-negative, got {}",
                self.clearance
            )));
        }
        if !(self.step_length >= 0.0 && self.step_length.is_finite()) {
            return Err(GaitError::InvalidParams(format!(
                "step length must be non-negative, got {}",
                self.step_length
            )));
        }
        Ok(())
    }

    pub fn validate(&self, geometry: &RobotGeometry) -> Result<(), GaitError> {
        self.validate_signs()?;
        let l = geometry.leg_length();
        if self.step_length / 4.0 >= l {
            return Err(GaitError::InfeasibleGeometry(format!(
                "step length {} needs L_s/4 < leg length {l}",
                self.step_length
            )));
        }
        if self.clearance >= l {
            return Err(GaitError::InfeasibleGeometry(format!(
                "foot clearance {} needs H_s < leg length {l}",
                self.clearance
            )));
        }
        Ok(())
    }
}

/// Bookkeeping for the active stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideState {
    pub index: usize,
    pub swing: Leg,
    pub t0: f64,
    pub tf: f64,
    /// Swing ankle x at stride start.
    pub anchor_swing0: f64,
    /// Stance ankle x at stride start.
    pub anchor_stance0: f64,
}

impl StrideState {
    /// Signed `X_La0 - X_Ra0`.
    pub fn anchor_gap(&self) -> f64 {
        match self.swing {
            Leg::Right => self.anchor_stance0 - self.anchor_swing0,
            Leg::Left => self.anchor_swing0 - self.anchor_stance0,
        }
    }
}

/// The six trajectory channels, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Xh,
    Yh,
    XRa,
    YRa,
    XLa,
    YLa,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::Xh,
        Channel::Yh,
        Channel::XRa,
        Channel::YRa,
        Channel::XLa,
        Channel::YLa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Xh => "Xh",
            Channel::Yh => "Yh",
            Channel::XRa => "XRa",
            Channel::YRa => "YRa",
            Channel::XLa => "XLa",
            Channel::YLa => "YLa",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Channel::Yh | Channel::YRa | Channel::YLa)
    }

    pub fn ankle_x(leg: Leg) -> Channel {
        match leg {
            Leg::Right => Channel::XRa,
            Leg::Left => Channel::XLa,
        }
    }

    pub fn ankle_y(leg: Leg) -> Channel {
        match leg {
            Leg::Right => Channel::YRa,
            Leg::Left => Channel::YLa,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    channels: [PlannerChannel; 6],
}

impl ChannelSet {
    pub fn get(&self, ch: Channel) -> &PlannerChannel {
        &self.channels[ch.index()]
    }

    fn get_mut(&mut self, ch: Channel) -> &mut PlannerChannel {
        &mut self.channels[ch.index()]
    }

    pub fn states(&self) -> [State3; 6] {
        std::array::from_fn(|i| self.channels[i].state)
    }

    pub fn jerks(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.channels[i].last_jerk)
    }

    pub fn pose(&self) -> SagittalPose {
        let p = |ch: Channel| self.get(ch).state.pos;
        SagittalPose {
            hip: (p(Channel::Xh), p(Channel::Yh)),
            ankle_r: (p(Channel::XRa), p(Channel::YRa)),
            ankle_l: (p(Channel::XLa), p(Channel::YLa)),
        }
    }
}

/// `(delta_h0, delta_h)`: hip drop below leg length at the stride start
/// (from the ankle gap) and at the stride end (from the step length).
pub fn hip_drops(step_length: f64, anchor_gap: f64, l: f64) -> Result<(f64, f64), GaitError> {
    let drop = |half_span: f64, what: &str| {
        let arg = l * l - half_span * half_span;
        if arg < 0.0 || !arg.is_finite() {
            return Err(GaitError::InfeasibleGeometry(format!(
                "{what} {half_span} exceeds leg length {l}"
            )));
        }
        Ok(l - arg.sqrt())
    };
    Ok((
        drop(anchor_gap / 2.0, "half ankle gap")?,
        drop(step_length / 4.0, "quarter step length")?,
    ))
}

/// Boundary conditions of all six channels for one stride, indexed by
/// [`Channel::index`]. Gains come from [`kstar`].
pub fn stride_boundaries(
    params: &WalkParams,
    stride: &StrideState,
    geometry: &RobotGeometry,
) -> Result<[Boundary; 6], GaitError> {
    let l = geometry.leg_length();
    let (dh0, dh) = hip_drops(params.step_length, stride.anchor_gap(), l)?;
    let (t0, tf) = (stride.t0, stride.tf);
    let stance_x = stride.anchor_stance0;
    let ls = params.step_length;

    let y = |y0, yp, yf| -> Result<Boundary, GaitError> {
        let k = hip_gain(t0, tf, y0, yp, yf)?;
        Ok(Boundary::Y(YBoundary::with_gain(t0, tf, y0, yp, yf, k)?))
    };

    let mut out = [Boundary::X(XBoundary::rest(tf, 0.0)); 6];
    out[Channel::Xh.index()] = Boundary::X(XBoundary::rest(tf, stance_x + 0.25 * ls));
    out[Channel::Yh.index()] = y(l - dh0, l, l - dh)?;
    let swing = stride.swing;
    let stance = swing.other();
    out[Channel::ankle_x(swing).index()] = Boundary::X(XBoundary::rest(tf, stance_x + 0.5 * ls));
    out[Channel::ankle_y(swing).index()] = y(0.0, params.clearance, 0.0)?;
    out[Channel::ankle_x(stance).index()] = Boundary::X(XBoundary::rest(tf, stance_x));
    out[Channel::ankle_y(stance).index()] = y(0.0, 0.0, 0.0)?;
    Ok(out)
}

fn hip_gain(t0: f64, tf: f64, y0: f64, yp: f64, yf: f64) -> Result<f64, PlanError> {
    if (yp - y0).abs() < FLAT_GAP && (yp - yf).abs() < FLAT_GAP {
        return Ok(0.0);
    }
    kstar(t0, tf, y0, yp, yf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitConfig {
    pub geometry: RobotGeometry,
    pub dt: f64,
    pub peak_gain: PeakGain,
    pub integration: Integration,
    /// Largest distance beyond full leg extension that is reached with a
    /// straight leg instead of aborting.
    pub reach_margin: f64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            geometry: RobotGeometry::default(),
            dt: DEFAULT_DT,
            peak_gain: PeakGain::default(),
            integration: Integration::default(),
            reach_margin: 5e-3,
        }
    }
}

/// One control-step output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSample {
    pub t: f64,
    pub stride: usize,
    pub swing: Leg,
    pub states: [State3; 6],
    pub jerks: [f64; 6],
    pub pose: SagittalPose,
    pub angles: JointAngles,
    /// Largest straight-leg overreach of the two legs at this sample.
    pub overreach: f64,
}

/// Summary of a completed stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideRecord {
    pub stride: StrideState,
    /// Parameters in force when the stride ended.
    pub params: WalkParams,
    /// Swing-foot height the stride was held to: `H_s`, or the higher peak
    /// the foot was already committed to when `H_s` was lowered mid-swing.
    pub clearance: f64,
    pub start_states: [State3; 6],
    pub end_states: [State3; 6],
    pub start_angles: JointAngles,
    pub end_angles: JointAngles,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaitEventKind {
    Applied(WalkParams),
    Deferred(WalkParams),
    Rejected(String),
    PeakClamped {
        channel: Channel,
        requested: f64,
        used: f64,
    },
    StopRequested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitEvent {
    pub t: f64,
    pub kind: GaitEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Applied,
    /// Arrived inside the stride's terminal window; takes effect at the next
    /// stride.
    Deferred,
}

/// The walking pattern generator.
#[derive(Debug, Clone)]
pub struct GaitEngine {
    config: GaitConfig,
    params: WalkParams,
    pending: Option<WalkParams>,
    stride: StrideState,
    channels: ChannelSet,
    start_states: [State3; 6],
    start_angles: JointAngles,
    last_angles: JointAngles,
    clearance: f64,
    stop_after_current: bool,
    stop_after_pending: bool,
    finished: bool,
    strides: Vec<StrideRecord>,
    events: Vec<GaitEvent>,
}

impl GaitEngine {
    /// Starts from standing with both ankles at the origin.
    pub fn new(config: GaitConfig, params: WalkParams) -> Result<Self, GaitError> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(GaitError::InvalidParams(format!(
                "control period must be positive, got {}",
                config.dt
            )));
        }
        params.validate(&config.geometry)?;
        let l = config.geometry.leg_length();
        let stride = StrideState {
            index: 0,
            swing: Leg::Right,
            t0: 0.0,
            tf: params.stride_time,
            anchor_swing0: 0.0,
            anchor_stance0: 0.0,
        };
        let placeholder = PlannerChannel::new_x(State3::ZERO, XBoundary::rest(stride.tf, 0.0))
            .with_integration(config.integration);
        let mut channels = ChannelSet {
            channels: std::array::from_fn(|_| placeholder.clone()),
        };
        channels.get_mut(Channel::Yh).state = State3::at_rest(l);
        let mut engine = Self {
            config,
            params,
            pending: None,
            stride,
            channels,
            start_states: [State3::ZERO; 6],
            start_angles: JointAngles::default(),
            last_angles: JointAngles::default(),
            clearance: params.clearance,
            stop_after_current: false,
            stop_after_pending: false,
            finished: false,
            strides: Vec::new(),
            events: Vec::new(),
        };
        engine.install_stride_boundaries()?;
        let (angles, _) = engine.solve_angles(0.0)?;
        engine.last_angles = angles;
        engine.begin_stride_bookkeeping();
        Ok(engine)
    }

    pub fn config(&self) -> &GaitConfig {
        &self.config
    }

    pub fn params(&self) -> WalkParams {
        self.params
    }

    pub fn stride(&self) -> &StrideState {
        &self.stride
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn strides(&self) -> &[StrideRecord] {
        &self.strides
    }

    pub fn events(&self) -> &[GaitEvent] {
        &self.events
    }

    /// Sample describing the state before the first tick.
    pub fn initial_sample(&self) -> GaitSample {
        self.sample(0.0, self.last_angles, 0.0)
    }

    fn sample(&self, t: f64, angles: JointAngles, overreach: f64) -> GaitSample {
        GaitSample {
            t,
            stride: self.stride.index,
            swing: self.stride.swing,
            states: self.channels.states(),
            jerks: self.channels.jerks(),
            pose: self.channels.pose(),
            angles,
            overreach,
        }
    }

    fn solve_angles(&self, t: f64) -> Result<(JointAngles, f64), GaitError> {
        let rel = hip_relative(&self.channels.pose());
        let g = &self.config.geometry;
        let margin = self.config.reach_margin;
        let leg = |(x, y): (f64, f64)| {
            kinematics::leg_inverse_saturating(x, y, g, margin)
                .map_err(|source| GaitError::Kinematics { t, source })
        };
        let (hip_r, knee_r, over_r) = leg(rel.right)?;
        let (hip_l, knee_l, over_l) = leg(rel.left)?;
        Ok((
            JointAngles {
                hip_r,
                knee_r,
                hip_l,
                knee_l,
            },
            over_r.max(over_l),
        ))
    }

    /// Runs `staged` ahead to the stride end and checks that both ankles stay
    /// within reach of the hip.
    fn check_reach(&self, staged: &ChannelSet, t: f64, tf: f64) -> Result<(), String> {
        let dt = self.config.dt;
        let g = &self.config.geometry;
        let mut ahead = staged.clone();
        let mut i = 0usize;
        loop {
            let ti = t + i as f64 * dt;
            for ch in Channel::ALL {
                ahead.get_mut(ch).step(ti, dt).map_err(|e| e.to_string())?;
            }
            let rel = hip_relative(&ahead.pose());
            for (x, y) in [rel.right, rel.left] {
                kinematics::leg_inverse_saturating(x, y, g, self.config.reach_margin)
                    .map_err(|e| format!("planned pose at t={:.4} is unreachable: {e}", ti + dt))?;
            }
            if ti + dt >= tf - self.time_tolerance() {
                return Ok(());
            }
            i += 1;
        }
    }

    fn epsilon_snap(&self) -> f64 {
        self.config.dt
    }

    fn time_tolerance(&self) -> f64 {
        self.config.dt * 1e-6
    }

    /// Installs fresh boundaries at the start of a stride.
    fn install_stride_boundaries(&mut self) -> Result<(), GaitError> {
        let bounds = stride_boundaries(&self.params, &self.stride, &self.config.geometry)?;
        for ch in Channel::ALL {
            let mut b = bounds[ch.index()];
            let channel = self.channels.get_mut(ch);
            if let (Boundary::Y(yb), PeakGain::Exact) = (&mut b, self.config.peak_gain) {
                yb.k = exact_peak_gain(channel.state, yb.t0, yb.tf, yb.yp, yb.yf)?;
            }
            channel.boundary = b;
            channel.arc_peak = channel.state.pos;
        }
        Ok(())
    }

    fn begin_stride_bookkeeping(&mut self) {
        self.start_states = self.channels.states();
        self.start_angles = self.last_angles;
        self.clearance = self.params.clearance;
    }

    /// Advances every channel from `t` to `t + dt`.
    ///
    /// When the stride completes, the swing leg is exchanged and the next
    /// stride is anchored on the achieved ankle positions.
    pub fn tick(&mut self, t: f64) -> Result<GaitSample, GaitError> {
        let dt = self.config.dt;
        for ch in Channel::ALL {
            self.channels.get_mut(ch).step(t, dt)?;
        }
        let t_next = t + dt;
        let (angles, overreach) = self.solve_angles(t_next)?;
        let sample = self.sample(t_next, angles, overreach);
        self.last_angles = angles;
        if !self.finished && t_next >= self.stride.tf - self.time_tolerance() {
            self.finish_stride(t_next)?;
        }
        Ok(sample)
    }

    fn finish_stride(&mut self, t: f64) -> Result<(), GaitError> {
        self.strides.push(StrideRecord {
            stride: self.stride,
            params: self.params,
            clearance: self.clearance,
            start_states: self.start_states,
            end_states: self.channels.states(),
            start_angles: self.start_angles,
            end_angles: self.last_angles,
        });
        if self.stop_after_current {
            self.finished = true;
            return Ok(());
        }
        if let Some(p) = self.pending.take() {
            self.params = p;
            if self.stop_after_pending {
                self.stop_after_pending = false;
                self.stop_after_current = true;
            }
        }
        let swing = self.stride.swing.other();
        let x = |leg| self.channels.get(Channel::ankle_x(leg)).state.pos;
        self.stride = StrideState {
            index: self.stride.index + 1,
            swing,
            t0: t,
            tf: t + self.params.stride_time,
            anchor_swing0: x(swing),
            anchor_stance0: x(swing.other()),
        };
        self.install_stride_boundaries()?;
        self.begin_stride_bookkeeping();
        Ok(())
    }

    /// Changes the walking parameters of the active stride.
    ///
    /// Boundaries are recomputed on the original stride anchors. A y-channel
    /// whose `(yp, yf, tf)` changed is re-anchored at `t` on its current
    /// position. A change arriving in the terminal window is deferred to the
    /// next stride; one that would move the stride end into the past is
    /// rejected and the gait continues unchanged.
    pub fn update_params(&mut self, t: f64, new: WalkParams) -> Result<UpdateOutcome, GaitError> {
        let outcome = self.try_update(t, new);
        let kind = match &outcome {
            Ok(UpdateOutcome::Applied) => GaitEventKind::Applied(new),
            Ok(UpdateOutcome::Deferred) => GaitEventKind::Deferred(new),
            Err(e) => GaitEventKind::Rejected(e.to_string()),
        };
        self.events.push(GaitEvent { t, kind });
        outcome
    }

    /// Like [`update_params`](Self::update_params), and the stride these
    /// parameters apply to becomes the last one. The pose is held after it.
    pub fn request_stop(&mut self, t: f64, new: WalkParams) -> Result<UpdateOutcome, GaitError> {
        let outcome = self.update_params(t, new);
        self.events.push(GaitEvent {
            t,
            kind: GaitEventKind::StopRequested,
        });
        match outcome {
            Ok(UpdateOutcome::Deferred) => self.stop_after_pending = true,
            _ => self.stop_after_current = true,
        }
        outcome
    }

    fn reject(t: f64, reason: impl Into<String>) -> GaitError {
        GaitError::RejectedChange {
            t,
            reason: reason.into(),
        }
    }

    fn try_update(&mut self, t: f64, new: WalkParams) -> Result<UpdateOutcome, GaitError> {
        if self.finished {
            return Err(Self::reject(t, "gait has finished"));
        }
        new.validate(&self.config.geometry)
            .map_err(|e| Self::reject(t, e.to_string()))?;
        let eps = self.epsilon_snap() * (1.0 + 1e-9);
        if self.stride.tf - t <= eps {
            self.pending = Some(new);
            return Ok(UpdateOutcome::Deferred);
        }
        let mut stride = self.stride;
        stride.tf = stride.t0 + new.stride_time;
        if stride.tf - t <= eps {
            return Err(Self::reject(
                t,
                format!("stride end {} is not after t + dt", stride.tf),
            ));
        }
        let bounds = stride_boundaries(&new, &stride, &self.config.geometry)
            .map_err(|e| Self::reject(t, e.to_string()))?;

        let mut staged = self.channels.clone();
        let mut clamps = Vec::new();
        for ch in Channel::ALL {
            let channel = staged.get_mut(ch);
            match (bounds[ch.index()], channel.boundary) {
                (Boundary::X(nb), _) => channel.boundary = Boundary::X(nb),
                (Boundary::Y(nb), Boundary::Y(old)) => {
                    if nb.yp == old.yp && nb.yf == old.yf && nb.tf == old.tf {
                        continue;
                    }
                    let r = channel
                        .retarget_y(t, nb.yp, nb.yf, nb.tf, self.config.peak_gain, self.epsilon_snap())
                        .map_err(|e| Self::reject(t, e.to_string()))?;
                    if let Some(requested) = r.clamped_peak {
                        clamps.push(GaitEventKind::PeakClamped {
                            channel: ch,
                            requested,
                            used: r.boundary.yp,
                        });
                    }
                }
                (Boundary::Y(_), Boundary::X(_)) => unreachable!("channel kinds are fixed"),
            }
        }
        self.check_reach(&staged, t, stride.tf)
            .map_err(|reason| Self::reject(t, reason))?;
        self.channels = staged;
        self.stride = stride;
        self.params = new;
        self.pending = None;
        let swing_y = Channel::ankle_y(stride.swing);
        self.clearance = clamps.iter().fold(new.clearance, |h, c| match c {
            GaitEventKind::PeakClamped { channel, used, .. } if *channel == swing_y => h.max(*used),
            _ => h,
        });
        self.events
            .extend(clamps.into_iter().map(|kind| GaitEvent { t, kind }));
        Ok(UpdateOutcome::Applied)
    }
}

/// Per-stride result of [`check_constraints`].
#[derive(Debug, Clone, PartialEq)]
pub struct StrideCheck {
    pub index: usize,
    pub swing: Leg,
    pub t0: f64,
    pub tf: f64,
    pub hip_peak: f64,
    pub clearance_target: f64,
    pub clearance_peak: f64,
    pub swing_advance: f64,
    /// `(right, left)` knee angles at stride start and end.
    pub knees_start: (f64, f64),
    pub knees_end: (f64, f64),
    /// `(right, left)` ankle heights at stride end.
    pub feet_end_y: (f64, f64),
    pub violations: Vec<String>,
}

/// Acceleration continuity of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelJump {
    pub channel: Channel,
    pub max_jump: f64,
    pub max_jerk: f64,
    pub tolerance: f64,
}

impl ChannelJump {
    pub fn passed(&self) -> bool {
        self.max_jump <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub strides: Vec<StrideCheck>,
    pub channels: Vec<ChannelJump>,
}

impl ConstraintReport {
    pub fn violations(&self) -> impl Iterator<Item = String> + '_ {
        let strides = self
            .strides
            .iter()
            .flat_map(|s| s.violations.iter().map(move |v| format!("stride {}: {v}", s.index)));
        let channels = self.channels.iter().filter(|c| !c.passed()).map(|c| {
            format!(
                "{}: acceleration jump {:.3e} exceeds {:.3e}",
                c.channel.name(),
                c.max_jump,
                c.tolerance
            )
        });
        strides.chain(channels)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }
}

pub const HIP_PEAK_REL_TOL: f64 = 0.02;
pub const CLEARANCE_REL_TOL: f64 = 0.05;
pub const KNEE_BOUNDARY_TOL: f64 = 1e-3;
pub const FOOT_GROUND_TOL: f64 = 1e-3;
pub const JUMP_SLACK: f64 = 1.01;
/// Acceleration change attributed to roundoff. Re-planning over the last
/// few steps divides position rounding by the cube of the remaining time.
pub const ACC_NOISE_FLOOR: f64 = 1e-8;

/// Largest acceleration change per step explained by a jerk bound.
pub fn jump_tolerance(max_jerk: f64, dt: f64) -> f64 {
    max_jerk * dt * JUMP_SLACK + ACC_NOISE_FLOOR
}

/// Checks the walking constraints over a completed run: hip peak against leg
/// length, swing clearance against `H_s`, straight knees at stride ends and
/// acceleration continuity of every channel.
///
/// `samples` must be consecutive control steps; the first may be the initial
/// sample.
pub fn check_constraints(
    samples: &[GaitSample],
    strides: &[StrideRecord],
    geometry: &RobotGeometry,
    dt: f64,
) -> ConstraintReport {
    let l = geometry.leg_length();
    let mut checks = Vec::with_capacity(strides.len());
    for rec in strides {
        let s = &rec.stride;
        let in_stride = samples.iter().filter(|x| x.stride == s.index);
        let swing_y = Channel::ankle_y(s.swing).index();
        let mut hip_peak = rec.start_states[Channel::Yh.index()].pos;
        let mut clearance_peak = rec.start_states[swing_y].pos;
        for x in in_stride {
            hip_peak = hip_peak.max(x.states[Channel::Yh.index()].pos);
            clearance_peak = clearance_peak.max(x.states[swing_y].pos);
        }
        let swing_x = Channel::ankle_x(s.swing).index();
        let swing_advance = rec.end_states[swing_x].pos - rec.start_states[swing_x].pos;
        let knees_start = (rec.start_angles.knee_r, rec.start_angles.knee_l);
        let knees_end = (rec.end_angles.knee_r, rec.end_angles.knee_l);
        let feet_end_y = (
            rec.end_states[Channel::YRa.index()].pos,
            rec.end_states[Channel::YLa.index()].pos,
        );

        let mut violations = Vec::new();
        if (hip_peak - l).abs() > HIP_PEAK_REL_TOL * l {
            violations.push(format!("hip peak {hip_peak:.5} m vs leg length {l:.5} m"));
        }
        let h = rec.clearance;
        if (clearance_peak - h).abs() > (CLEARANCE_REL_TOL * h).max(FOOT_GROUND_TOL) {
            violations.push(format!("clearance {clearance_peak:.5} m vs H_s {h:.5} m"));
        }
        for (what, k) in [
            ("right knee at start", knees_start.0),
            ("left knee at start", knees_start.1),
            ("right knee at end", knees_end.0),
            ("left knee at end", knees_end.1),
        ] {
            if k.abs() >= KNEE_BOUNDARY_TOL {
                violations.push(format!("{what} {k:.3e} rad"));
            }
        }
        for (what, y) in [("right", feet_end_y.0), ("left", feet_end_y.1)] {
            if y.abs() > FOOT_GROUND_TOL {
                violations.push(format!("{what} ankle ends at height {y:.3e} m"));
            }
        }
        checks.push(StrideCheck {
            index: s.index,
            swing: s.swing,
            t0: s.t0,
            tf: s.tf,
            hip_peak,
            clearance_target: h,
            clearance_peak,
            swing_advance,
            knees_start,
            knees_end,
            feet_end_y,
            violations,
        });
    }

    let channels = Channel::ALL
        .iter()
        .map(|&ch| {
            let i = ch.index();
            let max_jump = samples
                .windows(2)
                .map(|w| (w[1].states[i].acc - w[0].states[i].acc).abs())
                .fold(0.0, f64::max);
            let max_jerk = samples.iter().map(|x| x.jerks[i].abs()).fold(0.0, f64::max);
            ChannelJump {
                channel: ch,
                max_jump,
                max_jerk,
                tolerance: jump_tolerance(max_jerk, dt),
            }
        })
        .collect();
    ConstraintReport {
        strides: checks,
        channels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(engine: &mut GaitEngine, duration: f64) -> Vec<GaitSample> {
        let dt = engine.config().dt;
        let n = (duration / dt).round() as usize;
        let mut out = vec![engine.initial_sample()];
        for i in 0..n {
            out.push(engine.tick(i as f64 * dt).unwrap());
        }
        out
    }

    #[test]
    fn hip_drop_examples() {
        assert_eq!(hip_drops(0.6, 0.0, 0.8).unwrap().0, 0.0);
        let (_, dh) = hip_drops(0.6, 0.0, 0.8).unwrap();
        // 0.8 - sqrt(0.64 - 0.0225)
        assert!((dh - 0.014_188_3).abs() < 1e-6, "{dh}");
        assert_eq!(hip_drops(0.0, 0.0, 0.8).unwrap().1, 0.0);
        assert!(hip_drops(0.6, 1.7, 0.8).is_err());
        assert!(hip_drops(3.3, 0.0, 0.8).is_err());
    }

    #[test]
    fn right_swing_table_rows() {
        let params = WalkParams::new(0.6, 0.1, 2.0);
        let stride = StrideState {
            index: 1,
            swing: Leg::Right,
            t0: 2.0,
            tf: 4.0,
            anchor_swing0: 0.0,
            anchor_stance0: 0.3,
        };
        let b = stride_boundaries(&params, &stride, &RobotGeometry::default()).unwrap();
        let xf = |ch: Channel| match b[ch.index()] {
            Boundary::X(x) => x.xf,
            Boundary::Y(_) => panic!(),
        };
        assert!((xf(Channel::XRa) - 0.6).abs() < 1e-15);
        assert!((xf(Channel::Xh) - 0.45).abs() < 1e-15);
        assert_eq!(xf(Channel::XLa), 0.3);
        for ch in Channel::ALL {
            assert_eq!(b[ch.index()].tf(), 4.0);
        }
    }

    #[test]
    fn left_swing_mirrors_table() {
        let params = WalkParams::new(0.6, 0.1, 2.0);
        let stride = StrideState {
            index: 2,
            swing: Leg::Left,
            t0: 4.0,
            tf: 6.0,
            anchor_swing0: 0.3,
            anchor_stance0: 0.6,
        };
        let b = stride_boundaries(&params, &stride, &RobotGeometry::default()).unwrap();
        match (b[Channel::XLa.index()], b[Channel::XRa.index()], b[Channel::YLa.index()]) {
            (Boundary::X(la), Boundary::X(ra), Boundary::Y(yla)) => {
                assert!((la.xf - 0.9).abs() < 1e-15);
                assert_eq!(ra.xf, 0.6);
                assert_eq!((yla.y0, yla.yp, yla.yf), (0.0, 0.1, 0.0));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn zero_clearance_slides_at_ground() {
        let params = WalkParams::new(0.4, 0.0, 2.0);
        let stride = StrideState {
            index: 0,
            swing: Leg::Right,
            t0: 0.0,
            tf: 2.0,
            anchor_swing0: 0.0,
            anchor_stance0: 0.0,
        };
        let b = stride_boundaries(&params, &stride, &RobotGeometry::default()).unwrap();
        match b[Channel::YRa.index()] {
            Boundary::Y(y) => assert_eq!((y.y0, y.yp, y.yf, y.k), (0.0, 0.0, 0.0, 0.0)),
            Boundary::X(_) => panic!(),
        }
    }

    #[test]
    fn standing_start_hip_boundary() {
        let params = WalkParams::new(0.6, 0.1, 2.0);
        let stride = StrideState {
            index: 0,
            swing: Leg::Right,
            t0: 0.0,
            tf: 2.0,
            anchor_swing0: 0.0,
            anchor_stance0: 0.0,
        };
        let b = stride_boundaries(&params, &stride, &RobotGeometry::default()).unwrap();
        match b[Channel::Yh.index()] {
            Boundary::Y(y) => {
                assert_eq!((y.y0, y.yp), (0.8, 0.8));
                assert!((y.yf - (0.8 - 0.014_188_3)).abs() < 1e-6);
                assert_eq!(y.k, 0.0);
            }
            Boundary::X(_) => panic!(),
        }
    }

    #[test]
    fn stationary_gait_holds_pose() {
        let mut e = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.0, 0.0, 1.0)).unwrap();
        let first = e.initial_sample();
        for s in run(&mut e, 3.5) {
            assert_eq!(s.pose, first.pose);
            assert_eq!(s.angles, first.angles);
        }
        let report = check_constraints(&run(&mut e, 0.0), e.strides(), &e.config().geometry, 1e-3);
        assert!(report.passed(), "{:?}", report.violations().collect::<Vec<_>>());
    }

    #[test]
    fn identical_update_is_invisible() {
        let params = WalkParams::new(0.5, 0.08, 1.5);
        let mut a = GaitEngine::new(GaitConfig::default(), params).unwrap();
        let mut b = a.clone();
        let dt = 1e-3;
        for i in 0..3000 {
            let t = i as f64 * dt;
            if i == 700 || i == 2100 {
                assert_eq!(b.update_params(t, params).unwrap(), UpdateOutcome::Applied);
            }
            assert_eq!(a.tick(t).unwrap(), b.tick(t).unwrap());
        }
    }

    #[test]
    fn shortening_into_the_past_is_rejected() {
        let params = WalkParams::new(0.5, 0.08, 2.0);
        let mut e = GaitEngine::new(GaitConfig::default(), params).unwrap();
        for i in 0..1500 {
            e.tick(i as f64 * 1e-3).unwrap();
        }
        let before = e.channels().clone();
        let err = e.update_params(1.5, WalkParams::new(0.5, 0.08, 1.2)).unwrap_err();
        assert!(matches!(err, GaitError::RejectedChange { .. }));
        assert_eq!(e.params(), params);
        assert_eq!(e.channels(), &before);
        assert!(matches!(
            e.events().last().unwrap().kind,
            GaitEventKind::Rejected(_)
        ));
    }

    #[test]
    fn infeasible_update_rejected() {
        let mut e = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.5, 0.08, 2.0)).unwrap();
        assert!(e.update_params(0.5, WalkParams::new(3.3, 0.08, 2.0)).is_err());
        assert!(e.update_params(0.5, WalkParams::new(0.5, 0.08, -1.0)).is_err());
    }

    #[test]
    fn late_update_is_deferred() {
        let mut e = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.5, 0.08, 1.0)).unwrap();
        for i in 0..999 {
            e.tick(i as f64 * 1e-3).unwrap();
        }
        let next = WalkParams::new(0.3, 0.05, 1.2);
        assert_eq!(e.update_params(0.999, next).unwrap(), UpdateOutcome::Deferred);
        e.tick(0.999).unwrap();
        assert_eq!(e.stride().index, 1);
        assert_eq!(e.params(), next);
        assert!((e.stride().tf - 2.2).abs() < 1e-12);
    }

    #[test]
    fn stop_holds_after_final_stride() {
        let mut e = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.4, 0.05, 1.0)).unwrap();
        let dt = 1e-3;
        for i in 0..1000 {
            e.tick(i as f64 * dt).unwrap();
        }
        e.request_stop(1.0, WalkParams::new(0.0, 0.05, 1.0)).unwrap();
        let mut last = None;
        for i in 1000..3000 {
            last = Some(e.tick(i as f64 * dt).unwrap());
        }
        assert!(e.finished());
        assert_eq!(e.strides().len(), 2);
        let s = last.unwrap();
        // left foot closed up next to the right one
        let (xr, xl) = (s.pose.ankle_r.0, s.pose.ankle_l.0);
        assert!((xr - xl).abs() < 1e-9, "{xr} {xl}");
        assert!((s.pose.hip.0 - xr).abs() < 1e-9);
        assert!((s.pose.hip.1 - 0.8).abs() < 1e-9);
    }

    #[test]
    fn injected_acceleration_jump_is_flagged() {
        let mut e = GaitEngine::new(GaitConfig::default(), WalkParams::new(0.4, 0.05, 1.0)).unwrap();
        let mut samples = run(&mut e, 1.0);
        assert!(check_constraints(&samples, e.strides(), &e.config().geometry, 1e-3)
            .channels
            .iter()
            .all(ChannelJump::passed));
        samples[400].states[Channel::YRa.index()].acc += 0.05;
        let report = check_constraints(&samples, e.strides(), &e.config().geometry, 1e-3);
        let bad: Vec<_> = report.channels.iter().filter(|c| !c.passed()).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].channel, Channel::YRa);
    }
}

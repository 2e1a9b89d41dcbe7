//! The three control strategies, each a per-tick policy over the current
//! end-effector pose and frame placements.
//!
//! - `InfLQR` fuses the frame mixtures under the current frames every tick,
//!   regresses the reference, and applies the one-shot gain.
//! - `SingleLQR` runs a finite-horizon tracker fitted in the end frame.
//! - `DualLQR` runs one finite-horizon tracker per frame and blends their
//!   global controls per dimension with inverse-variance weights.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FrameTransform, Pose6};
use crate::lqr::{
    control_finite, control_infinite, fit_finite, gain_infinite, precision_from_covariance, CostSpec, FiniteSchedule,
    SystemModel,
};
use crate::mixture::{combine, split, FrameGmm, JointGmm};
use crate::regression::{gmr, gmr_track, ReferenceTrack};

/// Index of the start frame in encodings and frame lists.
pub const START_FRAME: usize = 0;
/// Index of the end (goal) frame.
pub const END_FRAME: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "InfLQR")]
    InfLqr,
    #[serde(rename = "SingleLQR")]
    SingleLqr,
    #[serde(rename = "DualLQR")]
    DualLqr,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::InfLqr, Method::SingleLqr, Method::DualLqr];

    pub fn name(&self) -> &'static str {
        match self {
            Method::InfLqr => "InfLQR",
            Method::SingleLqr => "SingleLQR",
            Method::DualLqr => "DualLQR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?} (expected InfLQR, SingleLQR or DualLQR)")))
    }
}

/// A finite-horizon tracker fitted in one frame.
#[derive(Debug, Clone)]
pub struct FrameTracker {
    pub frame_id: usize,
    pub track: ReferenceTrack,
    pub schedule: FiniteSchedule,
}

#[derive(Debug, Clone)]
pub struct PreparedController {
    method: Method,
    cost: CostSpec,
    model: SystemModel,
    horizon: usize,
    frame_gmms: Vec<FrameGmm>,
    trackers: Vec<FrameTracker>,
}

/// Inputs of one control tick.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    /// 0-based tick; the regression time input is `t + 1`.
    pub t: usize,
    pub x_global: Pose6,
    /// Start frame, then end frame.
    pub frames_now: &'a [FrameTransform],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    pub local_states: Vec<Pose6>,
    pub local_controls: Vec<Vector6<f64>>,
    pub global_controls: Vec<Vector6<f64>>,
    /// Per-frame fusion weights; empty unless controls were fused.
    pub fusion_weights: Vec<Vector6<f64>>,
    pub gmr_cov_diagonals: Vec<Vector6<f64>>,
    /// Regression reference used this tick, one per tracked frame (global for InfLQR).
    pub references: Vec<Vector6<f64>>,
}

fn tracker(frame: &FrameGmm, horizon: usize, cost: &CostSpec, model: &SystemModel) -> Result<FrameTracker> {
    let track = gmr_track(frame, horizon);
    let schedule = fit_finite(&track, cost, model)?;
    Ok(FrameTracker {
        frame_id: frame.frame_id,
        track,
        schedule,
    })
}

/// Builds a controller from a two-frame joint mixture.
pub fn prepare(
    method: Method,
    joint: &JointGmm,
    cost: CostSpec,
    model: SystemModel,
    horizon: usize,
) -> Result<PreparedController> {
    if joint.frames() != 2 {
        return Err(Error::Unsupported(format!(
            "controllers need a start and an end frame, model has {} frames",
            joint.frames()
        )));
    }
    if horizon < 2 {
        return Err(Error::invalid("horizon must be at least 2"));
    }
    let frame_gmms = split(joint);
    let trackers = match method {
        Method::InfLqr => Vec::new(),
        Method::SingleLqr => vec![tracker(&frame_gmms[END_FRAME], horizon, &cost, &model)?],
        Method::DualLqr => frame_gmms
            .iter()
            .map(|f| tracker(f, horizon, &cost, &model))
            .collect::<Result<Vec<_>>>()?,
    };
    let frame_gmms = if method == Method::InfLqr {
        frame_gmms
    } else {
        Vec::new()
    };
    Ok(PreparedController {
        method,
        cost,
        model,
        horizon,
        frame_gmms,
        trackers,
    })
}

impl PreparedController {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn frame_gmms(&self) -> &[FrameGmm] {
        &self.frame_gmms
    }

    pub fn trackers(&self) -> &[FrameTracker] {
        &self.trackers
    }

    /// Dispatches to the step function for this controller's method.
    pub fn step(&self, ctx: &StepContext<'_>) -> Result<(Vector6<f64>, StepDiagnostics)> {
        match self.method {
            Method::InfLqr => step_inflqr(self, ctx),
            Method::SingleLqr => step_single(self, ctx),
            Method::DualLqr => step_dual(self, ctx),
        }
    }

    fn check(&self, method: Method, ctx: &StepContext<'_>) -> Result<()> {
        if self.method != method {
            return Err(Error::invalid(format!("controller is {}, not {method}", self.method)));
        }
        if ctx.frames_now.len() != 2 {
            return Err(Error::invalid(format!(
                "expected 2 frames, got {}",
                ctx.frames_now.len()
            )));
        }
        if ctx.t + 1 >= self.horizon {
            return Err(Error::invalid(format!(
                "tick {} outside the control range 0..{}",
                ctx.t,
                self.horizon - 1
            )));
        }
        Ok(())
    }
}

pub fn step_inflqr(pc: &PreparedController, ctx: &StepContext<'_>) -> Result<(Vector6<f64>, StepDiagnostics)> {
    pc.check(Method::InfLqr, ctx)?;
    let combined = combine(&pc.frame_gmms, ctx.frames_now)?;
    let estimate = gmr(&combined, (ctx.t + 1) as f64);
    let q = precision_from_covariance(&estimate.floored_covariance())?;
    let gain = gain_infinite(&q, &pc.cost, &pc.model)?;
    let u = control_infinite(&gain.k, &estimate.mean, &ctx.x_global.to_vector());
    let diag = StepDiagnostics {
        local_states: vec![ctx.x_global],
        local_controls: vec![u],
        global_controls: vec![u],
        fusion_weights: Vec::new(),
        gmr_cov_diagonals: vec![estimate.covariance.diagonal()],
        references: vec![estimate.mean],
    };
    Ok((u, diag))
}

struct FrameControl {
    local_state: Pose6,
    local: Vector6<f64>,
    global: Vector6<f64>,
}

fn frame_control(tracker: &FrameTracker, frame: &FrameTransform, t: usize, x: &Pose6) -> Result<FrameControl> {
    let local_state = frame.pose_to_frame(x);
    let local = control_finite(&tracker.schedule, t, &local_state.to_vector())?;
    Ok(FrameControl {
        local_state,
        local,
        global: frame.rate_to_global(&local),
    })
}

pub fn step_single(pc: &PreparedController, ctx: &StepContext<'_>) -> Result<(Vector6<f64>, StepDiagnostics)> {
    pc.check(Method::SingleLqr, ctx)?;
    let tracker = &pc.trackers[0];
    let c = frame_control(tracker, &ctx.frames_now[END_FRAME], ctx.t, &ctx.x_global)?;
    let diag = StepDiagnostics {
        local_states: vec![c.local_state],
        local_controls: vec![c.local],
        global_controls: vec![c.global],
        fusion_weights: Vec::new(),
        gmr_cov_diagonals: vec![tracker.track.covariances[ctx.t].diagonal()],
        references: vec![tracker.track.means[ctx.t]],
    };
    Ok((c.global, diag))
}

pub fn step_dual(pc: &PreparedController, ctx: &StepContext<'_>) -> Result<(Vector6<f64>, StepDiagnostics)> {
    pc.check(Method::DualLqr, ctx)?;
    let mut diag = StepDiagnostics::default();
    let mut covs = Vec::with_capacity(pc.trackers.len());
    for tracker in &pc.trackers {
        let c = frame_control(tracker, &ctx.frames_now[tracker.frame_id], ctx.t, &ctx.x_global)?;
        let cov = tracker.track.covariances[ctx.t];
        diag.local_states.push(c.local_state);
        diag.local_controls.push(c.local);
        diag.global_controls.push(c.global);
        diag.gmr_cov_diagonals.push(cov.diagonal());
        diag.references.push(tracker.track.means[ctx.t]);
        covs.push(cov);
    }
    let fused = fuse_controls(&diag.global_controls, &covs)?;
    diag.fusion_weights = fused.weights;
    Ok((fused.control, diag))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedControl {
    pub control: Vector6<f64>,
    /// Normalized weight of each input, per dimension.
    pub weights: Vec<Vector6<f64>>,
}

/// Per-dimension weighted mean of controls. Off-diagonal covariance terms are
/// dropped and each input is weighted by `1 / Sigma[d, d]`.
pub fn fuse_controls(controls: &[Vector6<f64>], covariances: &[Matrix6<f64>]) -> Result<FusedControl> {
    if controls.is_empty() || controls.len() != covariances.len() {
        return Err(Error::invalid(format!(
            "{} controls but {} covariances",
            controls.len(),
            covariances.len()
        )));
    }
    let mut raw = Vec::with_capacity(controls.len());
    for (i, cov) in covariances.iter().enumerate() {
        let diag = cov.diagonal();
        if let Some(d) = diag.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::invalid(format!(
                "covariance {i} has nonpositive diagonal entry {d}"
            )));
        }
        raw.push(diag.map(|v| 1.0 / v));
    }
    let total: Vector6<f64> = raw.iter().sum();
    let weights: Vec<Vector6<f64>> = raw.iter().map(|w| w.component_div(&total)).collect();
    let mut control = Vector6::zeros();
    for (w, u) in weights.iter().zip(controls) {
        control += w.component_mul(u);
    }
    Ok(FusedControl { control, weights })
}

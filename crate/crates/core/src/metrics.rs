//! Episode evaluation: final-approach accuracy, travel distance and a
//! grasp-time proxy. All pose checks are made in the goal frame at the tick.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{path_length, FrameTransform, Pose6};
use crate::sim::EpisodeLog;

/// Accuracy threshold a setting must reach to be selected.
pub const REQUIRED_ACCURACY: f64 = 0.88;
/// Distance along the goal's Y axis below which a tick is in the final approach.
pub const APPROACH_ZONE: f64 = 0.05;
/// Default misalignment tolerance for the grasp proxy, in meters.
pub const GRASP_TOLERANCE: f64 = 0.01;

/// Per-dimension limits in the goal frame. Y is the approach axis and has none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyLimits {
    pub x: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Default for AccuracyLimits {
    fn default() -> Self {
        Self {
            x: 0.03,
            z: 0.10,
            roll: 0.07,
            pitch: 0.07,
            yaw: 0.07,
        }
    }
}

impl AccuracyLimits {
    pub fn validate(&self) -> Result<()> {
        if [self.x, self.z, self.roll, self.pitch, self.yaw]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::invalid("accuracy limits must be positive"));
        }
        Ok(())
    }

    /// Whether a goal-frame pose lies inside every limit.
    pub fn admits(&self, local: &Pose6) -> bool {
        let c = local.canonical();
        c.position.x.abs() <= self.x
            && c.position.z.abs() <= self.z
            && c.orientation.x.abs() <= self.roll
            && c.orientation.y.abs() <= self.pitch
            && c.orientation.z.abs() <= self.yaw
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachAccuracy {
    pub fraction: f64,
    pub approach_ticks: usize,
    /// The end-effector never entered the approach zone.
    pub never_arrived: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub accuracy: f64,
    pub approach_ticks: usize,
    pub never_arrived: bool,
    pub translation: f64,
    pub rotation: f64,
    pub grasp_time: Option<f64>,
    pub duration: f64,
}

fn local_poses(log: &EpisodeLog) -> Result<Vec<Pose6>> {
    log.records
        .iter()
        .map(|r| Ok(FrameTransform::from_pose(&r.target)?.pose_to_frame(&r.x)))
        .collect()
}

/// Fraction of approach-zone ticks that satisfy the limits. Every tick with
/// goal-frame `Y < 0.05` counts, including re-entries.
pub fn final_approach_accuracy(log: &EpisodeLog, limits: &AccuracyLimits) -> Result<ApproachAccuracy> {
    limits.validate()?;
    let mut approach = 0;
    let mut accurate = 0;
    for local in local_poses(log)? {
        if local.position.y < APPROACH_ZONE {
            approach += 1;
            if limits.admits(&local) {
                accurate += 1;
            }
        }
    }
    Ok(ApproachAccuracy {
        fraction: if approach == 0 {
            0.0
        } else {
            accurate as f64 / approach as f64
        },
        approach_ticks: approach,
        never_arrived: approach == 0,
    })
}

/// Translation and rotation path length of the end-effector.
pub fn travel(log: &EpisodeLog) -> Result<(f64, f64)> {
    if log.is_empty() {
        return Ok((0.0, 0.0));
    }
    path_length(&log.poses())
}

/// Time of the first tick inside the tolerance sphere around the goal origin
/// with goal-frame `Y <= 0`.
pub fn grasp_time(log: &EpisodeLog, tolerance: f64) -> Result<Option<f64>> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(local_poses(log)?
        .iter()
        .zip(&log.records)
        .find(|(l, _)| l.position.norm() <= tolerance && l.position.y <= 0.0)
        .map(|(_, r)| r.time))
}

pub fn evaluate(log: &EpisodeLog, limits: &AccuracyLimits) -> Result<EpisodeMetrics> {
    let acc = final_approach_accuracy(log, limits)?;
    let (translation, rotation) = travel(log)?;
    Ok(EpisodeMetrics {
        accuracy: acc.fraction,
        approach_ticks: acc.approach_ticks,
        never_arrived: acc.never_arrived,
        translation,
        rotation,
        grasp_time: grasp_time(log, GRASP_TOLERANCE)?,
        duration: log.duration(),
    })
}

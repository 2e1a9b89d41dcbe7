//! Closed-loop kinematic simulation against an oscillating goal frame.
//!
//! The plant is the single integrator `x_{t+1} = x_t + u_t dt`. Tick `t`
//! sees the end-effector pose `x_t` and the frames at time `t dt` (or an
//! earlier tick under latency), and the last tick records a zero control.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{PreparedController, StepContext, StepDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{FrameTransform, Pose6};

/// Default oscillation frequency in Hz.
pub const DEFAULT_FREQUENCY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Roll,
    Pitch,
    Yaw,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::X, Axis::Y, Axis::Z, Axis::Roll, Axis::Pitch, Axis::Yaw];

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn is_position(&self) -> bool {
        self.index() < 3
    }

    pub fn name(&self) -> &'static str {
        ["x", "y", "z", "roll", "pitch", "yaw"][self.index()]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown axis {s:?}")))
    }
}

/// Offset `amplitude * exp(-decay t) * sin(2 pi f t + phase)` along one axis
/// of the goal's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationSpec {
    pub axis: Axis,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub decay: f64,
}

impl OscillationSpec {
    pub fn new(axis: Axis, amplitude: f64, frequency: f64, phase: f64, decay: f64) -> Result<Self> {
        let spec = Self {
            axis,
            amplitude,
            frequency,
            phase,
            decay,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self {
            axis: Axis::X,
            amplitude: 0.0,
            frequency: DEFAULT_FREQUENCY,
            phase: 0.0,
            decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if self.amplitude > 0.0 && !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid(format!("frequency must be > 0, got {}", self.frequency)));
        }
        if !(self.decay >= 0.0) || !self.decay.is_finite() || !self.phase.is_finite() {
            return Err(Error::invalid("decay must be >= 0 and phase finite"));
        }
        Ok(())
    }

    pub fn offset(&self, time: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (-self.decay * time).exp() * (2.0 * PI * self.frequency * time + self.phase).sin()
    }
}

/// Goal pose displaced by the oscillation at `time`.
pub fn target_pose(goal: &Pose6, spec: &OscillationSpec, time: f64) -> Pose6 {
    let off = spec.offset(time);
    if off == 0.0 {
        return *goal;
    }
    let mut pose = *goal;
    let i = spec.axis.index();
    if spec.axis.is_position() {
        let mut dir = Vector3::zeros();
        dir[i] = off;
        pose.position += goal.rotation() * dir;
    } else {
        pose.orientation[i - 3] += off;
    }
    pose
}

pub fn target_frame(goal: &Pose6, spec: &OscillationSpec, time: f64) -> Result<FrameTransform> {
    FrameTransform::from_pose(&target_pose(goal, spec, time))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub start_pose: Pose6,
    pub goal_pose: Pose6,
    pub oscillation: OscillationSpec,
    pub dt: f64,
    pub horizon: usize,
    /// Symmetric per-dimension bound on `|u|`.
    #[serde(default)]
    pub velocity_clamp: Option<[f64; 6]>,
    /// Ticks by which the controller's view of the goal frame lags.
    #[serde(default)]
    pub latency_ticks: usize,
    /// Zero keeps the configured phase; any other value adds a seeded phase shift.
    #[serde(default)]
    pub seed: u64,
}

impl EpisodeConfig {
    fn validate(&self, pc: &PreparedController) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::invalid("episode horizon must be at least 2"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.horizon != pc.horizon() {
            return Err(Error::invalid(format!(
                "episode horizon {} differs from the controller's {}",
                self.horizon,
                pc.horizon()
            )));
        }
        if self.dt != pc.model().dt() {
            return Err(Error::invalid(format!(
                "episode dt {} differs from the controller model's {}",
                self.dt,
                pc.model().dt()
            )));
        }
        if !self.start_pose.is_finite() || !self.goal_pose.is_finite() {
            return Err(Error::invalid("start and goal poses must be finite"));
        }
        if let Some(c) = &self.velocity_clamp {
            if c.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid("velocity clamp entries must be positive"));
            }
        }
        self.oscillation.validate()
    }

    /// Oscillation with the seed's phase shift applied.
    pub fn effective_oscillation(&self) -> OscillationSpec {
        let mut spec = self.oscillation;
        if self.seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            spec.phase += rng.random_range(0.0..2.0 * PI);
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub time: f64,
    pub x: Pose6,
    /// True goal pose at this tick, regardless of latency.
    pub target: Pose6,
    pub u: Vector6<f64>,
    pub diagnostics: StepDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub dt: f64,
    pub records: Vec<TickRecord>,
}

impl EpisodeLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.records.len() as f64 * self.dt
    }

    pub fn poses(&self) -> Vec<Pose6> {
        self.records.iter().map(|r| r.x).collect()
    }

    /// Rebuilds the state sequence from `x_0` and the logged controls.
    pub fn replay(&self) -> Vec<Pose6> {
        let mut out = Vec::with_capacity(self.records.len());
        let Some(first) = self.records.first() else {
            return out;
        };
        let mut x = first.x.to_vector();
        for r in &self.records {
            out.push(Pose6::from_vector(&x));
            x += r.u * self.dt;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(LOG_HEADER).map_err(csv_io)?;
        for r in &self.records {
            let mut row = vec![r.tick.to_string(), r.time.to_string()];
            row.extend(r.x.to_array().iter().map(f64::to_string));
            row.extend(r.target.to_array().iter().map(f64::to_string));
            row.extend(r.u.iter().map(f64::to_string));
            wr.write_record(&row).map_err(csv_io)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}

pub const LOG_HEADER: [&str; 20] = [
    "tick", "time_s", "x", "y", "z", "roll", "pitch", "yaw", "tx", "ty", "tz", "troll", "tpitch", "tyaw", "ux", "uy",
    "uz", "uroll", "upitch", "uyaw",
];

pub fn run_episode(pc: &PreparedController, config: &EpisodeConfig) -> Result<EpisodeLog> {
    config.validate(pc)?;
    let osc = config.effective_oscillation();
    let dt = config.dt;
    let start = FrameTransform::from_pose(&config.start_pose)?;
    let targets: Vec<Pose6> = (0..config.horizon)
        .map(|t| target_pose(&config.goal_pose, &osc, t as f64 * dt))
        .collect();

    let mut x = config.start_pose;
    let mut records = Vec::with_capacity(config.horizon);
    for t in 0..config.horizon {
        let time = t as f64 * dt;
        let (u, diagnostics) = if t + 1 < config.horizon {
            let seen = &targets[t.saturating_sub(config.latency_ticks)];
            let frames = [start, FrameTransform::from_pose(seen)?];
            let ctx = StepContext {
                t,
                x_global: x,
                frames_now: &frames,
            };
            let (mut u, diag) = pc.step(&ctx).map_err(|e| Error::AtTick {
                tick: t,
                source: Box::new(e),
            })?;
            if let Some(c) = &config.velocity_clamp {
                for d in 0..6 {
                    u[d] = u[d].clamp(-c[d], c[d]);
                }
            }
            (u, diag)
        } else {
            (Vector6::zeros(), StepDiagnostics::default())
        };
        records.push(TickRecord {
            tick: t,
            time,
            x,
            target: targets[t],
            u,
            diagnostics,
        });
        x = Pose6::from_vector(&(x.to_vector() + u * dt));
    }
    Ok(EpisodeLog { dt, records })
}

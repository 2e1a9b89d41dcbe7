//! Synthetic grasp demonstrations.
//!
//! Each demonstration starts exactly at its start-frame origin, follows a
//! cubic Bezier curve under a minimum-jerk time profile, and arrives at the
//! end-frame origin moving along the end frame's -Y axis. The orientation
//! holds the start orientation, then blends to the end orientation in the
//! second half of the motion. Smooth noise is added under an envelope that
//! is exactly zero at the start and shrinks to a small terminal amplitude at
//! the end, so both frames see a variance funnel at their own end of the task.

use std::f64::consts::PI;

use nalgebra::{Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DemoSet, Demonstration};
use crate::error::{Error, Result};
use crate::geometry::Pose6;

/// Variation parameters for [`synth_demos`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub horizon: usize,
    pub start_nominal: [f64; 6],
    /// Half-width of the uniform draw around `start_nominal`, per dimension.
    pub start_spread: [f64; 6],
    pub goal_nominal: [f64; 6],
    pub goal_spread: [f64; 6],
    /// Distance of the final Bezier control point along the end frame's +Y axis.
    pub approach_handle: f64,
    /// Fraction of the way from start to the approach handle for the first control point.
    pub lead_fraction: f64,
    /// Normalized-time window over which the orientation blends to the goal.
    pub orientation_blend: (f64, f64),
    /// Mid-path noise amplitude, position (m) and orientation (rad).
    pub noise_mid: (f64, f64),
    /// Noise amplitude remaining at the final step.
    pub noise_terminal: (f64, f64),
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            horizon: super::DEFAULT_HORIZON,
            start_nominal: [-0.30, 0.30, 0.00, 0.30, -0.20, 0.50],
            start_spread: [0.05, 0.05, 0.05, 0.10, 0.10, 0.10],
            goal_nominal: [0.22, 0.27, -0.26, 0.00, 0.00, 1.46],
            goal_spread: [0.10, 0.20, 0.05, 0.20, 0.02, 0.20],
            approach_handle: 0.25,
            lead_fraction: 0.35,
            orientation_blend: (0.5, 0.85),
            noise_mid: (0.05, 0.05),
            noise_terminal: (0.02, 0.085),
        }
    }
}

/// Minimum-jerk progress `10u^3 - 15u^4 + 6u^5` on `[0, 1]`.
pub(crate) fn min_jerk(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

struct NoiseField {
    // per dimension: (amplitude, cycles over the path, phase)
    terms: [[(f64, f64, f64); 3]; 6],
}

impl NoiseField {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let terms = std::array::from_fn(|_| {
            let mut t: [(f64, f64, f64); 3] = std::array::from_fn(|_| {
                (
                    rng.random_range(0.5..1.0),
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.0..2.0 * PI),
                )
            });
            let total: f64 = t.iter().map(|x| x.0).sum();
            for x in &mut t {
                x.0 /= total;
            }
            t
        });
        Self { terms }
    }

    fn at(&self, s: f64) -> Vector6<f64> {
        Vector6::from_fn(|d, _| {
            self.terms[d]
                .iter()
                .map(|(a, f, p)| a * (2.0 * PI * f * s + p).sin())
                .sum()
        })
    }
}

fn jitter(rng: &mut ChaCha8Rng, nominal: &[f64; 6], spread: &[f64; 6]) -> Pose6 {
    Pose6::from_array(std::array::from_fn(|d| {
        if spread[d] > 0.0 {
            nominal[d] + rng.random_range(-spread[d]..=spread[d])
        } else {
            nominal[d]
        }
    }))
}

fn bezier(p: &[Vector3<f64>; 4], s: f64) -> Vector3<f64> {
    let r = 1.0 - s;
    p[0] * (r * r * r) + p[1] * (3.0 * r * r * s) + p[2] * (3.0 * r * s * s) + p[3] * (s * s * s)
}

fn one_demo(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Result<Demonstration> {
    let start = jitter(rng, &spec.start_nominal, &spec.start_spread);
    let goal = jitter(rng, &spec.goal_nominal, &spec.goal_spread);
    let noise = NoiseField::draw(rng);

    let approach_dir = goal.rotation() * Vector3::y();
    let p3 = goal.position;
    let p2 = p3 + approach_dir * spec.approach_handle;
    let p0 = start.position;
    let p1 = p0 + (p2 - p0) * spec.lead_fraction;
    let ctrl = [p0, p1, p2, p3];

    let (b0, b1) = spec.orientation_blend;
    let t_len = spec.horizon;
    let traj = (0..t_len)
        .map(|i| {
            let u = i as f64 / (t_len - 1) as f64;
            let s = min_jerk(u);
            let w = min_jerk((u - b0) / (b1 - b0));
            let position = bezier(&ctrl, s);
            let orientation = start.orientation + (goal.orientation - start.orientation) * w;

            let hump = (PI * s).sin().powi(2);
            let tail = s * s * s;
            let n = noise.at(s);
            let pos_env = spec.noise_mid.0 * hump + spec.noise_terminal.0 * tail;
            let rot_env = spec.noise_mid.1 * hump + spec.noise_terminal.1 * tail;
            Pose6::new(
                position + n.fixed_rows::<3>(0) * pos_env,
                orientation + n.fixed_rows::<3>(3) * rot_env,
            )
        })
        .collect();
    Demonstration::new(traj, start, goal)
}

/// Generates `n` demonstrations, deterministic in `seed`.
pub fn synth_demos(n: usize, seed: u64, spec: &SynthSpec) -> Result<DemoSet> {
    if n == 0 {
        return Err(Error::invalid("synth_demos needs n >= 1"));
    }
    if spec.horizon < 2 {
        return Err(Error::invalid("synthetic horizon must be at least 2"));
    }
    let (b0, b1) = spec.orientation_blend;
    if !(0.0..1.0).contains(&b0) || b1 <= b0 || b1 > 1.0 {
        return Err(Error::invalid(
            "orientation blend window must satisfy 0 <= start < end <= 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demos = (0..n).map(|_| one_demo(&mut rng, spec)).collect::<Result<Vec<_>>>()?;
    DemoSet::from_equal_length(demos)
}

//! Demonstration trajectories and their task encoding in the start and end frames.

mod io;
mod synth;

pub use io::{load_set, save_set, MANIFEST_FILE, MANIFEST_VERSION};
pub use synth::{synth_demos, SynthSpec};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{encode_column, pose_of_column, unwrap_trajectory, FrameTransform, Pose6, Vector7, POSE_DIM};

/// Default number of resampled timesteps per demonstration.
pub const DEFAULT_HORIZON: usize = 200;

/// One recorded trajectory with the poses of its start and end frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub global_trajectory: Vec<Pose6>,
    pub start_pose: Pose6,
    pub end_pose: Pose6,
}

impl Demonstration {
    pub fn new(mut global_trajectory: Vec<Pose6>, start_pose: Pose6, end_pose: Pose6) -> Result<Self> {
        if global_trajectory.len() < 2 {
            return Err(Error::invalid("a demonstration needs at least 2 poses"));
        }
        if !global_trajectory.iter().all(Pose6::is_finite) {
            return Err(Error::invalid("demonstration poses must be finite"));
        }
        unwrap_trajectory(&mut global_trajectory);
        // validates finiteness of the frame poses
        FrameTransform::from_pose(&start_pose)?;
        FrameTransform::from_pose(&end_pose)?;
        Ok(Self {
            global_trajectory,
            start_pose,
            end_pose,
        })
    }

    pub fn len(&self) -> usize {
        self.global_trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global_trajectory.is_empty()
    }

    pub fn start_frame(&self) -> FrameTransform {
        FrameTransform::from_pose(&self.start_pose).expect("validated at construction")
    }

    pub fn end_frame(&self) -> FrameTransform {
        FrameTransform::from_pose(&self.end_pose).expect("validated at construction")
    }

    /// Frames in encoding order: start, then end.
    pub fn frames(&self) -> [FrameTransform; 2] {
        [self.start_frame(), self.end_frame()]
    }
}

/// Demonstrations sharing a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    demonstrations: Vec<Demonstration>,
    common_t: usize,
}

impl DemoSet {
    /// Resamples every demonstration to `horizon` steps.
    pub fn resampled(demos: Vec<Demonstration>, horizon: usize) -> Result<Self> {
        if demos.is_empty() {
            return Err(Error::invalid("demo set is empty"));
        }
        let demonstrations = demos
            .into_iter()
            .map(|d| {
                let traj = resample(&d.global_trajectory, horizon)?;
                Ok(Demonstration {
                    global_trajectory: traj,
                    ..d
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            demonstrations,
            common_t: horizon,
        })
    }

    /// Wraps demonstrations that already share one length.
    pub fn from_equal_length(demos: Vec<Demonstration>) -> Result<Self> {
        let Some(first) = demos.first() else {
            return Err(Error::invalid("demo set is empty"));
        };
        let t = first.len();
        if let Some(i) = demos.iter().position(|d| d.len() != t) {
            return Err(Error::invalid(format!(
                "demonstration {i} has {} steps, expected {t}",
                demos[i].len()
            )));
        }
        Ok(Self {
            demonstrations: demos,
            common_t: t,
        })
    }

    pub fn demonstrations(&self) -> &[Demonstration] {
        &self.demonstrations
    }

    pub fn len(&self) -> usize {
        self.demonstrations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demonstrations.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.common_t
    }

    /// SHA-256 over every stored number, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.common_t as u64).to_le_bytes());
        for d in &self.demonstrations {
            for v in d.start_pose.to_array().iter().chain(d.end_pose.to_array().iter()) {
                h.update(v.to_le_bytes());
            }
            for p in &d.global_trajectory {
                for v in p.to_array() {
                    h.update(v.to_le_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }
}

/// `[time; block_1; ...; block_J]` encoding of one demonstration, one column per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskEncoding {
    pub data: DMatrix<f64>,
    pub frames: usize,
}

impl TaskEncoding {
    pub fn horizon(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Frame-local pose at step `t` (0-based) in frame `j`.
    pub fn local_pose(&self, j: usize, t: usize) -> Pose6 {
        let start = 1 + j * POSE_DIM;
        Pose6::from_vector(&self.data.fixed_view::<6, 1>(start, t).into_owned())
    }

    /// Maps block `j` back to the global frame.
    pub fn decode(&self, j: usize, frame: &FrameTransform) -> Vec<Pose6> {
        (0..self.horizon())
            .map(|t| {
                let c = encode_column(self.data[(0, t)], &self.local_pose(j, t));
                pose_of_column(&frame.to_global(&c))
            })
            .collect()
    }
}

/// Encodes one demonstration in the given frames.
pub fn encode_demo(demo: &Demonstration, frames: &[FrameTransform]) -> TaskEncoding {
    let t_len = demo.len();
    let dim = 1 + frames.len() * POSE_DIM;
    let mut data = DMatrix::zeros(dim, t_len);
    for (t, pose) in demo.global_trajectory.iter().enumerate() {
        let time = (t + 1) as f64;
        data[(0, t)] = time;
        let global: Vector7 = encode_column(time, pose);
        for (j, frame) in frames.iter().enumerate() {
            let local = frame.to_frame(&global);
            data.view_mut((1 + j * POSE_DIM, t), (POSE_DIM, 1))
                .copy_from(&local.fixed_rows::<6>(1));
        }
    }
    TaskEncoding {
        data,
        frames: frames.len(),
    }
}

/// Encodes every demonstration in its own start and end frames.
pub fn encode(set: &DemoSet) -> Vec<TaskEncoding> {
    set.demonstrations.iter().map(|d| encode_demo(d, &d.frames())).collect()
}

/// Pools the columns of several encodings into one sample matrix.
pub fn pool(encodings: &[TaskEncoding]) -> Result<DMatrix<f64>> {
    let Some(first) = encodings.first() else {
        return Err(Error::invalid("no encodings to pool"));
    };
    let dim = first.dim();
    if encodings.iter().any(|e| e.dim() != dim) {
        return Err(Error::invalid("encodings differ in dimension"));
    }
    let total: usize = encodings.iter().map(TaskEncoding::horizon).sum();
    let mut out = DMatrix::zeros(dim, total);
    let mut col = 0;
    for e in encodings {
        out.columns_mut(col, e.horizon()).copy_from(&e.data);
        col += e.horizon();
    }
    Ok(out)
}

/// Linear resampling at uniformly spaced parameters. Angles are unwrapped
/// before interpolation; both endpoints are kept exactly.
pub fn resample(traj: &[Pose6], count: usize) -> Result<Vec<Pose6>> {
    if traj.len() < 2 {
        return Err(Error::invalid(format!(
            "cannot resample a trajectory of {} poses",
            traj.len()
        )));
    }
    if count < 2 {
        return Err(Error::invalid("resample target count must be at least 2"));
    }
    let mut src = traj.to_vec();
    unwrap_trajectory(&mut src);
    if count == src.len() {
        return Ok(src);
    }
    let last = src.len() - 1;
    let out = (0..count)
        .map(|i| {
            let u = (i * last) as f64 / (count - 1) as f64;
            let k = (u.floor() as usize).min(last);
            if k == last {
                return src[last];
            }
            let f = u - k as f64;
            let a = src[k].to_vector();
            let b = src[k + 1].to_vector();
            Pose6::from_vector(&(a + (b - a) * f))
        })
        .collect();
    Ok(out)
}

//! Gaussian mixtures over task encodings.
//!
//! A [`JointGmm`] is fitted by EM over `[time; block_1; ...; block_J]`
//! columns. [`split`] slices it into one [`FrameGmm`] per frame, and
//! [`combine`] fuses the frame models into a single global model for the
//! current frame placements by multiplying the linearly transformed
//! Gaussians component by component.

mod em;
mod io;

pub use em::{fit_demo_set, fit_em, EmFit, EmOptions, COVARIANCE_FLOOR, DEFAULT_COMPONENTS};
pub use io::{load_model, save_model, EmSummary, ModelFile, MODEL_FORMAT, MODEL_VERSION};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{FrameTransform, POSE_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianComponent {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Mixture of equally sized Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    components: Vec<GaussianComponent>,
}

impl Gmm {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::invalid("a mixture needs at least one component"));
        };
        let dim = first.dim();
        for (k, c) in components.iter().enumerate() {
            if c.dim() != dim || c.covariance.shape() != (dim, dim) {
                return Err(Error::invalid(format!("component {k} has inconsistent dimensions")));
            }
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::invalid(format!(
                    "component {k} weight {} outside (0, 1]",
                    c.weight
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("component weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// Same mixture with components reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            components: order.iter().map(|&i| self.components[i].clone()).collect(),
        }
    }
}

impl AsRef<Gmm> for Gmm {
    fn as_ref(&self) -> &Gmm {
        self
    }
}

/// Mixture over all frames' encodings, dimension `1 + J * D`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGmm {
    gmm: Gmm,
    frames: usize,
}

impl JointGmm {
    pub fn new(gmm: Gmm, frames: usize) -> Result<Self> {
        if frames == 0 || gmm.dim() != 1 + frames * POSE_DIM {
            return Err(Error::invalid(format!(
                "joint mixture of dimension {} cannot hold {frames} frames",
                gmm.dim()
            )));
        }
        Ok(Self { gmm, frames })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn gmm(&self) -> &Gmm {
        &self.gmm
    }
}

/// Mixture over `[time; pose in frame j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGmm {
    pub frame_id: usize,
    gmm: Gmm,
}

impl FrameGmm {
    pub fn gmm(&self) -> &Gmm {
        &self.gmm
    }
}

impl AsRef<Gmm> for FrameGmm {
    fn as_ref(&self) -> &Gmm {
        &self.gmm
    }
}

/// Global mixture for one instant's frame placements.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedGmm(Gmm);

impl CombinedGmm {
    pub fn gmm(&self) -> &Gmm {
        &self.0
    }
}

impl AsRef<Gmm> for CombinedGmm {
    fn as_ref(&self) -> &Gmm {
        &self.0
    }
}

/// Slices the joint mixture into one mixture per frame.
pub fn split(joint: &JointGmm) -> Vec<FrameGmm> {
    (0..joint.frames)
        .map(|j| {
            let idx: Vec<usize> = std::iter::once(0)
                .chain((0..POSE_DIM).map(|d| 1 + j * POSE_DIM + d))
                .collect();
            let components = joint
                .gmm
                .components
                .iter()
                .map(|c| GaussianComponent {
                    weight: c.weight,
                    mean: DVector::from_fn(idx.len(), |r, _| c.mean[idx[r]]),
                    covariance: DMatrix::from_fn(idx.len(), idx.len(), |r, s| c.covariance[(idx[r], idx[s])]),
                })
                .collect();
            FrameGmm {
                frame_id: j,
                gmm: Gmm { components },
            }
        })
        .collect()
}

/// One Gaussian `N(mean, cov)` observed through `x -> a x + b`.
pub struct TransformedGaussian<'a> {
    pub mean: &'a DVector<f64>,
    pub covariance: &'a DMatrix<f64>,
    pub a: &'a DMatrix<f64>,
    pub b: &'a DVector<f64>,
}

pub(crate) fn spd_inverse(m: &DMatrix<f64>, what: impl FnOnce() -> String) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::singular(what()))?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Product of linearly transformed Gaussians in information form:
/// `cov = (sum_j (A_j S_j A_j^T)^-1)^-1`,
/// `mean = cov * sum_j (A_j S_j A_j^T)^-1 (A_j m_j + b_j)`.
pub fn gaussian_product(inputs: &[TransformedGaussian<'_>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let Some(first) = inputs.first() else {
        return Err(Error::invalid("gaussian_product needs at least one input"));
    };
    let dim = first.a.nrows();
    let mut precision = DMatrix::zeros(dim, dim);
    let mut info = DVector::zeros(dim);
    for (j, g) in inputs.iter().enumerate() {
        if g.a.shape() != (dim, g.mean.len()) || g.b.len() != dim {
            return Err(Error::invalid(format!("input {j} has inconsistent dimensions")));
        }
        let mut cov = g.a * g.covariance * g.a.transpose();
        symmetrize(&mut cov);
        let lambda = spd_inverse(&cov, || format!("transformed covariance of input {j}"))?;
        let mean = g.a * g.mean + g.b;
        info += &lambda * mean;
        precision += lambda;
    }
    let cov = spd_inverse(&precision, || "summed precision".to_string())?;
    let mean = &cov * info;
    Ok((mean, cov))
}

/// Fuses frame mixtures under the given frame placements, component by component.
pub fn combine(frame_gmms: &[FrameGmm], frames_at_t: &[FrameTransform]) -> Result<CombinedGmm> {
    if frame_gmms.is_empty() || frame_gmms.len() != frames_at_t.len() {
        return Err(Error::invalid(format!(
            "{} frame mixtures but {} frame placements",
            frame_gmms.len(),
            frames_at_t.len()
        )));
    }
    let k = frame_gmms[0].gmm.k();
    if frame_gmms.iter().any(|f| f.gmm.k() != k) {
        return Err(Error::invalid("frame mixtures differ in component count"));
    }
    let placements: Vec<(DMatrix<f64>, DVector<f64>)> = frames_at_t
        .iter()
        .map(|f| {
            let a = f.a();
            let b = f.b();
            (
                DMatrix::from_column_slice(a.nrows(), a.ncols(), a.as_slice()),
                DVector::from_column_slice(b.as_slice()),
            )
        })
        .collect();

    let components = (0..k)
        .map(|c| {
            let inputs: Vec<TransformedGaussian<'_>> = frame_gmms
                .iter()
                .zip(&placements)
                .map(|(f, (a, b))| {
                    let comp = &f.gmm.components[c];
                    TransformedGaussian {
                        mean: &comp.mean,
                        covariance: &comp.covariance,
                        a,
                        b,
                    }
                })
                .collect();
            let (mean, covariance) = gaussian_product(&inputs).map_err(|e| match e {
                Error::NumericalSingularity { context } => Error::singular(format!("component {c}: {context}")),
                other => other,
            })?;
            Ok(GaussianComponent {
                weight: frame_gmms[0].gmm.components[c].weight,
                mean,
                covariance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CombinedGmm(Gmm { components }))
}

//! Versioned JSON model file for a fitted joint mixture.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GaussianComponent, Gmm, JointGmm};
use crate::error::{Error, Result};
use crate::geometry::{EULER_CONVENTION, POSE_DIM};

pub const MODEL_FORMAT: &str = "duallqr-model";
pub const MODEL_VERSION: u32 = 1;

/// On-disk layout. Covariances are flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub k: usize,
    pub j: usize,
    pub d: usize,
    pub euler_convention: String,
    /// Identifies the dataset or generator configuration the model was fitted on.
    pub fingerprint: String,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em: Option<EmSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmSummary {
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

impl ModelFile {
    pub fn from_model(model: &JointGmm, fingerprint: impl Into<String>, em: Option<EmSummary>) -> Self {
        let comps = model.gmm().components();
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            k: comps.len(),
            j: model.frames(),
            d: POSE_DIM,
            euler_convention: EULER_CONVENTION.to_string(),
            fingerprint: fingerprint.into(),
            weights: comps.iter().map(|c| c.weight).collect(),
            means: comps.iter().map(|c| c.mean.iter().copied().collect()).collect(),
            covariances: comps
                .iter()
                .map(|c| c.covariance.transpose().iter().copied().collect())
                .collect(),
            em,
        }
    }

    pub fn to_model(&self) -> Result<JointGmm> {
        let bad = |msg: String| Error::invalid(format!("model file: {msg}"));
        if self.format != MODEL_FORMAT {
            return Err(bad(format!("unknown format tag {:?}", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        if self.d != POSE_DIM {
            return Err(bad(format!("pose dimension {} is not {POSE_DIM}", self.d)));
        }
        if self.euler_convention != EULER_CONVENTION {
            return Err(bad(format!(
                "angle convention {:?} differs from {EULER_CONVENTION:?}",
                self.euler_convention
            )));
        }
        let dim = 1 + self.j * self.d;
        if self.weights.len() != self.k || self.means.len() != self.k || self.covariances.len() != self.k {
            return Err(bad(format!("expected {} components", self.k)));
        }
        let comps = (0..self.k)
            .map(|c| {
                if self.means[c].len() != dim || self.covariances[c].len() != dim * dim {
                    return Err(bad(format!("component {c} does not have dimension {dim}")));
                }
                Ok(GaussianComponent {
                    weight: self.weights[c],
                    mean: DVector::from_column_slice(&self.means[c]),
                    covariance: DMatrix::from_row_slice(dim, dim, &self.covariances[c]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        JointGmm::new(Gmm::new(comps)?, self.j)
    }
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file).map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, Some(e.line() as u64), e.to_string()))
}

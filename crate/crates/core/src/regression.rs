//! Gaussian mixture regression on the time input.
//!
//! Conditions a `[time; pose]` mixture on a time value. Each component
//! contributes its conditional Gaussian, weighted by its normalized
//! likelihood of the time value. The output covariance is the weighted sum of
//! the conditional covariances; it omits the spread-of-means term.

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use crate::geometry::{ENCODED_DIM, POSE_DIM};
use crate::mixture::{Gmm, COVARIANCE_FLOOR};

/// Reference pose mean and covariance at one time value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEstimate {
    pub mean: Vector6<f64>,
    pub covariance: Matrix6<f64>,
}

impl ConditionalEstimate {
    /// Covariance with the diagonal floor added.
    pub fn floored_covariance(&self) -> Matrix6<f64> {
        self.covariance + Matrix6::identity() * COVARIANCE_FLOOR
    }
}

/// Per-step GMR output over a horizon; index `i` holds time `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrack {
    pub means: Vec<Vector6<f64>>,
    pub covariances: Vec<Matrix6<f64>>,
}

impl ReferenceTrack {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn at(&self, i: usize) -> ConditionalEstimate {
        ConditionalEstimate {
            mean: self.means[i],
            covariance: self.covariances[i],
        }
    }
}

/// Normalized activations `h_k(t)`, computed in log space. If every
/// component's log-activation is non-finite, the component whose time mean
/// is nearest to `t` takes all the weight.
pub fn activations(gmm: &Gmm, t: f64) -> Vec<f64> {
    let logs: Vec<f64> = gmm
        .components()
        .iter()
        .map(|c| {
            let var = c.covariance[(0, 0)];
            let d = t - c.mean[0];
            c.weight.ln() - 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var)
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let nearest = gmm
            .components()
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let (ma, mb) = (a.1.mean[0], b.1.mean[0]);
                // distances can tie after rounding when t is huge; prefer the mean on t's side
                (ma - t)
                    .abs()
                    .total_cmp(&(mb - t).abs())
                    .then_with(|| (mb * t.signum()).total_cmp(&(ma * t.signum())))
            })
            .map_or(0, |(i, _)| i);
        return (0..gmm.k()).map(|i| if i == nearest { 1.0 } else { 0.0 }).collect();
    }
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Dimension-generic conditioning on input row 0.
pub fn condition_on_time(gmm: &Gmm, t: f64) -> (DVector<f64>, DMatrix<f64>) {
    let out = gmm.dim() - 1;
    let h = activations(gmm, t);
    let mut mean = DVector::zeros(out);
    let mut cov = DMatrix::zeros(out, out);
    for (c, hk) in gmm.components().iter().zip(h) {
        if hk == 0.0 {
            continue;
        }
        let s_ii = c.covariance[(0, 0)];
        let s_oi = c.covariance.view((1, 0), (out, 1));
        let mu_o = c.mean.rows(1, out);
        let gain = s_oi / s_ii;
        mean += (mu_o + &gain * (t - c.mean[0])) * hk;
        let cond = c.covariance.view((1, 1), (out, out)) - &gain * s_oi.transpose();
        cov += cond * hk;
    }
    let t = cov.transpose();
    cov = (cov + t) * 0.5;
    (mean, cov)
}

/// Reference pose at time `t` from a `[time; pose]` mixture.
///
/// # Panics
/// If the mixture dimension is not `1 + 6`.
pub fn gmr(gmm: impl AsRef<Gmm>, t: f64) -> ConditionalEstimate {
    let gmm = gmm.as_ref();
    assert_eq!(gmm.dim(), ENCODED_DIM, "gmr expects a [time; pose] mixture");
    let (m, c) = condition_on_time(gmm, t);
    ConditionalEstimate {
        mean: Vector6::from_column_slice(m.as_slice()),
        covariance: Matrix6::from_fn(|r, s| c[(r, s)]),
    }
}

/// GMR evaluated at times `1..=horizon`.
pub fn gmr_track(gmm: impl AsRef<Gmm>, horizon: usize) -> ReferenceTrack {
    let gmm = gmm.as_ref();
    let (means, covariances) = (1..=horizon)
        .map(|t| {
            let e = gmr(gmm, t as f64);
            (e.mean, e.covariance)
        })
        .unzip();
    debug_assert_eq!(POSE_DIM, 6);
    ReferenceTrack { means, covariances }
}

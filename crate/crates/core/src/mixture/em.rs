use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{symmetrize, GaussianComponent, Gmm, JointGmm};
use crate::demos::{encode, pool, DemoSet};
use crate::error::{Error, Result};

/// Added to every covariance diagonal after each M-step.
pub const COVARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub max_iterations: usize,
    /// Stop once the log-likelihood improves by less than this.
    pub tolerance: f64,
    pub covariance_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-6,
            covariance_floor: COVARIANCE_FLOOR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: JointGmm,
    /// Log-likelihood of each evaluated iterate, in order.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap was reached first.
    pub converged: bool,
}

fn floored_cov(centered: &DMatrix<f64>, weights: Option<&[f64]>, total: f64, floor: f64) -> DMatrix<f64> {
    let scaled = match weights {
        Some(w) => {
            let mut s = centered.clone();
            for (mut col, wi) in s.column_iter_mut().zip(w) {
                col *= wi.sqrt();
            }
            s
        }
        None => centered.clone(),
    };
    let mut cov = &scaled * scaled.transpose() / total;
    symmetrize(&mut cov);
    for d in 0..cov.nrows() {
        cov[(d, d)] += floor;
    }
    cov
}

fn center(samples: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = samples.clone();
    for mut col in c.column_iter_mut() {
        col -= mean;
    }
    c
}

/// Time-binned start: sort by the time row (ties shuffled by `seed`) and cut into `k` equal bins.
fn initial_components(samples: &DMatrix<f64>, k: usize, seed: u64, floor: f64) -> Vec<GaussianComponent> {
    let n = samples.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by(|&a, &b| samples[(0, a)].total_cmp(&samples[(0, b)]));
    (0..k)
        .map(|c| {
            let lo = c * n / k;
            let hi = (c + 1) * n / k;
            let bin = samples.select_columns(&order[lo..hi]);
            let count = (hi - lo) as f64;
            let mean = bin.column_mean();
            let cov = floored_cov(&center(&bin, &mean), None, count, floor);
            GaussianComponent {
                weight: count / n as f64,
                mean,
                covariance: cov,
            }
        })
        .collect()
}

/// Per-component log densities `log pi_k + log N(x | mu_k, Sigma_k)`, one row per component.
fn weighted_log_densities(samples: &DMatrix<f64>, comps: &[GaussianComponent]) -> Result<DMatrix<f64>> {
    let (dim, n) = samples.shape();
    let mut out = DMatrix::zeros(comps.len(), n);
    for (k, c) in comps.iter().enumerate() {
        let chol = c
            .covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::singular(format!("EM component {k} covariance")))?;
        let l = chol.l();
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let z = l
            .solve_lower_triangular(&center(samples, &c.mean))
            .ok_or_else(|| Error::singular(format!("EM component {k} factor")))?;
        let base = c.weight.ln() - 0.5 * (dim as f64 * (2.0 * PI).ln() + log_det);
        for (i, col) in z.column_iter().enumerate() {
            out[(k, i)] = base - 0.5 * col.norm_squared();
        }
    }
    Ok(out)
}

/// Normalizes each column of log densities in place into responsibilities
/// and returns the total log-likelihood.
fn responsibilities(log_dens: &mut DMatrix<f64>) -> f64 {
    let mut ll = 0.0;
    for mut col in log_dens.column_iter_mut() {
        let m = col.max();
        let lse = m + col.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        ll += lse;
        col.apply(|v| *v = (*v - lse).exp());
    }
    ll
}

/// Default number of mixture components.
pub const DEFAULT_COMPONENTS: usize = 6;

/// Encodes a demonstration set in its start and end frames and fits the joint mixture.
pub fn fit_demo_set(set: &DemoSet, k: usize, seed: u64, opts: &EmOptions) -> Result<EmFit> {
    let samples = pool(&encode(set))?;
    fit_em(&samples, 2, k, seed, opts)
}

/// Fits a `k`-component mixture to the columns of `samples` (`dim x n`),
/// where row 0 is time and the remaining rows are `frames` pose blocks.
pub fn fit_em(samples: &DMatrix<f64>, frames: usize, k: usize, seed: u64, opts: &EmOptions) -> Result<EmFit> {
    let (dim, n) = samples.shape();
    if k == 0 {
        return Err(Error::invalid("component count must be at least 1"));
    }
    if n < k * (dim + 1) {
        return Err(Error::invalid(format!(
            "{n} samples are too few for {k} components of dimension {dim}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    let first = samples.column(0);
    if samples.column_iter().all(|c| c == first) {
        return Err(Error::SingularData("all samples are identical".into()));
    }

    let mut comps = initial_components(samples, k, seed, opts.covariance_floor);
    let mut history = Vec::new();
    let mut converged = false;
    let mut best: Option<(f64, Vec<GaussianComponent>)> = None;

    for _ in 0..opts.max_iterations {
        let mut resp = weighted_log_densities(samples, &comps)?;
        let ll = responsibilities(&mut resp);
        if best.as_ref().map_or(true, |(b, _)| ll > *b) {
            best = Some((ll, comps.clone()));
        }
        let improved = history.last().map(|prev| ll - prev);
        history.push(ll);
        if improved.is_some_and(|d| d < opts.tolerance) {
            converged = true;
            break;
        }

        // M-step
        comps = (0..k)
            .map(|c| {
                let r: Vec<f64> = resp.row(c).iter().copied().collect();
                let nk: f64 = r.iter().sum();
                if nk <= f64::MIN_POSITIVE * n as f64 {
                    return Err(Error::SingularData(format!("EM component {c} lost all responsibility")));
                }
                let mean = samples * DVector::from_column_slice(&r) / nk;
                let cov = floored_cov(&center(samples, &mean), Some(&r), nk, opts.covariance_floor);
                Ok(GaussianComponent {
                    weight: nk / n as f64,
                    mean,
                    covariance: cov,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        for c in &mut comps {
            c.weight /= total;
        }
    }
    if !converged {
        log::warn!(
            "EM stopped after {} iterations without reaching tolerance {}",
            opts.max_iterations,
            opts.tolerance
        );
    }

    let (_, comps) = best.expect("at least one iteration");
    Ok(EmFit {
        model: JointGmm::new(Gmm::new(comps)?, frames)?,
        iterations: history.len(),
        log_likelihood: history,
        converged,
    })
}

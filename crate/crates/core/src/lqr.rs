//! Discrete LQR on the 6-D integrator `x[t+1] = A x[t] + B u[t]` with
//! `A = I` and `B = dt I`.
//!
//! Two gain computations are provided. [`gain_infinite`] evaluates the
//! Riccati map once from the current precision only. [`fit_finite`] runs the
//! finite-horizon backward recursion over a reference track and yields a
//! feedback gain, a feedforward gain and an output vector per step.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::regression::ReferenceTrack;

/// Integrator plant with step `dt` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    dt: f64,
}

impl SystemModel {
    pub const DEFAULT_DT: f64 = 0.05;

    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn a(&self) -> Matrix6<f64> {
        Matrix6::identity()
    }

    pub fn b(&self) -> Matrix6<f64> {
        Matrix6::identity() * self.dt
    }

    pub fn step(&self, x: &Vector6<f64>, u: &Vector6<f64>) -> Vector6<f64> {
        self.a() * x + self.b() * u
    }
}

impl Default for SystemModel {
    fn default() -> Self {
        Self { dt: Self::DEFAULT_DT }
    }
}

/// Control cost `R = 10^rho I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub rho: f64,
}

impl CostSpec {
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::invalid("control cost exponent must be finite"));
        }
        Ok(Self { rho })
    }

    pub fn r(&self) -> Matrix6<f64> {
        Matrix6::identity() * 10f64.powf(self.rho)
    }
}

fn spd_solve(m: &Matrix6<f64>, rhs: &Matrix6<f64>, what: &str) -> Result<Matrix6<f64>> {
    let chol = m.cholesky().ok_or_else(|| Error::singular(what.to_string()))?;
    Ok(chol.solve(rhs))
}

fn symmetric(m: Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

fn check_precision(q: &Matrix6<f64>) -> Result<()> {
    let scale = q.amax().max(1.0);
    if (q - q.transpose()).amax() > 1e-9 * scale {
        return Err(Error::invalid("precision matrix is not symmetric"));
    }
    let min_eig = symmetric(*q).symmetric_eigenvalues().min();
    if min_eig < -1e-9 * scale {
        return Err(Error::invalid(format!(
            "precision matrix is not positive semidefinite (eigenvalue {min_eig})"
        )));
    }
    Ok(())
}

/// Inverse of a covariance through a Cholesky factorization.
pub fn precision_from_covariance(cov: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::singular("covariance is not positive definite"))?;
    Ok(symmetric(chol.inverse()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteGain {
    pub p: Matrix6<f64>,
    pub k: Matrix6<f64>,
}

/// One-shot gain from the current precision `q`:
/// `P = Q - A^T (Q B (B^T Q B + R)^-1 B^T Q - Q) A`,
/// `K = (R + B^T P B)^-1 B^T P A`.
pub fn gain_infinite(q: &Matrix6<f64>, cost: &CostSpec, model: &SystemModel) -> Result<InfiniteGain> {
    check_precision(q)?;
    let (a, b, r) = (model.a(), model.b(), cost.r());
    let inner = spd_solve(&(b.transpose() * q * b + r), &(b.transpose() * q), "B^T Q B + R")?;
    let p = symmetric(q - a.transpose() * (q * b * inner - q) * a);
    let k = spd_solve(&(r + b.transpose() * p * b), &(b.transpose() * p * a), "R + B^T P B")?;
    Ok(InfiniteGain { p, k })
}

/// `u = K (mu - x)`
pub fn control_infinite(k: &Matrix6<f64>, reference: &Vector6<f64>, x: &Vector6<f64>) -> Vector6<f64> {
    k * (reference - x)
}

/// Gains of a fitted finite-horizon tracker. Step `t` in `0..horizon-1`
/// has a feedback gain, a feedforward gain, and uses output vector `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSchedule {
    pub kp: Vec<Matrix6<f64>>,
    pub kv: Vec<Matrix6<f64>>,
    pub v: Vec<Vector6<f64>>,
    pub s: Vec<Matrix6<f64>>,
    pub q: Vec<Matrix6<f64>>,
}

impl FiniteSchedule {
    pub fn horizon(&self) -> usize {
        self.v.len()
    }

    pub fn terminal_s(&self) -> &Matrix6<f64> {
        self.s.last().expect("non-empty schedule")
    }

    /// Closed-loop matrix `A - B K_t` for step `t`.
    pub fn closed_loop(&self, t: usize, model: &SystemModel) -> Matrix6<f64> {
        model.a() - model.b() * self.kp[t]
    }
}

/// Backward recursion over a reference track, with `Q_t` the inverse of the
/// floored track covariance.
pub fn fit_finite(track: &ReferenceTrack, cost: &CostSpec, model: &SystemModel) -> Result<FiniteSchedule> {
    let q = (0..track.len())
        .map(|i| precision_from_covariance(&track.at(i).floored_covariance()))
        .collect::<Result<Vec<_>>>()?;
    fit_finite_with_precisions(&track.means, &q, cost, model)
}

/// Backward recursion from `S_T = Q_T`, `v_T = Q_T mu_T`:
///
/// ```text
/// K^V_t = (R + B^T S_{t+1} B)^-1 B^T
/// K^P_t = (R + B^T S_{t+1} B)^-1 B^T S_{t+1} A
/// S_t   = A^T S_{t+1} (A - B K^P_t) + Q_t
/// v_t   = (A - B K^P_t)^T v_{t+1} + Q_t mu_t
/// ```
pub fn fit_finite_with_precisions(
    means: &[Vector6<f64>],
    precisions: &[Matrix6<f64>],
    cost: &CostSpec,
    model: &SystemModel,
) -> Result<FiniteSchedule> {
    let horizon = means.len();
    if horizon < 2 {
        return Err(Error::invalid("finite-horizon fit needs at least 2 steps"));
    }
    if precisions.len() != horizon {
        return Err(Error::invalid("one precision matrix per step is required"));
    }
    for q in precisions {
        check_precision(q)?;
    }
    let (a, b, r) = (model.a(), model.b(), cost.r());

    let mut s = vec![Matrix6::zeros(); horizon];
    let mut v = vec![Vector6::zeros(); horizon];
    let mut kp = vec![Matrix6::zeros(); horizon - 1];
    let mut kv = vec![Matrix6::zeros(); horizon - 1];
    s[horizon - 1] = precisions[horizon - 1];
    v[horizon - 1] = precisions[horizon - 1] * means[horizon - 1];

    for t in (0..horizon - 1).rev() {
        let next = s[t + 1];
        let gram = r + b.transpose() * next * b;
        // R is positive definite, so the factorization cannot fail for PSD S.
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::singular(format!("R + B^T S B at step {t}")))?;
        kv[t] = chol.solve(&b.transpose());
        kp[t] = chol.solve(&(b.transpose() * next * a));
        let closed = a - b * kp[t];
        s[t] = symmetric(a.transpose() * next * closed + precisions[t]);
        v[t] = closed.transpose() * v[t + 1] + precisions[t] * means[t];
    }
    Ok(FiniteSchedule {
        kp,
        kv,
        v,
        s,
        q: precisions.to_vec(),
    })
}

/// `u = -K^P_t x + K^V_t v_{t+1}` for step `t` in `0..horizon-1`.
pub fn control_finite(schedule: &FiniteSchedule, t: usize, x: &Vector6<f64>) -> Result<Vector6<f64>> {
    if t + 1 >= schedule.horizon() {
        return Err(Error::invalid(format!(
            "step {t} outside the schedule's control range 0..{}",
            schedule.horizon() - 1
        )));
    }
    Ok(-schedule.kp[t] * x + schedule.kv[t] * schedule.v[t + 1])
}

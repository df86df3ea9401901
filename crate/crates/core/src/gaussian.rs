use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};
use crate::linalg::Matrix;
use crate::task_space::{BoxSpace, Task};

/// Multivariate Gaussian over a task space (task units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDist {
    mean: Vec<f64>,
    covariance: Matrix,
    diagonal: bool,
}

impl GaussianDist {
    /// Axis-aligned Gaussian from per-dimension standard deviations.
    pub fn diagonal(mean: Vec<f64>, stds: &[f64]) -> Result<Self> {
        let vars: Vec<f64> = stds.iter().map(|s| s * s).collect();
        Self::from_variances(mean, &vars)
    }

    pub fn from_variances(mean: Vec<f64>, variances: &[f64]) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(AclError::DimensionMismatch { expected: mean.len(), got: variances.len() });
        }
        if variances.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(AclError::InvalidConfig("variances must be finite and non-negative".into()));
        }
        Ok(Self { covariance: Matrix::from_diagonal(variances), mean, diagonal: true })
    }

    pub fn full(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if covariance.dim() != mean.len() {
            return Err(AclError::DimensionMismatch { expected: mean.len(), got: covariance.dim() });
        }
        if !covariance.is_symmetric(1e-9) || covariance.min_eigenvalue() < -1e-12 {
            return Err(AclError::InvalidConfig("covariance must be symmetric PSD".into()));
        }
        Ok(Self { mean, covariance, diagonal: false })
    }

    /// Point mass at `mean`.
    pub fn point(mean: Vec<f64>) -> Self {
        let n = mean.len();
        Self { mean, covariance: Matrix::zeros(n), diagonal: true }
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn variances(&self) -> Vec<f64> {
        self.covariance.diagonal()
    }

    pub fn stds(&self) -> Vec<f64> {
        self.variances().into_iter().map(libm::sqrt).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dims()).map(|_| StandardNormal.sample(rng)).collect();
        if self.diagonal {
            return self
                .mean
                .iter()
                .zip(self.stds())
                .zip(&z)
                .map(|((m, s), z)| m + s * z)
                .collect();
        }
        let mut cov = self.covariance.clone();
        cov.add_to_diagonal(1e-12);
        let ch = cov.cholesky().expect("covariance is PSD");
        let lz = ch.mul_vec(&z);
        self.mean.iter().zip(lz).map(|(m, v)| m + v).collect()
    }

    /// Draws a task and clamps it into `space`.
    pub fn sample_clipped<R: Rng + ?Sized>(&self, space: &BoxSpace, rng: &mut R) -> Task {
        space.clip_unchecked(&self.sample(rng))
    }
}

/// Closed-form `KL(p || q)` between two axis-aligned Gaussians given by
/// means and variances.
pub fn kl_diagonal(p_mean: &[f64], p_var: &[f64], q_mean: &[f64], q_var: &[f64]) -> f64 {
    let mut kl = 0.0;
    for d in 0..p_mean.len() {
        let dm = p_mean[d] - q_mean[d];
        kl += libm::log(q_var[d] / p_var[d]) + (p_var[d] + dm * dm) / q_var[d] - 1.0;
    }
    0.5 * kl
}

/// `KL(p || q)` for two diagonal [`GaussianDist`]s.
pub fn kl_between(p: &GaussianDist, q: &GaussianDist) -> f64 {
    kl_diagonal(p.mean(), &p.variances(), q.mean(), &q.variances())
}

//! Sample covariance, signal/noise subspace split and subspace alignment.

use faer::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, HermEigen};
use crate::sim::SnapshotSet;

/// Hermitian sample covariance `(1/T) X X^H`.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub r_hat: CMat,
    pub t_count: usize,
}

impl CovarianceEstimate {
    /// Wrap an arbitrary matrix, symmetrizing it.
    pub fn from_matrix(r: MatRef<'_, c64>, t_count: usize) -> Self {
        Self { r_hat: hermitian_part(r), t_count }
    }

    pub fn m(&self) -> usize {
        self.r_hat.nrows()
    }
}

pub(crate) fn hermitian_part(r: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(r.nrows(), r.ncols(), |i, j| (r[(i, j)] + r[(j, i)].conj()) * 0.5)
}

pub fn sample_covariance(x: &SnapshotSet) -> Result<CovarianceEstimate> {
    covariance_of(x.data.as_ref())
}

/// Covariance of a raw `M x T` snapshot matrix.
pub fn covariance_of(x: MatRef<'_, c64>) -> Result<CovarianceEstimate> {
    let t = x.ncols();
    if t == 0 {
        return Err(Error::Argument("need at least one snapshot".into()));
    }
    let r = x * x.adjoint() * Scale(c64::new(1.0 / t as f64, 0.0));
    Ok(CovarianceEstimate::from_matrix(r.as_ref(), t))
}

/// Signal subspace basis, its eigenvalues and the noise-floor estimate.
#[derive(Debug, Clone)]
pub struct SubspaceSplit {
    /// `M x 3K` orthonormal basis of the dominant eigenvectors.
    pub e_s: CMat,
    pub sigma_s: Vec<f64>,
    /// Mean of the `M - 3K` smallest eigenvalues.
    pub noise_var_hat: f64,
    pub eigen_all: Vec<f64>,
}

pub fn subspace_split(c: &CovarianceEstimate, k_sources: usize) -> Result<SubspaceSplit> {
    let eig = linalg::herm_eigen(c.r_hat.as_ref())?;
    split_eigen(&eig, k_sources)
}

pub(crate) fn split_eigen(eig: &HermEigen, k_sources: usize) -> Result<SubspaceSplit> {
    let m = eig.values.len();
    let d = 3 * k_sources;
    if k_sources == 0 || d >= m {
        return Err(Error::Dimension(format!("need 0 < 3K < M, got K = {k_sources}, M = {m}")));
    }
    let e_s = eig.vectors.subcols(0, d).to_owned();
    let noise = &eig.values[d..];
    Ok(SubspaceSplit {
        e_s,
        sigma_s: eig.values[..d].to_vec(),
        noise_var_hat: noise.iter().sum::<f64>() / noise.len() as f64,
        eigen_all: eig.values.clone(),
    })
}

/// Smallest squared cosine of the principal angles between `span(e_s)` and `span(a)`.
pub fn subspace_alignment(e_s: MatRef<'_, c64>, a: MatRef<'_, c64>) -> Result<f64> {
    if e_s.ncols() != a.ncols() || e_s.nrows() != a.nrows() {
        return Err(Error::Dimension(format!(
            "shapes differ: {}x{} vs {}x{}",
            e_s.nrows(),
            e_s.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.ncols();
    if linalg::rank(a, 1e-10)? < n {
        return Err(Error::RankDeficientMatrix);
    }
    let qa = linalg::orth(a);
    let qe = linalg::orth(e_s);
    let s = linalg::singular_values((qe.adjoint() * &qa).as_ref())?;
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min * min).clamp(0.0, 1.0))
}

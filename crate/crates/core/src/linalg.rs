//! Thin helpers over `faer` for the decompositions the estimators need.

use faer::prelude::*;
use faer::Side;
use faer::linalg::solvers::DenseSolveCore;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;
pub type RMat = Mat<f64>;

/// Clear dirty upper SIMD register state left by wide-vector kernels.
///
/// Without this, scalar libm calls (`exp`, `sin`, `cos`) that follow a
/// dense product can run an order of magnitude slower on AVX-512 hardware.
#[inline]
pub fn clear_simd_state() {
    #[cfg(target_arch = "x86_64")]
    {
        #[target_feature(enable = "avx")]
        unsafe fn zero_upper() {
            std::arch::x86_64::_mm256_zeroupper();
        }
        if std::arch::is_x86_feature_detected!("avx") {
            // SAFETY: the feature was detected at runtime.
            unsafe { zero_upper() }
        }
    }
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, ordered like `values`.
    pub vectors: CMat,
}

/// Eigendecomposition of a Hermitian matrix, sorted descending.
///
/// Only the lower triangle is read. Ties keep the solver's index order.
pub fn herm_eigen(a: MatRef<'_, c64>) -> Result<HermEigen> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = a.nrows();
    let s = evd.S();
    let u = evd.U();
    let raw: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok(HermEigen { values, vectors })
}

/// Real symmetric eigendecomposition, sorted descending.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, RMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = a.nrows();
    let s = evd.S();
    let u = evd.U();
    let raw: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok((values, vectors))
}

/// General (non-Hermitian) complex eigendecomposition: `(eigenvalues, eigenvectors)`.
pub fn eigen(a: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)> {
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = a.nrows();
    let vals = (0..n).map(|i| evd.S()[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::Eigen(format!("svd: {e:?}")))
}

/// 2-norm condition number; infinite for singular input.
pub fn cond(a: MatRef<'_, c64>) -> Result<f64> {
    let s = singular_values(a)?;
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

/// Numerical rank: singular values above `rtol * sigma_max`.
pub fn rank(a: MatRef<'_, c64>, rtol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let max = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&v| v > rtol * max).count())
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
/// Returns the pseudoinverse and the retained rank.
pub fn pinv(a: MatRef<'_, c64>, rtol: f64) -> Result<(CMat, usize)> {
    let svd = a.thin_svd().map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    let max = (0..k).map(|i| s[i].re).fold(0.0, f64::max);
    let inv: Vec<f64> = (0..k)
        .map(|i| {
            let x = s[i].re;
            if x > rtol * max { 1.0 / x } else { 0.0 }
        })
        .collect();
    let r = inv.iter().filter(|&&x| x != 0.0).count();
    let vs = Mat::from_fn(v.nrows(), k, |i, j| v[(i, j)] * inv[j]);
    Ok((&vs * u.adjoint(), r))
}

/// Inverse of a square complex matrix via partial-pivot LU.
pub fn inverse(a: MatRef<'_, c64>) -> CMat {
    a.partial_piv_lu().inverse()
}

/// Orthonormal basis of the column space (thin QR).
pub fn orth(a: MatRef<'_, c64>) -> CMat {
    a.qr().compute_thin_Q()
}

/// `sum_ij |a_ij|^2`
pub fn fro2(a: MatRef<'_, c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s
}

/// Outcome of a symmetric positive (semi)definite solve.
#[derive(Debug, Clone)]
pub struct SpdSolve {
    pub x: RMat,
    /// True when Cholesky was skipped for the eigen-based pseudo-solve.
    pub fallback: bool,
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Solve `A X = B` for symmetric PSD `A`.
///
/// Uses Cholesky unless the spectrum is too spread (min eig below
/// `1e-12 * max`), where it drops to a truncated eigen pseudo-solve.
pub fn spd_solve(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<SpdSolve> {
    let (vals, vecs) = sym_eigen(a)?;
    let max_eig = vals.first().copied().unwrap_or(0.0);
    let min_eig = vals.last().copied().unwrap_or(0.0);
    let cut = 1e-12 * max_eig.abs();
    if min_eig >= cut && min_eig > 0.0 {
        if let Ok(llt) = a.llt(Side::Lower) {
            return Ok(SpdSolve { x: llt.solve(b), fallback: false, min_eig, max_eig });
        }
    }
    let vtb = vecs.transpose() * b;
    let scaled = Mat::from_fn(vtb.nrows(), vtb.ncols(), |i, j| {
        if vals[i] > cut && vals[i] > 0.0 { vtb[(i, j)] / vals[i] } else { 0.0 }
    });
    Ok(SpdSolve { x: &vecs * &scaled, fallback: true, min_eig, max_eig })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_eigen_sorts_descending() {
        let d = [1.0, 5.0, 3.0, 4.0];
        let a = Mat::from_fn(4, 4, |i, j| if i == j { c64::new(d[i], 0.0) } else { c64::new(0.0, 0.0) });
        let e = herm_eigen(a.as_ref()).unwrap();
        for (v, want) in e.values.iter().zip([5.0, 4.0, 3.0, 1.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_tall_full_rank() {
        let a = Mat::from_fn(5, 2, |i, j| c64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let (p, r) = pinv(a.as_ref(), 1e-10).unwrap();
        assert_eq!(r, 2);
        let id = &p * &a;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - c64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spd_solve_falls_back_on_singular() {
        let a = Mat::from_fn(2, 2, |_, _| 1.0);
        let b = Mat::from_fn(2, 1, |_, _| 2.0);
        let s = spd_solve(a.as_ref(), b.as_ref()).unwrap();
        assert!(s.fallback);
        assert!((s.x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((s.x[(1, 0)] - 1.0).abs() < 1e-12);
    }
}

//! Approximate Cramér-Rao bound for the angular parameters.
//!
//! The full parameter vector is
//! `xi = [theta_1..K, phi_1..K, s_theta_1..K, s_phi_1..K, sigma_1^2..K, sigma_n^2]`.
//! The first `4K` entries are of interest; powers and noise are nuisance
//! parameters eliminated through the Schur complement of the Fisher matrix.

use faer::prelude::*;
use faer::Side;

use crate::array::{phase_terms, UraGeometry};
use crate::dispersion::{b_exponent, rotated, xi_from, ModelCovParams, OffsetTable};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};

/// Parameter families in `xi` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Theta,
    Phi,
    SigmaTheta,
    SigmaPhi,
    Power,
    Noise,
}

impl Param {
    /// Position of `(family, source)` in `xi`.
    pub fn index(self, k_sources: usize, source: usize) -> usize {
        match self {
            Param::Theta => source,
            Param::Phi => k_sources + source,
            Param::SigmaTheta => 2 * k_sources + source,
            Param::SigmaPhi => 3 * k_sources + source,
            Param::Power => 4 * k_sources + source,
            Param::Noise => 5 * k_sources,
        }
    }
}

/// `dR/dxi_q` for every entry of `xi`, in order.
pub fn covariance_derivatives(g: &UraGeometry, p: &ModelCovParams) -> Vec<CMat> {
    let k = p.k();
    let m = g.m();
    let u = g.u();
    let mut out: Vec<Option<CMat>> = vec![None; 5 * k + 1];
    for (j, s) in p.sources.iter().enumerate() {
        let (th, ph, st, sp) = (s.nominal.theta, s.nominal.phi, s.sigma_theta, s.sigma_phi);
        let b = OffsetTable::build(g, |dx, dy| b_exponent(u, th, ph, st, sp, dx, dy).exp());
        let xi = xi_from(g, th, ph, &b);
        let (sph, cph) = ph.sin_cos();
        let (s2, c2) = (sph * sph, cph * cph);
        let bth = OffsetTable::build(g, |dx, dy| {
            let (pp, qq) = rotated(dx, dy, th);
            -u * u * pp * qq * (sp * sp * c2 - st * st * s2)
        });
        let bph = OffsetTable::build(g, |dx, dy| {
            let (pp, qq) = rotated(dx, dy, th);
            -0.5 * u * u * (2.0 * ph).sin() * (-sp * sp * pp * pp + st * st * qq * qq)
        });
        let bst = OffsetTable::build(g, |dx, dy| {
            let (_, qq) = rotated(dx, dy, th);
            -u * u * st * s2 * qq * qq
        });
        let bsp = OffsetTable::build(g, |dx, dy| {
            let (pp, _) = rotated(dx, dy, th);
            -u * u * sp * c2 * pp * pp
        });
        let terms: Vec<(f64, f64, f64)> = (0..m).map(|i| phase_terms(g, th, ph, i)).collect();
        let w = s.power;
        let d_theta = Mat::from_fn(m, m, |a, bb| {
            xi[(a, bb)] * c64::new(bth.get(a, bb), terms[a].1 - terms[bb].1) * w
        });
        let d_phi = Mat::from_fn(m, m, |a, bb| {
            xi[(a, bb)] * c64::new(bph.get(a, bb), terms[a].2 - terms[bb].2) * w
        });
        let d_st = Mat::from_fn(m, m, |a, bb| xi[(a, bb)] * (bst.get(a, bb) * w));
        let d_sp = Mat::from_fn(m, m, |a, bb| xi[(a, bb)] * (bsp.get(a, bb) * w));
        out[Param::Theta.index(k, j)] = Some(d_theta);
        out[Param::Phi.index(k, j)] = Some(d_phi);
        out[Param::SigmaTheta.index(k, j)] = Some(d_st);
        out[Param::SigmaPhi.index(k, j)] = Some(d_sp);
        out[Param::Power.index(k, j)] = Some(xi);
    }
    out[5 * k] = Some(Mat::from_fn(m, m, |a, b| c64::new(if a == b { 1.0 } else { 0.0 }, 0.0)));
    out.into_iter().map(|x| x.expect("every slot filled")).collect()
}

/// Fisher matrix `J_qq' = T tr(R^-1 dR_q R^-1 dR_q')`, `(5K+1) x (5K+1)`.
pub fn fim(g: &UraGeometry, p: &ModelCovParams, t_count: usize) -> Result<RMat> {
    let r = crate::dispersion::model_covariance(g, p);
    let llt = r
        .llt(Side::Lower)
        .map_err(|_| Error::Singular("model covariance is not positive definite".into()))?;
    let ws: Vec<CMat> = covariance_derivatives(g, p).iter().map(|d| llt.solve(d)).collect();
    let n = ws.len();
    let m = g.m();
    let mut j = RMat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let (wa, wb) = (&ws[a], &ws[b]);
            let mut tr = 0.0;
            for col in 0..m {
                for row in 0..m {
                    tr += (wa[(row, col)] * wb[(col, row)]).re;
                }
            }
            j[(a, b)] = tr * t_count as f64;
            j[(b, a)] = j[(a, b)];
        }
    }
    Ok(j)
}

/// Bound on the `4K` angular parameters.
#[derive(Debug, Clone)]
pub struct CrbResult {
    /// Ordered `[theta_1..K, phi_1..K, s_theta_1..K, s_phi_1..K]`.
    pub c: RMat,
    pub t_count: usize,
    /// Eigen pseudo-solves used instead of Cholesky.
    pub fallbacks: usize,
    pub schur_min_eig: f64,
}

impl CrbResult {
    pub fn k(&self) -> usize {
        self.c.nrows() / 4
    }

    /// `sqrt(C_ii)` for parameter family `p` of source `k`, radians.
    pub fn sqrt_diag(&self, p: Param, k: usize) -> f64 {
        let i = p.index(self.k(), k);
        self.c[(i, i)].max(0.0).sqrt()
    }
}

/// Schur complement `J_uu - J_uv J_vv^-1 J_vu` and the number of fallback solves.
pub fn schur_complement(g: &UraGeometry, p: &ModelCovParams, t_count: usize) -> Result<(RMat, usize)> {
    let j = fim(g, p, t_count)?;
    let nu = 4 * p.k();
    let nv = j.nrows() - nu;
    let juu = j.submatrix(0, 0, nu, nu);
    let juv = j.submatrix(0, nu, nu, nv);
    let jvv = j.submatrix(nu, nu, nv, nv);
    let sol = linalg::spd_solve(jvv, juv.transpose())?;
    let s = juu - juv * &sol.x;
    let s = Mat::from_fn(nu, nu, |a, b| 0.5 * (s[(a, b)] + s[(b, a)]));
    Ok((s, usize::from(sol.fallback)))
}

pub fn crb(g: &UraGeometry, p: &ModelCovParams, t_count: usize) -> Result<CrbResult> {
    if p.k() == 0 {
        return Err(Error::Argument("CRB needs at least one source".into()));
    }
    let (s, mut fallbacks) = schur_complement(g, p, t_count)?;
    let n = s.nrows();
    let (vals, _) = linalg::sym_eigen(s.as_ref())?;
    let (max, min) = (vals[0], vals[n - 1]);
    if !(min > 1e-12 * max.abs()) {
        return Err(Error::Unidentifiable(format!(
            "Schur complement eigenvalues span [{min:e}, {max:e}]; sources are not separable"
        )));
    }
    let id = RMat::identity(n, n);
    let inv = linalg::spd_solve(s.as_ref(), id.as_ref())?;
    fallbacks += usize::from(inv.fallback);
    let c = Mat::from_fn(n, n, |a, b| 0.5 * (inv.x[(a, b)] + inv.x[(b, a)]));
    Ok(CrbResult { c, t_count, fallbacks, schur_min_eig: min })
}

//! Gaussian-kernel covariance model for distributed sources.
//!
//! Per source, `Xi = D B D^H = (a a^H) o B` where `D = diag(a)` and
//! `B_mn = exp(-(u^2/2) [s_phi^2 cos^2(phi) P^2 + s_theta^2 sin^2(phi) Q^2])`
//! with `P = dx cos(theta) + dy sin(theta)`, `Q = -dx sin(theta) + dy cos(theta)`
//! and `(dx, dy)` the grid offset between elements `m` and `n`.
//! The full model is `R = sum_k sigma_k^2 Xi_k + sigma_n^2 I`.

use faer::prelude::*;

use crate::array::{manifold_unchecked, AngPair, UraGeometry};
use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat};
use crate::sim::SourceParams;

/// One source in the covariance model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSource {
    pub nominal: AngPair,
    pub sigma_theta: f64,
    pub sigma_phi: f64,
    /// `sigma_k^2 = S_k sigma_gamma_k^2`.
    pub power: f64,
}

impl From<&SourceParams> for ModelSource {
    fn from(s: &SourceParams) -> Self {
        Self {
            nominal: s.nominal,
            sigma_theta: s.sigma_theta,
            sigma_phi: s.sigma_phi,
            power: s.received_power(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCovParams {
    pub sources: Vec<ModelSource>,
    pub noise_var: f64,
}

impl ModelCovParams {
    pub fn new(sources: Vec<ModelSource>, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0) {
            return Err(Error::Domain("noise variance must be positive".into()));
        }
        for s in &sources {
            s.nominal.check()?;
            if !(s.power > 0.0) {
                return Err(Error::Domain("source powers must be positive".into()));
            }
            if s.sigma_theta < 0.0 || s.sigma_phi < 0.0 {
                return Err(Error::Domain("spreads must be non-negative".into()));
            }
        }
        Ok(Self { sources, noise_var })
    }

    pub fn from_sources(sources: &[SourceParams], noise_var: f64) -> Result<Self> {
        Self::new(sources.iter().map(ModelSource::from).collect(), noise_var)
    }

    pub fn k(&self) -> usize {
        self.sources.len()
    }
}

/// Offset-indexed lookup: values depend only on `(m_x - n_x, m_y - n_y)`.
pub(crate) struct OffsetTable {
    mx: usize,
    my: usize,
    vals: Vec<f64>,
}

impl OffsetTable {
    pub(crate) fn build(g: &UraGeometry, f: impl Fn(f64, f64) -> f64) -> Self {
        crate::linalg::clear_simd_state();
        let (mx, my) = (g.mx(), g.my());
        let (wx, wy) = (2 * mx - 1, 2 * my - 1);
        let mut vals = Vec::with_capacity(wx * wy);
        for iy in 0..wy {
            for ix in 0..wx {
                vals.push(f(ix as f64 - (mx - 1) as f64, iy as f64 - (my - 1) as f64));
            }
        }
        Self { mx, my, vals }
    }

    #[inline]
    pub(crate) fn get(&self, m: usize, n: usize) -> f64 {
        let (mxi, myi) = (m % self.mx, m / self.mx);
        let (nxi, nyi) = (n % self.mx, n / self.mx);
        let ix = mxi + self.mx - 1 - nxi;
        let iy = myi + self.my - 1 - nyi;
        self.vals[iy * (2 * self.mx - 1) + ix]
    }

    pub(crate) fn to_matrix(&self) -> RMat {
        let m = self.mx * self.my;
        Mat::from_fn(m, m, |i, j| self.get(i, j))
    }
}

/// Rotated offsets `(P, Q)` for nominal azimuth `theta`.
#[inline]
pub(crate) fn rotated(dx: f64, dy: f64, theta: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    (dx * ct + dy * st, -dx * st + dy * ct)
}

/// Exponent of `B` at one offset (the value inside `exp`).
#[inline]
pub(crate) fn b_exponent(u: f64, theta: f64, phi: f64, st: f64, sp: f64, dx: f64, dy: f64) -> f64 {
    let (p, q) = rotated(dx, dy, theta);
    let (sph, cph) = phi.sin_cos();
    -0.5 * u * u * (sp * sp * cph * cph * p * p + st * st * sph * sph * q * q)
}

pub(crate) fn b_table(g: &UraGeometry, theta: f64, phi: f64, st: f64, sp: f64) -> OffsetTable {
    let u = g.u();
    OffsetTable::build(g, |dx, dy| b_exponent(u, theta, phi, st, sp, dx, dy).exp())
}

/// Real symmetric `M x M` dispersion kernel `B` of one source.
pub fn b_matrix(g: &UraGeometry, s: &ModelSource) -> RMat {
    b_table(g, s.nominal.theta, s.nominal.phi, s.sigma_theta, s.sigma_phi).to_matrix()
}

/// `(a a^H) o B` from a kernel table.
pub(crate) fn xi_from(g: &UraGeometry, theta: f64, phi: f64, b: &OffsetTable) -> CMat {
    let a = manifold_unchecked(g, theta, phi);
    let m = g.m();
    Mat::from_fn(m, m, |i, j| a[i] * a[j].conj() * b.get(i, j))
}

/// Hermitian PSD `Xi = D B D^H` of one source.
pub fn xi_matrix(g: &UraGeometry, s: &ModelSource) -> CMat {
    let (th, ph) = (s.nominal.theta, s.nominal.phi);
    xi_from(g, th, ph, &b_table(g, th, ph, s.sigma_theta, s.sigma_phi))
}

/// `sum_k sigma_k^2 Xi_k + sigma_n^2 I`.
pub fn model_covariance(g: &UraGeometry, p: &ModelCovParams) -> CMat {
    let m = g.m();
    let mut r = CMat::zeros(m, m);
    for s in &p.sources {
        let xi = xi_matrix(g, s);
        r += xi * Scale(c64::new(s.power, 0.0));
    }
    for i in 0..m {
        r[(i, i)] += c64::new(p.noise_var, 0.0);
    }
    r
}

/// First-order Taylor covariance `A Lambda_c A^H + sigma_n^2 I` with
/// `Lambda_c = diag(sigma_k^2, sigma_k^2 s_theta^2, sigma_k^2 s_phi^2)`.
pub fn taylor_covariance(g: &UraGeometry, p: &ModelCovParams) -> Result<CMat> {
    let k = p.k();
    let angles: Vec<AngPair> = p.sources.iter().map(|s| s.nominal).collect();
    let a = crate::array::response_matrix(g, &angles)?;
    let lc: Vec<f64> = (0..3 * k)
        .map(|i| {
            let s = &p.sources[i % k];
            match i / k {
                0 => s.power,
                1 => s.power * s.sigma_theta * s.sigma_theta,
                _ => s.power * s.sigma_phi * s.sigma_phi,
            }
        })
        .collect();
    let al = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * lc[j]);
    let mut r = &al * a.adjoint();
    for i in 0..g.m() {
        r[(i, i)] += c64::new(p.noise_var, 0.0);
    }
    Ok(r)
}

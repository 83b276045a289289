//! Grid-search reference estimators built on the Gaussian-kernel model.
//!
//! Both searched objectives are Frobenius norms of `W Xi(c)` for a fixed
//! weighting `W` (the inverse sample covariance, or the pseudonoise projector).
//! Since `Xi = D B D^H` with unitary `D^H` on the right,
//! `||W Xi||_F^2 = ||W D B||_F^2`; see [`WeightedKernelObjective`].

use faer::prelude::*;

use crate::array::{manifold_unchecked, UraGeometry};
use crate::dispersion::{b_table, rotated, xi_from, ModelSource};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, HermEigen};

/// Fraction of the eigenvalue sum kept as pseudosignal.
pub const PSEUDOSIGNAL_FRACTION: f64 = 0.95;

/// Evenly spaced points `center - half_width ..= center + half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub center: f64,
    pub half_width: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(center: f64, half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(half_width >= 0.0) {
            return Err(Error::Argument("grid step must be positive and half-width non-negative".into()));
        }
        Ok(Self { center, half_width, step })
    }

    /// Axis covering `[lo, hi]`.
    pub fn span(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo), step)
    }

    pub fn len(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.center - self.half_width + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// 4-D search grid for one source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchGrid {
    pub theta: GridAxis,
    pub phi: GridAxis,
    pub sigma_theta: GridAxis,
    pub sigma_phi: GridAxis,
}

impl SearchGrid {
    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len() * self.sigma_theta.len() * self.sigma_phi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Local-window protocol: nominal angles within `+-doa_half_width` of a
/// reference direction and spreads over a fixed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGrid {
    pub doa_half_width: f64,
    pub doa_step: f64,
    pub spread_lo: f64,
    pub spread_hi: f64,
    pub spread_step: f64,
}

impl LocalGrid {
    /// `+-1 deg` at `0.2 deg` steps, spreads `0.2..=2 deg` at `0.2 deg`.
    pub fn standard() -> Self {
        Self {
            doa_half_width: 1f64.to_radians(),
            doa_step: 0.2f64.to_radians(),
            spread_lo: 0.2f64.to_radians(),
            spread_hi: 2f64.to_radians(),
            spread_step: 0.2f64.to_radians(),
        }
    }

    pub fn around(&self, theta: f64, phi: f64) -> Result<SearchGrid> {
        let spread = GridAxis::span(self.spread_lo, self.spread_hi, self.spread_step)?;
        Ok(SearchGrid {
            theta: GridAxis::new(theta, self.doa_half_width, self.doa_step)?,
            phi: GridAxis::new(phi, self.doa_half_width, self.doa_step)?,
            sigma_theta: spread,
            sigma_phi: spread,
        })
    }

    pub fn doa_points(&self) -> usize {
        GridAxis::new(0.0, self.doa_half_width, self.doa_step).map(|a| a.len()).unwrap_or(0)
    }

    pub fn spread_points(&self) -> usize {
        GridAxis::span(self.spread_lo, self.spread_hi, self.spread_step).map(|a| a.len()).unwrap_or(0)
    }
}

/// Objective evaluated over a grid with per-direction precomputation.
pub trait GridObjective {
    type Prep;
    fn prepare(&self, theta: f64, phi: f64) -> Self::Prep;
    fn eval(&self, prep: &Self::Prep, sigma_theta: f64, sigma_phi: f64) -> f64;
}

/// Plain closure over `[theta, phi, sigma_theta, sigma_phi]`.
pub struct FnObjective<F>(pub F);

impl<F: Fn([f64; 4]) -> f64> GridObjective for FnObjective<F> {
    type Prep = (f64, f64);
    fn prepare(&self, theta: f64, phi: f64) -> (f64, f64) {
        (theta, phi)
    }
    fn eval(&self, p: &(f64, f64), st: f64, sp: f64) -> f64 {
        (self.0)([p.0, p.1, st, sp])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResult {
    /// `[theta, phi, sigma_theta, sigma_phi]` of the first minimum found.
    pub best: [f64; 4],
    pub value: f64,
    pub evaluations: usize,
}

/// Exhaustive search; ties keep the first point in theta-major order.
pub fn grid_search<O: GridObjective>(obj: &O, grid: &SearchGrid) -> GridResult {
    let mut best = GridResult { best: [f64::NAN; 4], value: f64::INFINITY, evaluations: 0 };
    let (sts, sps) = (grid.sigma_theta.points(), grid.sigma_phi.points());
    for th in grid.theta.points() {
        for ph in grid.phi.points() {
            let prep = obj.prepare(th, ph);
            linalg::clear_simd_state();
            for &st in &sts {
                for &sp in &sps {
                    let v = obj.eval(&prep, st, sp);
                    best.evaluations += 1;
                    if v < best.value {
                        best.value = v;
                        best.best = [th, ph, st, sp];
                    }
                }
            }
        }
    }
    best
}

fn xi_of(g: &UraGeometry, c: [f64; 4]) -> CMat {
    xi_from(g, c[0], c[1], &b_table(g, c[0], c[1], c[2], c[3]))
}

/// `||R^-1 Xi(c)||_F^2`.
pub fn subspace_objective(r_hat_inv: MatRef<'_, c64>, g: &UraGeometry, c: [f64; 4]) -> f64 {
    linalg::fro2((r_hat_inv * xi_of(g, c)).as_ref())
}

/// `||E_n^H Xi(c)||_F^2`; zero for an empty pseudonoise subspace.
pub fn dispare_objective(e_n: MatRef<'_, c64>, g: &UraGeometry, c: [f64; 4]) -> f64 {
    if e_n.ncols() == 0 {
        return 0.0;
    }
    linalg::fro2((e_n.adjoint() * xi_of(g, c)).as_ref())
}

/// `tr((sum_k s_k Xi_k + sigma^2 I - R)^2)` with caller-supplied powers.
pub fn comet_objective(r_hat: MatRef<'_, c64>, g: &UraGeometry, sources: &[ModelSource], noise_var: f64) -> f64 {
    let mut d = r_hat * Scale(c64::new(-1.0, 0.0));
    for s in sources {
        d += xi_of(g, [s.nominal.theta, s.nominal.phi, s.sigma_theta, s.sigma_phi]) * Scale(c64::new(s.power, 0.0));
    }
    for i in 0..d.nrows() {
        d[(i, i)] += c64::new(noise_var, 0.0);
    }
    linalg::fro2(d.as_ref())
}

/// Pseudonoise basis: eigenvectors left after the leading eigenvalues that
/// reach the pseudosignal fraction of the total. Returns `(E_n, dim)`.
pub fn pseudonoise_subspace(eig: &HermEigen) -> (CMat, usize) {
    let total: f64 = eig.values.iter().sum();
    let mut acc = 0.0;
    let mut r = 0;
    for &v in &eig.values {
        if acc >= PSEUDOSIGNAL_FRACTION * total {
            break;
        }
        acc += v;
        r += 1;
    }
    let m = eig.values.len();
    let e_n = eig.vectors.subcols(r, m - r).to_owned();
    (e_n, m - r)
}

/// Fast evaluator of `||W D B||_F^2 = tr(B G B)` for a fixed weighting `W`,
/// with `G = Re(D^H W^H W D)` and `D = diag(a)`.
///
/// `B` depends only on the antenna offset and is even in it, so the trace is a
/// quadratic form `b^T H b` over the canonical offsets; `H` is accumulated once
/// per nominal direction and each spread pair then costs `O(offsets^2)`.
pub struct WeightedKernelObjective {
    g: UraGeometry,
    gram: CMat,
    /// Canonical offset index of every antenna pair, row-major `M x M`.
    canon: Vec<u32>,
    n_canon: usize,
    /// `(dx, dy)` of each canonical offset.
    offsets: Vec<(f64, f64)>,
}

pub struct KernelPrep {
    h: Vec<f64>,
    /// Exponent slopes per canonical offset for `s_phi^2` and `s_theta^2`.
    ep: Vec<f64>,
    eq: Vec<f64>,
}

impl WeightedKernelObjective {
    /// `w` is `d x M`; the objective is `||w Xi||_F^2`.
    pub fn new(g: &UraGeometry, w: MatRef<'_, c64>) -> Result<Self> {
        if w.ncols() != g.m() {
            return Err(Error::Dimension("weighting must have M columns".into()));
        }
        let (mx, my, m) = (g.mx(), g.my(), g.m());
        let wx = 2 * mx - 1;
        let total = wx * (2 * my - 1);
        // offset o and its negation total-1-o share a kernel value
        let n_canon = total.div_ceil(2);
        let mut canon = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                let ix = a % mx + mx - 1 - b % mx;
                let iy = a / mx + my - 1 - b / mx;
                let o = iy * wx + ix;
                canon[a * m + b] = o.min(total - 1 - o) as u32;
            }
        }
        let offsets = (0..n_canon)
            .map(|o| ((o % wx) as f64 - (mx - 1) as f64, (o / wx) as f64 - (my - 1) as f64))
            .collect();
        Ok(Self { g: *g, gram: w.adjoint() * w, canon, n_canon, offsets })
    }
}

impl GridObjective for WeightedKernelObjective {
    type Prep = KernelPrep;

    fn prepare(&self, theta: f64, phi: f64) -> KernelPrep {
        let m = self.g.m();
        let a = manifold_unchecked(&self.g, theta, phi);
        let gm: Vec<f64> = (0..m * m)
            .map(|k| {
                let (n, p) = (k / m, k % m);
                (a[n].conj() * self.gram[(n, p)] * a[p]).re
            })
            .collect();
        let nc = self.n_canon;
        let mut h = vec![0.0; nc * nc];
        for mi in 0..m {
            let offm = &self.canon[mi * m..(mi + 1) * m];
            for n in 0..m {
                let o1 = offm[n] as usize;
                let row = &mut h[o1 * nc..(o1 + 1) * nc];
                let gn = &gm[n * m..(n + 1) * m];
                for (p, &g) in gn.iter().enumerate() {
                    row[offm[p] as usize] += g;
                }
            }
        }
        // fold to the upper triangle: b^T H b = sum_i b_i (H_ii b_i + sum_{j>i} 2 H_ij b_j)
        for i in 0..nc {
            for j in i + 1..nc {
                h[i * nc + j] += h[j * nc + i];
            }
        }
        let u = self.g.u();
        let (sph, cph) = phi.sin_cos();
        let (ep, eq) = self
            .offsets
            .iter()
            .map(|&(dx, dy)| {
                let (p, q) = rotated(dx, dy, theta);
                (-0.5 * u * u * cph * cph * p * p, -0.5 * u * u * sph * sph * q * q)
            })
            .unzip();
        KernelPrep { h, ep, eq }
    }

    fn eval(&self, p: &KernelPrep, sigma_theta: f64, sigma_phi: f64) -> f64 {
        let (a, b) = (sigma_phi * sigma_phi, sigma_theta * sigma_theta);
        let bv: Vec<f64> = p.ep.iter().zip(&p.eq).map(|(&x, &y)| (a * x + b * y).exp()).collect();
        let nc = self.n_canon;
        let mut acc = 0.0;
        for (i, &bi) in bv.iter().enumerate() {
            acc += bi * dot(&p.h[i * nc + i..(i + 1) * nc], &bv[i..]);
        }
        acc.max(0.0)
    }
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ac.remainder().iter().zip(bc.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ac.zip(bc) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

//! Three-subarray TLS-ESPRIT for distributed sources.
//!
//! Pipeline:
//! 1. Signal subspace `E_s` (top `3K` eigenvectors of the sample covariance).
//! 2. Row-selected subspaces `E_l = J_l E_s`, `l = 1, 2, 3`.
//! 3. TLS rotation operators `Psi_1` (from `E_1, E_2`) and `Psi_2` (from `E_1, E_3`).
//! 4. Eigenvalue pairing through `Psi_1 Psi_2` and `Psi_1 Psi_2^-1`.
//! 5. Closed-form azimuth/elevation from the paired phases.
//! 6. Spreads from the diagonal of `A^+ (R - sigma^2 I) A^+H`.
//!
//! Each source yields three eigenvalue pairs (one per column family of `A`),
//! which are averaged.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::prelude::*;

use crate::array::{derivatives_unchecked, manifold_unchecked, selection, UraGeometry};
use crate::error::{Error, Result, Stage};
use crate::linalg::{self, CMat};
use crate::sim::SnapshotSet;
use crate::spectral::{self, CovarianceEstimate, SubspaceSplit};

/// Largest tolerated condition number of the TLS partition block.
pub const TLS_MAX_COND: f64 = 1e12;
/// Relative singular-value cutoff for the response-matrix pseudoinverse.
pub const PINV_RTOL: f64 = 1e-10;
const THETA_MAX: f64 = PI - 1e-12;
const PHI_MAX: f64 = FRAC_PI_2 - 1e-12;

/// `E_l = J_l E_s` for the three subarrays.
pub fn select_subspaces(e_s: MatRef<'_, c64>, g: &UraGeometry) -> Result<[CMat; 3]> {
    if e_s.nrows() != g.m() {
        return Err(Error::Dimension(format!("subspace has {} rows, array has {}", e_s.nrows(), g.m())));
    }
    Ok([
        selection(g, 1)?.apply(e_s),
        selection(g, 2)?.apply(e_s),
        selection(g, 3)?.apply(e_s),
    ])
}

/// TLS solution `Psi` of `E_q ~ E_1 Psi`.
pub fn tls_transform(e1: MatRef<'_, c64>, eq: MatRef<'_, c64>) -> Result<CMat> {
    let (rows, d) = (e1.nrows(), e1.ncols());
    if eq.nrows() != rows || eq.ncols() != d {
        return Err(Error::Dimension("E1 and Eq must have equal shapes".into()));
    }
    if rows < d {
        return Err(Error::Dimension(format!("{rows} subarray rows cannot support {d} columns")));
    }
    let z = Mat::from_fn(rows, 2 * d, |i, j| if j < d { e1[(i, j)] } else { eq[(i, j - d)] });
    let c = z.adjoint() * &z;
    let v = linalg::herm_eigen(c.as_ref())?.vectors;
    let v12 = v.submatrix(0, d, d, d);
    let v22 = v.submatrix(d, d, d, d);
    let cond = linalg::cond(v22)?;
    if !(cond <= TLS_MAX_COND) {
        return Err(Error::SingularPartition { cond });
    }
    Ok(v12 * linalg::inverse(v22) * Scale(c64::new(-1.0, 0.0)))
}

/// Rotation operators for the x-shift (`psi1`) and y-shift (`psi2`) subarray pairs.
#[derive(Debug, Clone)]
pub struct PsiPair {
    pub psi1: CMat,
    pub psi2: CMat,
}

/// Paired eigenvalues, phase-sorted and grouped per source.
#[derive(Debug, Clone)]
pub struct MatchedEigenvalues {
    pub lambda1: Vec<c64>,
    pub lambda2: Vec<c64>,
    /// `K` triples of indices into the lists above.
    pub grouping: Vec<[usize; 3]>,
    /// Min distance between groups over max spread within a group.
    pub grouping_confidence: f64,
    /// Relative Frobenius energy off the diagonal of `T3^-1 Psi1 Psi2^-1 T3`.
    pub psi4_offdiag: f64,
    /// Eigenvalues with modulus outside `[0.5, 2]`.
    pub out_of_band: usize,
}

fn phase_desc(a: &c64, b: &c64) -> std::cmp::Ordering {
    b.arg().total_cmp(&a.arg()).then(b.norm().total_cmp(&a.norm()))
}

/// Pair the eigenvalues of `psi1` with those of `psi2`.
pub fn match_eigenvalues(psi: &PsiPair) -> Result<MatchedEigenvalues> {
    let n = psi.psi1.nrows();
    if n == 0 || n % 3 != 0 || psi.psi2.nrows() != n {
        return Err(Error::Dimension(format!("operators must be 3K x 3K, got {n}")));
    }
    let (l1, _) = linalg::eigen(psi.psi1.as_ref())?;
    let (l2, _) = linalg::eigen(psi.psi2.as_ref())?;
    let c2 = linalg::cond(psi.psi2.as_ref())?;
    if !(c2 <= TLS_MAX_COND) {
        return Err(Error::Singular(format!("psi2 condition number {c2:e}")));
    }
    let psi3 = &psi.psi1 * &psi.psi2;
    let (l3, t3) = linalg::eigen(psi3.as_ref())?;
    let psi4 = linalg::inverse(t3.as_ref()) * &psi.psi1 * linalg::inverse(psi.psi2.as_ref()) * &t3;
    let d4: Vec<c64> = (0..n).map(|i| psi4[(i, i)]).collect();
    let total = linalg::fro2(psi4.as_ref());
    let diag: f64 = d4.iter().map(|z| z.norm_sqr()).sum();
    let psi4_offdiag = if total > 0.0 { ((total - diag).max(0.0) / total).sqrt() } else { 0.0 };

    let mut used2 = vec![false; n];
    let mut used3 = vec![false; n];
    let mut partner = vec![0usize; n];
    for p in 0..n {
        let mut best = (f64::INFINITY, 0, 0);
        for pt in (0..n).filter(|&i| !used2[i]) {
            let b1 = l1[p] * l2[pt];
            let b2 = l1[p] / l2[pt];
            for pp in (0..n).filter(|&i| !used3[i]) {
                let mu = (b1 - l3[pp]).norm_sqr() + (b2 - d4[pp]).norm_sqr();
                if mu < best.0 {
                    best = (mu, pt, pp);
                }
            }
        }
        used2[best.1] = true;
        used3[best.2] = true;
        partner[p] = best.1;
    }

    let mut pairs: Vec<(c64, c64)> = (0..n).map(|p| (l1[p], l2[partner[p]])).collect();
    pairs.sort_by(|a, b| phase_desc(&a.0, &b.0));
    let lambda1: Vec<c64> = pairs.iter().map(|p| p.0).collect();
    let lambda2: Vec<c64> = pairs.iter().map(|p| p.1).collect();
    let grouping: Vec<[usize; 3]> = (0..n / 3).map(|k| [3 * k, 3 * k + 1, 3 * k + 2]).collect();

    let dist = |i: usize, j: usize| ((lambda1[i] - lambda1[j]).norm_sqr() + (lambda2[i] - lambda2[j]).norm_sqr()).sqrt();
    let mut spread = 0.0f64;
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            if i / 3 == j / 3 {
                spread = spread.max(dist(i, j));
            } else {
                gap = gap.min(dist(i, j));
            }
        }
    }
    let grouping_confidence = if spread > 0.0 { gap / spread } else { f64::INFINITY };
    let out_of_band = lambda1
        .iter()
        .chain(&lambda2)
        .filter(|z| !(0.5..=2.0).contains(&z.norm()))
        .count();
    Ok(MatchedEigenvalues { lambda1, lambda2, grouping, grouping_confidence, psi4_offdiag, out_of_band })
}

/// Nominal directions recovered from matched eigenvalues.
#[derive(Debug, Clone)]
pub struct DoaRecovery {
    /// `(theta, phi)` per group, radians.
    pub doas: Vec<(f64, f64)>,
    /// Arcsine arguments above one, and results pushed back inside the angle range.
    pub clamp_events: usize,
}

pub fn recover_doas(m: &MatchedEigenvalues, u: f64) -> DoaRecovery {
    let mut clamp_events = 0;
    let doas = m
        .grouping
        .iter()
        .map(|grp| {
            let (mut th, mut ph) = (0.0, 0.0);
            for &i in grp {
                let a = m.lambda1[i].arg();
                let b = m.lambda2[i].arg();
                th += b.max(0.0).atan2(a);
                let r = (a * a + b * b).sqrt() / u;
                if r > 1.0 {
                    clamp_events += 1;
                }
                ph += r.clamp(0.0, 1.0).asin();
            }
            th /= 3.0;
            ph /= 3.0;
            if th > THETA_MAX {
                th = THETA_MAX;
                clamp_events += 1;
            }
            if ph > PHI_MAX {
                ph = PHI_MAX;
                clamp_events += 1;
            }
            (th, ph)
        })
        .collect();
    DoaRecovery { doas, clamp_events }
}

/// Response matrix without range checks.
pub(crate) fn response_unchecked(g: &UraGeometry, doas: &[(f64, f64)]) -> CMat {
    let k = doas.len();
    let mut out = CMat::zeros(g.m(), 3 * k);
    for (j, &(th, ph)) in doas.iter().enumerate() {
        let a = manifold_unchecked(g, th, ph);
        let (dt, dp) = derivatives_unchecked(g, th, ph);
        for i in 0..g.m() {
            out[(i, j)] = a[i];
            out[(i, k + j)] = dt[i];
            out[(i, 2 * k + j)] = dp[i];
        }
    }
    out
}

/// Locate a source pair whose six columns are linearly dependent.
fn deficient_pair(a: MatRef<'_, c64>, k: usize) -> Result<Option<(usize, usize)>> {
    for i in 0..k {
        for j in i + 1..k {
            let cols = [i, j, k + i, k + j, 2 * k + i, 2 * k + j];
            let sub = Mat::from_fn(a.nrows(), 6, |r, c| a[(r, cols[c])]);
            if linalg::rank(sub.as_ref(), PINV_RTOL)? < 6 {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Angular spreads and the estimated power matrix diagonal.
#[derive(Debug, Clone)]
pub struct SpreadRecovery {
    /// `(sigma_theta, sigma_phi)` per source, radians.
    pub spreads: Vec<(f64, f64)>,
    /// Real diagonal of the `3K x 3K` power matrix estimate.
    pub lambda_c_hat: Vec<f64>,
    /// Variance ratios that came out negative and were floored at zero.
    pub floored: usize,
}

pub fn recover_spreads(
    doas: &[(f64, f64)],
    c: &CovarianceEstimate,
    noise_var_hat: f64,
    g: &UraGeometry,
) -> Result<SpreadRecovery> {
    let k = doas.len();
    if c.m() != g.m() {
        return Err(Error::Dimension("covariance size does not match the array".into()));
    }
    let a = response_unchecked(g, doas);
    let (ap, rank) = linalg::pinv(a.as_ref(), PINV_RTOL)?;
    if rank < 3 * k {
        return Err(match deficient_pair(a.as_ref(), k)? {
            Some((i, j)) => Error::RankDeficient(i, j),
            None => Error::RankDeficientMatrix,
        });
    }
    let mut r = c.r_hat.clone();
    for i in 0..r.nrows() {
        r[(i, i)] -= c64::new(noise_var_hat, 0.0);
    }
    let lc = &ap * &r * ap.adjoint();
    let lambda_c_hat: Vec<f64> = (0..3 * k).map(|i| lc[(i, i)].re).collect();
    let mut floored = 0;
    let mut ratio = |num: f64, den: f64| {
        let q = num / den;
        if q > 0.0 && q.is_finite() {
            q.sqrt()
        } else {
            floored += 1;
            0.0
        }
    };
    let spreads = (0..k)
        .map(|i| {
            let p = lambda_c_hat[i];
            (ratio(lambda_c_hat[k + i], p), ratio(lambda_c_hat[2 * k + i], p))
        })
        .collect();
    Ok(SpreadRecovery { spreads, lambda_c_hat, floored })
}

/// One estimated source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEstimate {
    pub theta: f64,
    pub phi: f64,
    pub sigma_theta: f64,
    pub sigma_phi: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub grouping_confidence: f64,
    pub psi4_offdiag: f64,
    pub out_of_band: usize,
    pub doa_clamps: usize,
    pub spread_floors: usize,
}

/// Per-source estimates sorted by azimuth, plus the noise floor and power diagonal.
#[derive(Debug, Clone)]
pub struct AngularEstimate {
    pub sources: Vec<SourceEstimate>,
    pub noise_var_hat: f64,
    /// `[powers, azimuth-derivative powers, elevation-derivative powers]`, in `sources` order.
    pub lambda_c_hat: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Full estimator on raw snapshots.
pub fn estimate(x: &SnapshotSet, k_sources: usize) -> Result<AngularEstimate> {
    let c = spectral::sample_covariance(x).map_err(|e| e.at(Stage::Covariance))?;
    estimate_from_covariance(&c, &x.geometry, k_sources)
}

pub fn estimate_from_covariance(
    c: &CovarianceEstimate,
    g: &UraGeometry,
    k_sources: usize,
) -> Result<AngularEstimate> {
    if c.m() != g.m() {
        return Err(Error::Dimension("covariance size does not match the array".into()).at(Stage::SubspaceSplit));
    }
    let split = spectral::subspace_split(c, k_sources).map_err(|e| e.at(Stage::SubspaceSplit))?;
    estimate_from_split(&split, c, g)
}

/// Estimator from a given signal subspace; `c` is only used for the spreads.
pub fn estimate_from_split(
    split: &SubspaceSplit,
    c: &CovarianceEstimate,
    g: &UraGeometry,
) -> Result<AngularEstimate> {
    let k = split.e_s.ncols() / 3;
    let [e1, e2, e3] = select_subspaces(split.e_s.as_ref(), g).map_err(|e| e.at(Stage::SelectSubspaces))?;
    let psi1 = tls_transform(e1.as_ref(), e2.as_ref()).map_err(|e| e.at(Stage::Tls))?;
    let psi2 = tls_transform(e1.as_ref(), e3.as_ref()).map_err(|e| e.at(Stage::Tls))?;
    let matched = match_eigenvalues(&PsiPair { psi1, psi2 }).map_err(|e| e.at(Stage::Matching))?;
    let doa = recover_doas(&matched, g.u());
    let sp = recover_spreads(&doa.doas, c, split.noise_var_hat, g).map_err(|e| e.at(Stage::Spreads))?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| doa.doas[i].0.total_cmp(&doa.doas[j].0).then(i.cmp(&j)));
    let sources = order
        .iter()
        .map(|&i| SourceEstimate {
            theta: doa.doas[i].0,
            phi: doa.doas[i].1,
            sigma_theta: sp.spreads[i].0,
            sigma_phi: sp.spreads[i].1,
        })
        .collect();
    let lambda_c_hat = (0..3)
        .flat_map(|blk| order.iter().map(move |&i| blk * k + i))
        .map(|i| sp.lambda_c_hat[i])
        .collect();
    Ok(AngularEstimate {
        sources,
        noise_var_hat: split.noise_var_hat,
        lambda_c_hat,
        diagnostics: Diagnostics {
            grouping_confidence: matched.grouping_confidence,
            psi4_offdiag: matched.psi4_offdiag,
            out_of_band: matched.out_of_band,
            doa_clamps: doa.clamp_events,
            spread_floors: sp.floored,
        },
    })
}

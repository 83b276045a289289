//! Uniform rectangular array geometry and manifold algebra.
//!
//! Antennas are indexed x-major: element `m = my * mx_count + mx` (zero-based).
//! The manifold for direction `(theta, phi)` is
//! `a_m = exp(i u sin(phi) [mx cos(theta) + my sin(theta)])`.
//!
//! The three overlapping subarrays drop the last row/column of the grid
//! and are shifted by `0`, `1` and `Mx` elements. Their manifolds differ by
//! the phase factors `F2 = exp(i u sin(phi) cos(theta))` and
//! `F3 = exp(i u sin(phi) sin(theta))`.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// `Mx x My` rectangular array with normalized spacing `u = 2 pi d / lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UraGeometry {
    mx: usize,
    my: usize,
    u: f64,
}

impl UraGeometry {
    pub fn new(mx: usize, my: usize, u: f64) -> Result<Self> {
        if mx < 2 || my < 2 {
            return Err(Error::Argument(format!("array must be at least 2x2, got {mx}x{my}")));
        }
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Argument(format!("spacing u must be positive, got {u}")));
        }
        Ok(Self { mx, my, u })
    }

    /// Square `n x n` array at half-wavelength spacing.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, PI)
    }

    pub fn mx(&self) -> usize {
        self.mx
    }

    pub fn my(&self) -> usize {
        self.my
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// Total antenna count `M`.
    pub fn m(&self) -> usize {
        self.mx * self.my
    }

    /// Subarray size `(Mx - 1)(My - 1)`.
    pub fn m_sub(&self) -> usize {
        (self.mx - 1) * (self.my - 1)
    }

    /// Zero-based element index of grid position `(ix, iy)`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.mx + ix
    }

    /// Zero-based grid position of element `m`.
    pub fn coords(&self, m: usize) -> (usize, usize) {
        (m % self.mx, m / self.mx)
    }

    /// True when the principal log branch is unambiguous over the whole angle range.
    pub fn alias_free(&self) -> bool {
        self.u <= PI
    }
}

/// Azimuth `theta` in `[0, pi)` and elevation `phi` in `[0, pi/2)`, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngPair {
    pub theta: f64,
    pub phi: f64,
}

impl AngPair {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let a = Self { theta, phi };
        a.check()?;
        Ok(a)
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..PI).contains(&self.theta) {
            return Err(Error::Domain(format!("theta {} outside [0, pi)", self.theta)));
        }
        if !(0.0..FRAC_PI_2).contains(&self.phi) {
            return Err(Error::Domain(format!("phi {} outside [0, pi/2)", self.phi)));
        }
        Ok(())
    }
}

/// Per-element phase slopes: `(psi, dpsi/dtheta, dpsi/dphi)` so that
/// `a_m = exp(i psi_m)`.
pub(crate) fn phase_terms(g: &UraGeometry, theta: f64, phi: f64, m: usize) -> (f64, f64, f64) {
    let (ix, iy) = g.coords(m);
    let (x, y) = (ix as f64, iy as f64);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let along = x * ct + y * st;
    let across = -x * st + y * ct;
    (g.u * sp * along, g.u * sp * across, g.u * cp * along)
}

pub(crate) fn manifold_unchecked(g: &UraGeometry, theta: f64, phi: f64) -> Col<c64> {
    crate::linalg::clear_simd_state();
    let (st, ct) = theta.sin_cos();
    let k = g.u * phi.sin();
    Col::from_fn(g.m(), |m| {
        let (ix, iy) = g.coords(m);
        c64::cis(k * (ix as f64 * ct + iy as f64 * st))
    })
}

/// Array response `a(theta, phi)`, length `M`, unit-modulus entries.
pub fn manifold(g: &UraGeometry, a: AngPair) -> Result<Col<c64>> {
    a.check()?;
    Ok(manifold_unchecked(g, a.theta, a.phi))
}

pub(crate) fn derivatives_unchecked(g: &UraGeometry, theta: f64, phi: f64) -> (Col<c64>, Col<c64>) {
    let a = manifold_unchecked(g, theta, phi);
    let dt = Col::from_fn(g.m(), |m| {
        let (_, dth, _) = phase_terms(g, theta, phi, m);
        c64::new(0.0, dth) * a[m]
    });
    let dp = Col::from_fn(g.m(), |m| {
        let (_, _, dph) = phase_terms(g, theta, phi, m);
        c64::new(0.0, dph) * a[m]
    });
    (dt, dp)
}

/// `(da/dtheta, da/dphi)`.
pub fn manifold_derivatives(g: &UraGeometry, a: AngPair) -> Result<(Col<c64>, Col<c64>)> {
    a.check()?;
    Ok(derivatives_unchecked(g, a.theta, a.phi))
}

/// `A = [a_1..a_K, da_1/dtheta..da_K/dtheta, da_1/dphi..da_K/dphi]`, `M x 3K`.
pub fn response_matrix(g: &UraGeometry, angles: &[AngPair]) -> Result<CMat> {
    let k = angles.len();
    if k == 0 {
        return Err(Error::Argument("response matrix needs at least one source".into()));
    }
    if 3 * k > g.m() {
        return Err(Error::Dimension(format!("3K = {} exceeds M = {}", 3 * k, g.m())));
    }
    let mut out = CMat::zeros(g.m(), 3 * k);
    for (j, a) in angles.iter().enumerate() {
        let m0 = manifold(g, *a)?;
        let (dt, dp) = manifold_derivatives(g, *a)?;
        for i in 0..g.m() {
            out[(i, j)] = m0[i];
            out[(i, k + j)] = dt[i];
            out[(i, 2 * k + j)] = dp[i];
        }
    }
    Ok(out)
}

/// Row-selection operator `J_l` stored as an index map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    l: u8,
    cols: usize,
    map: Vec<usize>,
}

impl SelectionMatrix {
    pub fn l(&self) -> u8 {
        self.l
    }

    pub fn rows(&self) -> usize {
        self.map.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Zero-based selected column of each row.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `J_l X` as a row gather.
    pub fn apply(&self, x: MatRef<'_, c64>) -> CMat {
        assert_eq!(x.nrows(), self.cols, "row count must equal M");
        Mat::from_fn(self.map.len(), x.ncols(), |i, j| x[(self.map[i], j)])
    }

    pub fn apply_col(&self, x: ColRef<'_, c64>) -> Col<c64> {
        assert_eq!(x.nrows(), self.cols, "length must equal M");
        Col::from_fn(self.map.len(), |i| x[self.map[i]])
    }

    /// Dense `M~ x M` 0/1 matrix; only for inspection.
    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.map.len(), self.cols);
        for (i, &c) in self.map.iter().enumerate() {
            out[(i, c)] = c64::new(1.0, 0.0);
        }
        out
    }
}

/// Selection for subarray `l` in `{1, 2, 3}`.
pub fn selection(g: &UraGeometry, l: u8) -> Result<SelectionMatrix> {
    let shift = match l {
        1 => 0,
        2 => 1,
        3 => g.mx,
        _ => return Err(Error::Argument(format!("subarray index must be 1, 2 or 3, got {l}"))),
    };
    let map = (0..g.m_sub()).map(|r| r + r / (g.mx - 1) + shift).collect();
    Ok(SelectionMatrix { l, cols: g.m(), map })
}

/// Inter-subarray phase factors and their angle derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFactors {
    pub f2: c64,
    pub f3: c64,
    pub df2_dtheta: c64,
    pub df2_dphi: c64,
    pub df3_dtheta: c64,
    pub df3_dphi: c64,
}

pub(crate) fn phase_factors_unchecked(u: f64, theta: f64, phi: f64) -> PhaseFactors {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let f2 = c64::cis(u * sp * ct);
    let f3 = c64::cis(u * sp * st);
    let i = c64::new(0.0, 1.0);
    PhaseFactors {
        f2,
        f3,
        df2_dtheta: i * (-u * sp * st) * f2,
        df2_dphi: i * (u * cp * ct) * f2,
        df3_dtheta: i * (u * sp * ct) * f3,
        df3_dphi: i * (u * cp * st) * f3,
    }
}

pub fn phase_factors(g: &UraGeometry, a: AngPair) -> Result<PhaseFactors> {
    a.check()?;
    Ok(phase_factors_unchecked(g.u, a.theta, a.phi))
}

/// `Phi_{q,1}` (`3K x 3K`) with `A_q = A_1 Phi_{q,1}` for `q` in `{2, 3}`.
pub fn phi_matrix(g: &UraGeometry, angles: &[AngPair], q: u8) -> Result<CMat> {
    if q != 2 && q != 3 {
        return Err(Error::Argument(format!("q must be 2 or 3, got {q}")));
    }
    let k = angles.len();
    let mut out = CMat::zeros(3 * k, 3 * k);
    for (j, a) in angles.iter().enumerate() {
        let pf = phase_factors(g, *a)?;
        let (f, dt, dp) = if q == 2 {
            (pf.f2, pf.df2_dtheta, pf.df2_dphi)
        } else {
            (pf.f3, pf.df3_dtheta, pf.df3_dphi)
        };
        out[(j, j)] = f;
        out[(k + j, k + j)] = f;
        out[(2 * k + j, 2 * k + j)] = f;
        out[(j, k + j)] = dt;
        out[(j, 2 * k + j)] = dp;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: c64, b: c64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn geometry_rejects_degenerate() {
        assert!(UraGeometry::new(1, 4, PI).is_err());
        assert!(UraGeometry::new(4, 4, 0.0).is_err());
        let g = UraGeometry::new(3, 4, PI).unwrap();
        assert_eq!(g.m(), 12);
        assert_eq!(g.m_sub(), 6);
        assert_eq!(g.coords(g.index(2, 3)), (2, 3));
    }

    #[test]
    fn angle_ranges() {
        assert!(AngPair::new(PI, 0.1).is_err());
        assert!(AngPair::new(0.1, FRAC_PI_2).is_err());
        assert!(AngPair::new(-0.1, 0.1).is_err());
        assert!(AngPair::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn broadside_is_all_ones() {
        let g = UraGeometry::square(2).unwrap();
        let a = manifold(&g, AngPair::new(0.0, 0.0).unwrap()).unwrap();
        for i in 0..4 {
            assert!(close(a[i], c64::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn endfire_alternates_along_x() {
        let g = UraGeometry::square(2).unwrap();
        let a = manifold(&g, AngPair::new(0.0, FRAC_PI_2 - 1e-12).unwrap()).unwrap();
        let want = [1.0, -1.0, 1.0, -1.0];
        for i in 0..4 {
            assert!(close(a[i], c64::new(want[i], 0.0), 1e-9));
        }
    }

    #[test]
    fn theta_derivative_vanishes_at_zenith() {
        let g = UraGeometry::square(4).unwrap();
        let (dt, _) = manifold_derivatives(&g, AngPair::new(0.7, 0.0).unwrap()).unwrap();
        for i in 0..g.m() {
            assert_eq!(dt[i].norm(), 0.0);
        }
    }

    #[test]
    fn theta_derivative_plug_in() {
        let g = UraGeometry::square(2).unwrap();
        let a = AngPair::new(FRAC_PI_2 - 1e-12, FRAC_PI_2 - 1e-12).unwrap();
        let m0 = manifold(&g, a).unwrap();
        let (dt, _) = manifold_derivatives(&g, a).unwrap();
        let m = g.index(1, 0);
        assert!(close(dt[m], c64::new(0.0, -PI) * m0[m], 1e-9));
    }

    #[test]
    fn response_matrix_single_source_broadside() {
        let g = UraGeometry::square(2).unwrap();
        let a = response_matrix(&g, &[AngPair::new(0.0, 0.0).unwrap()]).unwrap();
        for i in 0..4 {
            assert!(close(a[(i, 0)], c64::new(1.0, 0.0), 1e-15));
            assert_eq!(a[(i, 1)].norm(), 0.0);
            let (ix, _) = g.coords(i);
            assert!(close(a[(i, 2)], c64::new(0.0, PI * ix as f64), 1e-12));
        }
    }

    #[test]
    fn response_matrix_too_many_sources() {
        let g = UraGeometry::square(2).unwrap();
        let a = AngPair::new(0.1, 0.2).unwrap();
        assert!(matches!(response_matrix(&g, &[a, a]), Err(Error::Dimension(_))));
    }

    #[test]
    fn selection_2x2() {
        let g = UraGeometry::square(2).unwrap();
        assert_eq!(selection(&g, 1).unwrap().map(), &[0]);
        assert_eq!(selection(&g, 2).unwrap().map(), &[1]);
        assert_eq!(selection(&g, 3).unwrap().map(), &[2]);
        assert!(selection(&g, 4).is_err());
    }

    #[test]
    fn selection_dense_has_one_unit_per_row() {
        let g = UraGeometry::new(4, 3, PI).unwrap();
        for l in 1..=3 {
            let d = selection(&g, l).unwrap().to_dense();
            for i in 0..d.nrows() {
                let ones = (0..d.ncols()).filter(|&j| d[(i, j)].re == 1.0).count();
                let nz = (0..d.ncols()).filter(|&j| d[(i, j)].norm() != 0.0).count();
                assert_eq!((ones, nz), (1, 1));
            }
        }
    }

    #[test]
    fn phase_factor_special_values() {
        let g = UraGeometry::square(3).unwrap();
        let pf = phase_factors(&g, AngPair::new(FRAC_PI_2, 0.4).unwrap()).unwrap();
        assert!(close(pf.f2, c64::new(1.0, 0.0), 1e-15));
        let pf = phase_factors(&g, AngPair::new(0.0, FRAC_PI_2 - 1e-12).unwrap()).unwrap();
        assert!(close(pf.f2, c64::new(-1.0, 0.0), 1e-9));
        assert!(close(pf.f3, c64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn phi_matrix_broadside() {
        let g = UraGeometry::square(3).unwrap();
        let p = phi_matrix(&g, &[AngPair::new(0.0, 0.0).unwrap()], 2).unwrap();
        for i in 0..3 {
            assert!(close(p[(i, i)], c64::new(1.0, 0.0), 1e-15));
        }
        let pf = phase_factors(&g, AngPair::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(p[(0, 1)], pf.df2_dtheta);
        assert_eq!(p[(0, 2)], pf.df2_dphi);
        assert_eq!(p[(1, 0)].norm() + p[(2, 1)].norm() + p[(1, 2)].norm(), 0.0);
        assert!(phi_matrix(&g, &[AngPair::new(0.0, 0.0).unwrap()], 1).is_err());
    }
}

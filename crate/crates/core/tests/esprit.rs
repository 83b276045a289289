use std::f64::consts::PI;

use faer::Mat;
use proptest::prelude::*;
use ura_esprit::array::{phi_matrix, response_matrix, selection};
use ura_esprit::dispersion::{model_covariance, taylor_covariance, ModelCovParams, ModelSource};
use ura_esprit::esprit::{
    estimate_from_covariance, match_eigenvalues, recover_doas, recover_spreads, select_subspaces, tls_transform,
    MatchedEigenvalues, PsiPair,
};
use ura_esprit::linalg::{eigen, orth, CMat};
use ura_esprit::spectral::CovarianceEstimate;
use ura_esprit::{c64, estimate, generate, AngPair, Error, SourceParams, UraGeometry};

fn angles(deg: &[(f64, f64)]) -> Vec<AngPair> {
    deg.iter().map(|&(t, p)| AngPair::from_degrees(t, p).unwrap()).collect()
}

fn reference_angles() -> Vec<AngPair> {
    angles(&[(10.0, 30.0), (50.0, 40.0)])
}

/// Every value in `got` is within `tol` of a distinct value in `want`.
fn same_multiset(got: &[c64], want: &[c64], tol: f64) -> bool {
    let mut used = vec![false; want.len()];
    got.len() == want.len()
        && got.iter().all(|g| {
            let hit = (0..want.len()).filter(|&j| !used[j]).min_by(|&a, &b| (want[a] - g).norm().total_cmp(&(want[b] - g).norm()));
            match hit {
                Some(j) if (want[j] - g).norm() < tol => {
                    used[j] = true;
                    true
                }
                _ => false,
            }
        })
}

fn diag(m: &CMat) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

#[test]
fn select_subspaces_gathers_rows() {
    let g = UraGeometry::new(2, 2, PI).unwrap();
    let e = Mat::from_fn(4, 3, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let [e1, e2, e3] = select_subspaces(e.as_ref(), &g).unwrap();
    for (l, el) in [e1, e2, e3].iter().enumerate() {
        assert_eq!(el.nrows(), 1);
        for j in 0..3 {
            assert_eq!(el[(0, j)], e[(l, j)]);
        }
    }
    let g = UraGeometry::square(10).unwrap();
    let e = CMat::zeros(100, 6);
    assert!(select_subspaces(e.as_ref(), &g).unwrap().iter().all(|m| m.nrows() == 81));
    assert!(select_subspaces(CMat::zeros(99, 6).as_ref(), &g).is_err());
}

#[test]
fn exact_subspaces_are_rotated_by_phi() {
    let g = UraGeometry::square(10).unwrap();
    let ang = reference_angles();
    let a = response_matrix(&g, &ang).unwrap();
    let e_s = orth(a.as_ref());
    let t = e_s.adjoint() * &a;
    let ti = ura_esprit::linalg::inverse(t.as_ref());
    let [e1, e2, e3] = select_subspaces(e_s.as_ref(), &g).unwrap();
    for (q, eq) in [(2u8, &e2), (3, &e3)] {
        let phi = phi_matrix(&g, &ang, q).unwrap();
        let resid = (eq - &e1 * (&t * &phi * &ti)).norm_max();
        assert!(resid < 1e-8, "{resid}");
    }
}

#[test]
fn tls_identity_and_diagonal_rotation() {
    let g = UraGeometry::square(6).unwrap();
    let a = response_matrix(&g, &reference_angles()).unwrap();
    let e1 = orth(selection(&g, 1).unwrap().apply(a.as_ref()).as_ref());
    let psi = tls_transform(e1.as_ref(), e1.as_ref()).unwrap();
    assert!((&psi - CMat::identity(6, 6)).norm_max() < 1e-10);

    let d: Vec<c64> = (0..6).map(|i| c64::cis(0.4 * i as f64 - 1.0)).collect();
    let eq = Mat::from_fn(e1.nrows(), 6, |i, j| e1[(i, j)] * d[j]);
    let psi = tls_transform(e1.as_ref(), eq.as_ref()).unwrap();
    let (ev, _) = eigen(psi.as_ref()).unwrap();
    assert!(same_multiset(&ev, &d, 1e-8));

    assert!(tls_transform(e1.subrows(0, 4), eq.subrows(0, 4)).is_err());
}

#[test]
fn exact_chain_recovers_phi_diagonals_and_doas() {
    let g = UraGeometry::square(10).unwrap();
    let ang = reference_angles();
    let a = response_matrix(&g, &ang).unwrap();
    let e_s = orth(a.as_ref());
    let [e1, e2, e3] = select_subspaces(e_s.as_ref(), &g).unwrap();
    let psi1 = tls_transform(e1.as_ref(), e2.as_ref()).unwrap();
    let psi2 = tls_transform(e1.as_ref(), e3.as_ref()).unwrap();
    let (l1, _) = eigen(psi1.as_ref()).unwrap();
    let (l2, _) = eigen(psi2.as_ref()).unwrap();
    assert!(same_multiset(&l1, &diag(&phi_matrix(&g, &ang, 2).unwrap()), 1e-6));
    assert!(same_multiset(&l2, &diag(&phi_matrix(&g, &ang, 3).unwrap()), 1e-6));

    let m = match_eigenvalues(&PsiPair { psi1, psi2 }).unwrap();
    let mut doas = recover_doas(&m, g.u()).doas;
    doas.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (d, t) in doas.iter().zip(&ang) {
        assert!((d.0 - t.theta).abs() < 1e-6 && (d.1 - t.phi).abs() < 1e-6, "{d:?} {t:?}");
    }
    assert!(m.out_of_band == 0);
}

fn lcg(s: &mut u64) -> f64 {
    *s = ura_esprit::rng::mix64(*s);
    (*s >> 11) as f64 / (1u64 << 53) as f64
}

/// Build `Psi_q = T Phi_q T^-1` for random well-conditioned `T`.
fn synthetic(g: &UraGeometry, ang: &[AngPair], s: &mut u64) -> PsiPair {
    let n = 3 * ang.len();
    let t = Mat::from_fn(n, n, |i, j| {
        let z = c64::new(lcg(s) - 0.5, lcg(s) - 0.5) * 0.6;
        if i == j { z + c64::new(2.0, 0.0) } else { z }
    });
    let ti = ura_esprit::linalg::inverse(t.as_ref());
    let psi1 = &t * phi_matrix(g, ang, 2).unwrap() * &ti;
    let psi2 = &t * phi_matrix(g, ang, 3).unwrap() * &ti;
    PsiPair { psi1, psi2 }
}

/// Brute force over all source pairings of the distinct factor values: the
/// true pairing is the unique zero of the product/quotient mismatch.
fn brute_force_pairing(f2: &[c64], f3: &[c64]) -> Option<Vec<usize>> {
    let k = f2.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut zeros = Vec::new();
    fn permute(p: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
        if i == p.len() {
            out.push(p.clone());
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            permute(p, i + 1, out);
            p.swap(i, j);
        }
    }
    let mut all = Vec::new();
    permute(&mut perm, 0, &mut all);
    for p in all {
        let cost: f64 = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (f2[i] * f3[p[i]] - f2[j] * f3[j]).norm_sqr() + (f2[i] / f3[p[i]] - f2[j] / f3[j]).norm_sqr())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        if cost < 1e-20 {
            zeros.push(p);
        }
    }
    (zeros.len() == 1).then(|| zeros.remove(0))
}

fn check_pairing(m: &MatchedEigenvalues, f2: &[c64], f3: &[c64], tol: f64) -> bool {
    let mut count = vec![0; f2.len()];
    for (a, b) in m.lambda1.iter().zip(&m.lambda2) {
        match (0..f2.len()).find(|&k| (a - f2[k]).norm() < tol && (b - f3[k]).norm() < tol) {
            Some(k) => count[k] += 1,
            None => return false,
        }
    }
    count.iter().all(|&c| c == 3)
}

#[test]
fn matching_single_source() {
    let g = UraGeometry::square(4).unwrap();
    let psi = PsiPair {
        psi1: Mat::from_fn(3, 3, |i, j| if i == j { c64::cis(0.3) } else { c64::new(0.0, 0.0) }),
        psi2: Mat::from_fn(3, 3, |i, j| if i == j { c64::cis(0.7) } else { c64::new(0.0, 0.0) }),
    };
    let m = match_eigenvalues(&psi).unwrap();
    assert!(check_pairing(&m, &[c64::cis(0.3)], &[c64::cis(0.7)], 1e-12));
    let _ = g;
}

#[test]
fn matching_recovers_random_pairings() {
    let g = UraGeometry::square(6).unwrap();
    let mut s = 2024u64;
    let mut done = 0;
    while done < 60 {
        let k = 1 + done % 3;
        let ang: Vec<AngPair> = (0..k).map(|_| AngPair::new(lcg(&mut s) * 3.1, 0.15 + lcg(&mut s) * 1.2).unwrap()).collect();
        let f: Vec<_> = ang.iter().map(|a| ura_esprit::array::phase_factors(&g, *a).unwrap()).collect();
        let (f2, f3): (Vec<c64>, Vec<c64>) = f.iter().map(|p| (p.f2, p.f3)).unzip();
        let Some(p) = brute_force_pairing(&f2, &f3) else { continue };
        assert_eq!(p, (0..k).collect::<Vec<_>>());
        let m = match_eigenvalues(&synthetic(&g, &ang, &mut s)).unwrap();
        assert!(check_pairing(&m, &f2, &f3, 1e-6), "{ang:?}");
        done += 1;
    }
}

#[test]
fn matching_shared_azimuth() {
    let g = UraGeometry::square(6).unwrap();
    let ang = angles(&[(40.0, 20.0), (40.0, 55.0)]);
    let mut s = 5;
    let m = match_eigenvalues(&synthetic(&g, &ang, &mut s)).unwrap();
    let (f2, f3): (Vec<c64>, Vec<c64>) =
        ang.iter().map(|a| ura_esprit::array::phase_factors(&g, *a).unwrap()).map(|p| (p.f2, p.f3)).unzip();
    assert!(check_pairing(&m, &f2, &f3, 1e-6));
}

fn triple(g: &UraGeometry, deg: &[(f64, f64)]) -> MatchedEigenvalues {
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for a in angles(deg) {
        let f = ura_esprit::array::phase_factors(g, a).unwrap();
        l1.extend([f.f2; 3]);
        l2.extend([f.f3; 3]);
    }
    MatchedEigenvalues {
        lambda1: l1,
        lambda2: l2,
        grouping: (0..deg.len()).map(|k| [3 * k, 3 * k + 1, 3 * k + 2]).collect(),
        grouping_confidence: f64::INFINITY,
        psi4_offdiag: 0.0,
        out_of_band: 0,
    }
}

#[test]
fn doa_inversion_examples() {
    let g = UraGeometry::square(4).unwrap();
    let d = recover_doas(&triple(&g, &[(10.0, 30.0)]), PI).doas[0];
    assert!((d.0 - 10f64.to_radians()).abs() < 1e-9 && (d.1 - 30f64.to_radians()).abs() < 1e-9);

    let one = MatchedEigenvalues { lambda1: vec![c64::new(1.0, 0.0); 3], lambda2: vec![c64::new(1.0, 0.0); 3], ..triple(&g, &[(0.0, 0.0)]) };
    assert_eq!(recover_doas(&one, PI).doas[0], (0.0, 0.0));

    let d = recover_doas(&triple(&g, &[(120.0, 35.0)]), PI).doas[0];
    assert!((d.0 - 120f64.to_radians()).abs() < 1e-9);
    // the single-ratio arctangent lands in the wrong quadrant here
    let t = triple(&g, &[(120.0, 35.0)]);
    let naive = (t.lambda2[0].arg() / t.lambda1[0].arg()).atan();
    assert!((naive.to_degrees() + 60.0).abs() < 1e-6);
}

#[test]
fn atan2_agrees_with_ratio_form_on_first_quadrant() {
    let g = UraGeometry::square(4).unwrap();
    for th in [1.0, 15.0, 44.0, 70.0, 89.0] {
        let t = triple(&g, &[(th, 40.0)]);
        let ratio = (t.lambda2[0].arg() / t.lambda1[0].arg()).atan();
        assert!((recover_doas(&t, PI).doas[0].0 - ratio).abs() < 1e-12);
    }
}

fn model(ang: &[AngPair], spread_deg: f64, power: f64) -> ModelCovParams {
    let s = spread_deg.to_radians();
    ModelCovParams::new(ang.iter().map(|&a| ModelSource { nominal: a, sigma_theta: s, sigma_phi: s, power }).collect(), 1.0).unwrap()
}

#[test]
fn spreads_from_taylor_covariance() {
    let g = UraGeometry::square(10).unwrap();
    let ang = reference_angles();
    let p = model(&ang, 1.0, 0.2);
    let r = taylor_covariance(&g, &p).unwrap();
    let c = CovarianceEstimate::from_matrix(r.as_ref(), 1);
    let doas: Vec<(f64, f64)> = ang.iter().map(|a| (a.theta, a.phi)).collect();
    let sp = recover_spreads(&doas, &c, 1.0, &g).unwrap();
    for (k, &(st, sph)) in sp.spreads.iter().enumerate() {
        assert!((st.to_degrees() - 1.0).abs() < 0.05 && (sph.to_degrees() - 1.0).abs() < 0.05);
        assert!((sp.lambda_c_hat[k] - 0.2).abs() < 0.01);
    }
    assert_eq!(sp.floored, 0);

    // Gaussian-kernel covariance: the Taylor truncation is the only error
    let rg = model_covariance(&g, &p);
    let sp = recover_spreads(&doas, &CovarianceEstimate::from_matrix(rg.as_ref(), 1), 1.0, &g).unwrap();
    for &(st, sph) in &sp.spreads {
        assert!((st.to_degrees() - 1.0).abs() < 0.15 && (sph.to_degrees() - 1.0).abs() < 0.15, "{st} {sph}");
    }

    let sp = recover_spreads(&doas, &c, 1.1, &g).unwrap();
    assert!(sp.spreads.iter().all(|&(a, b)| a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0));
}

#[test]
fn coincident_sources_are_rank_deficient() {
    let g = UraGeometry::square(6).unwrap();
    let r = CovarianceEstimate::from_matrix(CMat::identity(36, 36).as_ref(), 1);
    let d = (0.5, 0.6);
    assert!(matches!(recover_spreads(&[d, d], &r, 1.0, &g), Err(Error::RankDeficient(0, 1))));
    assert!(matches!(recover_spreads(&[(0.1, 0.2), d, d], &r, 1.0, &g), Err(Error::RankDeficient(1, 2))));
}

#[test]
fn point_like_source_is_located() {
    let g = UraGeometry::square(8).unwrap();
    let s = SourceParams::from_degrees(35.0, 25.0, 0.01, 0.01, 1.0, 1.0, 50).unwrap();
    for seed in 0..20 {
        let est = estimate(&generate(&g, &[s], 200, 1e-12, seed).unwrap(), 1).unwrap();
        let e = est.sources[0];
        assert!((e.theta.to_degrees() - 35.0).abs() < 0.05 && (e.phi.to_degrees() - 25.0).abs() < 0.05, "{e:?}");
    }
}

fn reference_sources(power: f64) -> Vec<SourceParams> {
    vec![
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, power, 50).unwrap(),
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, power, 50).unwrap(),
    ]
}

#[test]
fn estimates_are_sorted_and_permutation_equivariant() {
    let g = UraGeometry::square(10).unwrap();
    let mut src = reference_sources(10.0);
    let a = estimate(&generate(&g, &src, 500, 1.0, 12).unwrap(), 2).unwrap();
    src.reverse();
    let b = estimate(&generate(&g, &src, 500, 1.0, 12).unwrap(), 2).unwrap();
    assert!(a.sources[0].theta <= a.sources[1].theta);
    for (x, y) in a.sources.iter().zip(&b.sources) {
        assert!((x.theta - y.theta).abs() < 1e-9 && (x.phi - y.phi).abs() < 1e-9);
        assert!((x.sigma_theta - y.sigma_theta).abs() < 1e-9 && (x.sigma_phi - y.sigma_phi).abs() < 1e-9);
    }
}

#[test]
fn spreads_ignore_global_phase() {
    let g = UraGeometry::square(10).unwrap();
    let x = generate(&g, &reference_sources(10.0), 500, 1.0, 3).unwrap();
    let a = estimate(&x, 2).unwrap();
    let b = estimate(&x.rotate_phase(1.234), 2).unwrap();
    for (p, q) in a.sources.iter().zip(&b.sources) {
        assert!((p.sigma_theta - q.sigma_theta).abs() < 1e-9 && (p.sigma_phi - q.sigma_phi).abs() < 1e-9);
    }
}

#[test]
fn stage_errors_are_tagged() {
    let g = UraGeometry::square(4).unwrap();
    let x = generate(&g, &reference_sources(1.0), 50, 1.0, 1).unwrap();
    let e = estimate(&x, 6).unwrap_err();
    assert!(e.stage().is_some());
    assert!(e.to_string().contains("subspace_split"), "{e}");
    let c = CovarianceEstimate::from_matrix(CMat::identity(9, 9).as_ref(), 1);
    assert!(estimate_from_covariance(&c, &g, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn estimates_stay_in_range(
        n in 5usize..9,
        th1 in 0.0..179.0f64, ph1 in 5.0..85.0f64,
        th2 in 0.0..179.0f64, ph2 in 5.0..85.0f64,
        snr in -5.0..20.0f64,
        seed in 0u64..1000,
    ) {
        let g = UraGeometry::square(n).unwrap();
        let p = 10f64.powf(snr / 10.0);
        let src = vec![
            SourceParams::from_degrees(th1, ph1, 1.0, 1.0, 1.0, p, 20).unwrap(),
            SourceParams::from_degrees(th2, ph2, 1.0, 1.0, 1.0, p, 20).unwrap(),
        ];
        if let Ok(est) = estimate(&generate(&g, &src, 100, 1.0, seed).unwrap(), 2) {
            for s in &est.sources {
                prop_assert!((0.0..PI).contains(&s.theta));
                prop_assert!((0.0..PI / 2.0).contains(&s.phi));
                prop_assert!(s.sigma_theta >= 0.0 && s.sigma_phi >= 0.0);
            }
        }
    }
}

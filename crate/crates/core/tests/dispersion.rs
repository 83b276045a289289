use faer::Mat;
use proptest::prelude::*;
use ura_esprit::array::manifold;
use ura_esprit::dispersion::{b_matrix, model_covariance, taylor_covariance, xi_matrix, ModelCovParams, ModelSource};
use ura_esprit::linalg::{fro2, herm_eigen, CMat};
use ura_esprit::spectral::sample_covariance;
use ura_esprit::{c64, generate, AngPair, SourceParams, UraGeometry};

fn source(th: f64, ph: f64, spread_deg: f64, power: f64) -> ModelSource {
    let s = spread_deg.to_radians();
    ModelSource { nominal: AngPair::from_degrees(th, ph).unwrap(), sigma_theta: s, sigma_phi: s, power }
}

fn reference(spread_deg: f64, power: f64, noise: f64) -> ModelCovParams {
    ModelCovParams::new(vec![source(10.0, 30.0, spread_deg, power), source(50.0, 40.0, spread_deg, power)], noise).unwrap()
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    (fro2((a - b).as_ref()) / fro2(b.as_ref())).sqrt()
}

#[test]
fn kernel_hand_value_on_3x3() {
    let g = UraGeometry::new(3, 3, std::f64::consts::PI).unwrap();
    let b = b_matrix(&g, &source(10.0, 30.0, 1.0, 1.0));
    let s = 1f64.to_radians();
    let (t, p) = (10f64.to_radians(), 30f64.to_radians());
    let arg = s * s * p.cos().powi(2) * t.cos().powi(2) + s * s * p.sin().powi(2) * t.sin().powi(2);
    let want = (-std::f64::consts::PI.powi(2) / 2.0 * arg).exp();
    assert!((b[(g.index(1, 1), g.index(2, 1))] - want).abs() < 1e-15);
}

#[test]
fn hadamard_and_congruence_forms_agree() {
    let mut seed = 7u64;
    for _ in 0..10 {
        let mut r = || {
            seed = ura_esprit::rng::mix64(seed);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let g = UraGeometry::new(3 + (r() * 4.0) as usize, 3 + (r() * 4.0) as usize, 2.0 + r()).unwrap();
        let s = ModelSource {
            nominal: AngPair::new(r() * 3.1, 0.05 + r() * 1.4).unwrap(),
            sigma_theta: r() * 0.05,
            sigma_phi: r() * 0.05,
            power: 1.0,
        };
        let a = manifold(&g, s.nominal).unwrap();
        let b = b_matrix(&g, &s);
        let m = g.m();
        let d = Mat::from_fn(m, m, |i, j| if i == j { a[i] } else { c64::new(0.0, 0.0) });
        let bc = Mat::from_fn(m, m, |i, j| c64::new(b[(i, j)], 0.0));
        let dbd = &d * &bc * d.adjoint();
        let xi = xi_matrix(&g, &s);
        assert!((&xi - &dbd).norm_max() < 1e-12);
    }
}

#[test]
fn zero_spread_xi_is_rank_one() {
    let g = UraGeometry::square(5).unwrap();
    let s = source(30.0, 20.0, 0.0, 1.0);
    let xi = xi_matrix(&g, &s);
    let a = manifold(&g, s.nominal).unwrap();
    let aa = Mat::from_fn(25, 25, |i, j| a[i] * a[j].conj());
    assert!((&xi - &aa).norm_max() < 1e-14);

    let p = ModelCovParams::new(vec![ModelSource { power: 2.0, ..s }], 0.5).unwrap();
    let e = herm_eigen(model_covariance(&g, &p).as_ref()).unwrap();
    assert!((e.values[0] - (25.0 * 2.0 + 0.5)).abs() < 1e-10);
    assert!(e.values[1..].iter().all(|v| (v - 0.5).abs() < 1e-10));
}

#[test]
fn model_matches_long_run_sample_covariance() {
    let g = UraGeometry::square(10).unwrap();
    let src = [
        SourceParams::from_degrees(10.0, 30.0, 1.0, 1.0, 1.0, 1.0, 50).unwrap(),
        SourceParams::from_degrees(50.0, 40.0, 1.0, 1.0, 1.0, 1.0, 50).unwrap(),
    ];
    let x = generate(&g, &src, 100_000, 0.1, 99).unwrap();
    let r = sample_covariance(&x).unwrap().r_hat;
    let model = model_covariance(&g, &ModelCovParams::from_sources(&src, 0.1).unwrap());
    let e = rel(&r, &model);
    assert!(e < 0.05, "{e}");
}

#[test]
fn taylor_form_is_second_order_close() {
    let g = UraGeometry::square(10).unwrap();
    let gap = |sd: f64| {
        let p = reference(sd, 10.0, 1.0);
        rel(&taylor_covariance(&g, &p).unwrap(), &model_covariance(&g, &p))
    };
    for sd in [0.05, 0.1, 0.2, 0.4] {
        assert!(gap(sd) < 0.02, "{sd}: {}", gap(sd));
    }
    // halving the spread quarters the gap
    for sd in [0.2, 0.4, 1.0] {
        let q = gap(sd) / gap(sd / 2.0);
        assert!((3.5..4.5).contains(&q), "{sd}: {q}");
    }
}

fn valid_source() -> impl Strategy<Value = ModelSource> {
    (0.0..3.1f64, 0.05..1.5f64, 0.0..0.05f64, 0.0..0.05f64, 0.1..10.0f64).prop_map(|(t, p, st, sp, w)| ModelSource {
        nominal: AngPair::new(t, p).unwrap(),
        sigma_theta: st,
        sigma_phi: sp,
        power: w,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn kernel_is_symmetric_unit_diagonal(s in valid_source(), n in 2usize..7) {
        let g = UraGeometry::square(n).unwrap();
        let b = b_matrix(&g, &s);
        for i in 0..g.m() {
            prop_assert_eq!(b[(i, i)], 1.0);
            for j in 0..g.m() {
                prop_assert_eq!(b[(i, j)], b[(j, i)]);
                prop_assert!(b[(i, j)] > 0.0 && b[(i, j)] <= 1.0);
            }
        }
    }

    #[test]
    fn xi_is_hermitian_psd_with_trace_m(s in valid_source(), n in 2usize..7) {
        let g = UraGeometry::square(n).unwrap();
        let xi = xi_matrix(&g, &s);
        let m = g.m();
        let tr: f64 = (0..m).map(|i| xi[(i, i)].re).sum();
        prop_assert!((tr - m as f64).abs() < 1e-10);
        prop_assert!((&xi - xi.adjoint()).norm_max() < 1e-14);
        let e = herm_eigen(xi.as_ref()).unwrap();
        prop_assert!(*e.values.last().unwrap() >= -1e-10 * e.values[0]);
    }

    #[test]
    fn model_is_hermitian_psd(a in valid_source(), b in valid_source(), noise in 0.01..2.0f64) {
        let g = UraGeometry::square(4).unwrap();
        let r = model_covariance(&g, &ModelCovParams::new(vec![a, b], noise).unwrap());
        prop_assert!((&r - r.adjoint()).norm_max() < 1e-12);
        let e = herm_eigen(r.as_ref()).unwrap();
        prop_assert!(*e.values.last().unwrap() >= noise - 1e-9);
    }

    #[test]
    fn kernel_tends_to_ones(s in valid_source()) {
        let g = UraGeometry::square(4).unwrap();
        let tiny = ModelSource { sigma_theta: s.sigma_theta * 1e-6, sigma_phi: s.sigma_phi * 1e-6, ..s };
        let b = b_matrix(&g, &tiny);
        for i in 0..16 {
            for j in 0..16 {
                prop_assert!((b[(i, j)] - 1.0).abs() < 1e-9);
            }
        }
    }
}

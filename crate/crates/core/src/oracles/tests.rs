use num_complex::Complex;

use super::*;
use crate::heston::{randomised_cgf_derivatives, randomised_mgf, HestonParams};
use crate::laws::RandomisationLaw;
use crate::special::norm_cdf;

fn standard() -> HestonParams<f64> {
    HestonParams::new(1.0, 0.04, 0.5, -0.7).unwrap()
}

fn laws() -> Vec<RandomisationLaw<f64>> {
    vec![
        RandomisationLaw::point_mass(0.04).unwrap(),
        RandomisationLaw::uniform(0.02, 0.06).unwrap(),
        RandomisationLaw::folded_gaussian(0.05).unwrap(),
        RandomisationLaw::gamma(2.0, 50.0).unwrap(),
    ]
}

#[test]
fn bs_round_trip() {
    let price = bs_price(0.04f64, 0.1).unwrap();
    let vol = implied_vol(price, 0.1, 1.0).unwrap();
    assert!((vol - 0.2).abs() < 1e-10, "{vol}");
}

#[test]
fn bs_atm_closed_form() {
    let price = bs_price(0.04f64, 0.0).unwrap();
    assert!((price - (2.0 * norm_cdf(0.1) - 1.0)).abs() < 1e-15);
    assert!((price - 0.0797).abs() < 1e-4);
}

#[test]
fn implied_vol_at_intrinsic_edge() {
    for k in [-0.2, 0.0, 0.2] {
        let intrinsic = f64::max(1.0 - f64::exp(k), 0.0);
        let vol = implied_vol(intrinsic + 1e-15, k, 1.0).unwrap();
        assert!((0.0..0.05).contains(&vol), "k={k}: {vol}");
    }
    assert!(implied_vol(1.2, 0.0, 1.0).is_err());
    assert!(implied_vol(0.05, -0.2, 1.0).is_err());
}

#[test]
fn implied_vol_round_trip_wings() {
    for &(w, k) in &[(1e-4f64, 0.5f64), (0.01, -1.5), (0.3, 3.0), (2.0, -0.3)] {
        let log_otm = bs_log_otm_price(w, k).unwrap();
        let back = implied_total_variance_from_log_otm(log_otm, k).unwrap();
        assert!((back / w - 1.0).abs() < 1e-10, "({w}, {k}) -> {back}");
    }
}

#[test]
fn point_mass_price_matches_reference() {
    let law = RandomisationLaw::point_mass(0.04).unwrap();
    let est = fourier_call(&standard(), &law, 1.0, 0.0).unwrap();
    assert!(
        (est.value - 0.067_929_147_398_749_48).abs() < 1e-8,
        "{}",
        est.value
    );
    assert!(est.error >= 0.0 && est.error < 1e-8);
}

#[test]
fn deep_itm_call() {
    let law = RandomisationLaw::point_mass(0.04).unwrap();
    let est = fourier_call(&standard(), &law, 1.0, -10.0).unwrap();
    assert!((est.value - (1.0 - (-10f64).exp())).abs() < 1e-6);
}

#[test]
fn put_call_parity() {
    let p = standard();
    for law in laws() {
        for k in [-0.1, 0.05, 0.2] {
            let call =
                log_inversion(&p, &law, 0.5, k, Target::Call, &FourierConfig::default()).unwrap();
            let put =
                log_inversion(&p, &law, 0.5, k, Target::Put, &FourierConfig::default()).unwrap();
            let gap = call.log_value.exp() - put.log_value.exp() - (1.0 - k.exp());
            assert!(gap.abs() < 1e-9, "{law:?} k={k}: {gap}");
        }
    }
}

#[test]
fn tail_probability_limits_and_complement() {
    let p = standard();
    for law in laws() {
        let far = tail_probability(&p, &law, 0.5, -20.0).unwrap();
        assert!(far.value >= 1.0 - 1e-8);
        let up = log_tail_probability(&p, &law, 0.5, 0.02, true)
            .unwrap()
            .log_value
            .exp();
        let down = log_tail_probability(&p, &law, 0.5, 0.02, false)
            .unwrap()
            .log_value
            .exp();
        assert!((up + down - 1.0).abs() < 1e-9, "{up} + {down}");
    }
}

#[test]
fn tail_symmetry_without_correlation() {
    let p = HestonParams::new(1.0, 0.04, 0.3, 0.0).unwrap();
    let law = RandomisationLaw::point_mass(0.04).unwrap();
    let t = 1e-3;
    let mean = randomised_cgf_derivatives(&p, &law, t, 0.0).unwrap()[1];
    let c = 0.01;
    let up: f64 = tail_probability(&p, &law, t, mean + c).unwrap().value;
    let down = 1.0 - tail_probability(&p, &law, t, mean - c).unwrap().value;
    assert!((up / down - 1.0).abs() < 5e-3, "{up} vs {down}");
}

#[test]
fn fourier_works_in_f32() {
    let p = HestonParams::<f32>::new(1.0, 0.04, 0.5, -0.7).unwrap();
    let law = RandomisationLaw::point_mass(0.04f32).unwrap();
    let est = fourier_call(&p, &law, 1.0, 0.0).unwrap();
    assert!((est.value - 0.067_929_15).abs() < 1e-4, "{}", est.value);
}

#[test]
fn mc_is_reproducible() {
    let law = RandomisationLaw::gamma(2.0, 50.0).unwrap();
    let cfg = McConfig {
        n_paths: 40_000,
        n_steps: 8,
        scheme: Scheme::ExactCir,
        seed: 7,
    };
    let a = simulate_paths(&standard(), &law, 0.5, &cfg).unwrap();
    let b = simulate_paths(&standard(), &law, 0.5, &cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate_paths(&standard(), &law, 0.5, &McConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a, c);
    assert!(simulate_paths(&standard(), &law, 0.5, &McConfig { n_paths: 0, ..cfg }).is_err());
}

#[test]
fn mc_martingale_and_tower_property() {
    let p = standard();
    let t = 0.5;
    for scheme in [Scheme::ExactCir, Scheme::FullTruncationEuler] {
        for law in laws() {
            let cfg = McConfig {
                n_paths: 200_000,
                n_steps: 32,
                scheme,
                seed: 11,
            };
            let x = simulate_paths(&p, &law, t, &cfg).unwrap();
            let mart = mc_estimate(&x, f64::exp).unwrap();
            assert!(
                (mart.value - 1.0).abs() < 4.0 * mart.error,
                "{scheme:?} {law:?}: {mart:?}"
            );
            let half = mc_estimate(&x, |v| (0.5 * v).exp()).unwrap();
            let exact = randomised_mgf(&p, &law, t, Complex::new(0.5, 0.0))
                .unwrap()
                .re;
            assert!(
                (half.value - exact).abs() < 4.0 * half.error,
                "{scheme:?} {law:?}: {half:?} vs {exact}"
            );
        }
    }
}

#[test]
fn mc_gaussian_limit_small_vol_of_vol() {
    let (kappa, theta, v0, t) = (2.0f64, 0.04, 0.09, 1.0);
    let p = HestonParams::new(kappa, theta, 1e-8, -0.5).unwrap();
    let law = RandomisationLaw::point_mass(v0).unwrap();
    let cfg = McConfig {
        n_paths: 100_000,
        n_steps: 512,
        scheme: Scheme::FullTruncationEuler,
        seed: 3,
    };
    let x = simulate_paths(&p, &law, t, &cfg).unwrap();
    let m_v = theta * t + (v0 - theta) * (1.0 - (-kappa * t).exp()) / kappa;
    let mean = mc_estimate(&x, |v| v).unwrap();
    assert!(
        (mean.value + 0.5 * m_v).abs() < 4.0 * mean.error,
        "{mean:?}"
    );
    let var = mc_estimate(&x, |v| (v - mean.value).powi(2)).unwrap();
    assert!(
        (var.value - m_v).abs() < 4.0 * var.error,
        "{var:?} vs {m_v}"
    );
}

#[test]
fn exact_cir_mean() {
    let p = HestonParams::new(1.5, 0.04, 0.6, 0.0).unwrap();
    let law = RandomisationLaw::point_mass(0.1).unwrap();
    let cfg = McConfig {
        n_paths: 200_000,
        n_steps: 4,
        scheme: Scheme::ExactCir,
        seed: 5,
    };
    let v = simulate_variance(&p, &law, 1.0, &cfg).unwrap();
    let exact = 0.04 + (0.1 - 0.04) * (-1.5f64).exp();
    let mean = mc_estimate(&v, |v| v).unwrap();
    assert!(
        (mean.value - exact).abs() < 4.0 * mean.error,
        "{mean:?} vs {exact}"
    );
}

#[test]
fn fourier_matches_mc() {
    let p = standard();
    let t = 0.25;
    for law in laws() {
        let cfg = McConfig {
            n_paths: 200_000,
            n_steps: 32,
            scheme: Scheme::ExactCir,
            seed: 21,
        };
        let x = simulate_paths(&p, &law, t, &cfg).unwrap();
        for k in [-0.1f64, 0.0, 0.1] {
            let mc = mc_estimate(&x, |v| (v.exp() - k.exp()).max(0.0)).unwrap();
            let f = fourier_call(&p, &law, t, k).unwrap();
            assert!(
                (mc.value - f.value).abs() < 4.0 * mc.error,
                "{law:?} k={k}: {mc:?} vs {f:?}"
            );
        }
    }
}

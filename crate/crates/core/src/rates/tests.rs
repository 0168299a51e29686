use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::heston::{limit_cgf, randomised_log_mgf, HestonParams};
use crate::laws::RandomisationLaw;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn duality_limit() -> LimitCgf<f64> {
    limit_cgf(&HestonParams::new(1.0, 0.04, 0.5, -0.3).unwrap())
}

#[test]
fn bounded_support_examples() {
    assert_eq!(bounded_support_rate(2.0, 0.0), 0.0);
    assert_eq!(bounded_support_rate(2.0, 1.0), 0.25);
    assert_eq!(
        bounded_support_rate(2.0, -1.3),
        bounded_support_rate(2.0, 1.3)
    );
}

#[test]
fn thin_tail_constant_examples() {
    let c = thin_tail_constants(0.5, 2.0).unwrap();
    assert!(close(c.gamma_lo, 2.0 / 3.0, 1e-15) && close(c.gamma_hi, 2.0, 1e-15));
    assert!(close(c.c_lo, 2f64.cbrt(), 1e-15) && close(c.c_hi, 0.5, 1e-15));
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    assert!(close(c.c_lo, 4f64.cbrt(), 1e-15) && close(c.c_hi, 0.25, 1e-15));
    assert!(thin_tail_constants(1.0, 1.0).is_err());
    assert!(thin_tail_constants(0.0, 2.0).is_err());
}

proptest! {
    #[test]
    fn thin_tail_constants_are_ordered(l1 in 0.01f64..10.0, l2 in 1.01f64..6.0) {
        let c = thin_tail_constants(l1, l2).unwrap();
        prop_assert!(c.gamma_lo > 0.5 && c.gamma_lo < 1.0 && c.gamma_hi > 1.0);
        let product = c.c_lo.powf(1.0 + l2) * c.c_hi.powf(l2 - 1.0);
        prop_assert!((product - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_tail_rate_is_homogeneous(x in -5.0f64..5.0, lambda in 0.1f64..10.0) {
        let c = thin_tail_constants(1.0, 2.0).unwrap();
        let lhs = thin_tail_rate_lo(&c, lambda * x);
        let rhs = lambda.powf(2.0 * c.gamma_lo) * thin_tail_rate_lo(&c, x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }
}

#[test]
fn thin_tail_rate_lo_examples() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    assert_eq!(thin_tail_rate_lo(&c, 0.0), 0.0);
    assert!(close(thin_tail_rate_lo(&c, 1.0), 4f64.cbrt() * 0.75, 1e-15));
    assert!(close(thin_tail_rate_lo(&c, 1.0), 1.190_55, 1e-5));
    assert_eq!(thin_tail_rate_lo(&c, -0.7), thin_tail_rate_lo(&c, 0.7));
}

#[test]
fn thin_tail_rate_lo_is_continuous_in_l1() {
    let a = thin_tail_constants(1.0f64, 2.0).unwrap();
    let b = thin_tail_constants(1.0 + 1e-6, 2.0).unwrap();
    assert!((thin_tail_rate_lo(&a, 1.0) - thin_tail_rate_lo(&b, 1.0)).abs() <= 1e-5);
}

#[test]
fn fat_tail_examples() {
    assert_eq!(fat_tail_rate(3.0, 0.0), 0.0);
    assert!(close(fat_tail_rate(3.0, 1.0), 6f64.sqrt(), 1e-15));
    assert!(close(
        fat_tail_rate(3.0, -2.5),
        2.5 * fat_tail_rate(3.0, 1.0),
        1e-15
    ));
}

#[test]
fn rate_hi_at_zero() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let r = thin_tail_rate_hi(&c, &duality_limit(), 0.0).unwrap();
    assert_eq!((r.value, r.maximiser), (0.0, 0.0));
}

#[test]
fn rate_hi_fenchel_young_and_grid_supremum() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let limit = duality_limit();
    let f = BoundaryCgf::new(&c, limit);
    let r = thin_tail_rate_hi(&c, &limit, 1.0).unwrap();
    assert!((r.value - (r.maximiser - f.value(r.maximiser))).abs() <= 1e-8);
    assert!((f.derivatives(r.maximiser).unwrap()[1] - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let u = rng.random_range(limit.u_minus..limit.u_plus);
        assert!(r.value >= u - f.value(u) - 1e-12);
    }
    for &x in &[-2.0, -0.3, 1.0, 2.5] {
        let r = thin_tail_rate_hi(&c, &limit, x).unwrap();
        let n = 200_000;
        let step = (limit.u_plus - limit.u_minus) / n as f64;
        let grid = (1..n)
            .map(|i| limit.u_minus + step * i as f64)
            .map(|u| u * x - f.value(u))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            r.value >= grid - 1e-12 && r.value - grid < 1e-6,
            "{x}: {} vs {grid}",
            r.value
        );
    }
}

#[test]
fn rate_hi_is_monotone_and_convex() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let limit = duality_limit();
    let xs: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
    let v: Vec<f64> = xs
        .iter()
        .map(|&x| thin_tail_rate_hi(&c, &limit, x).unwrap().value)
        .collect();
    for w in v.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
    }
    for i in 31..v.len() {
        assert!(v[i] >= v[i - 1]);
    }
}

#[test]
fn rate_hi_with_perfect_correlation() {
    // u₊ = ∞: the bracket is found by doubling.
    let c = thin_tail_constants(0.5, 3.0).unwrap();
    let limit = limit_cgf(&HestonParams::new(1.0, 0.04, 0.5, -1.0).unwrap());
    let f = BoundaryCgf::new(&c, limit);
    for &x in &[-1.0f64, 0.5, 4.0] {
        let r = thin_tail_rate_hi(&c, &limit, x).unwrap();
        assert!((f.derivatives(r.maximiser).unwrap()[1] - x).abs() < 1e-12 * x.abs().max(1.0));
    }
}

#[test]
fn boundary_cgf_derivatives_match_finite_differences() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let f = BoundaryCgf::new(&c, duality_limit());
    for &u in &[-4.0, -0.5, 0.3, 2.0, 6.0] {
        let [f0, f1, f2] = f.derivatives(u).unwrap();
        assert!(close(f0, f.value(u), 1e-14));
        let h = 1e-5;
        let fd1 = (f.value(u + h) - f.value(u - h)) / (2.0 * h);
        let fd2 = (f.value(u + h) - 2.0 * f0 + f.value(u - h)) / (h * h);
        assert!(close(f1, fd1, 1e-7) && close(f2, fd2, 1e-4), "{u}");
    }
}

#[test]
fn regimes_follow_tail_class() {
    let limit = duality_limit();
    let r = MdpRegime::new(TailRegime::BoundedSupport { v_plus: 2.0 }, 0.5, limit).unwrap();
    assert_eq!(r.alpha, 0.25);
    assert_eq!(r.rate(1.0).unwrap(), 0.25);
    assert!(MdpRegime::new(TailRegime::BoundedSupport { v_plus: 2.0 }, 1.0, limit).is_err());

    let thin = TailRegime::ThinTail { l1: 1.0, l2: 2.0 };
    let r = MdpRegime::new(thin, 0.5, limit).unwrap();
    assert!(close(r.alpha, 0.5 * (1.0 - 0.75), 1e-15));
    assert!(close(r.rate(1.0).unwrap(), 1.190_550_788_976_149_5, 1e-14));
    // α < 0 between γ̲ and γ̄.
    let r = MdpRegime::new(thin, 1.5, limit).unwrap();
    assert!(r.alpha < 0.0);
    let r = MdpRegime::new(thin, 2.0, limit).unwrap();
    assert_eq!(r.alpha, -1.0);
    assert!(matches!(r.rate, RateFunction::ThinConjugate(..)));
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    assert_eq!(
        r.rate(0.7).unwrap(),
        thin_tail_rate_hi(&c, &limit, 0.7).unwrap().value
    );
    assert!(MdpRegime::new(thin, 2.5, limit).is_err());

    let fat = RandomisationLaw::<f64>::gamma(2.0, 3.0)
        .unwrap()
        .classify_tail();
    let r = MdpRegime::new(fat, 0.25, limit).unwrap();
    assert_eq!(r.alpha, 0.25);
    assert!(close(r.rate(1.0).unwrap(), 6f64.sqrt(), 1e-15));
    assert!(MdpRegime::new(fat, 0.5, limit).is_err());
}

#[test]
fn motm_tail_examples() {
    let limit = duality_limit();
    let thin = TailRegime::ThinTail { l1: 1.0, l2: 2.0 };
    let r = MdpRegime::new(thin, 0.5, limit).unwrap();
    let v = motm_tail_asymptote(&r, 1.0, 1e-4).unwrap();
    assert!(close(v, -119.055_078_897_614_95, 1e-13));
    assert!(motm_tail_asymptote(&r, 0.0, 1e-4).is_err());
    // Doubling the rate doubles the asymptote: Λ̲*(2^{1/(2γ̲)} x) = 2 Λ̲*(x).
    let x2 = 2f64.powf(0.75);
    assert!(close(
        motm_tail_asymptote(&r, x2, 1e-4).unwrap(),
        2.0 * v,
        1e-13
    ));
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let s = slowly_varying_tail(&c, |_| 1.0, 0.5, 1e-4).unwrap();
    assert_eq!(s.log_probability, v);
    let bounded = MdpRegime::new(TailRegime::BoundedSupport { v_plus: 2.0 }, 0.5, limit).unwrap();
    assert!(motm_tail_asymptote(&bounded, 1.0, 1e-4).is_err());
}

#[test]
fn slowly_varying_examples() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let t = 1e-3;
    let s = slowly_varying_tail(&c, |t: f64| (1.0 / t).ln(), 0.5, t).unwrap();
    let expected = -(4f64.cbrt() * 0.75) * 1000f64.ln().powf(4.0 / 3.0) * 10f64.powf(1.5);
    assert!(close(s.log_probability, expected, 1e-13));
    assert!(close(s.log_probability, -495.294_894_988_927_9, 1e-12));
    assert!(close(s.alpha, 0.125, 1e-15));
    let st: f64 = 1000f64.ln();
    assert!(close(
        thin_tail_rate_lo(&c, st),
        thin_tail_rate_lo(&c, 1.0) * st.powf(2.0 * c.gamma_lo),
        1e-14
    ));
    assert!(slowly_varying_tail(&c, |_| -1.0, 0.5, t).is_err());
    assert!(slowly_varying_tail(&c, |_| 1.0, 0.7, t).is_err());
}

#[test]
fn implied_vol_limit_examples() {
    let c = thin_tail_constants(1.0, 2.0).unwrap();
    let (g, l) = motm_implied_vol_limit(&c, 0.25, 1.0).unwrap();
    assert!(close(g, 1.0 / 6.0, 1e-15));
    assert!(close(l, 0.419_973_683_298_291, 1e-14));
    assert_eq!(motm_implied_vol_limit(&c, 0.25, -1.0).unwrap().1, l);
    let l2 = motm_implied_vol_limit(&c, 0.25, 2.0).unwrap().1;
    assert!(close(l2 / l, 2f64.powf(2.0 * (1.0 - c.gamma_lo)), 1e-14));
    assert!(motm_implied_vol_limit(&c, -0.5, 1.0).is_ok());
    for alpha in [0.0, 0.5, 0.7, -1.5] {
        assert!(motm_implied_vol_limit(&c, alpha, 1.0).is_err(), "{alpha}");
    }
    assert!(motm_implied_vol_limit(&c, 0.25, 0.0).is_err());
}

#[test]
fn bounded_support_cgf_converges_to_quadratic_limit() {
    // t^γ log M(t, u/t^{γ+α}) → v₊u²/2 for Uniform(1, 2), γ = 1/2, α = 1/4.
    let p = HestonParams::new(1.0, 0.04, 0.5, -0.7).unwrap();
    let law = RandomisationLaw::uniform(1.0, 2.0).unwrap();
    for &u in &[-1.0, -0.5, 0.5, 1.0] {
        let limit = 2.0 * u * u / 2.0;
        let gaps: Vec<f64> = (3..=6)
            .map(|j| {
                let t = 10f64.powi(-j);
                let v = t.sqrt()
                    * randomised_log_mgf(&p, &law, t, Complex::new(u / t.powf(0.75), 0.0))
                        .unwrap()
                        .re;
                (v - limit).abs()
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "{u}: {gaps:?}");
        }
    }
}

//! Special functions: the Faddeeva function and its real relatives, the
//! normal distribution, and the log-gamma function.

use std::sync::OnceLock;

use num_complex::Complex;

use crate::scalar::Scalar;

const WEIDEMAN_N: usize = 64;
const ASYMPTOTIC_THRESHOLD: f64 = 8.0;

fn weideman_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // Samples f(t_k) for k = -m+1..m-1, prepended with a zero, laid out
        // in fftshift order before a plain DFT.
        let mut f = vec![0.0; m2];
        for (idx, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let theta = k as f64 * std::f64::consts::PI / m as f64;
            let t = l * (theta / 2.0).tan();
            f[idx + 1] = (-t * t).exp() * (l * l + t * t);
        }
        let mut shifted = vec![0.0; m2];
        for (i, v) in f.iter().enumerate() {
            shifted[(i + m2 - m) % m2] = *v;
        }
        let mut a = Vec::with_capacity(n);
        for j in 1..=n {
            let mut acc = 0.0;
            for (i, v) in shifted.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (i * j) as f64 / m2 as f64;
                acc += v * ang.cos();
            }
            a.push(acc / m2 as f64);
        }
        a.reverse();
        a
    })
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)` on the closed upper half
/// plane.
///
/// Weideman's rational expansion with 64 terms inside `|z| < 8` and the
/// asymptotic series outside. Absolute accuracy is close to 1e-14
/// on the half plane. Arguments with `Im z < 0` are reflected through
/// `w(z) = 2 exp(-z²) - w(-z)`, which can overflow far from the real axis.
pub fn faddeeva<T: Scalar>(z: Complex<T>) -> Complex<T> {
    if z.im < T::zero() {
        let reflected = faddeeva(-z);
        return (-(z * z)).exp() * T::lit(2.0) - reflected;
    }
    let inv_sqrt_pi = T::one() / T::PI().sqrt();
    if z.norm() >= T::lit(ASYMPTOTIC_THRESHOLD) {
        // i/(√π z) Σ (2n-1)!!/(2z²)^n, truncated at its smallest term; the
        // omitted exp(-z²) part is below 1e-27 here.
        let inv_2z2 = (z * z * T::lit(2.0)).inv();
        let mut term = Complex::new(T::one(), T::zero());
        let mut sum = term;
        for n in 1..200 {
            let next = term * inv_2z2 * T::from_usize_lossy(2 * n - 1);
            if next.norm() >= term.norm() {
                break;
            }
            term = next;
            sum += term;
            if term.norm() <= T::epsilon() * sum.norm() {
                break;
            }
        }
        return Complex::new(T::zero(), inv_sqrt_pi) * sum / z;
    }
    let l = T::lit((WEIDEMAN_N as f64 / 2f64.sqrt()).sqrt());
    let i = Complex::new(T::zero(), T::one());
    let lz = Complex::new(l, T::zero()) - i * z;
    let zz = (Complex::new(l, T::zero()) + i * z) / lz;
    let mut p = Complex::new(T::zero(), T::zero());
    for &a in weideman_coefficients() {
        p = p * zz + T::lit(a);
    }
    p * T::lit(2.0) / (lz * lz) + Complex::new(inv_sqrt_pi, T::zero()) / lz
}

/// Scaled complementary error function `exp(x²) erfc(x)` for real `x`.
pub fn erfcx<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        faddeeva(Complex::new(T::zero(), x)).re
    } else {
        T::lit(2.0) * (x * x).exp() - faddeeva(Complex::new(T::zero(), -x)).re
    }
}

/// Complementary error function.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        (-(x * x)).exp() * erfcx(x)
    } else {
        T::lit(2.0) - (-(x * x)).exp() * erfcx(-x)
    }
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::SQRT_2())
}

/// Standard normal density.
pub fn norm_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// `log Φ(x)`, accurate far into the left tail.
pub fn log_norm_cdf<T: Scalar>(x: T) -> T {
    if x < -T::one() {
        let y = -x / T::SQRT_2();
        -(y * y) + (T::lit(0.5) * erfcx(y)).ln()
    } else {
        norm_cdf(x).ln()
    }
}

/// Inverse Mills ratio `φ(x)/Φ(x)`, stable for all real `x`.
pub fn inverse_mills<T: Scalar>(x: T) -> T {
    (T::lit(2.0) / T::PI()).sqrt() / erfcx(-x / T::SQRT_2())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::lit(0.5) {
        // Reflection keeps the Lanczos sum in its accurate range.
        let s = (T::PI() * x).sin();
        return (T::PI() / s.abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_usize_lossy(k));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for `x > 0`.
pub fn gamma<T: Scalar>(x: T) -> T {
    ln_gamma(x).exp()
}

/// `(e^y - 1)/y` with the removable singularity at 0 filled in.
pub fn exprel<T: Scalar>(y: Complex<T>) -> Complex<T> {
    if y.norm() < T::lit(0.5) {
        let mut term = Complex::new(T::one(), T::zero());
        let mut acc = term;
        for k in 2..30 {
            term = term * y / T::from_usize_lossy(k);
            acc += term;
            if term.norm() <= T::epsilon() * acc.norm() {
                break;
            }
        }
        acc
    } else {
        (y.exp() - T::one()) / y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // (Re z, Im z, Re w, Im w) evaluated at 30 digits.
    const REFERENCE: [(f64, f64, f64, f64); 14] = [
        (0.5, 0.5, 0.533_156_707_912_175, 0.230_488_231_384_458_4),
        (
            0.001,
            2.0,
            0.255_395_634_507_758_6,
            0.000_106_796_446_392_853_67,
        ),
        (3.0, 0.1, 0.007_942_680_998_769_991, 0.200_742_343_098_677_36),
        (6.0, 0.0, 2.319_522_830_243_569_6e-16, 0.095_396_208_969_110_76),
        (-4.0, 1.0, 0.036_281_456_489_988_644, -0.135_838_951_000_655_07),
        (0.0, 10.0, 0.056_140_992_743_822_59, 0.0),
        (12.0, 3.0, 0.011_163_889_644_607_903, 0.044_361_237_994_963_505),
        (0.2, 0.0, 0.960_789_439_152_323_2, 0.219_753_008_822_805_88),
        (20.0, 20.0, 0.014_113_538_470_519_282, 0.014_095_907_649_337_07),
        (
            -30.0,
            0.01,
            6.279_249_540_888_326e-6,
            -0.018_816_782_772_075_435,
        ),
        (2.5, 7.5, 0.067_377_574_288_448_83, 0.022_111_452_317_019_404),
        (0.0, 0.0, 1.0, 0.0),
        (0.0, 40.0, 0.014_100_335_983_377_814, 0.0),
        (
            100.0,
            1.0,
            0.000_056_421_779_161_441_334,
            0.005_641_613_670_145_867,
        ),
    ];

    #[test]
    fn faddeeva_matches_reference() {
        for &(x, y, re, im) in &REFERENCE {
            let w = faddeeva(Complex::new(x, y));
            let scale = (re * re + im * im).sqrt().max(1e-300);
            let err = ((w.re - re).powi(2) + (w.im - im).powi(2)).sqrt();
            assert!(
                err <= 1e-13 * scale.max(1.0) && err / scale < 1e-12,
                "z=({x},{y}) w={w} err={err}"
            );
        }
    }

    #[test]
    fn faddeeva_is_continuous_across_the_switch() {
        let r = ASYMPTOTIC_THRESHOLD;
        for k in 0..16 {
            let ang = std::f64::consts::PI * k as f64 / 15.0;
            let inner = faddeeva(Complex::from_polar(r - 1e-12, ang));
            let outer = faddeeva(Complex::from_polar(r + 1e-12, ang));
            assert!((inner - outer).norm() < 1e-13, "angle {ang}");
        }
    }

    #[test]
    fn erfc_and_normal_cdf() {
        assert!((erfc(0.5f64) - 0.479_500_122_186_953_5).abs() < 1e-15);
        assert!((erfc(-1.0f64) - 1.842_700_792_949_715).abs() < 1e-15);
        assert!((norm_cdf(0.0f64) - 0.5).abs() < 1e-14);
        assert!((norm_cdf(1.96f64) - 0.975_002_104_851_780_1).abs() < 1e-14);
        // log Φ(-40) = log(φ(40)/40) + log(1 - 1/40² + ...)
        let lf = log_norm_cdf(-40.0f64);
        assert!((lf - (-804.608_442_013_753_8)).abs() < 1e-9, "{lf}");
    }

    #[test]
    fn inverse_mills_limits() {
        // φ(x)/Φ(x) ~ -x for x → -∞ and → 0 for x → ∞.
        assert!((inverse_mills(-50.0f64) / 50.0 - 1.0).abs() < 1e-3);
        assert!(inverse_mills(10.0f64) < 1e-20);
        let x = 0.3f64;
        assert!((inverse_mills(x) - norm_pdf(x) / norm_cdf(x)).abs() < 1e-15);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((ln_gamma(100.0f64) - 359.134_205_369_575_4).abs() < 1e-10);
        assert!((gamma(2.0f32) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exprel_series_and_direct_agree() {
        let y = Complex::new(0.49, 0.01);
        let direct = (y.exp() - 1.0) / y;
        assert!((exprel(y) - direct).norm() < 1e-14);
        assert!((exprel(Complex::new(0.0f64, 0.0)) - 1.0).norm() < 1e-16);
    }
}

use std::cell::RefCell;

use num_complex::Complex;

use super::{LogEstimate, OracleEstimate, OracleMethod};
use crate::error::{Error, Result};
use crate::heston::{
    randomised_cgf_derivatives, randomised_domain, randomised_log_mgf, HestonParams,
};
use crate::laws::RandomisationLaw;
use crate::quadrature::{integrate_to_infinity, QuadConfig};
use crate::scalar::Scalar;

/// Quantity recovered by inverting the MGF along `Re z = a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `E(e^X - e^k)⁺`, contour `a > 1`.
    Call,
    /// `E(e^k - e^X)⁺`, contour `a < 0`.
    Put,
    /// `P(X ≥ k)`, contour `a > 0`.
    UpperTail,
    /// `P(X < k)`, contour `a < 0`.
    LowerTail,
}

impl Target {
    fn is_price(self) -> bool {
        matches!(self, Self::Call | Self::Put)
    }

    fn on_right(self) -> bool {
        matches!(self, Self::Call | Self::UpperTail)
    }

    /// Log of the transform weight, `(1-z)k - log z(z-1)` or `-zk - log z`.
    fn log_weight<T: Scalar>(self, z: Complex<T>, k: T) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        if self.is_price() {
            (one - z) * k - z.ln() - (z - one).ln()
        } else {
            -z * k - z.ln()
        }
    }

    /// Real weight exponent on the axis and its first two derivatives.
    fn real_weight<T: Scalar>(self, a: T, k: T) -> [T; 3] {
        let one = T::one();
        if self.is_price() {
            let q = a * (a - one);
            [
                (one - a) * k - q.abs().ln(),
                -k - (a + a - one) / q,
                (T::lit(2.0) * a * a - a - a + one) / (q * q),
            ]
        } else {
            [-a * k - a.abs().ln(), -k - one / a, one / (a * a)]
        }
    }
}

/// Tuning for the contour inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierConfig<T> {
    pub rel_tol: T,
    /// Truncate once the normalised integrand falls below this level.
    pub cutoff: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for FourierConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            cutoff: T::lit(1e-14),
            max_intervals: 400,
        }
    }
}

struct Saddle<T> {
    a: T,
    phi: T,
    curvature: T,
}

/// Minimises `φ(a) = K(a) + log|weight(a)|` over the half-line of the
/// target; `φ` is convex there and blows up at both ends.
fn find_saddle<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    k: T,
    target: Target,
) -> Result<Saddle<T>> {
    let (dom_lo, dom_hi) = randomised_domain(p, law, t)?;
    let eval = |a: T| -> Option<[T; 3]> {
        let kd = randomised_cgf_derivatives(p, law, t, a).ok()?;
        let w = target.real_weight(a, k);
        let v = [kd[0] + w[0], kd[1] + w[1], kd[2] + w[2]];
        v.iter().all(|x| x.is_finite()).then_some(v)
    };
    let (mut lo, mut hi) = match target {
        Target::Call => (T::one(), dom_hi),
        Target::UpperTail => (T::zero(), dom_hi),
        Target::Put | Target::LowerTail => (dom_lo, T::zero()),
    };
    if !(lo < hi) {
        return Err(Error::domain("no admissible contour"));
    }
    // Replace an infinite end by a finite point past the minimum.
    if hi.is_infinite() {
        let mut step = T::one();
        loop {
            let probe = lo + step;
            match eval(probe) {
                Some(v) if v[1] > T::zero() => {
                    hi = probe;
                    break;
                }
                None => {
                    hi = probe;
                    break;
                }
                _ if step > T::lit(1e12) => return Err(Error::domain("no admissible contour")),
                _ => step *= T::lit(2.0),
            }
        }
    }
    if lo.is_infinite() {
        let mut step = T::one();
        loop {
            let probe = hi - step;
            match eval(probe) {
                Some(v) if v[1] < T::zero() => {
                    lo = probe;
                    break;
                }
                None => {
                    lo = probe;
                    break;
                }
                _ if step > T::lit(1e12) => return Err(Error::domain("no admissible contour")),
                _ => step *= T::lit(2.0),
            }
        }
    }
    let mid = (lo + hi) / T::lit(2.0);
    let mut a = mid;
    let mut best: Option<(T, [T; 3])> = None;
    for _ in 0..400 {
        let v = match eval(a) {
            Some(v) => v,
            None => {
                // Only the ends can fail; step back towards the middle.
                if a > mid {
                    hi = a;
                } else {
                    lo = a;
                }
                a = (lo + hi) / T::lit(2.0);
                continue;
            }
        };
        best = Some((a, v));
        if v[1] > T::zero() {
            hi = a;
        } else {
            lo = a;
        }
        let newton = a - v[1] / v[2];
        let next = if v[2] > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        let scale = T::one() / v[2].sqrt();
        if (next - a).abs() <= T::lit(1e-10) * scale
            || hi - lo <= T::epsilon() * T::lit(4.0) * a.abs().max(T::one())
        {
            break;
        }
        a = next;
    }
    let (a, v) = best.ok_or_else(|| Error::domain("no admissible contour"))?;
    if !(v[2] > T::zero()) {
        return Err(Error::numerical("degenerate saddle curvature"));
    }
    Ok(Saddle {
        a,
        phi: v[0],
        curvature: v[2],
    })
}

/// `log` of the target quantity by inversion along the saddle-point contour.
///
/// The integrand is normalised by its value at `w = 0`, so the result stays
/// accurate when the quantity itself underflows.
pub fn log_inversion<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    k: T,
    target: Target,
    cfg: &FourierConfig<T>,
) -> Result<LogEstimate<T>> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    if !k.is_finite() {
        return Err(Error::invalid(format!("non-finite log-strike {k}")));
    }
    let s = find_saddle(p, law, t, k, target)?;
    debug_assert_eq!(s.a > T::zero(), target.on_right());
    let a = Complex::new(s.a, T::zero());
    let base = randomised_log_mgf(p, law, t, a)? + target.log_weight(a, k);
    let failure = RefCell::new(None);
    let integrand = |w: T| -> T {
        let z = Complex::new(s.a, w);
        match randomised_log_mgf(p, law, t, z) {
            Ok(lm) => (lm + target.log_weight(z, k) - base).exp().re,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        }
    };
    let scale = T::one() / s.curvature.sqrt();
    let quad = QuadConfig {
        abs_tol: T::lit(1e-13) * scale,
        rel_tol: cfg.rel_tol,
        max_intervals: cfg.max_intervals,
    };
    let q = integrate_to_infinity(integrand, T::zero(), scale, cfg.cutoff, &quad)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let j = q.value / T::PI();
    if !(j > T::zero()) {
        return Err(Error::numerical(format!(
            "inversion integral is not positive ({j})"
        )));
    }
    Ok(LogEstimate {
        log_value: s.phi + j.ln(),
        rel_error: q.error / T::PI() / j,
        contour: s.a,
    })
}

/// `E(e^{X_t} - e^k)⁺` from the randomised MGF.
pub fn fourier_call<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    k: T,
) -> Result<OracleEstimate<T>> {
    let cfg = FourierConfig::default();
    if k >= T::zero() {
        let l = log_inversion(p, law, t, k, Target::Call, &cfg)?;
        let v = l.log_value.exp();
        return Ok(OracleEstimate {
            value: v,
            error: v * l.rel_error,
            method: OracleMethod::Fourier { contour: l.contour },
        });
    }
    let l = log_inversion(p, law, t, k, Target::Put, &cfg)?;
    let put = l.log_value.exp();
    Ok(OracleEstimate {
        value: put + T::one() - k.exp(),
        error: put * l.rel_error,
        method: OracleMethod::Fourier { contour: l.contour },
    })
}

/// `log` of the out-of-the-money price (call for `k ≥ 0`, put for `k < 0`).
pub fn fourier_log_otm<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    k: T,
) -> Result<LogEstimate<T>> {
    let target = if k >= T::zero() {
        Target::Call
    } else {
        Target::Put
    };
    log_inversion(p, law, t, k, target, &FourierConfig::default())
}

/// `P(X_t ≥ threshold)`.
pub fn tail_probability<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    threshold: T,
) -> Result<OracleEstimate<T>> {
    let cfg = FourierConfig::default();
    let mean = randomised_cgf_derivatives(p, law, t, T::zero())?[1];
    if threshold >= mean {
        let l = log_inversion(p, law, t, threshold, Target::UpperTail, &cfg)?;
        let v = l.log_value.exp();
        Ok(OracleEstimate {
            value: v,
            error: v * l.rel_error,
            method: OracleMethod::Fourier { contour: l.contour },
        })
    } else {
        let l = log_inversion(p, law, t, threshold, Target::LowerTail, &cfg)?;
        let q = l.log_value.exp();
        Ok(OracleEstimate {
            value: T::one() - q,
            error: q * l.rel_error,
            method: OracleMethod::Fourier { contour: l.contour },
        })
    }
}

/// `log P(X_t ≥ threshold)` (`upper`) or `log P(X_t < threshold)`.
pub fn log_tail_probability<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    threshold: T,
    upper: bool,
) -> Result<LogEstimate<T>> {
    let target = if upper {
        Target::UpperTail
    } else {
        Target::LowerTail
    };
    log_inversion(p, law, t, threshold, target, &FourierConfig::default())
}

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{erfcx, norm_cdf, norm_pdf};

fn check_total_var<T: Scalar>(total_var: T, k: T) -> Result<()> {
    if !(total_var.is_finite() && total_var >= T::zero()) {
        return Err(Error::invalid(format!(
            "total variance must be finite and non-negative, got {total_var}"
        )));
    }
    if !k.is_finite() {
        return Err(Error::invalid(format!("non-finite log-strike {k}")));
    }
    Ok(())
}

/// Undiscounted Black-Scholes call on a unit forward, log-strike `k`.
pub fn bs_price<T: Scalar>(total_var: T, k: T) -> Result<T> {
    check_total_var(total_var, k)?;
    let intrinsic = (T::one() - k.exp()).max(T::zero());
    if total_var == T::zero() {
        return Ok(intrinsic);
    }
    let log_otm = bs_log_otm_price(total_var, k)?;
    Ok(if k >= T::zero() {
        log_otm.exp()
    } else {
        intrinsic + log_otm.exp()
    })
}

/// `log` of the out-of-the-money price: the call for `k ≥ 0`, the put for
/// `k < 0`. Accurate far into the wings, where the price underflows.
pub fn bs_log_otm_price<T: Scalar>(total_var: T, k: T) -> Result<T> {
    check_total_var(total_var, k)?;
    if total_var == T::zero() {
        return Ok(T::neg_infinity());
    }
    // Put-call symmetry: P(k) = e^k C(-k).
    Ok(if k < T::zero() {
        k + log_call_otm(total_var.sqrt(), -k)
    } else {
        log_call_otm(total_var.sqrt(), k)
    })
}

/// `log C(s, k)` for `k ≥ 0`.
fn log_call_otm<T: Scalar>(s: T, k: T) -> T {
    let half = T::lit(0.5);
    let d1 = -k / s + half * s;
    let d2 = d1 - s;
    if d1 > T::zero() && s < T::lit(1e-2) {
        // Near the money with tiny variance: Φ(d1) - Φ(d2) by 3-point
        // Gauss-Legendre on [d2, d1], avoiding the cancellation.
        let mid = half * (d1 + d2);
        let off = half * s * T::lit(0.6).sqrt();
        let area = half
            * s
            * (T::lit(5.0) * (norm_pdf(mid - off) + norm_pdf(mid + off))
                + T::lit(8.0) * norm_pdf(mid))
            / T::lit(9.0);
        return (area - k.exp_m1() * norm_cdf(d2)).ln();
    }
    if d1 > T::zero() {
        return (norm_cdf(d1) - k.exp() * norm_cdf(d2)).ln();
    }
    // C = ½ e^{-d1²/2} [erfcx(-d1/√2) - erfcx(-d2/√2)], using k - d2²/2 = -d1²/2.
    let r = T::FRAC_1_SQRT_2();
    let diff = erfcx(-d1 * r) - erfcx(-d2 * r);
    -half * d1 * d1 + (half * diff).ln()
}

/// `∂ log C / ∂s` with `s = √(total variance)`: vega over price.
fn log_vega_ratio<T: Scalar>(s: T, k: T, log_price: T) -> T {
    let d1 = -k / s + T::lit(0.5) * s;
    let log_pdf = -T::lit(0.5) * d1 * d1 - T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
    (log_pdf - log_price).exp()
}

/// Total implied variance from the log of the out-of-the-money price.
pub fn implied_total_variance_from_log_otm<T: Scalar>(log_otm: T, k: T) -> Result<T> {
    if !k.is_finite() || log_otm.is_nan() {
        return Err(Error::invalid(format!("invalid inputs ({log_otm}, {k})")));
    }
    if log_otm == T::neg_infinity() {
        return Ok(T::zero());
    }
    let upper = if k < T::zero() { k } else { T::zero() };
    if log_otm >= upper {
        return Err(Error::invalid(format!(
            "OTM price e^{log_otm} exceeds its upper bound e^{upper}"
        )));
    }
    let kk = k.abs();
    let target = if k < T::zero() { log_otm - k } else { log_otm };
    let f = |s: T| log_call_otm(s, kk) - target;

    let (mut lo, mut hi) = (T::zero(), T::one());
    while f(hi) < T::zero() {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > T::lit(1e6) {
            return Err(Error::numerical("implied volatility bracket search failed"));
        }
    }
    let mut s = (lo + hi) / T::lit(2.0);
    for _ in 0..300 {
        let lp = log_call_otm(s, kk);
        let r = lp - target;
        if r == T::zero() {
            return Ok(s * s);
        }
        if r > T::zero() {
            hi = s;
        } else {
            lo = s;
        }
        let slope = log_vega_ratio(s, kk, lp);
        let newton = s - r / slope;
        let next = if slope.is_finite() && slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if (next - s).abs() <= T::epsilon() * s * T::lit(4.0) || hi - lo <= T::epsilon() * hi {
            return Ok(next * next);
        }
        s = next;
    }
    Err(Error::NoConvergence {
        what: "implied volatility",
        iterations: 300,
    })
}

/// Black-Scholes implied volatility of a unit-forward call price.
pub fn implied_vol<T: Scalar>(price: T, k: T, t: T) -> Result<T> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    if !(price.is_finite() && k.is_finite()) {
        return Err(Error::invalid(format!("non-finite inputs ({price}, {k})")));
    }
    let intrinsic = (T::one() - k.exp()).max(T::zero());
    if price < intrinsic || price >= T::one() {
        return Err(Error::invalid(format!(
            "price {price} outside the no-arbitrage band [{intrinsic}, 1)"
        )));
    }
    let w = implied_total_variance_from_log_otm((price - intrinsic).ln(), k)?;
    Ok((w / t).sqrt())
}

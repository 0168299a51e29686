//! Moderate-deviation speeds, rescalings and rate functions for the three
//! tail regimes of the initial variance, and the MOTM tail and implied
//! volatility asymptotes.

use crate::error::{Error, Result};
use crate::heston::LimitCgf;
use crate::laws::TailRegime;
use crate::scalar::Scalar;

/// `γ̲ = l2/(1+l2)`, `γ̄ = l2/(l2-1)`, `𝔠̲ = (2 l1 l2)^{1/(1+l2)}`,
/// `𝔠̄ = (2 l1 l2)^{1/(1-l2)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinTailConstants<T> {
    pub gamma_lo: T,
    pub gamma_hi: T,
    pub c_lo: T,
    pub c_hi: T,
}

pub fn thin_tail_constants<T: Scalar>(l1: T, l2: T) -> Result<ThinTailConstants<T>> {
    if !(l1.is_finite() && l1 > T::zero() && l2.is_finite() && l2 > T::one()) {
        return Err(Error::invalid(format!(
            "thin tail needs l1 > 0 and l2 > 1, got ({l1}, {l2})"
        )));
    }
    let one = T::one();
    let base = T::lit(2.0) * l1 * l2;
    Ok(ThinTailConstants {
        gamma_lo: l2 / (one + l2),
        gamma_hi: l2 / (l2 - one),
        c_lo: base.powf(one / (one + l2)),
        c_hi: base.powf(one / (one - l2)),
    })
}

/// `x² / (2 v₊)`.
pub fn bounded_support_rate<T: Scalar>(v_plus: T, x: T) -> T {
    x * x / (T::lit(2.0) * v_plus)
}

/// `Λ̲*(x) = 𝔠̲/(2γ̲) |x|^{2γ̲}`, extended evenly to negative `x`.
pub fn thin_tail_rate_lo<T: Scalar>(c: &ThinTailConstants<T>, x: T) -> T {
    let two = T::lit(2.0);
    c.c_lo / (two * c.gamma_lo) * x.abs().powf(two * c.gamma_lo)
}

/// `√(2𝔪) |x|`.
pub fn fat_tail_rate<T: Scalar>(m: T, x: T) -> T {
    (T::lit(2.0) * m).sqrt() * x.abs()
}

/// Value and maximiser of a Legendre transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate<T> {
    pub value: T,
    pub maximiser: T,
}

/// `f(u) = (𝔠̄/γ̄) 2^{γ̄-1} Λ(u)^{γ̄}` on `(u₋, u₊)`, whose conjugate is `Λ̄*`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCgf<T> {
    scale: T,
    gamma: T,
    limit: LimitCgf<T>,
}

impl<T: Scalar> BoundaryCgf<T> {
    pub fn new(c: &ThinTailConstants<T>, limit: LimitCgf<T>) -> Self {
        let scale = c.c_hi * T::lit(2.0).powf(c.gamma_hi - T::one());
        Self {
            scale,
            gamma: c.gamma_hi,
            limit,
        }
    }

    pub fn limit(&self) -> &LimitCgf<T> {
        &self.limit
    }

    pub fn value(&self, u: T) -> T {
        let l = self.limit.value(u);
        if l.is_infinite() {
            return l;
        }
        self.scale / self.gamma * l.powf(self.gamma)
    }

    /// `[f, f', f'']`, `None` outside `(u₋, u₊)`.
    pub fn derivatives(&self, u: T) -> Option<[T; 3]> {
        let [l0, l1, l2] = self.limit.derivatives(u)?;
        let g = self.gamma;
        if l0 == T::zero() {
            // f ~ (u²/2)^γ̄ near 0: f'' is 0, finite or infinite with γ̄ vs 2.
            let two = T::lit(2.0);
            let f2 = if g > two {
                T::zero()
            } else if g == two {
                self.scale * two * l2
            } else {
                T::infinity()
            };
            return Some([T::zero(), T::zero(), f2]);
        }
        let p = l0.powf(g - T::one());
        Some([
            self.scale / g * p * l0,
            self.scale * p * l1,
            self.scale * ((g - T::one()) * l1 * l1 / l0 * p + p * l2),
        ])
    }
}

/// `Λ̄*(x) = sup_{u ∈ (u₋,u₊)} {ux - f(u)}` by safeguarded Newton on
/// `f'(u) = x`.
pub fn thin_tail_rate_hi<T: Scalar>(
    c: &ThinTailConstants<T>,
    limit: &LimitCgf<T>,
    x: T,
) -> Result<Conjugate<T>> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite x = {x}")));
    }
    if x == T::zero() {
        return Ok(Conjugate {
            value: T::zero(),
            maximiser: T::zero(),
        });
    }
    let f = BoundaryCgf::new(c, *limit);
    let slope = |u: T| f.derivatives(u).map(|d| d[1]);
    let positive = x > T::zero();
    let edge = if positive {
        limit.u_plus
    } else {
        limit.u_minus
    };
    let (mut lo, mut hi) = if positive {
        (T::zero(), edge)
    } else {
        (edge, T::zero())
    };

    // Move the open end inwards until f' brackets x.
    let far = if edge.is_finite() {
        let mut eps = T::lit(1e-2) * edge.abs();
        loop {
            let cand = edge - eps * edge.signum();
            match slope(cand) {
                Some(s) if (s - x) * x.signum() > T::zero() => break cand,
                Some(_) if eps < edge.abs() * T::epsilon() * T::lit(4.0) => {
                    return Err(Error::numerical(format!(
                        "f' does not reach {x} before the boundary"
                    )));
                }
                _ => eps *= T::lit(0.1),
            }
        }
    } else {
        let mut cand = x.signum();
        loop {
            match slope(cand) {
                Some(s) if (s - x) * x.signum() > T::zero() => break cand,
                _ if cand.abs() > T::lit(1e12) => {
                    return Err(Error::numerical(format!("f' does not reach {x}")));
                }
                _ => cand *= T::lit(2.0),
            }
        }
    };
    if positive {
        hi = far;
    } else {
        lo = far;
    }
    let tol = T::lit(1e-13) * T::one().max(x.abs());
    let mut u = (lo + hi) / T::lit(2.0);
    for _ in 0..200 {
        let [_, f1, f2] = f
            .derivatives(u)
            .ok_or_else(|| Error::numerical("left the domain of Λ"))?;
        let r = f1 - x;
        if r.abs() <= tol {
            return Ok(Conjugate {
                value: u * x - f.value(u),
                maximiser: u,
            });
        }
        if r > T::zero() {
            hi = u;
        } else {
            lo = u;
        }
        let newton = u - r / f2;
        u = if f2.is_finite() && f2 > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if hi - lo <= T::epsilon() * hi.abs().max(lo.abs()) {
            return Ok(Conjugate {
                value: u * x - f.value(u),
                maximiser: u,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "conjugate of the boundary thin-tail cgf",
        iterations: 200,
    })
}

/// Rate function attached to a moderate-deviation regime.
#[derive(Debug, Clone, Copy)]
pub enum RateFunction<T> {
    /// `x²/(2v₊)`.
    Quadratic { v_plus: T },
    /// `Λ̲*`.
    ThinPower(ThinTailConstants<T>),
    /// `Λ̄*`, numerical conjugate.
    ThinConjugate(ThinTailConstants<T>, LimitCgf<T>),
    /// `√(2𝔪)|x|`.
    Linear { m: T },
}

/// Speed `t^γ` (or `h(t)` in the fat-tail case), rescaling `X_t / t^α` and
/// rate function.
#[derive(Debug, Clone, Copy)]
pub struct MdpRegime<T> {
    pub gamma: T,
    pub alpha: T,
    pub law_class: TailRegime<T>,
    pub rate: RateFunction<T>,
}

impl<T: Scalar> MdpRegime<T> {
    /// Builds the regime for speed exponent `gamma`.
    ///
    /// For fat tails `gamma` is the exponent of `h(t) = √t/g(t) = t^γ`, so
    /// `g(t) = t^{1/2-γ}` and `α = 1/2 - γ`.
    pub fn new(law_class: TailRegime<T>, gamma: T, limit: LimitCgf<T>) -> Result<Self> {
        law_class.validate()?;
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::invalid(format!(
                "speed exponent must be positive, got {gamma}"
            )));
        }
        let half = T::lit(0.5);
        let one = T::one();
        let (alpha, rate) = match law_class {
            TailRegime::BoundedSupport { v_plus } => {
                if gamma >= one {
                    return Err(Error::invalid(format!(
                        "bounded support needs gamma in (0, 1), got {gamma}"
                    )));
                }
                (half * (one - gamma), RateFunction::Quadratic { v_plus })
            }
            TailRegime::ThinTail { l1, l2 } => {
                let c = thin_tail_constants(l1, l2)?;
                if (gamma - c.gamma_hi).abs() <= T::lit(1e-12) * c.gamma_hi {
                    (one - c.gamma_hi, RateFunction::ThinConjugate(c, limit))
                } else if gamma < c.gamma_hi {
                    (
                        half * (one - gamma / c.gamma_lo),
                        RateFunction::ThinPower(c),
                    )
                } else {
                    return Err(Error::invalid(format!(
                        "thin tail needs gamma in (0, {}], got {gamma}",
                        c.gamma_hi
                    )));
                }
            }
            TailRegime::FatTail { m, .. } => {
                if gamma >= half {
                    return Err(Error::invalid(format!(
                        "fat tail needs gamma in (0, 1/2), got {gamma}"
                    )));
                }
                (half - gamma, RateFunction::Linear { m })
            }
        };
        Ok(Self {
            gamma,
            alpha,
            law_class,
            rate,
        })
    }

    pub fn rate(&self, x: T) -> Result<T> {
        Ok(match &self.rate {
            RateFunction::Quadratic { v_plus } => bounded_support_rate(*v_plus, x),
            RateFunction::ThinPower(c) => thin_tail_rate_lo(c, x),
            RateFunction::ThinConjugate(c, limit) => thin_tail_rate_hi(c, limit, x)?.value,
            RateFunction::Linear { m } => fat_tail_rate(*m, x),
        })
    }

    /// Speed `t^γ` of the principle.
    pub fn speed(&self, t: T) -> T {
        t.powf(self.gamma)
    }
}

/// Leading term `-Λ̲*(x)/t^γ` of `log P(X_t ≥ x t^α)` (`x > 0`) or
/// `log P(X_t ≤ x t^α)` (`x < 0`).
pub fn motm_tail_asymptote<T: Scalar>(regime: &MdpRegime<T>, x: T, t: T) -> Result<T> {
    if x == T::zero() || !x.is_finite() {
        return Err(Error::invalid(format!(
            "x must be finite and non-zero, got {x}"
        )));
    }
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    match regime.rate {
        RateFunction::ThinPower(c) => Ok(-thin_tail_rate_lo(&c, x) / regime.speed(t)),
        _ => Err(Error::invalid(
            "MOTM tail asymptote needs a thin-tail regime with gamma below its upper limit",
        )),
    }
}

/// Log-tail asymptote with a slowly varying strike factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailAsymptote<T> {
    pub log_probability: T,
    pub gamma: T,
    pub alpha: T,
    pub strike: T,
}

/// `-Λ̲*(s(t))/t^γ`, the leading term of `log P(X_t ≥ t^α s(t))`.
pub fn slowly_varying_tail<T: Scalar>(
    c: &ThinTailConstants<T>,
    s: impl Fn(T) -> T,
    gamma: T,
    t: T,
) -> Result<TailAsymptote<T>> {
    if !(gamma > T::zero() && gamma < c.gamma_lo) {
        return Err(Error::invalid(format!(
            "gamma must lie in (0, {}), got {gamma}",
            c.gamma_lo
        )));
    }
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    let st = s(t);
    if !(st.is_finite() && st > T::zero()) {
        return Err(Error::invalid(format!("s(t) must be positive, got {st}")));
    }
    let alpha = T::lit(0.5) * (T::one() - gamma / c.gamma_lo);
    Ok(TailAsymptote {
        log_probability: -thin_tail_rate_lo(c, st) / t.powf(gamma),
        gamma,
        alpha,
        strike: t.powf(alpha) * st,
    })
}

/// `(γ̂, lim t^{γ̂} σ_t²(x t^α))` with `γ̂ = (1-2α)(1-γ̲)` and limit
/// `γ̲ |x|^{2(1-γ̲)} / 𝔠̲`.
pub fn motm_implied_vol_limit<T: Scalar>(
    c: &ThinTailConstants<T>,
    alpha: T,
    x: T,
) -> Result<(T, T)> {
    let one = T::one();
    let half = T::lit(0.5);
    let motm = alpha > T::zero() && alpha < half;
    let large_strike = alpha > one - c.gamma_hi && alpha < T::zero();
    if !(motm || large_strike) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1/2) or ({}, 0), got {alpha}",
            one - c.gamma_hi
        )));
    }
    if x == T::zero() || !x.is_finite() {
        return Err(Error::invalid(format!(
            "x must be finite and non-zero, got {x}"
        )));
    }
    let gamma_hat = (one - T::lit(2.0) * alpha) * (one - c.gamma_lo);
    let limit = c.gamma_lo * x.abs().powf(T::lit(2.0) * (one - c.gamma_lo)) / c.c_lo;
    Ok((gamma_hat, limit))
}

#[cfg(test)]
mod tests;

//! Sharp asymptotics for fat-tailed initial variance with a logarithmic
//! singularity: saddle point of the rescaled cgf, tilted characteristic
//! functions, and leading-order call price and implied variance.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::heston::{
    randomised_cgf_derivatives, randomised_domain, randomised_log_mgf, HestonParams,
};
use crate::laws::{Omega, RandomisationLaw, TailRegime};
use crate::scalar::{sign, Scalar};
use crate::special::{gamma, ln_gamma};

/// Strike rescaling `g(t) = t^β` with `β ∈ (0, ½)`, and `h(t) = √t / g(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescalingG<T> {
    beta: T,
}

impl<T: Scalar> RescalingG<T> {
    pub fn new(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::lit(0.5)) {
            return Err(Error::invalid(format!(
                "g(t) = t^beta needs beta in (0, 1/2), got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn g(&self, t: T) -> T {
        t.powf(self.beta)
    }

    pub fn h(&self, t: T) -> T {
        t.powf(T::lit(0.5) - self.beta)
    }
}

impl<T: Scalar> Default for RescalingG<T> {
    fn default() -> Self {
        Self { beta: T::lit(0.25) }
    }
}

/// `𝔪`, `γ₀`, `γ₁` of a law whose cgf behaves like `γ₀ log(𝔪 - u) + γ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatTailConstants<T> {
    pub m: T,
    pub gamma0: T,
    pub gamma1: T,
}

impl<T: Scalar> FatTailConstants<T> {
    pub fn new(m: T, gamma0: T, gamma1: T) -> Result<Self> {
        TailRegime::FatTail {
            m,
            gamma0,
            gamma1,
            omega: Omega::One,
        }
        .validate()?;
        Ok(Self { m, gamma0, gamma1 })
    }

    /// Constants of `law`, which must be fat-tailed with `ω = 1`.
    pub fn from_law(law: &RandomisationLaw<T>) -> Result<Self> {
        match law.classify_tail() {
            TailRegime::FatTail {
                m,
                gamma0,
                gamma1,
                omega: Omega::One,
            } => Ok(Self { m, gamma0, gamma1 }),
            other => Err(Error::invalid(format!(
                "sharp expansion needs a fat tail with a logarithmic singularity, got {}",
                other.name()
            ))),
        }
    }
}

fn check_time<T: Scalar>(t: T) -> Result<()> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn check_x<T: Scalar>(x: T) -> Result<()> {
    if !(x.is_finite() && x != T::zero()) {
        return Err(Error::invalid(format!(
            "x must be finite and non-zero, got {x}"
        )));
    }
    Ok(())
}

/// `Λ^g_t(u) = h(t) log M(t, u/√t)`, the cgf of `X_t / g(t)` at speed `h`.
pub fn rescaled_cgf<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    gspec: &RescalingG<T>,
    t: T,
    u: T,
) -> Result<T> {
    Ok(rescaled_cgf_derivatives(p, law, gspec, t, u)?[0])
}

/// `[Λ^g_t, ∂ᵤΛ^g_t, ∂ᵤ²Λ^g_t]` at `u`.
pub fn rescaled_cgf_derivatives<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    gspec: &RescalingG<T>,
    t: T,
    u: T,
) -> Result<[T; 3]> {
    check_time(t)?;
    FatTailConstants::from_law(law)?;
    let st = t.sqrt();
    let [k0, k1, k2] = randomised_cgf_derivatives(p, law, t, u / st)?;
    let g = gspec.g(t);
    Ok([gspec.h(t) * k0, k1 / g, k2 / (g * st)])
}

/// How a [`SaddlePoint`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleMethod {
    /// `sgn(x)√(2𝔪) - (|γ₀|/x) h(t)`.
    Asymptotic,
    /// Root of `∂ᵤΛ^g_t(u) = x`.
    NewtonExact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint<T> {
    pub u_star: T,
    pub method: SaddleMethod,
    /// `∂ᵤΛ^g_t(u_star) - x`.
    pub residual: T,
}

/// Leading-order saddle point from the constants alone.
pub fn asymptotic_saddle<T: Scalar>(c: &FatTailConstants<T>, x: T, h: T) -> T {
    sign(x) * (T::lit(2.0) * c.m).sqrt() - c.gamma0.abs() / x * h
}

pub fn saddle_point<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    gspec: &RescalingG<T>,
    t: T,
    x: T,
    method: SaddleMethod,
) -> Result<SaddlePoint<T>> {
    check_time(t)?;
    check_x(x)?;
    let c = FatTailConstants::from_law(law)?;
    let guess = asymptotic_saddle(&c, x, gspec.h(t));
    let residual_at = |u: T| rescaled_cgf_derivatives(p, law, gspec, t, u).map(|d| d[1] - x);
    if method == SaddleMethod::Asymptotic {
        let residual = residual_at(guess).unwrap_or(T::nan());
        return Ok(SaddlePoint {
            u_star: guess,
            method,
            residual,
        });
    }

    // The derivative is increasing on the domain; bracket inside it.
    let st = t.sqrt();
    let (dlo, dhi) = randomised_domain(p, law, t)?;
    let shrink = T::one() - T::lit(1e-12);
    let (mut lo, mut hi) = (dlo * st * shrink, dhi * st * shrink);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::numerical("unbounded rescaled cgf domain"));
    }
    let tol = T::lit(1e-10) * x.abs().max(T::one());
    let mut u = if guess > lo && guess < hi {
        guess
    } else {
        (lo + hi) / T::lit(2.0)
    };
    for _ in 0..200 {
        let d = match rescaled_cgf_derivatives(p, law, gspec, t, u) {
            Ok(d) if d[1].is_finite() && d[2].is_finite() => d,
            _ => {
                // Numerically past the edge: pull back towards the centre.
                if u > T::zero() {
                    hi = u;
                } else {
                    lo = u;
                }
                u = (lo + hi) / T::lit(2.0);
                continue;
            }
        };
        let r = d[1] - x;
        if r.abs() <= tol {
            return Ok(SaddlePoint {
                u_star: u,
                method,
                residual: r,
            });
        }
        if r > T::zero() {
            hi = u;
        } else {
            lo = u;
        }
        let newton = u - r / d[2];
        u = if d[2] > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if hi - lo <= T::epsilon() * u.abs() {
            let r = residual_at(u)?;
            if r.abs() <= tol {
                return Ok(SaddlePoint {
                    u_star: u,
                    method,
                    residual: r,
                });
            }
            break;
        }
    }
    Err(Error::NoConvergence {
        what: "saddle point (t may be too large)",
        iterations: 200,
    })
}

/// Characteristic function of `X_t/g(t) - x` under the measure tilted by
/// `e^{u* X_t/√t}`, from the exact randomised MGF at complex argument.
pub fn tilted_cf<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    gspec: &RescalingG<T>,
    t: T,
    x: T,
    u_star: T,
    u: T,
) -> Result<Complex<T>> {
    check_time(t)?;
    let st = t.sqrt();
    let h = gspec.h(t);
    let base = randomised_log_mgf(p, law, t, Complex::new(u_star / st, T::zero()))?;
    let shifted = randomised_log_mgf(p, law, t, Complex::new(u_star, u * h) / st)?;
    Ok((shifted - base - Complex::new(T::zero(), u * x)).exp())
}

/// Small-time limit of the tilted characteristic function.
///
/// `ω = 1`: `e^{-iux}(1 - iux/|γ₀|)^{γ₀}`; `ω = 2`: `exp(-u²ζ²/2)` with
/// `ζ = √2 (2𝔪/γ₀²)^{1/8} |x|^{3/4}`.
pub fn tilted_cf_limit<T: Scalar>(m: T, gamma0: T, x: T, u: T, omega: Omega) -> Result<Complex<T>> {
    check_x(x)?;
    TailRegime::FatTail {
        m,
        gamma0,
        gamma1: T::zero(),
        omega,
    }
    .validate()?;
    match omega {
        Omega::One => {
            let base = Complex::new(T::one(), -u * x / gamma0.abs());
            Ok(Complex::new(T::zero(), -u * x).exp() * base.powf(gamma0))
        }
        Omega::Two => {
            let zeta = T::lit(2.0).sqrt()
                * (T::lit(2.0) * m / (gamma0 * gamma0)).powf(T::lit(0.125))
                * x.abs().powf(T::lit(0.75));
            Ok(Complex::new(
                (-u * u * zeta * zeta / T::lit(2.0)).exp(),
                T::zero(),
            ))
        }
    }
}

/// Gamma density `y^{|γ₀|-1} e^{-|γ₀/x| y} |γ₀/x|^{|γ₀|} / Γ(|γ₀|)`, the
/// law of `Z + x` in the `ω = 1` limit.
pub fn gamma_limit_density<T: Scalar>(gamma0: T, x: T, y: T) -> Result<T> {
    check_x(x)?;
    if !(gamma0 < T::zero()) {
        return Err(Error::invalid(format!(
            "gamma0 must be negative, got {gamma0}"
        )));
    }
    if !(y > T::zero()) {
        return Err(Error::invalid(format!(
            "density argument must be positive, got {y}"
        )));
    }
    let a = gamma0.abs();
    let rate = (gamma0 / x).abs();
    Ok(((a - T::one()) * y.ln() - rate * y + a * rate.ln() - ln_gamma(a)).exp())
}

/// Marker for the accuracy of [`CallExpansion::full_value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeError {
    /// `price - intrinsic = (expansion - intrinsic)(1 + o(1))`.
    OnePlusLittleO,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallExpansion<T> {
    pub intrinsic: T,
    pub prefactor: T,
    pub exponent: T,
    /// `intrinsic + exp(exponent) * prefactor`.
    pub full_value: T,
    pub claimed_error: RelativeError,
}

impl<T: Scalar> CallExpansion<T> {
    /// `log(full_value - intrinsic)`, usable after the difference underflows.
    pub fn log_time_value(&self) -> T {
        self.exponent + self.prefactor.ln()
    }
}

/// Leading-order call price `E(e^{X_t} - e^{x g(t)})⁺`.
///
/// For `x < 0` the out-of-the-money put carries the same correction, so the
/// call is the intrinsic value plus the same term.
pub fn call_expansion<T: Scalar>(
    c: &FatTailConstants<T>,
    gspec: &RescalingG<T>,
    t: T,
    x: T,
) -> Result<CallExpansion<T>> {
    check_time(t)?;
    check_x(x)?;
    let g = gspec.g(t);
    let xg = x * g;
    let a = c.gamma0.abs();
    let two_m = T::lit(2.0) * c.m;
    let intrinsic = (-xg.exp_m1()).max(T::zero());
    let exponent = -(two_m / t).sqrt() * xg.abs() + c.gamma1 + xg;
    let prefactor = xg.abs().powf(a - T::one())
        / (gamma(a) * two_m.powf(T::one() - c.gamma0 / T::lit(2.0)))
        * t.powf(T::one() + c.gamma0 / T::lit(2.0))
        * g;
    Ok(CallExpansion {
        intrinsic,
        prefactor,
        exponent,
        full_value: intrinsic + exponent.exp() * prefactor,
        claimed_error: RelativeError::OnePlusLittleO,
    })
}

/// Terms of the implied-variance expansion at `x_t = x g(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedVarExpansion<T> {
    /// `|x_t| / (2√(2𝔪t))`.
    pub leading: T,
    pub h1: T,
    pub h2: T,
    /// `leading + h1 + h2 log t + log g(t) / (4𝔪)`.
    pub total: T,
}

/// Implied variance `σ_t²(x_t)`. `h₁` is evaluated at `x_t`, including its
/// logarithm, so it depends on `t` through `g`.
pub fn implied_var_expansion<T: Scalar>(
    c: &FatTailConstants<T>,
    gspec: &RescalingG<T>,
    t: T,
    x: T,
) -> Result<ImpliedVarExpansion<T>> {
    check_time(t)?;
    check_x(x)?;
    let (m, g0, g1) = (c.m, c.gamma0, c.gamma1);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let a = g0.abs();
    let xt = x * gspec.g(t);
    let eight_m = T::lit(8.0) * m;
    let leading = xt.abs() / (two * (two * m * t).sqrt());
    let constant = (T::lit(16.0) * T::PI()).ln() + two * g1 - two * ln_gamma(a);
    let h1 = (xt - (two * g0 + T::one()) * xt.abs().ln() + constant - (a + half) * (two * m).ln())
        / eight_m;
    let h2 = (half - a) / eight_m;
    let total = leading + h1 + h2 * t.ln() + gspec.g(t).ln() / (T::lit(4.0) * m);
    Ok(ImpliedVarExpansion {
        leading,
        h1,
        h2,
        total,
    })
}

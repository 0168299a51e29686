use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{limit::LimitCgf, HestonParams};

/// Rescaling `h(t) = t^p` of the MGF argument, `C(t, u/h(t))`, `D(t, u/h(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaling<T> {
    exponent: T,
}

/// Asymptotic class of a rescaling relative to `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescalingClass {
    /// `h(t) = o(t)`: the rescaled MGF is undefined for `u ≠ 0`.
    Fine,
    /// `h(t) = t`.
    LargeDeviation,
    /// `t = o(h(t))`, `h(t) → 0`.
    ModerateDeviation,
}

impl<T: Scalar> Rescaling<T> {
    pub fn power(exponent: T) -> Result<Self> {
        if !(exponent.is_finite() && exponent > T::zero()) {
            return Err(Error::invalid(format!(
                "rescaling exponent must be positive, got {exponent}"
            )));
        }
        Ok(Self { exponent })
    }

    pub fn large_deviation() -> Self {
        Self { exponent: T::one() }
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn scale(&self, t: T) -> T {
        t.powf(self.exponent)
    }

    pub fn class(&self) -> RescalingClass {
        if self.exponent > T::one() {
            RescalingClass::Fine
        } else if self.exponent == T::one() {
            RescalingClass::LargeDeviation
        } else {
            RescalingClass::ModerateDeviation
        }
    }
}

/// Leading-order `C(t, u/h)` and `D(t, u/h)` with the size of the neglected
/// terms. `c_value` is `None` when only `C = O(1)` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdApproximation<T> {
    pub h: T,
    pub c_value: Option<T>,
    pub c_error: T,
    pub d_value: T,
    pub d_error: T,
}

/// Small-time approximation of `C(t, u/h(t))` and `D(t, u/h(t))`.
pub fn cd_asymptotic<T: Scalar>(
    p: &HestonParams<T>,
    t: T,
    u: T,
    rescaling: Rescaling<T>,
) -> Result<CdApproximation<T>> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    if !u.is_finite() {
        return Err(Error::invalid(format!("non-finite argument {u}")));
    }
    let h = rescaling.scale(t);
    if u == T::zero() {
        return Ok(CdApproximation {
            h,
            c_value: Some(T::zero()),
            c_error: T::zero(),
            d_value: T::zero(),
            d_error: T::zero(),
        });
    }
    match rescaling.class() {
        RescalingClass::Fine => Err(Error::invalid(format!(
            "C and D are undefined under the rescaling h(t) = t^{} for u != 0",
            rescaling.exponent
        ))),
        RescalingClass::LargeDeviation => {
            let limit = LimitCgf::new(p);
            if !limit.contains(u) {
                return Err(Error::domain(format!(
                    "u = {u} outside ({}, {})",
                    limit.u_minus, limit.u_plus
                )));
            }
            Ok(CdApproximation {
                h,
                c_value: None,
                c_error: T::one(),
                d_value: limit.value(u) / t,
                d_error: T::one(),
            })
        }
        RescalingClass::ModerateDeviation => {
            let two = T::lit(2.0);
            let r = t / h;
            let lead = u * u * t / (two * h * h);
            let d_value = lead - u * t / (two * h) + lead * p.rho() * p.xi() * u * r / two;
            let d_error = lead * (t + h * h + r * r);
            let c_lead = p.kappa() * p.theta() * u * u * r * r / T::lit(4.0);
            let c_error = t * h + h * h * h + c_lead * (h + r);
            Ok(CdApproximation {
                h,
                c_value: Some(c_lead),
                c_error,
                d_value,
                d_error,
            })
        }
    }
}

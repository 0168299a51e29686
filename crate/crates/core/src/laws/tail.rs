use super::RandomisationLaw;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Order of the pole structure of a fat-tailed cumulant generating function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega {
    /// Logarithmic singularity `γ₀ log(𝔪 - u)`, `γ₀ < 0`.
    One,
    /// Simple pole `γ₀ / (𝔪 - u)`, `γ₀ > 0`.
    Two,
}

impl Omega {
    pub fn as_u8(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

/// Tail class of the initial-variance law and its regime parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRegime<T> {
    BoundedSupport {
        v_plus: T,
    },
    /// `log f(v) ~ -l1 v^l2`, `l1 > 0`, `l2 > 1`.
    ThinTail {
        l1: T,
        l2: T,
    },
    /// Cumulant generating function singular at `u = m`.
    FatTail {
        m: T,
        gamma0: T,
        gamma1: T,
        omega: Omega,
    },
}

impl<T: Scalar> TailRegime<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BoundedSupport { .. } => "bounded-support",
            Self::ThinTail { .. } => "thin-tail",
            Self::FatTail { .. } => "fat-tail",
        }
    }

    /// Checks the sign and range constraints on the regime parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::BoundedSupport { v_plus } if v_plus > T::zero() && v_plus.is_finite() => Ok(()),
            Self::ThinTail { l1, l2 } if l1 > T::zero() && l2 > T::one() => Ok(()),
            Self::FatTail {
                m, gamma0, omega, ..
            } if m > T::zero() && m.is_finite() => match omega {
                Omega::One if gamma0 < T::zero() => Ok(()),
                Omega::Two if gamma0 > T::zero() => Ok(()),
                _ => Err(Error::invalid(format!(
                    "gamma0 = {gamma0} has the wrong sign for omega = {}",
                    omega.as_u8()
                ))),
            },
            _ => Err(Error::invalid(format!("inconsistent tail regime {self:?}"))),
        }
    }
}

/// Leading behaviour of `log M_𝒱(z)` as `z → ∞` for a thin tail with
/// `log f(v) = -l1 v^l2`: `(l-1)(z/l)^{l/(l-1)} ψ(z)` with the constant
/// slowly varying factor `ψ = l1^{-1/(l-1)}`.
pub fn kasahara_mgf_asymptote<T: Scalar>(regime: &TailRegime<T>, z: T) -> Result<T> {
    let TailRegime::ThinTail { l1, l2 } = *regime else {
        return Err(Error::invalid(
            "Kasahara asymptote needs a thin-tail regime",
        ));
    };
    if !(l2 > T::one()) || !(l1 > T::zero()) {
        return Err(Error::invalid(format!(
            "need l1 > 0 and l2 > 1, got ({l1}, {l2})"
        )));
    }
    let index = l2 / (l2 - T::one());
    let psi = l1.powf(-T::one() / (l2 - T::one()));
    Ok((l2 - T::one()) * (z / l2).powf(index) * psi)
}

/// One grid point of a fat-tail asymptotics check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatTailRow<T> {
    pub u: T,
    pub cgf: T,
    pub cgf_leading: T,
    /// `cgf - cgf_leading`.
    pub cgf_residual: T,
    pub ratio: T,
    pub ratio_leading: T,
    /// `ratio / ratio_leading - 1`.
    pub ratio_relative_residual: T,
}

/// Residuals of both displayed fat-tail asymptotics on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FatTailCheck<T> {
    pub omega: Omega,
    pub rows: Vec<FatTailRow<T>>,
}

impl<T: Scalar> FatTailCheck<T> {
    /// The quantity that must vanish as `u ↑ 𝔪` for the cgf asymptotic:
    /// the absolute residual when ω = 1, the residual relative to the
    /// leading term when ω = 2.
    pub fn cgf_error(row: &FatTailRow<T>, omega: Omega) -> T {
        match omega {
            Omega::One => row.cgf_residual.abs(),
            Omega::Two => (row.cgf_residual / row.cgf_leading).abs(),
        }
    }
}

/// Evaluates the fat-tail cgf and `M'/M` asymptotics against the law's
/// closed forms along `u_grid` (values below `𝔪`).
pub fn verify_fat_tail_asymptotics<T: Scalar>(
    law: &RandomisationLaw<T>,
    u_grid: &[T],
) -> Result<FatTailCheck<T>> {
    let TailRegime::FatTail {
        m,
        gamma0,
        gamma1,
        omega,
    } = law.classify_tail()
    else {
        return Err(Error::invalid(format!("{law:?} is not fat-tailed")));
    };
    let rows = u_grid
        .iter()
        .map(|&u| {
            let [cgf, ratio, _] = law.cgf_derivatives(u)?;
            let eps = m - u;
            let (cgf_leading, ratio_leading) = match omega {
                Omega::One => (gamma0 * eps.ln() + gamma1, gamma0.abs() / eps),
                Omega::Two => (
                    gamma0 / eps * (T::one() + gamma1 * eps * eps.ln()),
                    gamma0 / (eps * eps) * (T::one() - gamma1 * eps),
                ),
            };
            Ok(FatTailRow {
                u,
                cgf,
                cgf_leading,
                cgf_residual: cgf - cgf_leading,
                ratio,
                ratio_leading,
                ratio_relative_residual: ratio / ratio_leading - T::one(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FatTailCheck { omega, rows })
}

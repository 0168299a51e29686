//! Distributions of the random initial variance: moment generating
//! functions over complex arguments, tail classification and samplers.

mod generic;
mod sampling;
mod tail;

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{exprel, faddeeva, inverse_mills, log_norm_cdf};

pub use generic::ThinTailDensity;
pub(crate) use sampling::noncentral_chi_squared;
pub use sampling::InverseCdfTable;
pub use tail::{
    kasahara_mgf_asymptote, verify_fat_tail_asymptotics, FatTailCheck, FatTailRow, Omega,
    TailRegime,
};

/// Law of the initial variance.
#[derive(Clone)]
pub enum RandomisationLaw<T: Scalar> {
    /// Dirac mass at `v0`: the standard Heston model.
    PointMass { v0: T },
    /// Uniform on `(a, b)`, `0 < a < b`.
    Uniform { a: T, b: T },
    /// `|σ Z|` with `Z` standard normal.
    FoldedGaussian { sigma: T },
    /// Gamma with shape `k` and rate `lam`.
    Gamma { shape: T, rate: T },
    /// `scale · χ'²(df, noncentrality)`.
    NoncentralChiSquared { df: T, noncentrality: T, scale: T },
    /// Thin-tailed law given by its log-density.
    GenericThinTail(ThinTailDensity<T>),
}

impl<T: Scalar> fmt::Debug for RandomisationLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointMass { v0 } => write!(f, "PointMass({v0})"),
            Self::Uniform { a, b } => write!(f, "Uniform({a}, {b})"),
            Self::FoldedGaussian { sigma } => write!(f, "FoldedGaussian({sigma})"),
            Self::Gamma { shape, rate } => write!(f, "Gamma(shape={shape}, rate={rate})"),
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => {
                write!(
                    f,
                    "NoncentralChiSquared(df={df}, nc={noncentrality}, scale={scale})"
                )
            }
            Self::GenericThinTail(d) => write!(f, "GenericThinTail(l1={}, l2={})", d.l1(), d.l2()),
        }
    }
}

fn positive<T: Scalar>(name: &str, x: T) -> Result<T> {
    if x.is_finite() && x > T::zero() {
        Ok(x)
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

impl<T: Scalar> RandomisationLaw<T> {
    pub fn point_mass(v0: T) -> Result<Self> {
        Ok(Self::PointMass {
            v0: positive("v0", v0)?,
        })
    }

    pub fn uniform(a: T, b: T) -> Result<Self> {
        let a = positive("a", a)?;
        let b = positive("b", b)?;
        if a >= b {
            return Err(Error::invalid(format!(
                "uniform law needs a < b, got ({a}, {b})"
            )));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn folded_gaussian(sigma: T) -> Result<Self> {
        Ok(Self::FoldedGaussian {
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn gamma(shape: T, rate: T) -> Result<Self> {
        Ok(Self::Gamma {
            shape: positive("shape", shape)?,
            rate: positive("rate", rate)?,
        })
    }

    pub fn noncentral_chi_squared(df: T, noncentrality: T, scale: T) -> Result<Self> {
        Ok(Self::NoncentralChiSquared {
            df: positive("df", df)?,
            noncentrality: positive("noncentrality", noncentrality)?,
            scale: positive("scale", scale)?,
        })
    }

    /// Normalised stretched exponential `f(v) ∝ exp(-l1 v^l2)` on `(0, ∞)`.
    pub fn stretched_exponential(l1: T, l2: T) -> Result<Self> {
        Ok(Self::GenericThinTail(
            ThinTailDensity::stretched_exponential(l1, l2)?,
        ))
    }

    /// `𝔪 = sup{u : E e^{u𝒱} < ∞}`.
    pub fn mgf_bound(&self) -> T {
        match self {
            Self::Gamma { rate, .. } => *rate,
            Self::NoncentralChiSquared { scale, .. } => T::one() / (T::lit(2.0) * *scale),
            _ => T::infinity(),
        }
    }

    /// Upper end `𝔳₊` of the support.
    pub fn support_upper(&self) -> T {
        match self {
            Self::PointMass { v0 } => *v0,
            Self::Uniform { b, .. } => *b,
            _ => T::infinity(),
        }
    }

    pub fn mean(&self) -> T {
        match self {
            Self::PointMass { v0 } => *v0,
            Self::Uniform { a, b } => (*a + *b) / T::lit(2.0),
            Self::FoldedGaussian { sigma } => *sigma * (T::lit(2.0) / T::PI()).sqrt(),
            Self::Gamma { shape, rate } => *shape / *rate,
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => *scale * (*df + *noncentrality),
            Self::GenericThinTail(d) => d.moments().0,
        }
    }

    pub fn variance(&self) -> T {
        match self {
            Self::PointMass { .. } => T::zero(),
            Self::Uniform { a, b } => (*b - *a).powi(2) / T::lit(12.0),
            Self::FoldedGaussian { sigma } => *sigma * *sigma * (T::one() - T::lit(2.0) / T::PI()),
            Self::Gamma { shape, rate } => *shape / (*rate * *rate),
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => T::lit(2.0) * *scale * *scale * (*df + T::lit(2.0) * *noncentrality),
            Self::GenericThinTail(d) => d.moments().1,
        }
    }

    fn check_domain(&self, re: T) -> Result<()> {
        let m = self.mgf_bound();
        if re.is_nan() || re >= m {
            return Err(Error::domain(format!(
                "Re z = {re} is not below the MGF bound {m}"
            )));
        }
        Ok(())
    }

    /// `log M_𝒱(z)` on some branch; callers only exponentiate it or use it
    /// at real arguments, where it is the real logarithm.
    pub fn log_mgf(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.check_domain(z.re)?;
        if z.re == T::zero() && z.im == T::zero() {
            return Ok(z);
        }
        let two = T::lit(2.0);
        let value = match self {
            Self::PointMass { v0 } => z * *v0,
            Self::Uniform { a, b } => {
                let y = z * (*b - *a);
                let tail = if y.re > T::one() {
                    y + ((Complex::new(T::one(), T::zero()) - (-y).exp()) / y).ln()
                } else {
                    exprel(y).ln()
                };
                z * *a + tail
            }
            Self::FoldedGaussian { sigma } => {
                let y = z * (*sigma / T::SQRT_2());
                let i = Complex::new(T::zero(), T::one());
                if y.re >= T::zero() {
                    let y2 = y * y;
                    let w = faddeeva(i * y);
                    if y2.re >= T::zero() {
                        y2 + (Complex::new(two, T::zero()) - (-y2).exp() * w).ln()
                    } else {
                        (y2.exp() * two - w).ln()
                    }
                } else {
                    faddeeva(-i * y).ln()
                }
            }
            Self::Gamma { shape, rate } => {
                -((Complex::new(*rate, T::zero()) - z) / *rate).ln() * *shape
            }
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => {
                let q = Complex::new(T::one(), T::zero()) - z * (two * *scale);
                z * (*noncentrality * *scale) / q - q.ln() * (*df / two)
            }
            Self::GenericThinTail(d) => d.log_mgf(z)?,
        };
        if value.re.is_nan() || value.im.is_nan() {
            return Err(Error::numerical(format!(
                "log-MGF evaluation failed at {z}"
            )));
        }
        Ok(value)
    }

    pub fn mgf(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.log_mgf(z)?.exp())
    }

    /// Real cumulant generating function and its first two derivatives.
    pub fn cgf_derivatives(&self, z: T) -> Result<[T; 3]> {
        self.check_domain(z)?;
        let two = T::lit(2.0);
        let out = match self {
            Self::PointMass { v0 } => [z * *v0, *v0, T::zero()],
            Self::Uniform { a, b } => {
                let w = *b - *a;
                let y = z * w;
                let (m, v) = truncated_exp_moments(y);
                let l = if y > T::one() {
                    y + ((T::one() - (-y).exp()) / y).ln()
                } else if y < -T::one() {
                    ((T::one() - y.exp()) / (-y)).ln()
                } else if y == T::zero() {
                    T::zero()
                } else {
                    (y.exp_m1() / y).ln()
                };
                [z * *a + l, *a + w * m, w * w * v]
            }
            Self::FoldedGaussian { sigma } => {
                let x = *sigma * z;
                let r = inverse_mills(x);
                [
                    x * x / two + two.ln() + log_norm_cdf(x),
                    *sigma * (x + r),
                    *sigma * *sigma * (T::one() - r * (x + r)),
                ]
            }
            Self::Gamma { shape, rate } => {
                let gap = *rate - z;
                [
                    -*shape * (gap / *rate).ln(),
                    *shape / gap,
                    *shape / (gap * gap),
                ]
            }
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => {
                let q = T::one() - two * *scale * z;
                let (lam, s) = (*noncentrality, *scale);
                [
                    lam * s * z / q - *df / two * q.ln(),
                    lam * s / (q * q) + *df * s / q,
                    T::lit(4.0) * lam * s * s / (q * q * q) + two * *df * s * s / (q * q),
                ]
            }
            Self::GenericThinTail(d) => d.cgf_derivatives(z)?,
        };
        Ok(out)
    }

    /// Tail classification with regime parameters.
    pub fn classify_tail(&self) -> TailRegime<T> {
        let two = T::lit(2.0);
        match self {
            Self::PointMass { v0 } => TailRegime::BoundedSupport { v_plus: *v0 },
            Self::Uniform { b, .. } => TailRegime::BoundedSupport { v_plus: *b },
            Self::FoldedGaussian { sigma } => TailRegime::ThinTail {
                l1: T::one() / (two * *sigma * *sigma),
                l2: two,
            },
            Self::GenericThinTail(d) => TailRegime::ThinTail {
                l1: d.l1(),
                l2: d.l2(),
            },
            Self::Gamma { shape, rate } => TailRegime::FatTail {
                m: *rate,
                gamma0: -*shape,
                gamma1: *shape * rate.ln(),
                omega: Omega::One,
            },
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => {
                // log M = λ𝔪/(2ε) - λ/2 - (df/2) log(2sε), ε = 𝔪 - u.
                let gamma0 = *noncentrality / (T::lit(4.0) * *scale);
                TailRegime::FatTail {
                    m: T::one() / (two * *scale),
                    gamma0,
                    gamma1: -*df / (two * gamma0),
                    omega: Omega::Two,
                }
            }
        }
    }
}

/// Mean and variance of the exponential tilt `∝ e^{yv}` of Uniform(0, 1).
fn truncated_exp_moments<T: Scalar>(y: T) -> (T, T) {
    if y.abs() < T::lit(1e-2) {
        let y2 = y * y;
        let m = T::lit(0.5) + y / T::lit(12.0) - y * y2 / T::lit(720.0);
        let v = T::one() / T::lit(12.0) - y2 / T::lit(240.0) + y2 * y2 / T::lit(6048.0);
        return (m, v);
    }
    let m = T::one() / -(-y).exp_m1() - T::one() / y;
    let half_sinh = (y / T::lit(2.0)).sinh();
    let v = T::one() / (y * y) - T::one() / (T::lit(4.0) * half_sinh * half_sinh);
    (m, v)
}

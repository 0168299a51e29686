use num_complex::Complex;

use crate::error::{Error, Result};
use crate::laws::RandomisationLaw;
use crate::scalar::Scalar;

use super::{domain_edge, mgf_components, real_components, HestonParams};

/// `log E[e^{u X_t}] = C(t,u) + log M_𝒱(D(t,u))`, up to a multiple of `2πi`.
///
/// Outside the domain the error is [`Error::OutsideDomain`].
pub fn randomised_log_mgf<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    u: Complex<T>,
) -> Result<Complex<T>> {
    let cd = mgf_components(p, t, u)?;
    if !cd.defined {
        return Err(Error::domain(format!("M(t={t}, u={u}) explodes")));
    }
    Ok(cd.c_value + law.log_mgf(cd.d_value)?)
}

/// `E[e^{u X_t}] = e^{C(t,u)} M_𝒱(D(t,u))`.
pub fn randomised_mgf<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    u: Complex<T>,
) -> Result<Complex<T>> {
    let l = randomised_log_mgf(p, law, t, u)?;
    let v = l.exp();
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::numerical(format!("MGF overflow at t={t}, u={u}")));
    }
    Ok(v)
}

/// `[K, K', K'']` of the real cgf `K(u) = log E[e^{u X_t}]`.
pub fn randomised_cgf_derivatives<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    u: T,
) -> Result<[T; 3]> {
    let r = real_components(p, t, u)?;
    let [l0, l1, l2] = law.cgf_derivatives(r.d[0])?;
    let [_, d1, d2] = r.d;
    Ok([
        r.c[0] + l0,
        r.c[1] + l1 * d1,
        r.c[2] + l2 * d1 * d1 + l1 * d2,
    ])
}

fn real_log_mgf_exists<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    u: T,
) -> bool {
    match real_components(p, t, u) {
        Ok(r) => r.d[0] < law.mgf_bound(),
        Err(_) => false,
    }
}

/// Interval `(lo, hi)` of real `u` on which `E[e^{u X_t}]` is finite; the
/// endpoints are infinite when no explosion occurs within `±10¹²`.
pub fn randomised_domain<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
) -> Result<(T, T)> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    let inside = |u| real_log_mgf_exists(p, law, t, u);
    let lo = domain_edge(T::zero(), -T::one(), inside);
    let hi = domain_edge(T::one(), T::one(), inside);
    Ok((lo, hi))
}

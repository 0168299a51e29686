//! Standard Heston moment generating function components `C(t,u)`,
//! `D(t,u)`, the explosion boundary, the small-time limit cgf `Λ`, and the
//! randomised MGF `e^{C} M_𝒱(D)`.

mod asymptotic;
mod limit;
mod randomised;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use asymptotic::{cd_asymptotic, CdApproximation, Rescaling, RescalingClass};
pub use limit::{limit_cgf, LimitCgf};
pub use randomised::{
    randomised_cgf_derivatives, randomised_domain, randomised_log_mgf, randomised_mgf,
};

/// Parameters of the variance dynamics `dV = κ(θ - V)dt + ξ√V dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams<T> {
    kappa: T,
    theta: T,
    xi: T,
    rho: T,
    rho_bar: T,
}

impl<T: Scalar> HestonParams<T> {
    pub fn new(kappa: T, theta: T, xi: T, rho: T) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("theta", theta), ("xi", xi)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(rho.abs() <= T::one()) {
            return Err(Error::invalid(format!(
                "rho must lie in [-1, 1], got {rho}"
            )));
        }
        let rho_bar = (T::one() - rho * rho).max(T::zero()).sqrt();
        Ok(Self {
            kappa,
            theta,
            xi,
            rho,
            rho_bar,
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }
    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn xi(&self) -> T {
        self.xi
    }
    pub fn rho(&self) -> T {
        self.rho
    }
    /// `√(1 - ρ²)`.
    pub fn rho_bar(&self) -> T {
        self.rho_bar
    }

    fn kappa_theta_over_xi2(&self) -> T {
        self.kappa * self.theta / (self.xi * self.xi)
    }

    /// `b(u) = κ - ρξu` and `Δ(u) = b² + ξ²u(1-u) = d(u)²`.
    fn b_delta(&self, u: T) -> (T, T) {
        let b = self.kappa - self.rho * self.xi * u;
        (b, b * b + self.xi * self.xi * u * (T::one() - u))
    }

    /// Time at which `M(t, u)` first explodes for real `u` (`+∞` if never).
    pub fn explosion_time(&self, u: T) -> T {
        let (b, delta) = self.b_delta(u);
        if delta >= T::zero() {
            let d = delta.sqrt();
            if b >= T::zero() || d >= -b {
                return T::infinity();
            }
            let r = d / -b;
            if r < T::lit(1e-6) {
                T::lit(2.0) / -b * (T::one() + r * r / T::lit(3.0))
            } else {
                T::lit(2.0) * r.atanh() / d
            }
        } else {
            let delta_abs = (-delta).sqrt();
            (T::PI() + T::lit(2.0) * (b / delta_abs).atan()) / delta_abs
        }
    }

    pub fn is_finite_mgf(&self, t: T, u: T) -> bool {
        t < self.explosion_time(u)
    }
}

/// `C(t,u)` and `D(t,u)`; `defined` is false past the moment explosion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfComponents<T> {
    pub c_value: Complex<T>,
    pub d_value: Complex<T>,
    pub defined: bool,
}

impl<T: Scalar> MgfComponents<T> {
    fn undefined() -> Self {
        let nan = Complex::new(T::nan(), T::nan());
        Self {
            c_value: nan,
            d_value: nan,
            defined: false,
        }
    }
}

/// Real-argument `C`, `D` and their first two derivatives in `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealComponents<T> {
    pub c: [T; 3],
    pub d: [T; 3],
}

fn check_inputs<T: Scalar>(t: T, u: Complex<T>) -> Result<()> {
    if !(t.is_finite() && t > T::zero()) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::invalid(format!("non-finite argument {u}")));
    }
    Ok(())
}

/// `cosh(s√Δ)`, `sinh(s√Δ)/√Δ` and their first two `Δ`-derivatives, all
/// multiplied by `e^{-scale}`; entire in `Δ`, so the sign of `Δ` only picks
/// the evaluation route.
struct Kernel<T> {
    c: [T; 3],
    sh: [T; 3],
    scale: T,
}

fn kernel<T: Scalar>(s: T, delta: T) -> Kernel<T> {
    let x = s * s * delta;
    if x.abs() <= T::one() {
        // Power series in x = s²Δ; terms built by recurrence so nothing
        // overflows in single precision.
        let mut c = [T::zero(); 3];
        let mut sh = [T::zero(); 3];
        // ce = x^n/(2n)!, se = x^n/(2n+1)!, and the same with x^{n-1}, x^{n-2}.
        let (mut ce, mut se) = (T::one(), T::one());
        let (mut ce1, mut se1, mut ce2, mut se2) = (T::zero(), T::zero(), T::zero(), T::zero());
        for n in 0..24usize {
            let nf = T::from_usize_lossy(n);
            if n > 0 {
                let nn = T::from_usize_lossy(2 * n);
                let even = (nn - T::one()) * nn;
                let odd = nn * (nn + T::one());
                // Shift the lower-power terms before updating the leading one.
                (ce2, se2) = (ce1 / even, se1 / odd);
                (ce1, se1) = (ce / even, se / odd);
                ce = ce * x / even;
                se = se * x / odd;
            }
            c[0] += ce;
            sh[0] += se;
            c[1] += nf * ce1;
            sh[1] += nf * se1;
            c[2] += nf * (nf - T::one()) * ce2;
            sh[2] += nf * (nf - T::one()) * se2;
        }
        let s2 = s * s;
        let c = [c[0], c[1] * s2, c[2] * s2 * s2];
        let sh = [sh[0] * s, sh[1] * s2 * s, sh[2] * s2 * s2 * s];
        return Kernel {
            c,
            sh,
            scale: T::zero(),
        };
    }
    let half = T::lit(0.5);
    let (c0, sh0, scale) = if delta > T::zero() {
        let d = delta.sqrt();
        let y = s * d;
        let e = (-(y + y)).exp();
        (half * (T::one() + e), half * (T::one() - e) / d, y)
    } else {
        let d = (-delta).sqrt();
        let y = s * d;
        (y.cos(), y.sin() / d, T::zero())
    };
    let c1 = half * s * sh0;
    let sh1 = (s * c0 - sh0) / (T::lit(2.0) * delta);
    let c2 = half * s * sh1;
    let sh2 = (s * c1 - T::lit(3.0) * sh1) / (T::lit(2.0) * delta);
    Kernel {
        c: [c0, c1, c2],
        sh: [sh0, sh1, sh2],
        scale,
    }
}

/// `C`, `D` and two `u`-derivatives at real `u`, via the branch-free form
/// `C = κθ/ξ² (bt - 2 log A)`, `D = u(u-1) sh / A`,
/// `A = cosh(dt/2) + b sinh(dt/2)/d`.
pub fn real_components<T: Scalar>(p: &HestonParams<T>, t: T, u: T) -> Result<RealComponents<T>> {
    check_inputs(t, Complex::new(u, T::zero()))?;
    if !p.is_finite_mgf(t, u) {
        return Err(Error::domain(format!("M(t={t}, u={u}) explodes")));
    }
    let two = T::lit(2.0);
    let (b, delta) = p.b_delta(u);
    let b1 = -p.rho * p.xi;
    let xi2 = p.xi * p.xi;
    let delta1 = two * b * b1 + xi2 * (T::one() - two * u);
    let delta2 = two * b1 * b1 - two * xi2;
    let k = kernel(t / two, delta);
    let [c, c_d, c_dd] = k.c;
    let [sh, sh_d, sh_dd] = k.sh;

    let a0 = c + b * sh;
    let a1 = c_d * delta1 + b1 * sh + b * sh_d * delta1;
    let a2 = c_dd * delta1 * delta1
        + c_d * delta2
        + two * b1 * sh_d * delta1
        + b * (sh_dd * delta1 * delta1 + sh_d * delta2);
    if !(a0 > T::zero()) {
        return Err(Error::domain(format!("M(t={t}, u={u}) explodes")));
    }
    let q = u * (u - T::one());
    let n0 = q * sh;
    let n1 = (two * u - T::one()) * sh + q * sh_d * delta1;
    let n2 = two * sh
        + two * (two * u - T::one()) * sh_d * delta1
        + q * (sh_dd * delta1 * delta1 + sh_d * delta2);

    let kt = p.kappa_theta_over_xi2();
    let la1 = a1 / a0;
    let la2 = a2 / a0 - la1 * la1;
    let c_val = kt * (b * t - two * (k.scale + a0.ln()));
    let c1 = kt * (b1 * t - two * la1);
    let c2 = kt * (-two * la2);
    let (c_val, n0) = if u == T::zero() {
        (T::zero(), T::zero())
    } else {
        (c_val, n0)
    };
    let d0 = n0 / a0;
    let d1 = n1 / a0 - d0 * la1;
    let d2 = n2 / a0 - two * n1 * a1 / (a0 * a0) - d0 * a2 / a0 + two * d0 * la1 * la1;
    Ok(RealComponents {
        c: [c_val, c1, c2],
        d: [d0, d1, d2],
    })
}

/// `C(t,u)` and `D(t,u)` at complex `u`.
///
/// Off the real axis this is the `g`-form with `Re d ≥ 0` and principal
/// logarithms of `1 - g e^{-dt}` and `1 - g`; on the real axis the real,
/// branch-free form is used. `defined` follows the real-part criterion
/// `|M(t,u)| ≤ M(t, Re u)`.
pub fn mgf_components<T: Scalar>(
    p: &HestonParams<T>,
    t: T,
    u: Complex<T>,
) -> Result<MgfComponents<T>> {
    check_inputs(t, u)?;
    if u.im == T::zero() {
        return Ok(match real_components(p, t, u.re) {
            Ok(r) => MgfComponents {
                c_value: Complex::new(r.c[0], T::zero()),
                d_value: Complex::new(r.d[0], T::zero()),
                defined: true,
            },
            Err(e) if e.is_outside_domain() => MgfComponents::undefined(),
            Err(e) => return Err(e),
        });
    }
    if !p.is_finite_mgf(t, u.re) {
        return Ok(MgfComponents::undefined());
    }
    let one = Complex::new(T::one(), T::zero());
    let b = Complex::new(p.kappa, T::zero()) - u * (p.rho * p.xi);
    let delta = b * b + u * (one - u) * (p.xi * p.xi);
    let mut d = delta.sqrt();
    if d.re < T::zero() {
        d = -d;
    }
    if (b + d).norm() == T::zero() {
        d = -d;
    }
    let g = (b - d) / (b + d);
    let e = (-d * t).exp();
    let num = one - g * e;
    let den = one - g;
    if num.norm() == T::zero() || den.norm() == T::zero() {
        return Ok(MgfComponents::undefined());
    }
    let xi2 = p.xi * p.xi;
    let c_value = ((b - d) * t - (num.ln() - den.ln()) * T::lit(2.0)) * p.kappa_theta_over_xi2();
    let d_value = (b - d) / xi2 * (one - e) / num;
    let defined = c_value.re.is_finite()
        && c_value.im.is_finite()
        && d_value.re.is_finite()
        && d_value.im.is_finite();
    if !defined {
        return Ok(MgfComponents::undefined());
    }
    Ok(MgfComponents {
        c_value,
        d_value,
        defined,
    })
}

const DOMAIN_CAP: f64 = 1e12;

fn bisect_boundary<T: Scalar>(inside: T, outside: T, is_inside: impl Fn(T) -> bool) -> T {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid == a || mid == b {
            break;
        }
        if is_inside(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

/// Bracket-and-bisect search for the edge of a convex domain along a ray.
pub(crate) fn domain_edge<T: Scalar>(start: T, direction: T, is_inside: impl Fn(T) -> bool) -> T {
    let mut step = T::one();
    let mut inside = start;
    loop {
        let probe = start + direction * step;
        if !is_inside(probe) {
            return bisect_boundary(inside, probe, &is_inside);
        }
        inside = probe;
        if step > T::lit(DOMAIN_CAP) {
            return direction * T::infinity();
        }
        step *= T::lit(2.0);
    }
}

/// `sup{u ≥ 1 : M(t,u) < ∞}` for the standard Heston model, `+∞` when no
/// explosion occurs below `10¹²`.
pub fn real_mgf_domain_upper<T: Scalar>(p: &HestonParams<T>, t: T) -> Result<T> {
    check_inputs(t, Complex::new(T::zero(), T::zero()))?;
    Ok(domain_edge(T::one(), T::one(), |u| p.is_finite_mgf(t, u)))
}

/// `inf{u ≤ 0 : M(t,u) < ∞}`, `-∞` when no explosion occurs above `-10¹²`.
pub fn real_mgf_domain_lower<T: Scalar>(p: &HestonParams<T>, t: T) -> Result<T> {
    check_inputs(t, Complex::new(T::zero(), T::zero()))?;
    Ok(domain_edge(T::zero(), -T::one(), |u| p.is_finite_mgf(t, u)))
}

use crate::scalar::Scalar;

use super::HestonParams;

/// Small-time limit `Λ(u) = lim t·log M(t, u/t)` of the standard Heston cgf,
/// finite on `(u_minus, u_plus)`.
///
/// Evaluated as `u² / P(u)` with `P(u) = 2φ(z) - ξρu`, `φ(z) = z cot z`,
/// `z = ξρ̄u/2`. This is the usual `u / (ξ(ρ̄ cot z - ρ))` with the removable
/// singularities at `u = 0` and `ρ̄ = 0` taken out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCgf<T> {
    pub u_minus: T,
    pub u_plus: T,
    xi: T,
    rho: T,
    rho_bar: T,
}

/// Returns `φ(z) = z cot z` and its first two derivatives.
fn z_cot_z<T: Scalar>(z: T) -> [T; 3] {
    if z.abs() < T::lit(0.1) {
        const C: [f64; 6] = [
            1.0 / 3.0,
            1.0 / 45.0,
            2.0 / 945.0,
            1.0 / 4725.0,
            2.0 / 93555.0,
            1382.0 / 638512875.0,
        ];
        let z2 = z * z;
        let (mut f, mut f1, mut f2) = (T::one(), T::zero(), T::zero());
        let mut pow = T::one();
        for (i, &c) in C.iter().enumerate() {
            let n = T::from_usize_lossy(2 * (i + 1));
            let c = T::lit(c);
            // pow = z^{n-2}
            f2 -= c * n * (n - T::one()) * pow;
            f1 -= c * n * pow * z;
            pow *= z2;
            f -= c * pow;
        }
        return [f, f1, f2];
    }
    let (s, c) = z.sin_cos();
    let cot = c / s;
    let csc2 = T::one() / (s * s);
    let f = z * cot;
    [f, cot - z * csc2, T::lit(2.0) * csc2 * (f - T::one())]
}

impl<T: Scalar> LimitCgf<T> {
    pub fn new(p: &HestonParams<T>) -> Self {
        let (xi, rho, rho_bar) = (p.xi(), p.rho(), p.rho_bar());
        let two = T::lit(2.0);
        let (u_minus, u_plus) = if rho_bar == T::zero() {
            if rho < T::zero() {
                (-two / xi, T::infinity())
            } else {
                (T::neg_infinity(), two / xi)
            }
        } else {
            // Endpoints solve cot z = ρ/ρ̄ on either side of z = 0.
            let angle = rho_bar.atan2(rho);
            let s = two / (xi * rho_bar);
            (s * (angle - T::PI()), s * angle)
        };
        Self {
            u_minus,
            u_plus,
            xi,
            rho,
            rho_bar,
        }
    }

    pub fn contains(&self, u: T) -> bool {
        u > self.u_minus && u < self.u_plus
    }

    /// `P(u)` and its first two derivatives.
    fn denominator(&self, u: T) -> [T; 3] {
        let half = T::lit(0.5);
        let a = self.xi * self.rho_bar;
        let [f, f1, f2] = z_cot_z(half * a * u);
        [
            T::lit(2.0) * f - self.xi * self.rho * u,
            a * f1 - self.xi * self.rho,
            half * a * a * f2,
        ]
    }

    /// `Λ(u)`, `+∞` outside `(u_minus, u_plus)`.
    pub fn value(&self, u: T) -> T {
        if !self.contains(u) {
            return T::infinity();
        }
        let p = self.denominator(u)[0];
        if p <= T::zero() {
            return T::infinity();
        }
        u * u / p
    }

    /// `[Λ, Λ', Λ'']` at `u`, `None` outside the open domain.
    pub fn derivatives(&self, u: T) -> Option<[T; 3]> {
        if !self.contains(u) {
            return None;
        }
        let [p, p1, p2] = self.denominator(u);
        if p <= T::zero() {
            return None;
        }
        let two = T::lit(2.0);
        let num1 = two * u * p - u * u * p1;
        let l1 = num1 / (p * p);
        let l2 = (two * p - u * u * p2) / (p * p) - two * p1 * num1 / (p * p * p);
        Some([u * u / p, l1, l2])
    }
}

pub fn limit_cgf<T: Scalar>(p: &HestonParams<T>) -> LimitCgf<T> {
    LimitCgf::new(p)
}

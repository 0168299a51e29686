use std::sync::{Arc, OnceLock};

use num_complex::Complex;

use super::InverseCdfTable;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::scalar::Scalar;
use crate::special::ln_gamma;

type LogDensity<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Thin-tailed law on `(0, ∞)` with `log f(v) ~ -l1 v^l2` at infinity,
/// described by its log-density. MGF values come from quadrature.
#[derive(Clone)]
pub struct ThinTailDensity<T: Scalar> {
    l1: T,
    l2: T,
    log_density: LogDensity<T>,
    inverse_cdf: Arc<OnceLock<InverseCdfTable>>,
}

/// Drop the tilted integrand once it is this far below its peak (in log).
const LOG_CUTOFF: f64 = 60.0;
const MODE_GRID: usize = 512;
const PANELS: usize = 8;

struct TiltWindow<T> {
    mode: T,
    peak: T,
    lo: T,
    hi: T,
}

impl<T: Scalar> ThinTailDensity<T> {
    pub fn new(l1: T, l2: T, log_density: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        if !(l1 > T::zero() && l1.is_finite()) {
            return Err(Error::invalid(format!("l1 must be positive, got {l1}")));
        }
        if !(l2 > T::one() && l2.is_finite()) {
            return Err(Error::invalid(format!("l2 must exceed 1, got {l2}")));
        }
        Ok(Self {
            l1,
            l2,
            log_density: Arc::new(log_density),
            inverse_cdf: Arc::default(),
        })
    }

    /// `f(v) = l2 l1^{1/l2} / Γ(1/l2) · exp(-l1 v^l2)`.
    pub fn stretched_exponential(l1: T, l2: T) -> Result<Self> {
        if !(l1 > T::zero() && l2 > T::one()) {
            return Err(Error::invalid(format!(
                "need l1 > 0 and l2 > 1, got ({l1}, {l2})"
            )));
        }
        let inv = T::one() / l2;
        let log_norm = l2.ln() + inv * l1.ln() - ln_gamma(inv);
        Self::new(l1, l2, move |v: T| log_norm - l1 * v.powf(l2))
    }

    pub fn l1(&self) -> T {
        self.l1
    }

    pub fn l2(&self) -> T {
        self.l2
    }

    pub fn log_density(&self, v: T) -> T {
        if v <= T::zero() {
            T::neg_infinity()
        } else {
            (self.log_density)(v)
        }
    }

    /// Mode of `log f(v) + x v`, its value, and the window `[lo, hi]`
    /// outside which the tilted density is below `e^{-60}` of its peak.
    fn tilted_window(&self, x: T) -> Result<TiltWindow<T>> {
        let phi = |v: T| self.log_density(v) + x * v;
        let cutoff = T::lit(LOG_CUTOFF);
        let mut upper = T::one();
        let mut best = (T::zero(), T::neg_infinity());
        for _ in 0..200 {
            let step = upper / T::from_usize_lossy(MODE_GRID);
            for k in 1..=MODE_GRID {
                let v = step * T::from_usize_lossy(k);
                let val = phi(v);
                if val > best.1 {
                    best = (v, val);
                }
            }
            if best.1.is_finite() && phi(upper) < best.1 - cutoff {
                let (mut a, mut b) = ((best.0 - step).max(T::zero()), best.0 + step);
                // Golden-section refinement of the mode.
                let ratio = T::lit(0.618_033_988_749_894_8);
                for _ in 0..100 {
                    let c = b - ratio * (b - a);
                    let d = a + ratio * (b - a);
                    if phi(c) > phi(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                let mode = (a + b) / T::lit(2.0);
                let peak = phi(mode).max(best.1);
                let level = peak - cutoff;
                let edge = |inside: T, outside: T| {
                    let (mut a, mut b) = (inside, outside);
                    for _ in 0..100 {
                        let m = (a + b) / T::lit(2.0);
                        if phi(m) >= level {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    b
                };
                let tiny = mode * T::epsilon();
                let lo = if phi(tiny) >= level {
                    T::zero()
                } else {
                    edge(mode, tiny)
                };
                let hi = edge(mode, upper);
                return Ok(TiltWindow { mode, peak, lo, hi });
            }
            upper *= T::lit(2.0);
        }
        Err(Error::numerical(
            "thin-tail density: could not bracket the tilted mass",
        ))
    }

    fn quad_cfg() -> QuadConfig<T> {
        QuadConfig {
            abs_tol: T::lit(1e-15),
            rel_tol: T::lit(1e-12),
            max_intervals: 600,
        }
    }

    /// `∫ g(v) dv` over the tilt window, in panels clustered at the mode.
    fn window_integral(&self, w: &TiltWindow<T>, mut g: impl FnMut(T) -> T) -> Result<T> {
        let cfg = Self::quad_cfg();
        let mut total = T::zero();
        for (a, b) in [(w.lo, w.mode), (w.mode, w.hi)] {
            let n = PANELS;
            for k in 0..n {
                let lo = a + (b - a) * T::from_usize_lossy(k) / T::from_usize_lossy(n);
                let hi = a + (b - a) * T::from_usize_lossy(k + 1) / T::from_usize_lossy(n);
                if hi > lo {
                    total += integrate(&mut g, lo, hi, &cfg)?.value;
                }
            }
        }
        Ok(total)
    }

    /// `log ∫ e^{zv} f(v) dv` by adaptive quadrature after factoring out the
    /// peak of the real tilt.
    pub fn log_mgf(&self, z: Complex<T>) -> Result<Complex<T>> {
        let w = self.tilted_window(z.re)?;
        let weight = |v: T| (self.log_density(v) + z.re * v - w.peak).exp();
        let re = self.window_integral(&w, |v| weight(v) * (z.im * v).cos())?;
        let im = if z.im == T::zero() {
            T::zero()
        } else {
            self.window_integral(&w, |v| weight(v) * (z.im * v).sin())?
        };
        Ok(Complex::new(re, im).ln() + w.peak)
    }

    pub fn cgf_derivatives(&self, x: T) -> Result<[T; 3]> {
        let w = self.tilted_window(x)?;
        let weight = |v: T| (self.log_density(v) + x * v - w.peak).exp();
        let m0 = self.window_integral(&w, weight)?;
        let m1 = self.window_integral(&w, |v| (v - w.mode) * weight(v))?;
        let m2 = self.window_integral(&w, |v| (v - w.mode).powi(2) * weight(v))?;
        let centred = m1 / m0;
        Ok([
            m0.ln() + w.peak,
            w.mode + centred,
            m2 / m0 - centred * centred,
        ])
    }

    /// Mean and variance.
    pub fn moments(&self) -> (T, T) {
        self.cgf_derivatives(T::zero())
            .map(|[_, m, v]| (m, v))
            .unwrap_or((T::nan(), T::nan()))
    }

    /// Upper limit beyond which the untilted density carries no mass.
    pub(crate) fn effective_upper(&self) -> Result<T> {
        Ok(self.tilted_window(T::zero())?.hi)
    }

    /// Tabulated inverse distribution function, built on first use.
    pub fn inverse_cdf(&self) -> &InverseCdfTable {
        self.inverse_cdf.get_or_init(|| {
            InverseCdfTable::build(self).expect("thin-tail density must be integrable")
        })
    }
}

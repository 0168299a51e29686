//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-14),
            rel_tol: T::lit(1e-10),
            max_intervals: 400,
        }
    }
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk21<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Segment<T> {
    let half = (b - a) / T::lit(2.0);
    let centre = (a + b) / T::lit(2.0);
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += pair * T::lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();
    // QUADPACK-style rescaling of the Gauss/Kronrod difference.
    let error = if raw_err > T::zero() {
        let scaled = (T::lit(200.0) * raw_err / value.abs().max(T::min_positive_value()))
            .powf(T::lit(1.5))
            * value.abs();
        raw_err.min(scaled.max(T::lit(50.0) * T::epsilon() * value.abs()))
    } else {
        T::zero()
    };
    Segment { a, b, value, error }
}

/// Adaptive 21-point Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
) -> Result<Quadrature<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    let mut segments = vec![gk21(&mut f, a, b)];
    let mut evaluations = 21;
    loop {
        let value: T = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let error: T = segments.iter().fold(T::zero(), |s, g| s + g.error);
        if !value.is_finite() {
            return Err(Error::numerical("non-finite integrand"));
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= cfg.max_intervals {
            // Budget exhausted: report what we have with its honest bound.
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| {
                if s.error > acc.1 {
                    (i, s.error)
                } else {
                    acc
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) / T::lit(2.0);
        if mid <= seg.a || mid >= seg.b {
            segments.push(seg);
            let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        segments.push(gk21(&mut f, seg.a, mid));
        segments.push(gk21(&mut f, mid, seg.b));
        evaluations += 42;
    }
}

/// Integrates `f` over `[a, ∞)` in consecutive panels of width `scale`,
/// each doubling in width, until a panel contributes less than the
/// tolerance and the integrand magnitude at the panel edge has fallen below
/// `cutoff` times the running peak.
pub fn integrate_to_infinity<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    scale: T,
    cutoff: T,
    cfg: &QuadConfig<T>,
) -> Result<Quadrature<T>> {
    if !(scale > T::zero()) {
        return Err(Error::invalid("panel scale must be positive"));
    }
    let mut total = Quadrature {
        value: T::zero(),
        error: T::zero(),
        evaluations: 0,
    };
    let mut peak = f(a).abs();
    let mut lo = a;
    let mut width = scale;
    for _ in 0..200 {
        let hi = lo + width;
        let q = integrate(&mut f, lo, hi, cfg)?;
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
        let edge = f(hi).abs();
        peak = peak.max(edge);
        let small_panel = q.value.abs() <= cfg.rel_tol * total.value.abs() + cfg.abs_tol;
        if small_panel && edge <= cutoff * peak {
            return Ok(total);
        }
        lo = hi;
        if lo > a + T::lit(64.0) * scale {
            width *= T::lit(2.0);
        }
    }
    Err(Error::numerical("integrand does not decay"))
}

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use super::{RandomisationLaw, ThinTailDensity};
use crate::error::Result;
use crate::quadrature::{integrate, QuadConfig};
use crate::scalar::Scalar;

const TABLE_CELLS: usize = 8192;

/// Piecewise-linear inverse of a tabulated distribution function.
#[derive(Debug, Clone)]
pub struct InverseCdfTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfTable {
    pub fn build<T: Scalar>(density: &ThinTailDensity<T>) -> Result<Self> {
        let upper = density.effective_upper()?.as_f64();
        let cfg = QuadConfig {
            abs_tol: 1e-16,
            rel_tol: 1e-10,
            max_intervals: 50,
        };
        let h = upper / TABLE_CELLS as f64;
        let mut nodes = Vec::with_capacity(TABLE_CELLS + 1);
        let mut cdf = Vec::with_capacity(TABLE_CELLS + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        cdf.push(0.0);
        for k in 0..TABLE_CELLS {
            let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
            let cell = integrate(
                |v: f64| density.log_density(T::lit(v)).as_f64().exp(),
                lo,
                hi,
                &cfg,
            )?;
            acc += cell.value;
            nodes.push(hi);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { nodes, cdf })
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let idx = self
            .cdf
            .partition_point(|&c| c < p)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (v0, v1) = (self.nodes[idx - 1], self.nodes[idx]);
        if c1 > c0 {
            v0 + (v1 - v0) * (p - c0) / (c1 - c0)
        } else {
            v0
        }
    }
}

impl<T: Scalar> RandomisationLaw<T> {
    /// One draw of the initial variance.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let draw = match self {
            Self::PointMass { v0 } => return *v0,
            Self::Uniform { a, b } => {
                let u: f64 = rng.random();
                a.as_f64() + (b.as_f64() - a.as_f64()) * u
            }
            Self::FoldedGaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (sigma.as_f64() * z).abs()
            }
            Self::Gamma { shape, rate } => Gamma::new(shape.as_f64(), 1.0 / rate.as_f64())
                .expect("validated gamma parameters")
                .sample(rng),
            Self::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => scale.as_f64() * noncentral_chi_squared(rng, df.as_f64(), noncentrality.as_f64()),
            Self::GenericThinTail(d) => {
                let p: f64 = rng.random();
                d.inverse_cdf().quantile(p)
            }
        };
        T::lit(draw)
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<T> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

/// `χ'²(df, λ)` as a Poisson mixture of central chi-squares.
pub(crate) fn noncentral_chi_squared<R: Rng + ?Sized>(
    rng: &mut R,
    df: f64,
    noncentrality: f64,
) -> f64 {
    let n = if noncentrality > 0.0 {
        Poisson::new(noncentrality / 2.0)
            .expect("positive Poisson mean")
            .sample(rng)
    } else {
        0.0
    };
    let shape = df / 2.0 + n;
    Gamma::new(shape, 2.0)
        .expect("positive chi-square shape")
        .sample(rng)
}

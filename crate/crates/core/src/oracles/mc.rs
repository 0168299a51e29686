use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{OracleEstimate, OracleMethod};
use crate::error::{Error, Result};
use crate::heston::HestonParams;
use crate::laws::{noncentral_chi_squared, RandomisationLaw};
use crate::scalar::Scalar;

/// Paths per seeded substream. Fixed, so results do not depend on the
/// number of worker threads.
const BATCH: usize = 1 << 14;

/// Variance discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    FullTruncationEuler,
    /// Noncentral chi-squared transitions of the CIR process.
    ExactCir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 64,
            scheme: Scheme::default(),
            seed: 0,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::invalid("n_paths and n_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Dyn {
    kappa: f64,
    theta: f64,
    xi: f64,
    rho: f64,
    rho_bar: f64,
}

fn euler_path(d: &Dyn, v0: f64, dt: f64, n_steps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let sq = dt.sqrt();
    let (mut v, mut x) = (v0, 0.0);
    for _ in 0..n_steps {
        let vp = v.max(0.0);
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let vol = vp.sqrt() * sq;
        x += -0.5 * vp * dt + vol * (d.rho * z1 + d.rho_bar * z2);
        v += d.kappa * (d.theta - vp) * dt + d.xi * vol * z1;
    }
    x
}

fn exact_cir_path(d: &Dyn, v0: f64, t: f64, dt: f64, n_steps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let decay = (-d.kappa * dt).exp();
    let c = d.xi * d.xi * (-(-d.kappa * dt).exp_m1()) / (4.0 * d.kappa);
    let df = 4.0 * d.kappa * d.theta / (d.xi * d.xi);
    let mut v = v0;
    let mut integral = 0.0;
    for _ in 0..n_steps {
        let next = c * noncentral_chi_squared(rng, df, v * decay / c);
        integral += 0.5 * (v + next) * dt;
        v = next;
    }
    // ∫√V dW¹ recovered from the variance equation; the orthogonal part is
    // Gaussian given the integrated variance.
    let stoch = (v - v0 - d.kappa * d.theta * t + d.kappa * integral) / d.xi;
    let z: f64 = StandardNormal.sample(rng);
    -0.5 * integral + d.rho * stoch + d.rho_bar * integral.sqrt() * z
}

fn run_batches<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    cfg: &McConfig,
    path: impl Fn(&Dyn, f64, f64, &mut ChaCha8Rng) -> f64 + Sync,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let t = t.as_f64();
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    let d = Dyn {
        kappa: p.kappa().as_f64(),
        theta: p.theta().as_f64(),
        xi: p.xi().as_f64(),
        rho: p.rho().as_f64(),
        rho_bar: p.rho_bar().as_f64(),
    };
    let n_batches = cfg.n_paths.div_ceil(BATCH);
    let batches: Vec<Vec<f64>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let len = BATCH.min(cfg.n_paths - b * BATCH);
            (0..len)
                .map(|_| {
                    let v0 = law.sample_one(&mut rng).as_f64();
                    path(&d, v0, t, &mut rng)
                })
                .collect()
        })
        .collect();
    Ok(batches.concat())
}

/// Terminal log-prices `X_t` of the randomised model, `V₀` drawn from `law`.
///
/// Sampling runs in `f64` whatever `T` is. Batch `b` uses the ChaCha8
/// stream `b` of `seed`, so output is identical for any thread count.
pub fn simulate_paths<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    let n = cfg.n_steps;
    run_batches(p, law, t, cfg, |d, v0, t, rng| {
        let dt = t / n as f64;
        match cfg.scheme {
            Scheme::FullTruncationEuler => euler_path(d, v0, dt, n, rng),
            Scheme::ExactCir => exact_cir_path(d, v0, t, dt, n, rng),
        }
    })
}

/// Terminal variances `V_t` from exact CIR transitions in `n_steps` steps.
pub fn simulate_variance<T: Scalar>(
    p: &HestonParams<T>,
    law: &RandomisationLaw<T>,
    t: T,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    let n = cfg.n_steps;
    run_batches(p, law, t, cfg, |d, v0, t, rng| {
        let dt = t / n as f64;
        let decay = (-d.kappa * dt).exp();
        let c = d.xi * d.xi * (-(-d.kappa * dt).exp_m1()) / (4.0 * d.kappa);
        let df = 4.0 * d.kappa * d.theta / (d.xi * d.xi);
        (0..n).fold(v0, |v, _| {
            c * noncentral_chi_squared(rng, df, v * decay / c)
        })
    })
}

/// Sample mean of `f(X)` with its standard error.
pub fn mc_estimate(samples: &[f64], f: impl Fn(f64) -> f64) -> Result<OracleEstimate<f64>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    // Welford, summed in sample order for reproducibility.
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in samples.iter().enumerate() {
        let y = f(x);
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(OracleEstimate {
        value: mean,
        error: (var / n as f64).sqrt(),
        method: OracleMethod::MonteCarlo { n_paths: n },
    })
}

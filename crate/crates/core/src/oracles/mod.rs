//! Reference values the asymptotics are checked against: contour-integral
//! prices and tail probabilities from the randomised MGF, Monte Carlo
//! simulation of the randomised SDE, and Black-Scholes inversion.

mod black_scholes;
mod fourier;
mod mc;

pub use black_scholes::{
    bs_log_otm_price, bs_price, implied_total_variance_from_log_otm, implied_vol,
};
pub use fourier::{
    fourier_call, fourier_log_otm, log_inversion, log_tail_probability, tail_probability,
    FourierConfig, Target,
};
pub use mc::{mc_estimate, simulate_paths, simulate_variance, McConfig, Scheme};

/// How an [`OracleEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMethod<T> {
    /// Contour integral along `Re z = contour`.
    Fourier {
        contour: T,
    },
    MonteCarlo {
        n_paths: usize,
    },
}

/// A reference value with its error: a quadrature bound for Fourier
/// results, one standard error for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate<T> {
    pub value: T,
    pub error: T,
    pub method: OracleMethod<T>,
}

/// Log-scale result of a contour inversion, for quantities that underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEstimate<T> {
    pub log_value: T,
    /// Relative error bound on `exp(log_value)`.
    pub rel_error: T,
    pub contour: T,
}

#[cfg(test)]
mod tests;

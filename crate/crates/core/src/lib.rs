pub mod error;
pub mod experiments;
pub mod heston;
pub mod laws;
pub mod oracles;
pub mod quadrature;
pub mod rates;
pub mod scalar;
pub mod sharp;
pub mod special;

pub use error::{Error, Result};
pub use num_complex;
pub use scalar::Scalar;

pub type HestonParamsF64 = heston::HestonParams<f64>;
pub type HestonParamsF32 = heston::HestonParams<f32>;
pub type LawF64 = laws::RandomisationLaw<f64>;
pub type LawF32 = laws::RandomisationLaw<f32>;

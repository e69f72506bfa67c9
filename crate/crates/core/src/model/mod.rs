//! The diffusion nonlinearity, the noise coefficient and their validators.

mod noise;
mod nonlinearity;
mod validate;

pub use noise::{eval_sigma, NoiseFamily, NoiseModel};
pub use nonlinearity::{eval_nonlinearity, regularize, Nonlinearity, NonlinearityKind};
pub use validate::{noise_distance, validate_assumption_a, validate_noise, ClauseReport, ValidationReport};

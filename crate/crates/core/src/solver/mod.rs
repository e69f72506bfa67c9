//! Time integration of the stochastic porous medium equation and its
//! semilinear variant, coupled runs and Monte Carlo ensembles.

mod config;
mod coupled;
mod ensemble;
mod galerkin;
mod initial;
mod rng;
mod scheme;

pub use config::{Drift, Equation, Scheme, SolverConfig};
pub use coupled::{run_coupled, BlowUpInfo, CoupledOutput, MemberRecord, PairRecord, RecordOptions};
pub use ensemble::{
    aggregate, map_seeds, run_ensemble, screen_runs, EnsembleStats, MemberMoments, Moments, PairMoments, Welford,
    MAX_BLOW_UP_FRACTION,
};
pub use galerkin::{galerkin_field, step_galerkin, SineBasis};
pub use initial::{truncate_initial, unit_bump, InitialCondition};
pub use rng::NoiseIncrements;
pub use scheme::{step_fd, step_fd_explicit, step_semilinear, BLOW_UP_THRESHOLD};

//! Seeded simulation of treatment-confounder feedback and the Monte Carlo
//! comparison of the naive, adjusted and MSM estimators.

mod dgp;
mod monte_carlo;
mod rng;

pub use dgp::{generate_dataset, generate_with_rng, DgpParams, SimulationConfig};
pub use monte_carlo::{
    run_monte_carlo, run_monte_carlo_with, EstimatorSummary, MonteCarloOptions, MonteCarloSummary,
    ReplicateOutcome,
};
pub use rng::replicate_rng;

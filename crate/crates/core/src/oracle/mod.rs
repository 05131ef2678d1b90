//! Ground truth for tests: dense linear solves on finite chains and seeded
//! Monte Carlo simulation. Nothing on the solver path calls into this module.

mod exact;
mod simulate;

pub use exact::{
    exact_occupation, exact_stationary, ErgodicClass, OccupationSolution, StationarySolution,
    EXIT_MARGIN, MAX_ORACLE_STATES, ORACLE_RESIDUAL_TOL,
};
pub use simulate::{
    simulate_exit, simulate_model_exit, Estimate, SimulationOptions, SimulationResult,
};

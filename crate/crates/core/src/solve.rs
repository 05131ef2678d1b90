//! Solver settings shared by both schemes.

use crate::error::{Error, Result};
use crate::lp::{assemble, LpMode, LpSolution, LpSolver, Sense, SimplexSolver};
use crate::model::CilpModel;
use crate::objective::Objective;
use crate::truncation::Truncation;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone)]
pub struct SolveSettings {
    pub solver: Arc<dyn LpSolver>,
    pub mode: LpMode,
    /// Worker threads for independent LPs; `0` means the global rayon pool.
    /// Results never depend on this value.
    pub workers: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            solver: Arc::new(SimplexSolver::default()),
            mode: LpMode::Standard,
            workers: 0,
        }
    }
}

impl fmt::Debug for SolveSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolveSettings")
            .field("solver", &self.solver.name())
            .field("mode", &self.mode)
            .field("workers", &self.workers)
            .finish()
    }
}

impl SolveSettings {
    pub fn with_mode(mut self, mode: LpMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_solver(mut self, solver: Arc<dyn LpSolver>) -> Self {
        self.solver = solver;
        self
    }

    /// Runs `op` on a pool of `workers` threads.
    pub(crate) fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> Result<R> {
        if self.workers == 0 {
            return Ok(op());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(op))
    }
}

/// Per-LP solver statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDiagnostics {
    pub iterations: usize,
    pub max_residual: f64,
    /// Wall-clock time; the only field that varies between identical runs.
    pub solve_ms: f64,
}

pub(crate) struct Solved {
    pub solution: LpSolution,
    pub diagnostics: LpDiagnostics,
}

pub(crate) fn solve_objective(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    sense: Sense,
    settings: &SolveSettings,
) -> Result<Solved> {
    let lp = assemble(model, trunc, f, sense, settings.mode)?;
    let start = Instant::now();
    let raw = settings.solver.solve(&lp);
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;
    let sense_name = match sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let solution = raw.into_optimal(format!("{sense_name} {} at r = {}", f.name(), trunc.r()))?;
    let diagnostics = LpDiagnostics {
        iterations: solution.iterations,
        max_residual: solution.max_residual,
        solve_ms,
    };
    Ok(Solved {
        solution,
        diagnostics,
    })
}

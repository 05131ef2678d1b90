//! Finite linear programs over truncation windows, and the solver interface.
//!
//! Every variable is non-negative and unbounded above. Constraints are either
//! sparse equalities or sparse two-sided ranges `lower <= a.x <= upper`.

mod dump;
mod simplex;

pub use dump::{parse_dump, write_dump, DumpError};
pub use simplex::{SimplexOptions, SimplexSolver};

use crate::error::{Error, Result};
use crate::model::CilpModel;
use crate::objective::Objective;
use crate::truncation::Truncation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Absolute feasibility tolerance on constraint residuals.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative optimality tolerance on objective values.
pub const OPTIMALITY_TOL: f64 = 1e-8;
/// Smallest pivot element the simplex accepts.
pub const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub coeffs: Vec<(usize, f64)>,
    /// `-inf` when absent.
    pub lower: f64,
    /// `+inf` when absent.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub equalities: Vec<EqualityRow>,
    pub ranges: Vec<RangeRow>,
}

impl LinearProgram {
    pub fn new(n_vars: usize, sense: Sense) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            sense,
            equalities: Vec::new(),
            ranges: Vec::new(),
        }
    }

    /// Checks indices, duplicates, finiteness and `lower <= upper`.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.n_vars {
            return Err(Error::MalformedLp(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.n_vars
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::MalformedLp(format!(
                "objective coefficient {j} is not finite"
            )));
        }
        let check_row = |coeffs: &[(usize, f64)], what: &str| -> Result<()> {
            let mut seen = std::collections::HashSet::new();
            for &(j, a) in coeffs {
                if j >= self.n_vars {
                    return Err(Error::MalformedLp(format!(
                        "{what} references variable {j} of {}",
                        self.n_vars
                    )));
                }
                if !seen.insert(j) {
                    return Err(Error::MalformedLp(format!(
                        "{what} lists variable {j} twice"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedLp(format!(
                        "{what} has a non-finite coefficient"
                    )));
                }
            }
            Ok(())
        };
        for (i, row) in self.equalities.iter().enumerate() {
            check_row(&row.coeffs, &format!("equality row {i}"))?;
            if !row.rhs.is_finite() {
                return Err(Error::MalformedLp(format!(
                    "equality row {i} has a non-finite right-hand side"
                )));
            }
        }
        for (i, row) in self.ranges.iter().enumerate() {
            check_row(&row.coeffs, &format!("range row {i}"))?;
            if row.lower.is_nan()
                || row.upper.is_nan()
                || row.lower > row.upper
                || row.lower == f64::INFINITY
                || row.upper == f64::NEG_INFINITY
            {
                return Err(Error::MalformedLp(format!(
                    "range row {i} has bounds [{}, {}]",
                    row.lower, row.upper
                )));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any constraint or sign bound at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let dot = |coeffs: &[(usize, f64)]| coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        let mut worst = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for row in &self.equalities {
            worst = worst.max((dot(&row.coeffs) - row.rhs).abs());
        }
        for row in &self.ranges {
            let v = dot(&row.coeffs);
            worst = worst.max(row.lower - v).max(v - row.upper);
        }
        worst
    }

    /// [`max_residual`](Self::max_residual) with each row's violation divided
    /// by `max(1, |rhs|, max_j |a_j|)`, so rows with large coefficients
    /// (the moment row carries `w`, of order `r`) are judged relatively.
    pub fn max_scaled_residual(&self, x: &[f64]) -> f64 {
        let dot = |coeffs: &[(usize, f64)]| coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        let norm = |coeffs: &[(usize, f64)], bound: f64| {
            coeffs
                .iter()
                .fold(1.0f64, |m, &(_, a)| m.max(a.abs()))
                .max(if bound.is_finite() { bound.abs() } else { 0.0 })
        };
        let mut worst = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for row in &self.equalities {
            worst = worst.max((dot(&row.coeffs) - row.rhs).abs() / norm(&row.coeffs, row.rhs));
        }
        for row in &self.ranges {
            let v = dot(&row.coeffs);
            let scale = norm(&row.coeffs, row.lower).max(norm(&row.coeffs, row.upper));
            worst = worst.max((row.lower - v) / scale).max((v - row.upper) / scale);
        }
        worst
    }

    pub fn n_rows(&self) -> usize {
        self.equalities.len() + self.ranges.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub max_residual: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// Converts a non-optimal status into the matching error.
    pub fn into_optimal(self, context: impl Into<String>) -> Result<LpSolution> {
        let context = context.into();
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible { context }),
            LpStatus::Unbounded => Err(Error::Unbounded { context }),
            LpStatus::NumericalFailure => Err(Error::NumericalFailure {
                context,
                detail: if self.max_residual.is_nan() {
                    format!("basis lost accuracy after {} iterations", self.iterations)
                } else {
                    format!(
                        "max residual {:e} after {} iterations",
                        self.max_residual, self.iterations
                    )
                },
            }),
        }
    }
}

/// Anything that can solve a [`LinearProgram`].
pub trait LpSolver: Send + Sync {
    fn solve(&self, lp: &LinearProgram) -> LpSolution;

    fn name(&self) -> &str;
}

/// Which finite outer approximation to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpMode {
    /// Equalities on the interior set only.
    #[default]
    Standard,
    /// Equalities on the whole window with non-negative slack of bounded mass.
    Relaxed,
}

fn objective_coefficients(trunc: &Truncation, f: &Objective) -> Result<Vec<f64>> {
    trunc
        .states()
        .iter()
        .map(|x| {
            let v = f.eval(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::ObjectiveNotEvaluable {
                    objective: f.name().to_string(),
                    witness: x.clone(),
                })
            }
        })
        .collect()
}

/// Sparse row `sum_{x' in X_r} rho(x') h(x', x)` over window indices.
fn column_row(model: &dyn CilpModel, trunc: &Truncation, x: &crate::state::StateId) -> Vec<(usize, f64)> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (xp, h) in model.predecessors(x) {
        if let Some(j) = trunc.index_of(&xp) {
            *acc.entry(j).or_insert(0.0) += h;
        }
    }
    acc.into_iter().filter(|(_, v)| *v != 0.0).collect()
}

fn moment_rows(model: &dyn CilpModel, trunc: &Truncation, lp: &mut LinearProgram) {
    let c = model.moment_bound();
    let g_row = trunc
        .states()
        .iter()
        .enumerate()
        .map(|(j, x)| (j, model.g_sum(x)))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    lp.ranges.push(RangeRow {
        coeffs: g_row,
        lower: 1.0 - c * trunc.a_r(),
        upper: 1.0,
    });
    let w_row = trunc
        .states()
        .iter()
        .enumerate()
        .map(|(j, x)| (j, model.w(x)))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    lp.ranges.push(RangeRow {
        coeffs: w_row,
        lower: f64::NEG_INFINITY,
        upper: c,
    });
}

/// The LP over the outer approximation `L_r`: variables are the masses on
/// `X_r`, one equality per interior state, the two-sided `g` row and the
/// moment row.
pub fn assemble_outer_lp(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    sense: Sense,
) -> Result<LinearProgram> {
    let n = trunc.len();
    let mut lp = LinearProgram::new(n, sense);
    lp.objective = objective_coefficients(trunc, f)?;
    for &i in trunc.equality_set() {
        let x = &trunc.states()[i];
        lp.equalities.push(EqualityRow {
            coeffs: column_row(model, trunc, x),
            rhs: model.phi(x),
        });
    }
    moment_rows(model, trunc, &mut lp);
    Ok(lp)
}

/// The relaxed LP for models whose `H` columns may be infinite.
///
/// Variables `0..n` are the masses, `n..2n` the slacks `eps(x)`. Every state
/// of the window carries an equality `rho H(x) + eps(x) = phi(x)`, and the
/// slack mass is capped at `c b_r`.
pub fn assemble_relaxed_lp(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    sense: Sense,
) -> Result<LinearProgram> {
    let b_r = model.slack_coefficient(trunc.r()).ok_or_else(|| {
        Error::Config("relaxed LP requires the model to supply b_r".into())
    })?;
    let n = trunc.len();
    let mut lp = LinearProgram::new(2 * n, sense);
    lp.objective[..n].copy_from_slice(&objective_coefficients(trunc, f)?);
    for (i, x) in trunc.states().iter().enumerate() {
        let mut coeffs = column_row(model, trunc, x);
        coeffs.push((n + i, 1.0));
        lp.equalities.push(EqualityRow {
            coeffs,
            rhs: model.phi(x),
        });
    }
    moment_rows(model, trunc, &mut lp);
    lp.ranges.push(RangeRow {
        coeffs: (n..2 * n).map(|j| (j, 1.0)).collect(),
        lower: f64::NEG_INFINITY,
        upper: model.moment_bound() * b_r,
    });
    Ok(lp)
}

/// Assembles the LP for the requested mode.
pub fn assemble(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    sense: Sense,
    mode: LpMode,
) -> Result<LinearProgram> {
    match mode {
        LpMode::Standard => assemble_outer_lp(model, trunc, f, sense),
        LpMode::Relaxed => assemble_relaxed_lp(model, trunc, f, sense),
    }
}

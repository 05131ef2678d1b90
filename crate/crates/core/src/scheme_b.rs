//! Pointwise lower bounds on the minimal point of `L` and on its image.
//!
//! If `L` has a minimal point `nu`, then `nu` restricted to `X_r` lies in
//! `L_r`, so `l^r(x) = min { rho(x) : rho in L_r } <= nu(x)`. Outside the
//! window `nu` carries at most `c/r` mass because `w >= r` there, which
//! gives the computable error bound
//!
//! ```text
//! TV(nu, l^r) <= Gamma_r = u^r(X_r) + c/r - l^r(X_r).
//! ```

use crate::error::{Error, Result};
use crate::lp::Sense;
use crate::model::CilpModel;
use crate::objective::{Objective, SignCertificate};
use crate::scheme_a::check_schedule;
use crate::solve::{solve_objective, LpDiagnostics, SolveSettings};
use crate::state::{OutputId, StateId};
use crate::truncation::{build_truncation, BoundedMeasure, Truncation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub state: StateId,
    #[serde(flatten)]
    pub lp: LpDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPointApprox {
    pub r: u64,
    /// `l^r(x)` for every `x` in `X_r`, zero entries included.
    pub lower: BoundedMeasure,
    /// `l^r(X_r)`.
    pub captured_mass: f64,
    /// `u^r(X_r)`, the largest window mass over `L_r`.
    pub u_indicator: f64,
    /// `u_indicator + c/r - captured_mass`.
    pub gamma: f64,
    /// `1 - l^r(g)`, kept for comparison with the image mass gap.
    pub g_gap: f64,
    pub diagnostics: Vec<StateDiagnostics>,
    pub window_diagnostics: LpDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageLowerBound {
    pub r: u64,
    pub window: Vec<OutputId>,
    /// `l_psi^r(y)`, one per window entry, in window order.
    pub entries: Vec<(OutputId, f64)>,
    /// `1 - sum_y l_psi^r(y)`.
    pub mass_gap: f64,
}

fn minimise(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    settings: &SolveSettings,
) -> Result<(f64, LpDiagnostics)> {
    let solved = solve_objective(model, trunc, f, Sense::Minimize, settings)?;
    Ok((solved.solution.objective.max(0.0), solved.diagnostics))
}

/// Computes `l^r` state by state and the error bound `Gamma_r`.
///
/// The caller asserts that `L` has a minimal point (occupation measures
/// of exit problems, or a stationary distribution known to be unique).
/// Per-state LPs run in parallel; the result does not depend on scheduling.
pub fn minimal_point_lower(
    model: &dyn CilpModel,
    trunc: &Truncation,
    settings: &SolveSettings,
) -> Result<MinimalPointApprox> {
    let per_state: Vec<Result<(f64, LpDiagnostics)>> = settings.install(|| {
        trunc
            .states()
            .par_iter()
            .map(|x| minimise(model, trunc, &Objective::indicator(x.clone()), settings))
            .collect()
    })?;
    let mut masses = Vec::with_capacity(trunc.len());
    let mut diagnostics = Vec::with_capacity(trunc.len());
    for (x, res) in trunc.states().iter().zip(per_state) {
        let (m, d) = res.map_err(|e| match e {
            Error::Infeasible { context } => Error::Infeasible {
                context: format!("{context} (state {x}; the model is inconsistent)"),
            },
            other => other,
        })?;
        masses.push((x.clone(), m));
        diagnostics.push(StateDiagnostics {
            state: x.clone(),
            lp: d,
        });
    }
    let window = Objective::set_indicator("1_{X_r}", trunc.states().iter().cloned());
    let top = solve_objective(model, trunc, &window, Sense::Maximize, settings)?;
    let lower = BoundedMeasure::from_model(model, masses)?;
    let captured_mass = lower.total_mass();
    let u_indicator = top.solution.objective;
    let c_over_r = model.moment_bound() / trunc.r() as f64;
    Ok(MinimalPointApprox {
        r: trunc.r(),
        gamma: u_indicator + c_over_r - captured_mass,
        g_gap: 1.0 - lower.g_mass(),
        captured_mass,
        u_indicator,
        lower,
        diagnostics,
        window_diagnostics: top.diagnostics,
    })
}

/// Outputs reachable in one step from the window: the union of `g_row`
/// supports over `X_r`, sorted.
pub fn default_image_window(model: &dyn CilpModel, trunc: &Truncation) -> Vec<OutputId> {
    let set: BTreeSet<OutputId> = trunc
        .states()
        .iter()
        .flat_map(|x| model.g_row(x).into_iter().map(|(y, _)| y))
        .collect();
    set.into_iter().collect()
}

/// `g(., y)` tabulated on the window. LP assembly only evaluates objectives
/// on the window, and `G >= 0` certifies the sign outside it.
fn column_objective(model: &dyn CilpModel, trunc: &Truncation, y: &OutputId) -> Objective {
    let column: BTreeMap<StateId, f64> = trunc
        .states()
        .iter()
        .filter_map(|x| {
            let v: f64 = model
                .g_row(x)
                .iter()
                .filter(|(o, _)| o == y)
                .map(|(_, v)| v)
                .sum();
            (v != 0.0).then(|| (x.clone(), v))
        })
        .collect();
    Objective::custom(format!("g(., {y})"), move |x| column.get(x).copied().unwrap_or(0.0))
        .with_sign(SignCertificate::NonNegative)
}

/// Lower bounds `l_psi^r(y) = min { rho(g(., y)) : rho in L_r }` on the
/// image of the minimal point, for each `y` in `y_window`.
pub fn image_lower(
    model: &dyn CilpModel,
    trunc: &Truncation,
    y_window: &[OutputId],
    settings: &SolveSettings,
) -> Result<ImageLowerBound> {
    let values: Vec<Result<f64>> = settings.install(|| {
        y_window
            .par_iter()
            .map(|y| minimise(model, trunc, &column_objective(model, trunc, y), settings).map(|(v, _)| v))
            .collect()
    })?;
    let mut entries = Vec::with_capacity(y_window.len());
    for (y, v) in y_window.iter().zip(values) {
        entries.push((y.clone(), v?));
    }
    let mass_gap = 1.0 - entries.iter().map(|(_, v)| v).sum::<f64>();
    Ok(ImageLowerBound {
        r: trunc.r(),
        window: y_window.to_vec(),
        entries,
        mass_gap,
    })
}

/// [`minimal_point_lower`] over a strictly increasing schedule.
pub fn minimal_point_sweep(
    model: &dyn CilpModel,
    schedule: &[u64],
    settings: &SolveSettings,
) -> Result<Vec<MinimalPointApprox>> {
    check_schedule(schedule)?;
    schedule
        .iter()
        .map(|&r| minimal_point_lower(model, &build_truncation(model, r)?, settings))
        .collect()
}

/// Pointwise upper values `u^r(x) = max { rho(x) : rho in L_r }`.
///
/// These bound the minimal point from above at each state but, unlike
/// `l^r`, need not converge as `r` grows.
#[cfg(feature = "experimental")]
pub fn minimal_point_upper(
    model: &dyn CilpModel,
    trunc: &Truncation,
    settings: &SolveSettings,
) -> Result<BoundedMeasure> {
    let per_state: Vec<Result<f64>> = settings.install(|| {
        trunc
            .states()
            .par_iter()
            .map(|x| {
                solve_objective(model, trunc, &Objective::indicator(x.clone()), Sense::Maximize, settings)
                    .map(|s| s.solution.objective.max(0.0))
            })
            .collect()
    })?;
    let entries = trunc
        .states()
        .iter()
        .cloned()
        .zip(per_state)
        .map(|(x, v)| v.map(|v| (x, v)))
        .collect::<Result<Vec<_>>>()?;
    BoundedMeasure::from_model(model, entries)
}

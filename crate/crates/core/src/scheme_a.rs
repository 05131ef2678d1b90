//! Two-sided bounds on the optimal values of the infinite LP.
//!
//! For a window `X_r` the min and max LPs over `L_r` give `l_raw` and
//! `u_raw`. Every feasible `rho` restricts to a point of `L_r`, and the mass
//! it puts outside the window is controlled by `rho(w) <= c`, so
//!
//! ```text
//! l_raw - c * env(r) <= rho(f) <= u_raw + c * env(r),   env(r) = sup_{x not in X_r} |f(x)|/w(x).
//! ```
//!
//! A side needs no correction when `f` has the favourable sign outside the
//! window. A side with neither an envelope nor a sign is reported absent.

use crate::error::{Error, Result};
use crate::lp::{LpMode, Sense};
use crate::model::CilpModel;
use crate::objective::{tail_sup_ratio, Objective, SignCertificate};
use crate::solve::{solve_objective, LpDiagnostics, SolveSettings};
use crate::truncation::{build_truncation, BoundedMeasure, ImageMeasure, Truncation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative slack allowed between `l_raw` and `u_raw` before the pair is
/// treated as a numerical failure.
pub const ORDER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    pub mode: LpMode,
    pub solver: String,
    pub equality_rows: usize,
    pub min: LpDiagnostics,
    pub max: LpDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub r: u64,
    pub objective: String,
    pub window_size: usize,
    pub l_raw: f64,
    pub u_raw: f64,
    pub l_corrected: Option<f64>,
    pub u_corrected: Option<f64>,
    /// `c * env(r)`, absent when no envelope is known.
    pub correction: Option<f64>,
    /// At least one corrected side is absent.
    pub one_sided: bool,
    /// `u_corrected - l_corrected`.
    pub gap: Option<f64>,
    pub midpoint: Option<f64>,
    pub diagnostics: BoundDiagnostics,
}

impl BoundResult {
    /// Both corrected bounds, or an "envelope required" error.
    pub fn require_two_sided(&self) -> Result<(f64, f64)> {
        match (self.l_corrected, self.u_corrected) {
            (Some(l), Some(u)) => Ok((l, u)),
            _ => Err(Error::EnvelopeRequired(self.objective.clone())),
        }
    }
}

fn check_sign(f: &Objective, trunc: &Truncation) -> Result<()> {
    let violates = |v: f64| match f.sign() {
        SignCertificate::NonNegative => v < 0.0,
        SignCertificate::NonPositive => v > 0.0,
        SignCertificate::None => false,
    };
    match trunc.states().iter().find(|x| violates(f.eval(x))) {
        Some(x) => Err(Error::SignCertificateViolated {
            objective: f.name().to_string(),
            witness: x.clone(),
        }),
        None => Ok(()),
    }
}

/// Solves both LPs over `L_r` and applies the tail corrections.
pub fn bound_value(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    settings: &SolveSettings,
) -> Result<BoundResult> {
    check_sign(f, trunc)?;
    let lo = solve_objective(model, trunc, f, Sense::Minimize, settings)?;
    let hi = solve_objective(model, trunc, f, Sense::Maximize, settings)?;
    let (l_raw, u_raw) = (lo.solution.objective, hi.solution.objective);
    if l_raw > u_raw + ORDER_TOL * u_raw.abs().max(1.0) {
        return Err(Error::NumericalFailure {
            context: format!("bounds for {} at r = {}", f.name(), trunc.r()),
            detail: format!("minimum {l_raw} exceeds maximum {u_raw}"),
        });
    }

    let saturated = model.state_count() == Some(trunc.len());
    let vanishes_outside = saturated || f.supported_within(|x| trunc.contains(x));
    let correction = if saturated {
        Some(0.0)
    } else {
        tail_sup_ratio(model, f, trunc.r())
            .value()
            .map(|ratio| model.moment_bound() * ratio)
    };
    let l_corrected = if vanishes_outside || f.sign() == SignCertificate::NonNegative {
        Some(l_raw)
    } else {
        correction.map(|c| l_raw - c)
    };
    let u_corrected = if vanishes_outside || f.sign() == SignCertificate::NonPositive {
        Some(u_raw)
    } else {
        correction.map(|c| u_raw + c)
    };
    let (gap, midpoint) = match (l_corrected, u_corrected) {
        (Some(l), Some(u)) => (Some((u - l).max(0.0)), Some(0.5 * (l + u))),
        _ => (None, None),
    };
    Ok(BoundResult {
        r: trunc.r(),
        objective: f.name().to_string(),
        window_size: trunc.len(),
        l_raw,
        u_raw,
        l_corrected,
        u_corrected,
        correction,
        one_sided: gap.is_none(),
        gap,
        midpoint,
        diagnostics: BoundDiagnostics {
            mode: settings.mode,
            solver: settings.solver.name().to_string(),
            equality_rows: trunc.equality_set().len(),
            min: lo.diagnostics,
            max: hi.diagnostics,
        },
    })
}

/// An optimal point of the min or max LP, as a measure on `X_r`.
///
/// With `f = Objective::zero()` this is simply some point of `L_r`, which
/// approximates the feasible point when that point is unique.
pub fn optimal_point(
    model: &dyn CilpModel,
    trunc: &Truncation,
    f: &Objective,
    sense: Sense,
    settings: &SolveSettings,
) -> Result<BoundedMeasure> {
    check_sign(f, trunc)?;
    let solved = solve_objective(model, trunc, f, sense, settings)?;
    let entries = trunc
        .states()
        .iter()
        .zip(&solved.solution.primal)
        .map(|(x, &m)| (x.clone(), m.max(0.0)));
    BoundedMeasure::from_model(model, entries)
}

/// `psi(y) = sum_x point(x) g(x, y)`.
pub fn image_of(model: &dyn CilpModel, point: &BoundedMeasure) -> ImageMeasure {
    ImageMeasure::new(point.iter().flat_map(|(x, m)| {
        model
            .g_row(x)
            .into_iter()
            .map(move |(y, v)| (y, m * v))
    }))
}

/// One row of a sweep: a bound, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: u64,
    pub bound: Option<BoundResult>,
    pub error: Option<String>,
    /// The typed error behind `error`; not serialised.
    #[serde(skip)]
    pub failure: Option<Error>,
}

pub(crate) fn check_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Precondition("schedule is empty".into()));
    }
    if schedule[0] == 0 {
        return Err(Error::Precondition("schedule values must be positive".into()));
    }
    if let Some(w) = schedule.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(format!(
            "schedule must be strictly increasing, but {} is followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Independent bounds for each `r`, in schedule order. A failure at one
/// `r` is recorded in its row and the others still run.
pub fn sweep(
    model: &dyn CilpModel,
    f: &Objective,
    schedule: &[u64],
    settings: &SolveSettings,
) -> Result<Vec<SweepRow>> {
    check_schedule(schedule)?;
    let row = |&r: &u64| {
        let outcome = build_truncation(model, r).and_then(|t| bound_value(model, &t, f, settings));
        match outcome {
            Ok(b) => SweepRow {
                r,
                bound: Some(b),
                error: None,
                failure: None,
            },
            Err(e) => SweepRow {
                r,
                bound: None,
                error: Some(e.to_string()),
                failure: Some(e),
            },
        }
    };
    settings.install(|| schedule.par_iter().map(row).collect())
}

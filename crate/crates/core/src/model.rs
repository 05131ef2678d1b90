//! The countably-infinite LP instance and checks of its standing assumptions.
//!
//! A model is a set of accessors over a countable state space. The feasible
//! set is
//!
//! ```text
//! L = { rho >= 0 : rho H(x) = phi(x) for all x, rho(g) = 1, rho(w) <= c }
//! ```
//!
//! where `H` is Metzler, `G >= 0` with row sums `g`, and `w` is norm-like.
//! Everything downstream only ever touches finitely many states, through
//! [`CilpModel::enumerate`] and the sparse row/column accessors.

use crate::error::{Error, Result};
use crate::state::{OutputId, StateId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

/// Absolute tolerance for consistency checks on model data.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Accessors defining a CILP instance.
///
/// Implementations must be pure: the same arguments always give the same
/// answer, and all methods may be called concurrently.
pub trait CilpModel: Send + Sync {
    /// Column support of `H` at `x`: every `(x', h(x', x))` with a non-zero
    /// coefficient, including the diagonal entry.
    fn predecessors(&self, x: &StateId) -> Vec<(StateId, f64)>;

    /// Row support of `H` at `x`: every `(x'', h(x, x''))`, including the diagonal.
    fn successors(&self, x: &StateId) -> Vec<(StateId, f64)>;

    /// Row support of `G` at `x`.
    fn g_row(&self, x: &StateId) -> Vec<(OutputId, f64)>;

    /// Row sum `g(x)` of `G`.
    fn g_sum(&self, x: &StateId) -> f64;

    fn phi(&self, x: &StateId) -> f64;

    /// The norm-like function.
    fn w(&self, x: &StateId) -> f64;

    /// Moment bound `c` with `rho(w) <= c` on the feasible set.
    fn moment_bound(&self) -> f64;

    /// Certified tail coefficient: `sup_{x not in X_r} g(x)/w(x) <= a_r`.
    fn tail_coefficient(&self, r: u64) -> f64;

    /// Certified column-tail coefficient `b_r` for models with infinite
    /// column supports, used by the relaxed LP.
    fn slack_coefficient(&self, _r: u64) -> Option<f64> {
        None
    }

    /// Exactly the sublevel set `X_r = { x : w(x) < r }`, in any order.
    fn enumerate(&self, r: u64) -> Vec<StateId>;

    /// `|X|` when the state space is finite. A window of this size has
    /// nothing outside it, so tail corrections vanish.
    fn state_count(&self) -> Option<usize> {
        None
    }

    /// Short human-readable description.
    fn describe(&self) -> String {
        "model".to_string()
    }
}

/// A norm-like function on integer-tuple states.
#[derive(Clone)]
pub enum Weight {
    /// `w(x) = |x_0|^k` on the first coordinate.
    Monomial(u32),
    Custom(Arc<dyn Fn(&StateId) -> f64 + Send + Sync>),
}

impl Weight {
    pub fn eval(&self, x: &StateId) -> f64 {
        match self {
            Weight::Monomial(k) => (x.first().unsigned_abs() as f64).powi(*k as i32),
            Weight::Custom(f) => f(x),
        }
    }

    pub fn monomial_degree(&self) -> Option<u32> {
        match self {
            Weight::Monomial(k) => Some(*k),
            Weight::Custom(_) => None,
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Monomial(k) => write!(f, "x^{k}"),
            Weight::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Breadth-first enumeration of `{ x : w(x) < r }` from seed states.
///
/// Expands along both successor and predecessor edges and prunes at
/// `w >= r`, so the sublevel set must be connected to the seeds through
/// states that are themselves in it. The result is sorted.
pub fn bfs_sublevel_set(
    seeds: &[StateId],
    r: u64,
    w: impl Fn(&StateId) -> f64,
    neighbors: impl Fn(&StateId) -> Vec<StateId>,
    admissible: impl Fn(&StateId) -> bool,
) -> Vec<StateId> {
    let threshold = r as f64;
    let mut seen: HashSet<StateId> = HashSet::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if admissible(s) && w(s) < threshold && seen.insert(s.clone()) {
            queue.push_back(s.clone());
        }
    }
    while let Some(x) = queue.pop_front() {
        for y in neighbors(&x) {
            if !seen.contains(&y) && admissible(&y) && w(&y) < threshold {
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<StateId> = seen.into_iter().collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail { witnesses: Vec<StateId>, detail: String },
    NotCheckable { reason: String },
    /// Accepted on the strength of a model-supplied certificate.
    Certified { by: String },
}

impl CheckStatus {
    pub fn is_fail(&self) -> bool {
        matches!(self, CheckStatus::Fail { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    #[serde(flatten)]
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub horizon: u64,
    pub states_checked: usize,
    pub checks: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(|c| c.status.is_fail())
    }

    pub fn status_of(&self, check: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.check == check).map(|c| &c.status)
    }
}

/// Names of the checks in a [`ValidationReport`].
pub mod checks {
    pub const SUBLEVEL: &str = "sublevel_enumeration";
    pub const STRUCTURE: &str = "row_column_consistency";
    pub const METZLER: &str = "metzler";
    pub const G_NONNEGATIVE: &str = "g_nonnegative";
    pub const W_NONNEGATIVE: &str = "w_nonnegative";
    pub const TAIL: &str = "tail_coefficients";
    pub const REACHABILITY: &str = "exit_reachability";
    pub const FINITE_COLUMNS: &str = "finite_columns";
}

const MAX_WITNESSES: usize = 8;

fn fail_or_pass(witnesses: Vec<StateId>, detail: &str) -> CheckStatus {
    if witnesses.is_empty() {
        CheckStatus::Pass
    } else {
        let mut w = witnesses;
        w.truncate(MAX_WITNESSES);
        CheckStatus::Fail {
            witnesses: w,
            detail: detail.to_string(),
        }
    }
}

/// Checks the machine-checkable parts of the standing assumptions on `X_horizon`.
///
/// Returns an error only when the enumerator itself breaks its contract
/// (a state with `w(x) >= r`), since every other check depends on it.
pub fn validate_assumptions(model: &dyn CilpModel, horizon: u64) -> Result<ValidationReport> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let states = model.enumerate(horizon);
    if states.is_empty() {
        return Err(Error::TruncationTooSmall {
            r: horizon,
            minimal_r: None,
        });
    }
    let threshold = horizon as f64;
    for x in &states {
        let wx = model.w(x);
        if !(wx < threshold) {
            return Err(Error::ModelDefinition {
                witness: x.clone(),
                message: format!("enumerator({horizon}) returned a state with w = {wx}"),
            });
        }
    }
    let window: BTreeSet<StateId> = states.iter().cloned().collect();
    let mut report = Vec::new();

    // Nested windows: X_{horizon/2} must sit inside X_horizon and agree with w.
    let half = (horizon / 2).max(1);
    let inner = model.enumerate(half);
    let mut bad = Vec::new();
    for x in &inner {
        if !window.contains(x) || !(model.w(x) < half as f64) {
            bad.push(x.clone());
        }
    }
    for x in &states {
        if model.w(x) < half as f64 && !inner.contains(x) {
            bad.push(x.clone());
        }
    }
    report.push(CheckEntry {
        check: checks::SUBLEVEL.into(),
        status: fail_or_pass(bad, "enumerator is not nested or disagrees with w"),
    });

    let mut metzler = Vec::new();
    let mut structure = Vec::new();
    let mut g_bad = Vec::new();
    let mut w_bad = Vec::new();
    for x in &states {
        let preds = model.predecessors(x);
        let succs = model.successors(x);
        if preds
            .iter()
            .chain(succs.iter())
            .any(|(_, h)| !h.is_finite())
        {
            structure.push(x.clone());
        }
        let off_diag_negative = preds.iter().any(|(xp, h)| xp != x && *h < 0.0)
            || succs.iter().any(|(xs, h)| xs != x && *h < 0.0);
        if off_diag_negative {
            metzler.push(x.clone());
        }
        // h(x', x) listed as a predecessor of x must appear as a successor of x'
        // when x' is inside the window.
        for (xp, h) in &preds {
            if window.contains(xp) {
                let mirrored = model
                    .successors(xp)
                    .iter()
                    .filter(|(y, _)| y == x)
                    .map(|(_, v)| *v)
                    .sum::<f64>();
                if (mirrored - h).abs() > CONSISTENCY_TOL * (1.0 + h.abs()) {
                    structure.push(x.clone());
                    break;
                }
            }
        }
        let row = model.g_row(x);
        let row_sum: f64 = row.iter().map(|(_, v)| *v).sum();
        if row.iter().any(|(_, v)| !(*v >= 0.0))
            || (row_sum - model.g_sum(x)).abs() > CONSISTENCY_TOL
        {
            g_bad.push(x.clone());
        }
        if !(model.w(x) >= 0.0) {
            w_bad.push(x.clone());
        }
    }
    structure.dedup();
    report.push(CheckEntry {
        check: checks::STRUCTURE.into(),
        status: fail_or_pass(structure, "predecessor and successor lists disagree"),
    });
    report.push(CheckEntry {
        check: checks::METZLER.into(),
        status: fail_or_pass(metzler, "negative off-diagonal coefficient in H"),
    });
    report.push(CheckEntry {
        check: checks::G_NONNEGATIVE.into(),
        status: fail_or_pass(
            g_bad,
            "negative entry in G, or g_sum differs from the row sum",
        ),
    });
    report.push(CheckEntry {
        check: checks::W_NONNEGATIVE.into(),
        status: fail_or_pass(w_bad, "w is negative"),
    });
    report.push(CheckEntry {
        check: checks::TAIL.into(),
        status: CheckStatus::Certified {
            by: format!(
                "a_r supplied by the model (a_{horizon} = {:e})",
                model.tail_coefficient(horizon)
            ),
        },
    });
    report.push(CheckEntry {
        check: checks::REACHABILITY.into(),
        status: reachability_check(model, &window),
    });
    report.push(CheckEntry {
        check: checks::FINITE_COLUMNS.into(),
        status: if model.slack_coefficient(horizon).is_some() {
            CheckStatus::NotCheckable {
                reason: "model declares infinite column supports (b_r present); use the relaxed LP"
                    .into(),
            }
        } else {
            CheckStatus::Pass
        },
    });
    Ok(ValidationReport {
        horizon,
        states_checked: states.len(),
        checks: report,
    })
}

/// Every state needs `w > 0`, `g > 0`, or a positive H-path to a state with
/// `g > 0`. Paths are searched inside the window only.
fn reachability_check(model: &dyn CilpModel, window: &BTreeSet<StateId>) -> CheckStatus {
    let mut failures = Vec::new();
    let mut undecided = Vec::new();
    // States known to reach positive g.
    let mut good: HashSet<StateId> = HashSet::new();
    for x in window {
        if model.g_sum(x) > 0.0 {
            good.insert(x.clone());
        }
    }
    for x in window {
        if model.w(x) > 0.0 || good.contains(x) {
            continue;
        }
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([x.clone()]);
        seen.insert(x.clone());
        let mut found = false;
        let mut left_window = false;
        while let Some(z) = queue.pop_front() {
            for (y, h) in model.successors(&z) {
                if y == z || h <= 0.0 || seen.contains(&y) {
                    continue;
                }
                if !window.contains(&y) {
                    left_window = true;
                    continue;
                }
                if good.contains(&y) {
                    found = true;
                    break;
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
            if found {
                break;
            }
        }
        if found {
            good.insert(x.clone());
        } else if left_window {
            undecided.push(x.clone());
        } else {
            failures.push(x.clone());
        }
    }
    if !failures.is_empty() {
        failures.truncate(MAX_WITNESSES);
        CheckStatus::Fail {
            witnesses: failures,
            detail: "w(x) = 0, g(x) = 0 and no H-path reaches a state with g > 0".into(),
        }
    } else if !undecided.is_empty() {
        CheckStatus::NotCheckable {
            reason: format!(
                "{} state(s) with w = g = 0 need paths leaving the window, e.g. {}",
                undecided.len(),
                undecided[0]
            ),
        }
    } else {
        CheckStatus::Pass
    }
}

/// An explicitly tabulated model on finitely many states.
///
/// Useful for hand-built instances and tests. Column and row supports are
/// derived from the `h` table, so they are always consistent.
#[derive(Clone, Debug, Default)]
pub struct TableModel {
    pub h: BTreeMap<(StateId, StateId), f64>,
    pub g: BTreeMap<StateId, Vec<(OutputId, f64)>>,
    pub phi: BTreeMap<StateId, f64>,
    pub w: BTreeMap<StateId, f64>,
    pub c: f64,
    /// `a_r` for windows that leave states out; when `X_r` is everything the
    /// tail is empty and the coefficient is zero.
    pub a: f64,
    pub b: Option<f64>,
}

impl TableModel {
    pub fn set_h(&mut self, from: i64, to: i64, value: f64) {
        self.h.insert((StateId::scalar(from), StateId::scalar(to)), value);
    }

    pub fn states(&self) -> impl Iterator<Item = &StateId> {
        self.w.keys()
    }
}

impl CilpModel for TableModel {
    fn predecessors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        self.h
            .iter()
            .filter(|((_, to), v)| to == x && **v != 0.0)
            .map(|((from, _), v)| (from.clone(), *v))
            .collect()
    }

    fn successors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        self.h
            .range((x.clone(), StateId::from_coords(&[i64::MIN]))..)
            .take_while(|((from, _), _)| from == x)
            .filter(|(_, v)| **v != 0.0)
            .map(|((_, to), v)| (to.clone(), *v))
            .collect()
    }

    fn g_row(&self, x: &StateId) -> Vec<(OutputId, f64)> {
        self.g.get(x).cloned().unwrap_or_default()
    }

    fn g_sum(&self, x: &StateId) -> f64 {
        self.g_row(x).iter().map(|(_, v)| *v).sum()
    }

    fn phi(&self, x: &StateId) -> f64 {
        self.phi.get(x).copied().unwrap_or(0.0)
    }

    fn w(&self, x: &StateId) -> f64 {
        self.w.get(x).copied().unwrap_or(f64::INFINITY)
    }

    fn moment_bound(&self) -> f64 {
        self.c
    }

    fn tail_coefficient(&self, r: u64) -> f64 {
        if self.w.values().all(|w| *w < r as f64) {
            0.0
        } else {
            self.a
        }
    }

    fn slack_coefficient(&self, _r: u64) -> Option<f64> {
        self.b
    }

    fn enumerate(&self, r: u64) -> Vec<StateId> {
        self.w
            .iter()
            .filter(|(_, w)| **w < r as f64)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn describe(&self) -> String {
        format!("table model on {} states", self.w.len())
    }
}

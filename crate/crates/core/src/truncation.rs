//! Finite windows `X_r`, their interior equality sets, and finitely supported measures.

use crate::error::{Error, Result};
use crate::model::CilpModel;
use crate::state::{OutputId, StateId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Largest `r` tried when searching for the first non-empty window.
const PROBE_LIMIT: u64 = 1 << 40;

/// The sublevel window `X_r = { x : w(x) < r }` with a dense variable layout.
#[derive(Debug, Clone)]
pub struct Truncation {
    r: u64,
    states: Vec<StateId>,
    index: HashMap<StateId, usize>,
    /// Dense indices whose whole H-column support lies in `X_r`.
    equality_set: Vec<usize>,
    a_r: f64,
}

impl Truncation {
    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, x: &StateId) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &StateId) -> bool {
        self.index.contains_key(x)
    }

    pub fn equality_set(&self) -> &[usize] {
        &self.equality_set
    }

    pub fn equality_states(&self) -> impl Iterator<Item = &StateId> {
        self.equality_set.iter().map(|&i| &self.states[i])
    }

    pub fn a_r(&self) -> f64 {
        self.a_r
    }

    /// Upper bound on `1/w` outside the window (`w >= r` there).
    pub fn complement_inverse_w_bound(&self) -> f64 {
        1.0 / self.r as f64
    }
}

/// Builds `X_r` and `E_r` for the model.
pub fn build_truncation(model: &dyn CilpModel, r: u64) -> Result<Truncation> {
    if r == 0 {
        return Err(Error::Precondition("r must be a positive integer".into()));
    }
    let mut states = model.enumerate(r);
    states.sort();
    states.dedup();
    if states.is_empty() {
        return Err(Error::TruncationTooSmall {
            r,
            minimal_r: minimal_nonempty_r(model, r),
        });
    }
    let threshold = r as f64;
    if let Some(x) = states.iter().find(|x| !(model.w(x) < threshold)) {
        return Err(Error::ModelDefinition {
            witness: x.clone(),
            message: format!("enumerator({r}) returned a state with w = {}", model.w(x)),
        });
    }
    let index: HashMap<StateId, usize> = states
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), i))
        .collect();
    let equality_set = states
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            model
                .predecessors(x)
                .iter()
                .all(|(xp, h)| *h == 0.0 || index.contains_key(xp))
        })
        .map(|(i, _)| i)
        .collect();
    Ok(Truncation {
        r,
        a_r: model.tail_coefficient(r),
        states,
        index,
        equality_set,
    })
}

fn minimal_nonempty_r(model: &dyn CilpModel, from: u64) -> Option<u64> {
    let mut hi = from.max(1);
    while model.enumerate(hi).is_empty() {
        if hi >= PROBE_LIMIT {
            return None;
        }
        hi = hi.saturating_mul(2);
    }
    let mut lo = from;
    // enumerate(lo) is empty, enumerate(hi) is not.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if model.enumerate(mid).is_empty() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// A finitely supported non-negative measure on the state space.
///
/// Each atom carries its `w(x)` and `g(x)` so moments survive restriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
    w_moment: f64,
    g_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub state: StateId,
    pub mass: f64,
    pub w: f64,
    pub g: f64,
}

impl BoundedMeasure {
    /// Builds a measure from `(state, mass)` pairs, evaluating `w` and `g` per atom.
    ///
    /// Masses must be non-negative; duplicate states are merged.
    pub fn new(
        entries: impl IntoIterator<Item = (StateId, f64)>,
        w: impl Fn(&StateId) -> f64,
        g: impl Fn(&StateId) -> f64,
    ) -> Result<Self> {
        let mut merged: BTreeMap<StateId, f64> = BTreeMap::new();
        for (x, m) in entries {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Precondition(format!(
                    "measure mass at {x} must be finite and non-negative, got {m}"
                )));
            }
            *merged.entry(x).or_insert(0.0) += m;
        }
        let atoms = merged
            .into_iter()
            .map(|(state, mass)| {
                let (wx, gx) = (w(&state), g(&state));
                Atom {
                    state,
                    mass,
                    w: wx,
                    g: gx,
                }
            })
            .collect();
        Ok(Self::from_atoms(atoms))
    }

    /// Measure whose atoms take `w` and `g` from the model.
    pub fn from_model(
        model: &dyn CilpModel,
        entries: impl IntoIterator<Item = (StateId, f64)>,
    ) -> Result<Self> {
        Self::new(entries, |x| model.w(x), |x| model.g_sum(x))
    }

    fn from_atoms(atoms: Vec<Atom>) -> Self {
        let total_mass = atoms.iter().map(|a| a.mass).sum();
        let w_moment = atoms.iter().map(|a| a.mass * a.w).sum();
        let g_mass = atoms.iter().map(|a| a.mass * a.g).sum();
        Self {
            atoms,
            total_mass,
            w_moment,
            g_mass,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, f64)> {
        self.atoms.iter().map(|a| (&a.state, a.mass))
    }

    pub fn mass_at(&self, x: &StateId) -> f64 {
        self.atoms
            .binary_search_by(|a| a.state.cmp(x))
            .map(|i| self.atoms[i].mass)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `rho(w)`.
    pub fn w_moment(&self) -> f64 {
        self.w_moment
    }

    /// `rho(g)`.
    pub fn g_mass(&self) -> f64 {
        self.g_mass
    }

    /// `rho(f)` for an arbitrary function.
    pub fn integrate(&self, f: impl Fn(&StateId) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.mass * f(&a.state)).sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// `rho_{|r}`: keeps the atoms inside `X_r`, drops the rest.
pub fn restrict(measure: &BoundedMeasure, trunc: &Truncation) -> BoundedMeasure {
    BoundedMeasure::from_atoms(
        measure
            .atoms
            .iter()
            .filter(|a| trunc.contains(&a.state))
            .cloned()
            .collect(),
    )
}

/// A finitely supported non-negative measure on the output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeasure {
    entries: Vec<(OutputId, f64)>,
    total_mass: f64,
}

impl ImageMeasure {
    pub fn new(entries: impl IntoIterator<Item = (OutputId, f64)>) -> Self {
        let mut merged: BTreeMap<OutputId, f64> = BTreeMap::new();
        for (y, m) in entries {
            *merged.entry(y).or_insert(0.0) += m;
        }
        let entries: Vec<_> = merged.into_iter().collect();
        let total_mass = entries.iter().map(|(_, m)| *m).sum();
        Self {
            entries,
            total_mass,
        }
    }

    pub fn entries(&self) -> &[(OutputId, f64)] {
        &self.entries
    }

    pub fn mass_at(&self, y: &OutputId) -> f64 {
        self.entries
            .binary_search_by(|(o, _)| o.cmp(y))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// `sup_A |a(A) - b(A)|`: the larger of the positive and negative parts of `a - b`.
pub fn total_variation<K: Ord + Clone>(
    a: impl IntoIterator<Item = (K, f64)>,
    b: impl IntoIterator<Item = (K, f64)>,
) -> f64 {
    let mut diff: BTreeMap<K, f64> = BTreeMap::new();
    for (k, m) in a {
        *diff.entry(k).or_insert(0.0) += m;
    }
    for (k, m) in b {
        *diff.entry(k).or_insert(0.0) -= m;
    }
    let (pos, neg) = diff.values().fold((0.0, 0.0), |(p, n), d| {
        if *d > 0.0 {
            (p + d, n)
        } else {
            (p, n - d)
        }
    });
    f64::max(pos, neg)
}

/// `sum_k |a(k) - b(k)|`, the mass of the unsigned difference.
pub fn difference_mass<K: Ord + Clone>(
    a: impl IntoIterator<Item = (K, f64)>,
    b: impl IntoIterator<Item = (K, f64)>,
) -> f64 {
    let mut diff: BTreeMap<K, f64> = BTreeMap::new();
    for (k, m) in a {
        *diff.entry(k).or_insert(0.0) += m;
    }
    for (k, m) in b {
        *diff.entry(k).or_insert(0.0) -= m;
    }
    diff.values().map(|d| d.abs()).sum()
}

/// TV distance between two state measures.
pub fn measure_tv(a: &BoundedMeasure, b: &BoundedMeasure) -> f64 {
    total_variation(
        a.iter().map(|(x, m)| (x.clone(), m)),
        b.iter().map(|(x, m)| (x.clone(), m)),
    )
}

/// TV distance between two output measures.
pub fn image_tv(a: &ImageMeasure, b: &ImageMeasure) -> f64 {
    total_variation(a.entries().iter().cloned(), b.entries().iter().cloned())
}

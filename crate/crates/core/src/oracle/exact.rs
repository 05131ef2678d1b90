use crate::chains::{MarkovModel, TimeKind};
use crate::error::{Error, Result};
use crate::model::CilpModel;
use crate::state::{OutputId, StateId};
use crate::truncation::{BoundedMeasure, ImageMeasure};
use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::collections::HashMap;

/// Largest state space the dense solves accept.
pub const MAX_ORACLE_STATES: usize = 10_000;

/// Residual accepted from the dense solves, relative to the largest rate.
pub const ORACLE_RESIDUAL_TOL: f64 = 1e-10;

/// Spectral-radius margin below 1 required to certify almost-sure exit.
pub const EXIT_MARGIN: f64 = 1e-9;

/// Masses this close to zero from below are rounding noise.
const NEGATIVE_NOISE: f64 = 1e-12;

/// Stationary distributions of a finite chain, one per closed class.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub classes: Vec<ErgodicClass>,
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ErgodicClass {
    pub states: Vec<StateId>,
    pub distribution: BoundedMeasure,
}

impl StationarySolution {
    /// `false` flags a chain with several closed classes, where the
    /// stationary distributions form a simplex spanned by `classes`.
    pub fn is_unique(&self) -> bool {
        self.classes.len() == 1
    }

    pub fn unique(&self) -> Result<&BoundedMeasure> {
        match self.classes.as_slice() {
            [only] => Ok(&only.distribution),
            many => Err(Error::Oracle(format!(
                "chain has {} closed classes, so the stationary distribution is not unique",
                many.len()
            ))),
        }
    }
}

/// Occupation measure before exit and the exit distribution it induces.
#[derive(Debug, Clone)]
pub struct OccupationSolution {
    pub occupation: BoundedMeasure,
    pub exit: ImageMeasure,
    /// Certified upper bound on the spectral radius of the (uniformised)
    /// domain-restricted kernel.
    pub spectral_bound: f64,
    pub max_residual: f64,
}

fn index_map(states: &[StateId]) -> HashMap<&StateId, usize> {
    states.iter().enumerate().map(|(i, x)| (x, i)).collect()
}

/// Dense `H` restricted to `states` (`P - I` or `Q`).
fn dense_generator(model: &MarkovModel, states: &[StateId]) -> DMatrix<f64> {
    let idx = index_map(states);
    let n = states.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, x) in states.iter().enumerate() {
        for (y, v) in model.successors(x) {
            if let Some(&j) = idx.get(&y) {
                h[(i, j)] += v;
            }
        }
    }
    h
}

fn clean_masses(states: &[StateId], v: &DVector<f64>) -> Result<Vec<(StateId, f64)>> {
    let mut out = Vec::with_capacity(states.len());
    for (x, &m) in states.iter().zip(v.iter()) {
        if !m.is_finite() || m < -NEGATIVE_NOISE {
            return Err(Error::Oracle(format!("solve produced mass {m} at {x}")));
        }
        if m > 0.0 {
            out.push((x.clone(), m));
        }
    }
    Ok(out)
}

fn finite_states<'a>(model: &'a MarkovModel, what: &str) -> Result<&'a [StateId]> {
    let states = model
        .finite_states()
        .ok_or_else(|| Error::Oracle(format!("{what} needs a finite state space")))?;
    if states.len() > MAX_ORACLE_STATES {
        return Err(Error::Oracle(format!(
            "{what} accepts at most {MAX_ORACLE_STATES} states, got {}",
            states.len()
        )));
    }
    Ok(states)
}

/// Solves `pi H = 0`, `pi(1) = 1` on every closed class of a finite chain.
pub fn exact_stationary(model: &MarkovModel) -> Result<StationarySolution> {
    if model.domain().is_some() {
        return Err(Error::Oracle("exact_stationary needs a stationary model".into()));
    }
    let states = finite_states(model, "exact_stationary")?;
    let h = dense_generator(model, states);
    let n = states.len();
    let scale = h.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut graph = DiGraph::<usize, ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|i| graph.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && h[(i, j)] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut closed: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|comp| {
            let mut members: Vec<usize> = comp.into_iter().map(|v| graph[v]).collect();
            members.sort_unstable();
            members
        })
        .filter(|members| {
            members
                .iter()
                .all(|&i| (0..n).all(|j| h[(i, j)] <= 0.0 || i == j || members.binary_search(&j).is_ok()))
        })
        .collect();
    closed.sort();

    let mut classes = Vec::with_capacity(closed.len());
    let mut max_residual = 0.0f64;
    for members in closed {
        let m = members.len();
        let sub = DMatrix::from_fn(m, m, |a, b| h[(members[a], members[b])]);
        // pi sub = 0 with one balance equation swapped for normalisation.
        let mut system = sub.transpose();
        for b in 0..m {
            system[(m - 1, b)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m);
        rhs[m - 1] = 1.0;
        let pi = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Oracle("singular stationary system".into()))?;
        let residual = (pi.transpose() * &sub).amax() / scale;
        max_residual = max_residual.max(residual);
        let class_states: Vec<StateId> = members.iter().map(|&i| states[i].clone()).collect();
        let entries = clean_masses(&class_states, &pi)?;
        classes.push(ErgodicClass {
            distribution: BoundedMeasure::from_model(model, entries)?,
            states: class_states,
        });
    }
    if max_residual > ORACLE_RESIDUAL_TOL {
        return Err(Error::Oracle(format!(
            "stationary residual {max_residual:e} exceeds {ORACLE_RESIDUAL_TOL:e}"
        )));
    }
    Ok(StationarySolution {
        classes,
        max_residual,
    })
}

/// Solves `nu H_D = -gamma` on a finite domain and returns `nu` and `nu G`.
///
/// Almost-sure exit is certified first: with `t` solving `(I - P) t = 1`
/// for the uniformised restricted kernel `P`, a positive `t` gives
/// `spectral radius(P) <= max_i (P t)_i / t_i`, which must stay below
/// `1 - EXIT_MARGIN`.
pub fn exact_occupation(model: &MarkovModel) -> Result<OccupationSolution> {
    if model.domain().is_none() {
        return Err(Error::Oracle("exact_occupation needs an exit model".into()));
    }
    let states = finite_states(model, "exact_occupation")?;
    let n = states.len();
    let h = dense_generator(model, states);
    let uniformisation = match model.time() {
        TimeKind::Discrete => 1.0,
        TimeKind::Continuous => (0..n).fold(0.0f64, |m, i| m.max(-h[(i, i)])),
    };
    if !(uniformisation > 0.0) {
        return Err(Error::Oracle("exit not certifiably a.s.: no state moves".into()));
    }
    // I - P = -H / uniformisation.
    let a = -&h / uniformisation;
    let lu = a.clone().lu();
    let t = lu
        .solve(&DVector::from_element(n, 1.0))
        .ok_or_else(|| Error::Oracle("exit not certifiably a.s.: I - P is singular".into()))?;
    if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Oracle(
            "exit not certifiably a.s.: expected exit times are not positive".into(),
        ));
    }
    let p = DMatrix::<f64>::identity(n, n) - &a;
    let pt = &p * &t;
    let spectral_bound = (0..n).fold(0.0f64, |m, i| m.max(pt[i] / t[i]));
    if spectral_bound >= 1.0 - EXIT_MARGIN {
        return Err(Error::Oracle(format!(
            "exit not certifiably a.s.: spectral radius bound {spectral_bound} is within {EXIT_MARGIN:e} of 1"
        )));
    }

    let idx = index_map(states);
    let mut gamma = DVector::<f64>::zeros(n);
    for (x, m) in model.initial() {
        if let Some(&i) = idx.get(x) {
            gamma[i] += m;
        }
    }
    // nu (-H) = gamma, i.e. (-H)^T nu = gamma.
    let minus_h_t = (-&h).transpose();
    let nu = minus_h_t
        .clone()
        .lu()
        .solve(&gamma)
        .ok_or_else(|| Error::Oracle("singular occupation system".into()))?;
    let scale = h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let max_residual = (&minus_h_t * &nu - &gamma).amax() / scale;
    if max_residual > ORACLE_RESIDUAL_TOL {
        return Err(Error::Oracle(format!(
            "occupation residual {max_residual:e} exceeds {ORACLE_RESIDUAL_TOL:e}"
        )));
    }
    let entries = clean_masses(states, &nu)?;
    let mut exit: Vec<(OutputId, f64)> = Vec::new();
    for (x, m) in &entries {
        for (y, v) in model.g_row(x) {
            exit.push((y, m * v));
        }
    }
    Ok(OccupationSolution {
        occupation: BoundedMeasure::from_model(model, entries)?,
        exit: ImageMeasure::new(exit),
        spectral_bound,
        max_residual,
    })
}

//! Markov-chain front end: builds CILP instances whose solutions are
//! stationary distributions or occupation measures up to an exit time.
//!
//! | builder          | `X`         | `h`          | `phi`   | `G`                      | `a_r`            |
//! |------------------|-------------|--------------|---------|--------------------------|------------------|
//! | [`dt_stationary`] | state space | `P - I`      | 0       | identity                 | `1/r`            |
//! | [`ct_stationary`] | state space | `Q`          | 0       | identity                 | `1/r`            |
//! | [`dt_exit`]       | domain `D`  | `P - I` on D | `-gamma` | `p(x, y)`, `y` outside D | `1/r`            |
//! | [`ct_exit`]       | domain `D`  | `Q` on D     | `-gamma` | `q(x, y)`, `y` outside D | `r^((1-d)/d)`    |
//!
//! When `X` is finite the tail coefficient is computed exactly instead, and
//! is zero once `X_r` covers `X`.

mod families;
mod moments;

pub use families::{
    family_birth_death, family_ct_matrix, family_dt_matrix, family_linear_birth_death,
    family_mm1, family_mm1_capped, family_random_walk, BirthDeath, MatrixChain, RateLaw,
};
pub use moments::{
    geometric_moment, mm1_stationary_moment, random_walk_occupation_moment,
    random_walk_stationary_moment,
};

use crate::error::{Error, Result};
use crate::model::{bfs_sublevel_set, CilpModel, Weight};
use crate::state::{OutputId, StateId};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Row-sum tolerance for discrete-time kernels.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// States visited when spot-checking a kernel with an infinite state space.
const KERNEL_CHECK_STATES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    Discrete,
    Continuous,
}

/// Sparse transition structure of a chain.
///
/// Discrete time: `out_neighbors(x)` lists every `(y, p(x, y))` with
/// `p > 0`, including `y = x`. Continuous time: every `(y, q(x, y))` with
/// `y != x` and `q > 0`; the diagonal is implied. `in_neighbors` is the
/// transpose with the same conventions.
pub trait Transitions: Send + Sync {
    fn time(&self) -> TimeKind;
    fn out_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)>;
    fn in_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)>;
    fn contains(&self, x: &StateId) -> bool;
    /// States from which every state is reachable along in- or out-edges.
    fn seeds(&self) -> Vec<StateId>;
    /// All states, sorted, when the state space is finite.
    fn state_space(&self) -> Option<Vec<StateId>>;
    fn describe(&self) -> String;
}

fn states_to_check(t: &dyn Transitions) -> Vec<StateId> {
    if let Some(all) = t.state_space() {
        return all;
    }
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut queue: std::collections::VecDeque<StateId> = t.seeds().into_iter().collect();
    while let Some(x) = queue.pop_front() {
        if seen.len() >= KERNEL_CHECK_STATES {
            break;
        }
        if !seen.insert(x.clone()) {
            continue;
        }
        for (y, _) in t.out_neighbors(&x).into_iter().chain(t.in_neighbors(&x)) {
            if t.contains(&y) && !seen.contains(&y) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

fn check_kernel(t: &dyn Transitions) -> Result<()> {
    for x in states_to_check(t) {
        let out = t.out_neighbors(&x);
        for (y, v) in &out {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::ModelDefinition {
                    witness: x.clone(),
                    message: format!("transition to {y} has invalid weight {v}"),
                });
            }
            if !t.contains(y) {
                return Err(Error::ModelDefinition {
                    witness: x.clone(),
                    message: format!("transition leaves the state space to {y}"),
                });
            }
            if t.time() == TimeKind::Continuous && *y == x {
                return Err(Error::ModelDefinition {
                    witness: x.clone(),
                    message: "continuous-time neighbours must exclude the diagonal".into(),
                });
            }
        }
        if t.time() == TimeKind::Discrete {
            let sum: f64 = out.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::ModelDefinition {
                    witness: x,
                    message: format!("transition probabilities sum to {sum}, not 1"),
                });
            }
        }
        for (xp, v) in t.in_neighbors(&x) {
            let forward: f64 = t
                .out_neighbors(&xp)
                .iter()
                .filter(|(y, _)| *y == x)
                .map(|(_, p)| *p)
                .sum();
            if (forward - v).abs() > ROW_SUM_TOL {
                return Err(Error::ModelDefinition {
                    witness: x,
                    message: format!("in-neighbour {xp} lists {v} but the forward rate is {forward}"),
                });
            }
        }
    }
    Ok(())
}

fn check_initial(t: &dyn Transitions, initial: &[(StateId, f64)]) -> Result<()> {
    let mut total = 0.0;
    for (x, m) in initial {
        if !m.is_finite() || *m < 0.0 {
            return Err(Error::Config(format!("initial mass {m} at {x} is invalid")));
        }
        if !t.contains(x) {
            return Err(Error::Config(format!("initial state {x} is not in the state space")));
        }
        total += m;
    }
    if (total - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::Config(format!("initial distribution has mass {total}, not 1")));
    }
    Ok(())
}

macro_rules! chain_type {
    ($name:ident, $kind:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone)]
        pub struct $name {
            transitions: Arc<dyn Transitions>,
            initial: Vec<(StateId, f64)>,
        }

        impl $name {
            /// Checks the kernel on its finite state space, or on the first
            /// few hundred states reachable from the seeds.
            pub fn new(
                transitions: impl Transitions + 'static,
                initial: Vec<(StateId, f64)>,
            ) -> Result<Self> {
                Self::from_arc(Arc::new(transitions), initial)
            }

            pub fn from_arc(
                transitions: Arc<dyn Transitions>,
                initial: Vec<(StateId, f64)>,
            ) -> Result<Self> {
                if transitions.time() != $kind {
                    return Err(Error::Config(format!(
                        "{} needs {:?}-time transitions",
                        stringify!($name),
                        $kind
                    )));
                }
                check_kernel(transitions.as_ref())?;
                check_initial(transitions.as_ref(), &initial)?;
                Ok(Self { transitions, initial })
            }

            pub fn with_initial(self, initial: Vec<(StateId, f64)>) -> Result<Self> {
                check_initial(self.transitions.as_ref(), &initial)?;
                Ok(Self { initial, ..self })
            }

            pub fn transitions(&self) -> &Arc<dyn Transitions> {
                &self.transitions
            }

            pub fn initial(&self) -> &[(StateId, f64)] {
                &self.initial
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_struct(stringify!($name))
                    .field("transitions", &self.transitions.describe())
                    .field("initial", &self.initial)
                    .finish()
            }
        }
    };
}

chain_type!(DtChain, TimeKind::Discrete, "Discrete-time chain with initial distribution.");
chain_type!(CtChain, TimeKind::Continuous, "Continuous-time chain with initial distribution.");

impl CtChain {
    /// `q(x, x)`, minus the total exit rate.
    pub fn diagonal(&self, x: &StateId) -> f64 {
        -self
            .transitions
            .out_neighbors(x)
            .iter()
            .map(|(_, q)| q)
            .sum::<f64>()
    }
}

/// Subset `D` of the state space for exit-time problems.
#[derive(Clone)]
pub struct Domain {
    contains: Arc<dyn Fn(&StateId) -> bool + Send + Sync>,
    seeds: Vec<StateId>,
    members: Option<Vec<StateId>>,
    label: String,
}

impl Domain {
    /// `{lower, ..., upper}` on one-dimensional states; unbounded above when
    /// `upper` is `None`.
    pub fn interval(lower: i64, upper: Option<i64>) -> Result<Self> {
        if upper.is_some_and(|u| u < lower) {
            return Err(Error::Config(format!("empty domain {lower}..={upper:?}")));
        }
        Ok(Domain {
            contains: Arc::new(move |x: &StateId| {
                x.coords().len() == 1
                    && x.first() >= lower
                    && upper.is_none_or(|u| x.first() <= u)
            }),
            seeds: vec![StateId::scalar(lower)],
            members: upper.map(|u| (lower..=u).map(StateId::scalar).collect()),
            label: match upper {
                Some(u) => format!("{{{lower}, ..., {u}}}"),
                None => format!("{{{lower}, {}, ...}}", lower + 1),
            },
        })
    }

    /// An arbitrary subset. Every member must be connected to `seeds`
    /// through members.
    pub fn custom(
        label: impl Into<String>,
        contains: impl Fn(&StateId) -> bool + Send + Sync + 'static,
        seeds: Vec<StateId>,
    ) -> Self {
        Domain {
            contains: Arc::new(contains),
            seeds,
            members: None,
            label: label.into(),
        }
    }

    pub fn contains(&self, x: &StateId) -> bool {
        (self.contains)(x)
    }

    pub fn seeds(&self) -> &[StateId] {
        &self.seeds
    }

    /// Sorted members when the domain is finite and known.
    pub fn members(&self) -> Option<&[StateId]> {
        self.members.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Domain({})", self.label)
    }
}

#[derive(Clone, Debug)]
enum Setting {
    Stationary,
    Exit {
        domain: Domain,
        initial: Vec<(StateId, f64)>,
    },
}

#[derive(Clone, Copy, Debug)]
enum TailRule {
    InverseR,
    Power(f64),
}

/// A CILP instance derived from a Markov chain by one of the builders.
#[derive(Clone)]
pub struct MarkovModel {
    time: TimeKind,
    transitions: Arc<dyn Transitions>,
    setting: Setting,
    weight: Weight,
    c: f64,
    tail: TailRule,
    /// Members of `X`, sorted, when finite.
    finite: Option<Vec<StateId>>,
    slack: Option<Arc<dyn Fn(u64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for MarkovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkovModel")
            .field("chain", &self.transitions.describe())
            .field("setting", &self.setting)
            .field("w", &self.weight)
            .field("c", &self.c)
            .finish()
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("moment bound c must be positive and finite, got {c}")))
    }
}

fn check_exit_initial(domain: &Domain, initial: &[(StateId, f64)]) -> Result<()> {
    let inside: f64 = initial
        .iter()
        .filter(|(x, _)| domain.contains(x))
        .map(|(_, m)| m)
        .sum();
    if (inside - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::Precondition(format!(
            "the initial distribution must be supported in {}, but only {inside} of its mass is",
            domain.label()
        )));
    }
    Ok(())
}

impl MarkovModel {
    fn new(
        transitions: Arc<dyn Transitions>,
        setting: Setting,
        weight: Weight,
        c: f64,
        tail: TailRule,
    ) -> Result<Self> {
        check_c(c)?;
        let finite = match &setting {
            Setting::Stationary => transitions.state_space(),
            Setting::Exit { domain, .. } => match (domain.members(), transitions.state_space()) {
                (Some(m), _) => Some(m.iter().filter(|x| transitions.contains(x)).cloned().collect()),
                (None, Some(all)) => Some(all.into_iter().filter(|x| domain.contains(x)).collect()),
                (None, None) => None,
            },
        };
        Ok(MarkovModel {
            time: transitions.time(),
            transitions,
            setting,
            weight,
            c,
            tail,
            finite,
            slack: None,
        })
    }

    /// Attaches a column-tail coefficient `b_r` for the relaxed LP.
    pub fn with_slack(mut self, b: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        self.slack = Some(Arc::new(b));
        self
    }

    /// `b_r = bound / r`, valid when no state outside `X_r` sends more than
    /// `bound` total rate into `X_r`. For birth-death chains the largest
    /// downward rate is such a bound.
    pub fn with_bounded_inflow_slack(self, bound: f64) -> Self {
        self.with_slack(move |r| bound / r as f64)
    }

    pub fn time(&self) -> TimeKind {
        self.time
    }

    pub fn transitions(&self) -> &Arc<dyn Transitions> {
        &self.transitions
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// The exit domain, or `None` for stationary problems.
    pub fn domain(&self) -> Option<&Domain> {
        match &self.setting {
            Setting::Stationary => None,
            Setting::Exit { domain, .. } => Some(domain),
        }
    }

    /// Initial distribution of exit problems; empty for stationary ones.
    pub fn initial(&self) -> &[(StateId, f64)] {
        match &self.setting {
            Setting::Stationary => &[],
            Setting::Exit { initial, .. } => initial,
        }
    }

    /// Sorted members of `X` when it is finite.
    pub fn finite_states(&self) -> Option<&[StateId]> {
        self.finite.as_deref()
    }

    fn in_x(&self, x: &StateId) -> bool {
        self.transitions.contains(x)
            && match &self.setting {
                Setting::Stationary => true,
                Setting::Exit { domain, .. } => domain.contains(x),
            }
    }

    fn diagonal(&self, x: &StateId) -> f64 {
        match self.time {
            TimeKind::Discrete => {
                let stay: f64 = self
                    .transitions
                    .out_neighbors(x)
                    .iter()
                    .filter(|(y, _)| y == x)
                    .map(|(_, p)| p)
                    .sum();
                stay - 1.0
            }
            TimeKind::Continuous => -self
                .transitions
                .out_neighbors(x)
                .iter()
                .map(|(_, q)| q)
                .sum::<f64>(),
        }
    }

    /// Off-diagonal entries restricted to `X`, followed by the diagonal.
    fn h_entries(&self, x: &StateId, list: Vec<(StateId, f64)>) -> Vec<(StateId, f64)> {
        let mut out: Vec<(StateId, f64)> = list
            .into_iter()
            .filter(|(y, _)| y != x && self.in_x(y))
            .collect();
        let d = self.diagonal(x);
        if d != 0.0 {
            out.push((x.clone(), d));
        }
        out
    }

    fn exact_tail(&self, states: &[StateId], r: u64) -> f64 {
        states
            .iter()
            .filter(|x| self.weight.eval(x) >= r as f64)
            .map(|x| {
                let g = self.g_sum(x);
                if g == 0.0 {
                    0.0
                } else {
                    g / self.weight.eval(x)
                }
            })
            .fold(0.0, f64::max)
    }
}

impl CilpModel for MarkovModel {
    fn predecessors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        self.h_entries(x, self.transitions.in_neighbors(x))
    }

    fn successors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        self.h_entries(x, self.transitions.out_neighbors(x))
    }

    fn g_row(&self, x: &StateId) -> Vec<(OutputId, f64)> {
        match &self.setting {
            Setting::Stationary => vec![(OutputId::from(x), 1.0)],
            Setting::Exit { domain, .. } => self
                .transitions
                .out_neighbors(x)
                .into_iter()
                .filter(|(y, _)| !domain.contains(y))
                .map(|(y, v)| (OutputId::from(&y), v))
                .collect(),
        }
    }

    fn g_sum(&self, x: &StateId) -> f64 {
        self.g_row(x).iter().map(|(_, v)| v).sum()
    }

    fn phi(&self, x: &StateId) -> f64 {
        match &self.setting {
            Setting::Stationary => 0.0,
            Setting::Exit { initial, .. } => -initial
                .iter()
                .filter(|(y, _)| y == x)
                .map(|(_, m)| m)
                .sum::<f64>(),
        }
    }

    fn w(&self, x: &StateId) -> f64 {
        self.weight.eval(x)
    }

    fn moment_bound(&self) -> f64 {
        self.c
    }

    fn state_count(&self) -> Option<usize> {
        self.finite.as_ref().map(Vec::len)
    }

    fn tail_coefficient(&self, r: u64) -> f64 {
        if let Some(states) = &self.finite {
            return self.exact_tail(states, r);
        }
        let r = r as f64;
        match self.tail {
            TailRule::InverseR => 1.0 / r,
            TailRule::Power(e) => r.powf(e),
        }
    }

    fn slack_coefficient(&self, r: u64) -> Option<f64> {
        self.slack.as_ref().map(|b| b(r))
    }

    fn enumerate(&self, r: u64) -> Vec<StateId> {
        if let Some(states) = &self.finite {
            return states
                .iter()
                .filter(|x| self.weight.eval(x) < r as f64)
                .cloned()
                .collect();
        }
        let seeds = match &self.setting {
            Setting::Stationary => self.transitions.seeds(),
            Setting::Exit { domain, .. } => domain.seeds().to_vec(),
        };
        bfs_sublevel_set(
            &seeds,
            r,
            |x| self.weight.eval(x),
            |x| {
                self.transitions
                    .out_neighbors(x)
                    .into_iter()
                    .chain(self.transitions.in_neighbors(x))
                    .map(|(y, _)| y)
                    .collect()
            },
            |x| self.in_x(x),
        )
    }

    fn describe(&self) -> String {
        match &self.setting {
            Setting::Stationary => format!(
                "stationary distribution of {}, w = {:?}, c = {}",
                self.transitions.describe(),
                self.weight,
                self.c
            ),
            Setting::Exit { domain, .. } => format!(
                "occupation measure of {} before leaving {}, w = {:?}, c = {}",
                self.transitions.describe(),
                domain.label(),
                self.weight,
                self.c
            ),
        }
    }
}

pub fn dt_stationary(chain: &DtChain, w: Weight, c: f64) -> Result<MarkovModel> {
    MarkovModel::new(chain.transitions.clone(), Setting::Stationary, w, c, TailRule::InverseR)
}

pub fn ct_stationary(chain: &CtChain, w: Weight, c: f64) -> Result<MarkovModel> {
    MarkovModel::new(chain.transitions.clone(), Setting::Stationary, w, c, TailRule::InverseR)
}

/// Occupation measure up to the exit time from `domain`. The chain's initial
/// distribution must be supported in the domain.
pub fn dt_exit(chain: &DtChain, domain: Domain, w: Weight, c: f64) -> Result<MarkovModel> {
    check_exit_initial(&domain, &chain.initial)?;
    MarkovModel::new(
        chain.transitions.clone(),
        Setting::Exit {
            domain,
            initial: chain.initial.clone(),
        },
        w,
        c,
        TailRule::InverseR,
    )
}

/// Occupation measure up to the exit time, with `w(x) = (-q(x, x))^d` for `d > 1`.
///
/// Outside `X_r` the exit rate is at most `-q(x, x) = w^(1/d)`, so
/// `g/w <= w^(1/d - 1) <= r^((1-d)/d)`.
pub fn ct_exit(chain: &CtChain, domain: Domain, d: f64, c: f64) -> Result<MarkovModel> {
    if !(d.is_finite() && d > 1.0) {
        return Err(Error::Config(format!("the exit-rate exponent d must exceed 1, got {d}")));
    }
    check_exit_initial(&domain, &chain.initial)?;
    let t = chain.transitions.clone();
    let weight = Weight::Custom(Arc::new(move |x: &StateId| {
        t.out_neighbors(x)
            .iter()
            .map(|(_, q)| q)
            .sum::<f64>()
            .powf(d)
    }));
    MarkovModel::new(
        chain.transitions.clone(),
        Setting::Exit {
            domain,
            initial: chain.initial.clone(),
        },
        weight,
        c,
        TailRule::Power((1.0 - d) / d),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{checks, validate_assumptions, CheckStatus};

    fn s(i: i64) -> StateId {
        StateId::scalar(i)
    }

    #[test]
    fn mm1_stationary_rows() {
        let model = ct_stationary(&family_mm1(1.0, 2.0).unwrap(), Weight::Monomial(3), 13.0).unwrap();
        assert_eq!(model.predecessors(&s(0)), vec![(s(1), 2.0), (s(0), -1.0)]);
        assert_eq!(
            model.predecessors(&s(4)),
            vec![(s(3), 1.0), (s(5), 2.0), (s(4), -3.0)]
        );
        assert_eq!(model.enumerate(28), vec![s(0), s(1), s(2), s(3)]);
        assert_eq!(model.tail_coefficient(8), 0.125);
        assert_eq!(model.g_row(&s(2)), vec![(OutputId::scalar(2), 1.0)]);
        let report = validate_assumptions(&model, 1000).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn walk_exit_rows() {
        let chain = family_random_walk(0.25)
            .unwrap()
            .with_initial(vec![(s(3), 1.0)])
            .unwrap();
        let model = dt_exit(&chain, Domain::interval(1, None).unwrap(), Weight::Monomial(2), 46.0).unwrap();
        assert_eq!(model.phi(&s(3)), -1.0);
        assert_eq!(model.phi(&s(2)), 0.0);
        assert_eq!(model.g_row(&s(1)), vec![(OutputId::scalar(0), 0.75)]);
        assert!(model.g_row(&s(2)).is_empty());
        assert_eq!(model.predecessors(&s(1)), vec![(s(2), 0.75), (s(1), -1.0)]);
        assert_eq!(model.enumerate(10), vec![s(1), s(2), s(3)]);
        assert!(validate_assumptions(&model, 400).unwrap().passed());
    }

    #[test]
    fn exit_needs_initial_mass_inside() {
        let chain = family_random_walk(0.25).unwrap();
        let err = dt_exit(&chain, Domain::interval(1, None).unwrap(), Weight::Monomial(2), 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn ct_exit_weight_and_tail() {
        let chain = family_linear_birth_death(1.0, 2.0)
            .unwrap()
            .with_initial(vec![(s(2), 1.0)])
            .unwrap();
        let model = ct_exit(&chain, Domain::interval(1, None).unwrap(), 2.0, 50.0).unwrap();
        // -q(x,x) = 3x, so w = 9x^2.
        assert_eq!(model.w(&s(2)), 36.0);
        assert!((model.tail_coefficient(100) - 0.1).abs() < 1e-15);
        // g(x)/w(x) outside X_r never exceeds the coefficient.
        for x in 1..200 {
            let w = model.w(&s(x));
            if w >= 100.0 {
                assert!(model.g_sum(&s(x)) / w <= model.tail_coefficient(100) + 1e-15);
            }
        }
        assert!(ct_exit(&chain, Domain::interval(1, None).unwrap(), 1.0, 50.0).is_err());
    }

    #[test]
    fn finite_chain_tail_is_exact() {
        let chain = family_mm1_capped(1.0, 2.0, 5).unwrap();
        let model = ct_stationary(&chain, Weight::Monomial(1), 1.0).unwrap();
        assert_eq!(model.tail_coefficient(6), 0.0);
        assert_eq!(model.tail_coefficient(5), 0.2);
        assert_eq!(model.enumerate(100).len(), 6);
    }

    #[test]
    fn bad_kernel_rejected() {
        let err = family_dt_matrix(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::ModelDefinition { .. }));
        let err = family_ct_matrix(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::ModelDefinition { .. }));
    }

    #[test]
    fn absorbing_state_fails_reachability() {
        // State 2 is absorbing inside the domain and carries no weight.
        let chain = family_dt_matrix(vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let domain = Domain::interval(0, Some(2)).unwrap();
        let model = dt_exit(&chain, domain, Weight::Custom(Arc::new(|_| 0.0)), 1.0).unwrap();
        let report = validate_assumptions(&model, 10).unwrap();
        match report.status_of(checks::REACHABILITY).unwrap() {
            CheckStatus::Fail { witnesses, .. } => assert_eq!(witnesses, &vec![s(2)]),
            other => panic!("{other:?}"),
        }
    }
}

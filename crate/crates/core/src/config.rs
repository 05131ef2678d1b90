//! Declarative run configuration: a single JSON document describing a
//! chain, the CILP setting built from it, and what to compute.
//!
//! [`parse_config`] rejects malformed documents with a field path (and a
//! line and column for syntax and type errors), then checks the semantic
//! rules: positive rates, a strictly increasing schedule, objectives in
//! the admissible class for the chosen `w`. The full schema lives in
//! `docs/config.md`.

use crate::chains::{
    ct_exit, ct_stationary, dt_exit, dt_stationary, family_birth_death, family_ct_matrix, family_dt_matrix,
    family_linear_birth_death, family_mm1, family_mm1_capped, family_random_walk, mm1_stationary_moment,
    random_walk_occupation_moment, random_walk_stationary_moment, CtChain, Domain, DtChain, MarkovModel,
};
use crate::error::{Error, Result};
use crate::lp::{LpMode, SimplexSolver};
use crate::model::Weight;
use crate::objective::Objective;
use crate::oracle::{exact_occupation, exact_stationary, SimulationOptions};
use crate::solve::SolveSettings;
use crate::state::{OutputId, StateId};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

/// Degree of `w` when the config says `"default"`.
pub const DEFAULT_W_DEGREE: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted field path, e.g. `model.chain.lambda` or `schedule[2]`.
    pub path: String,
    pub message: String,
    /// 1-based position for syntax and type errors.
    pub position: Option<(usize, usize)>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        write!(f, "{path}: {}", self.message)?;
        if let Some((line, col)) = self.position {
            write!(f, " (line {line}, column {col})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn at(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
        position: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default)]
    pub w: WeightSpec,
    pub c: MomentSpec,
    pub schedule: Vec<u64>,
    #[serde(default)]
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Outputs `y` for the Scheme B image table; omitted means every output
    /// reachable in one step from the window.
    #[serde(default)]
    pub image_window: Option<Vec<i64>>,
    #[serde(default)]
    pub monte_carlo: Option<MonteCarloSpec>,
    #[serde(default)]
    pub validation_horizon: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingSpec {
    #[default]
    Stationary,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub chain: ChainSpec,
    #[serde(default)]
    pub setting: SettingSpec,
    /// Exit domain `{lower, ..., upper}`; `upper` omitted means unbounded.
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    /// `[state, mass]` pairs; exit settings only.
    #[serde(default)]
    pub initial: Option<Vec<(i64, f64)>>,
    /// The caller's assertion that the stationary distribution is unique,
    /// which Scheme B needs for stationary models.
    #[serde(default)]
    pub unique_stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    Mm1 { lambda: f64, mu: f64 },
    Mm1Capped { lambda: f64, mu: f64, capacity: i64 },
    BirthDeath { births: Vec<f64>, deaths: Vec<f64> },
    LinearBirthDeath { birth: f64, death: f64 },
    RandomWalk { p_up: f64 },
    DtMatrix { matrix: Vec<Vec<f64>> },
    CtMatrix { matrix: Vec<Vec<f64>> },
}

impl ChainSpec {
    fn continuous(&self) -> bool {
        !matches!(self, ChainSpec::RandomWalk { .. } | ChainSpec::DtMatrix { .. })
    }

    fn finite(&self) -> bool {
        matches!(
            self,
            ChainSpec::Mm1Capped { .. }
                | ChainSpec::BirthDeath { .. }
                | ChainSpec::DtMatrix { .. }
                | ChainSpec::CtMatrix { .. }
        )
    }

    /// Largest rate into a window from above, for the relaxed-mode slack.
    fn inflow_bound(&self) -> Option<f64> {
        match self {
            ChainSpec::Mm1 { mu, .. } | ChainSpec::Mm1Capped { mu, .. } => Some(*mu),
            ChainSpec::RandomWalk { p_up } => Some(1.0 - p_up),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: i64,
    #[serde(default)]
    pub upper: Option<i64>,
}

/// `w(x) = x^d`, or `w(x) = (-q(x, x))^d` for continuous-time exit models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Degree(f64),
    Named(String),
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Named("default".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentSpec {
    Value(f64),
    /// `"closed-form"`: the exact moment for the shipped families that have one.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Indicator { state: i64 },
    Monomial { degree: u32 },
    TruncationIndicator,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SchemeSpec {
    #[default]
    A,
    B,
    #[serde(rename = "both")]
    Both,
}

impl SchemeSpec {
    pub fn includes_a(self) -> bool {
        matches!(self, SchemeSpec::A | SchemeSpec::Both)
    }

    pub fn includes_b(self) -> bool {
        matches!(self, SchemeSpec::B | SchemeSpec::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Primal feasibility tolerance of the simplex solver.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub relaxed: bool,
    /// `b_r = slack_bound / r` for relaxed mode; defaults to the family's
    /// largest downward rate where one exists.
    #[serde(default)]
    pub slack_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub paths: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
}

fn default_step_cap() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        ConfigError {
            path: if path == "." { String::new() } else { path },
            message: inner.to_string().split(" at line ").next().unwrap_or_default().to_string(),
            position: (inner.line() > 0).then(|| (inner.line(), inner.column())),
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn check_rate(path: &str, v: f64) -> std::result::Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(at(path, format!("rate must be positive and finite, got {v}")))
    }
}

fn check_table(path: &str, values: &[f64]) -> std::result::Result<(), ConfigError> {
    for (i, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(at(format!("{path}[{i}]"), format!("rate must be non-negative and finite, got {v}")));
        }
    }
    Ok(())
}

fn check_matrix(path: &str, m: &[Vec<f64>], continuous: bool) -> std::result::Result<(), ConfigError> {
    if m.is_empty() {
        return Err(at(path, "matrix is empty"));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != m.len() {
            return Err(at(format!("{path}[{i}]"), format!("row has {} entries, expected {}", row.len(), m.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            let diagonal_rate = continuous && i == j;
            if !v.is_finite() || (!diagonal_rate && v < 0.0) {
                let what = if continuous { "rate" } else { "probability" };
                return Err(at(format!("{path}[{i}][{j}]"), format!("{what} must be non-negative and finite, got {v}")));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    /// Semantic checks beyond the JSON shape.
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(at(
                "schema_version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.validate_model()?;
        let degree = self.w_degree()?;
        if let MomentSpec::Value(c) = self.c {
            if !(c.is_finite() && c > 0.0) {
                return Err(at("c", format!("moment bound must be positive and finite, got {c}")));
            }
        } else if !matches!(&self.c, MomentSpec::Named(s) if s == "closed-form") {
            return Err(at("c", "expected a positive number or \"closed-form\""));
        }
        if self.schedule.is_empty() {
            return Err(at("schedule", "schedule is empty"));
        }
        for (i, pair) in self.schedule.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(at(
                    format!("schedule[{}]", i + 1),
                    format!("schedule must be strictly increasing, but {} follows {}", pair[1], pair[0]),
                ));
            }
        }
        if self.schedule[0] == 0 {
            return Err(at("schedule[0]", "truncation levels must be positive"));
        }
        for (i, obj) in self.objectives.iter().enumerate() {
            if let ObjectiveSpec::Monomial { degree: k } = obj {
                match self.monomial_w_degree(degree) {
                    Some(d) if *k >= d => {
                        return Err(at(
                            format!("objectives[{i}].degree"),
                            format!("x^{k} is not in W for w = x^{d}: degree must be below {d}"),
                        ))
                    }
                    None => {
                        return Err(at(
                            format!("objectives[{i}]"),
                            "monomial objectives need w = x^d; continuous-time exit models weight by the exit rate",
                        ))
                    }
                    _ => {}
                }
            }
        }
        if self.scheme.includes_a() && self.objectives.is_empty() {
            return Err(at("objectives", "Scheme A needs at least one objective"));
        }
        if let Some(tol) = self.solver.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(at("solver.tolerance", format!("tolerance must be positive, got {tol}")));
            }
        }
        if let Some(b) = self.solver.slack_bound {
            if !(b.is_finite() && b > 0.0) {
                return Err(at("solver.slack_bound", format!("slack bound must be positive, got {b}")));
            }
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.paths == 0 {
                return Err(at("monte_carlo.paths", "need at least one path"));
            }
            if self.model.setting != SettingSpec::Exit {
                return Err(at("monte_carlo", "Monte Carlo cross-checks apply to exit settings only"));
            }
        }
        if self.validation_horizon == Some(0) {
            return Err(at("validation_horizon", "horizon must be at least 1"));
        }
        Ok(())
    }

    fn validate_model(&self) -> std::result::Result<(), ConfigError> {
        let m = &self.model;
        match &m.chain {
            ChainSpec::Mm1 { lambda, mu } => {
                check_rate("model.chain.lambda", *lambda)?;
                check_rate("model.chain.mu", *mu)?;
            }
            ChainSpec::Mm1Capped { lambda, mu, capacity } => {
                check_rate("model.chain.lambda", *lambda)?;
                check_rate("model.chain.mu", *mu)?;
                if *capacity < 1 {
                    return Err(at("model.chain.capacity", "capacity must be at least 1"));
                }
            }
            ChainSpec::BirthDeath { births, deaths } => {
                check_table("model.chain.births", births)?;
                check_table("model.chain.deaths", deaths)?;
                if births.is_empty() || births.len() != deaths.len() {
                    return Err(at("model.chain.deaths", "births and deaths must be non-empty and of equal length"));
                }
            }
            ChainSpec::LinearBirthDeath { birth, death } => {
                check_rate("model.chain.birth", *birth)?;
                check_rate("model.chain.death", *death)?;
            }
            ChainSpec::RandomWalk { p_up } => {
                if !(*p_up > 0.0 && *p_up < 1.0) {
                    return Err(at("model.chain.p_up", format!("p_up must lie in (0, 1), got {p_up}")));
                }
            }
            ChainSpec::DtMatrix { matrix } => check_matrix("model.chain.matrix", matrix, false)?,
            ChainSpec::CtMatrix { matrix } => check_matrix("model.chain.matrix", matrix, true)?,
        }
        match m.setting {
            SettingSpec::Stationary => {
                if m.domain.is_some() {
                    return Err(at("model.domain", "a domain only applies to exit settings"));
                }
                if m.initial.is_some() {
                    return Err(at("model.initial", "an initial distribution only applies to exit settings"));
                }
            }
            SettingSpec::Exit => {
                let Some(d) = &m.domain else {
                    return Err(at("model.domain", "exit settings need a domain"));
                };
                if matches!(d.upper, Some(u) if u < d.lower) {
                    return Err(at("model.domain.upper", "upper end lies below the lower end"));
                }
                if m.unique_stationary {
                    return Err(at("model.unique_stationary", "only meaningful for stationary settings"));
                }
                for (i, &(x, p)) in m.initial.iter().flatten().enumerate() {
                    if !(p.is_finite() && p > 0.0) {
                        return Err(at(format!("model.initial[{i}]"), format!("mass must be positive, got {p}")));
                    }
                    if x < d.lower || matches!(d.upper, Some(u) if x > u) {
                        return Err(at(format!("model.initial[{i}]"), format!("state {x} lies outside the domain")));
                    }
                }
            }
        }
        Ok(())
    }

    fn ct_exit(&self) -> bool {
        self.model.setting == SettingSpec::Exit && self.model.chain.continuous()
    }

    /// The exponent `d` of `w`, whole for monomial weights.
    fn w_degree(&self) -> std::result::Result<f64, ConfigError> {
        let d = match &self.w {
            WeightSpec::Degree(d) => *d,
            WeightSpec::Named(s) if s == "default" => DEFAULT_W_DEGREE as f64,
            WeightSpec::Named(s) => return Err(at("w", format!("expected a degree or \"default\", got \"{s}\""))),
        };
        if self.ct_exit() {
            if !(d.is_finite() && d > 1.0) {
                return Err(at("w", format!("exit-rate exponent must exceed 1, got {d}")));
            }
        } else if !(d >= 1.0 && d <= 16.0 && d.fract() == 0.0) {
            return Err(at("w", format!("monomial degree must be a whole number in 1..=16, got {d}")));
        }
        Ok(d)
    }

    fn monomial_w_degree(&self, d: f64) -> Option<u32> {
        (!self.ct_exit()).then_some(d as u32)
    }

    /// True when Scheme B applies: exit models always, stationary ones only
    /// with the uniqueness assertion.
    pub fn has_minimal_point(&self) -> bool {
        self.model.setting == SettingSpec::Exit || self.model.unique_stationary
    }

    fn initial(&self) -> Option<Vec<(StateId, f64)>> {
        self.model
            .initial
            .as_ref()
            .map(|v| v.iter().map(|&(x, p)| (StateId::scalar(x), p)).collect())
    }

    fn dt_chain(&self) -> Result<DtChain> {
        let chain = match &self.model.chain {
            ChainSpec::RandomWalk { p_up } => family_random_walk(*p_up)?,
            ChainSpec::DtMatrix { matrix } => family_dt_matrix(matrix.clone())?,
            _ => unreachable!("continuous-time family"),
        };
        match self.initial() {
            Some(init) => chain.with_initial(init),
            None => Ok(chain),
        }
    }

    fn ct_chain(&self) -> Result<CtChain> {
        let chain = match &self.model.chain {
            ChainSpec::Mm1 { lambda, mu } => family_mm1(*lambda, *mu)?,
            ChainSpec::Mm1Capped { lambda, mu, capacity } => family_mm1_capped(*lambda, *mu, *capacity)?,
            ChainSpec::BirthDeath { births, deaths } => family_birth_death(births.clone(), deaths.clone())?,
            ChainSpec::LinearBirthDeath { birth, death } => family_linear_birth_death(*birth, *death)?,
            ChainSpec::CtMatrix { matrix } => family_ct_matrix(matrix.clone())?,
            _ => unreachable!("discrete-time family"),
        };
        match self.initial() {
            Some(init) => chain.with_initial(init),
            None => Ok(chain),
        }
    }

    fn domain(&self) -> Result<Domain> {
        let d = self.model.domain.as_ref().expect("validated exit domain");
        Domain::interval(d.lower, d.upper)
    }

    fn assemble(&self, c: f64) -> Result<MarkovModel> {
        let d = self.w_degree().map_err(|e| Error::Config(e.to_string()))?;
        let mono = || Weight::Monomial(d as u32);
        let continuous = self.model.chain.continuous();
        match (self.model.setting, continuous) {
            (SettingSpec::Stationary, false) => dt_stationary(&self.dt_chain()?, mono(), c),
            (SettingSpec::Stationary, true) => ct_stationary(&self.ct_chain()?, mono(), c),
            (SettingSpec::Exit, false) => dt_exit(&self.dt_chain()?, self.domain()?, mono(), c),
            (SettingSpec::Exit, true) => ct_exit(&self.ct_chain()?, self.domain()?, d, c),
        }
    }

    /// The moment bound: the configured number, or the exact value.
    ///
    /// Exact values come from closed forms (M/M/1 and reflected-walk
    /// stationary moments, walk occupation moments on `{1, 2, ...}`) or, for
    /// finite chains, from a dense linear solve. With several closed classes
    /// the largest class moment is used, which bounds every stationary
    /// distribution.
    pub fn moment_bound(&self) -> Result<f64> {
        match &self.c {
            MomentSpec::Value(c) => Ok(*c),
            MomentSpec::Named(_) => self.exact_moment(),
        }
    }

    fn exact_moment(&self) -> Result<f64> {
        let d = self.w_degree().map_err(|e| Error::Config(e.to_string()))?;
        let k = d as u32;
        let chain = &self.model.chain;
        match (self.model.setting, chain) {
            (SettingSpec::Stationary, ChainSpec::Mm1 { lambda, mu }) => mm1_stationary_moment(*lambda, *mu, k),
            (SettingSpec::Stationary, ChainSpec::RandomWalk { p_up }) => random_walk_stationary_moment(*p_up, k),
            (SettingSpec::Exit, ChainSpec::RandomWalk { p_up })
                if matches!(self.model.domain, Some(DomainSpec { lower: 1, upper: None })) =>
            {
                let init: Vec<(i64, f64)> = match &self.model.initial {
                    Some(v) => v.clone(),
                    None => vec![(0, 1.0)],
                };
                random_walk_occupation_moment(*p_up, k, &init)
            }
            (SettingSpec::Stationary, _) if chain.finite() => {
                let probe = self.assemble(1.0)?;
                let sol = exact_stationary(&probe)?;
                Ok(sol
                    .classes
                    .iter()
                    .map(|cl| cl.distribution.w_moment())
                    .fold(0.0, f64::max)
                    .max(f64::MIN_POSITIVE))
            }
            (SettingSpec::Exit, _) if chain.finite() || self.model.domain.as_ref().is_some_and(|d| d.upper.is_some()) => {
                let probe = self.assemble(1.0)?;
                Ok(exact_occupation(&probe)?.occupation.w_moment().max(f64::MIN_POSITIVE))
            }
            _ => Err(Error::Config(
                "c: no closed form is known for this model; give a number".into(),
            )),
        }
    }

    /// Builds the model, attaching the relaxed-mode slack when requested.
    pub fn build_model(&self, relaxed: bool) -> Result<MarkovModel> {
        let model = self.assemble(self.moment_bound()?)?;
        if !(relaxed || self.solver.relaxed) {
            return Ok(model);
        }
        let bound = self
            .solver
            .slack_bound
            .or_else(|| self.model.chain.inflow_bound())
            .ok_or_else(|| {
                Error::Config(
                    "solver.slack_bound: relaxed mode needs a column-tail bound for this family".into(),
                )
            })?;
        Ok(model.with_bounded_inflow_slack(bound))
    }

    pub fn build_objectives(&self) -> Result<Vec<Objective>> {
        let d = self.w_degree().map_err(|e| Error::Config(e.to_string()))?;
        self.objectives
            .iter()
            .map(|o| match o {
                ObjectiveSpec::Indicator { state } => Ok(Objective::indicator(StateId::scalar(*state))),
                ObjectiveSpec::Monomial { degree } => Objective::monomial(*degree, d as u32),
                ObjectiveSpec::TruncationIndicator => Ok(Objective::truncation_indicator()),
                ObjectiveSpec::Mass => Ok(Objective::mass()),
            })
            .collect()
    }

    pub fn image_outputs(&self) -> Option<Vec<OutputId>> {
        self.image_window
            .as_ref()
            .map(|ys| ys.iter().map(|&y| OutputId::scalar(y)).collect())
    }

    /// Solver settings; explicit arguments override the config.
    pub fn solve_settings(&self, workers: Option<usize>, relaxed: bool, tolerance: Option<f64>) -> SolveSettings {
        let mut settings = SolveSettings::default().with_workers(workers.or(self.solver.workers).unwrap_or(0));
        if relaxed || self.solver.relaxed {
            settings = settings.with_mode(LpMode::Relaxed);
        }
        if let Some(tol) = tolerance.or(self.solver.tolerance) {
            settings = settings.with_solver(Arc::new(SimplexSolver::with_feasibility_tol(tol)));
        }
        settings
    }

    pub fn simulation_options(&self, seed: Option<u64>, workers: usize) -> Option<SimulationOptions> {
        self.monte_carlo.as_ref().map(|mc| SimulationOptions {
            n_paths: mc.paths,
            seed: seed.unwrap_or(mc.seed),
            step_cap: mc.step_cap,
            workers,
        })
    }

    /// Horizon for assumption checks: the configured one, else the last `r`.
    pub fn horizon(&self) -> u64 {
        self.validation_horizon
            .unwrap_or_else(|| *self.schedule.last().expect("validated schedule"))
    }
}

//! Concrete transition structures: birth-death chains and explicit matrices.

use super::{CtChain, DtChain, TimeKind, Transitions};
use crate::error::{Error, Result};
use crate::state::StateId;

/// State-dependent rate (or probability) of a birth-death move.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    Constant(f64),
    /// `rate * x`.
    Linear(f64),
    /// Value at `x` is `table[x]`, zero beyond the table.
    Table(Vec<f64>),
}

impl RateLaw {
    pub fn at(&self, x: i64) -> f64 {
        match self {
            RateLaw::Constant(v) => *v,
            RateLaw::Linear(v) => v * x as f64,
            RateLaw::Table(t) => usize::try_from(x)
                .ok()
                .and_then(|i| t.get(i).copied())
                .unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            RateLaw::Constant(v) | RateLaw::Linear(v) => v.is_finite() && *v > 0.0,
            RateLaw::Table(t) => t.iter().all(|v| v.is_finite() && *v > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("rates must be positive and finite: {self:?}")))
        }
    }
}

/// Nearest-neighbour chain on `{0, 1, ..., max_state}` (unbounded when `max_state` is `None`).
///
/// In discrete time `up`/`down` are probabilities and the remainder stays
/// put; at 0 the downward move is suppressed, so the chain reflects.
#[derive(Debug, Clone)]
pub struct BirthDeath {
    pub time: TimeKind,
    pub up: RateLaw,
    pub down: RateLaw,
    pub max_state: Option<i64>,
}

impl BirthDeath {
    fn up_at(&self, x: i64) -> f64 {
        if x < 0 || self.max_state.is_some_and(|m| x >= m) {
            0.0
        } else {
            self.up.at(x)
        }
    }

    fn down_at(&self, x: i64) -> f64 {
        if x <= 0 || self.max_state.is_some_and(|m| x > m) {
            0.0
        } else {
            self.down.at(x)
        }
    }

    fn stay_at(&self, x: i64) -> f64 {
        1.0 - self.up_at(x) - self.down_at(x)
    }
}

impl Transitions for BirthDeath {
    fn time(&self) -> TimeKind {
        self.time
    }

    fn out_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        let i = x.first();
        let mut out = Vec::with_capacity(3);
        let down = self.down_at(i);
        if down > 0.0 {
            out.push((StateId::scalar(i - 1), down));
        }
        if self.time == TimeKind::Discrete {
            let stay = self.stay_at(i);
            if stay > 0.0 {
                out.push((x.clone(), stay));
            }
        }
        let up = self.up_at(i);
        if up > 0.0 {
            out.push((StateId::scalar(i + 1), up));
        }
        out
    }

    fn in_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        let i = x.first();
        let mut inn = Vec::with_capacity(3);
        let from_below = self.up_at(i - 1);
        if from_below > 0.0 {
            inn.push((StateId::scalar(i - 1), from_below));
        }
        if self.time == TimeKind::Discrete {
            let stay = self.stay_at(i);
            if stay > 0.0 {
                inn.push((x.clone(), stay));
            }
        }
        let from_above = self.down_at(i + 1);
        if from_above > 0.0 {
            inn.push((StateId::scalar(i + 1), from_above));
        }
        inn
    }

    fn contains(&self, x: &StateId) -> bool {
        x.coords().len() == 1 && x.first() >= 0 && self.max_state.is_none_or(|m| x.first() <= m)
    }

    fn seeds(&self) -> Vec<StateId> {
        vec![StateId::scalar(0)]
    }

    fn state_space(&self) -> Option<Vec<StateId>> {
        self.max_state
            .map(|m| (0..=m).map(StateId::scalar).collect())
    }

    fn describe(&self) -> String {
        format!(
            "{} birth-death (up {:?}, down {:?}{})",
            match self.time {
                TimeKind::Discrete => "discrete-time",
                TimeKind::Continuous => "continuous-time",
            },
            self.up,
            self.down,
            self.max_state.map(|m| format!(", states 0..={m}")).unwrap_or_default()
        )
    }
}

/// Chain on `{0, ..., n-1}` given by a dense matrix.
///
/// Discrete time: the one-step matrix. Continuous time: off-diagonal rates;
/// the diagonal is ignored and recomputed as minus the row sum.
#[derive(Debug, Clone)]
pub struct MatrixChain {
    pub time: TimeKind,
    pub matrix: Vec<Vec<f64>>,
}

impl MatrixChain {
    fn entry(&self, from: usize, to: usize) -> f64 {
        if self.time == TimeKind::Continuous && from == to {
            0.0
        } else {
            self.matrix[from][to]
        }
    }

    fn index(&self, x: &StateId) -> Option<usize> {
        if x.coords().len() != 1 {
            return None;
        }
        usize::try_from(x.first())
            .ok()
            .filter(|&i| i < self.matrix.len())
    }
}

impl Transitions for MatrixChain {
    fn time(&self) -> TimeKind {
        self.time
    }

    fn out_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        let Some(i) = self.index(x) else { return vec![] };
        (0..self.matrix.len())
            .filter(|&j| self.entry(i, j) != 0.0)
            .map(|j| (StateId::scalar(j as i64), self.entry(i, j)))
            .collect()
    }

    fn in_neighbors(&self, x: &StateId) -> Vec<(StateId, f64)> {
        let Some(j) = self.index(x) else { return vec![] };
        (0..self.matrix.len())
            .filter(|&i| self.entry(i, j) != 0.0)
            .map(|i| (StateId::scalar(i as i64), self.entry(i, j)))
            .collect()
    }

    fn contains(&self, x: &StateId) -> bool {
        self.index(x).is_some()
    }

    fn seeds(&self) -> Vec<StateId> {
        self.state_space().unwrap_or_default()
    }

    fn state_space(&self) -> Option<Vec<StateId>> {
        Some((0..self.matrix.len() as i64).map(StateId::scalar).collect())
    }

    fn describe(&self) -> String {
        format!("{}-state matrix chain", self.matrix.len())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

/// M/M/1 queue: arrivals at rate `lambda`, services at rate `mu`.
pub fn family_mm1(lambda: f64, mu: f64) -> Result<CtChain> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    CtChain::new(
        BirthDeath {
            time: TimeKind::Continuous,
            up: RateLaw::Constant(lambda),
            down: RateLaw::Constant(mu),
            max_state: None,
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

/// M/M/1 with a finite buffer: states `0..=capacity`, arrivals blocked when full.
pub fn family_mm1_capped(lambda: f64, mu: f64, capacity: i64) -> Result<CtChain> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    if capacity < 1 {
        return Err(Error::Config("capacity must be at least 1".into()));
    }
    CtChain::new(
        BirthDeath {
            time: TimeKind::Continuous,
            up: RateLaw::Constant(lambda),
            down: RateLaw::Constant(mu),
            max_state: Some(capacity),
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

/// Finite continuous-time birth-death chain on `{0, ..., n}`:
/// `births[i] = q(i, i+1)` and `deaths[i] = q(i+1, i)`.
pub fn family_birth_death(births: Vec<f64>, deaths: Vec<f64>) -> Result<CtChain> {
    if births.len() != deaths.len() || births.is_empty() {
        return Err(Error::Config(
            "birth and death tables must be non-empty and of equal length".into(),
        ));
    }
    let n = births.len() as i64;
    let up = RateLaw::Table(births);
    up.validate()?;
    // deaths[i] is the rate out of i + 1.
    let mut shifted = vec![f64::MIN_POSITIVE];
    shifted.extend(deaths);
    let down = RateLaw::Table(shifted);
    down.validate()?;
    CtChain::new(
        BirthDeath {
            time: TimeKind::Continuous,
            up,
            down,
            max_state: Some(n),
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

/// Linear birth-death process: `q(x, x+1) = birth * x`, `q(x, x-1) = death * x`.
/// State 0 is absorbing.
pub fn family_linear_birth_death(birth: f64, death: f64) -> Result<CtChain> {
    positive("birth", birth)?;
    positive("death", death)?;
    CtChain::new(
        BirthDeath {
            time: TimeKind::Continuous,
            up: RateLaw::Linear(birth),
            down: RateLaw::Linear(death),
            max_state: None,
        },
        vec![(StateId::scalar(1), 1.0)],
    )
}

/// Random walk on `{0, 1, ...}`: up with `p_up`, down with `1 - p_up`,
/// staying at 0 instead of stepping down.
pub fn family_random_walk(p_up: f64) -> Result<DtChain> {
    if !(p_up > 0.0 && p_up < 1.0) {
        return Err(Error::Config(format!("p_up must lie in (0, 1), got {p_up}")));
    }
    DtChain::new(
        BirthDeath {
            time: TimeKind::Discrete,
            up: RateLaw::Constant(p_up),
            down: RateLaw::Constant(1.0 - p_up),
            max_state: None,
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

pub fn family_dt_matrix(matrix: Vec<Vec<f64>>) -> Result<DtChain> {
    check_square(&matrix)?;
    DtChain::new(
        MatrixChain {
            time: TimeKind::Discrete,
            matrix,
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

pub fn family_ct_matrix(matrix: Vec<Vec<f64>>) -> Result<CtChain> {
    check_square(&matrix)?;
    CtChain::new(
        MatrixChain {
            time: TimeKind::Continuous,
            matrix,
        },
        vec![(StateId::scalar(0), 1.0)],
    )
}

fn check_square(matrix: &[Vec<f64>]) -> Result<()> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Config("transition matrix must be square and non-empty".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("transition matrix entries must be finite".into()));
    }
    Ok(())
}

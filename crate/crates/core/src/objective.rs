//! Objectives `f` and their tail behaviour outside a truncation window.

use crate::error::{Error, Result};
use crate::model::CilpModel;
use crate::state::{OutputId, StateId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

type Eval = Arc<dyn Fn(&StateId) -> f64 + Send + Sync>;
type Envelope = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Certified sign of `f` on every state outside every window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCertificate {
    NonNegative,
    NonPositive,
    None,
}

/// A function `f` on the state space, plus what is known about it outside `X_r`.
#[derive(Clone)]
pub struct Objective {
    name: String,
    eval: Eval,
    envelope: Option<Envelope>,
    sign: SignCertificate,
    support: Option<Arc<BTreeSet<StateId>>>,
    /// `f` vanishes outside whichever window it is evaluated on.
    window_bound: bool,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("envelope", &self.envelope.is_some())
            .field("sign", &self.sign)
            .field("finite_support", &self.support.as_ref().map(|s| s.len()))
            .finish()
    }
}

impl Objective {
    /// An arbitrary function with no tail information.
    pub fn custom(name: impl Into<String>, f: impl Fn(&StateId) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            envelope: None,
            sign: SignCertificate::None,
            support: None,
            window_bound: false,
        }
    }

    /// Attach a certified envelope `r -> sup_{x not in X_r} |f(x)|/w(x)`.
    pub fn with_envelope(mut self, env: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        self.envelope = Some(Arc::new(env));
        self
    }

    pub fn with_sign(mut self, sign: SignCertificate) -> Self {
        self.sign = sign;
        self
    }

    /// Declare that `f` vanishes outside `support`.
    pub fn with_support(mut self, support: impl IntoIterator<Item = StateId>) -> Self {
        self.support = Some(Arc::new(support.into_iter().collect()));
        self
    }

    /// `f = 0`; any feasible point is optimal.
    pub fn zero() -> Self {
        Self::custom("zero", |_| 0.0).with_support([])
    }

    /// Indicator of a single state.
    pub fn indicator(x0: StateId) -> Self {
        let target = x0.clone();
        Self::custom(format!("1_{{{x0}}}"), move |x| if *x == target { 1.0 } else { 0.0 })
            .with_sign(SignCertificate::NonNegative)
            .with_support([x0])
    }

    /// Indicator of a finite set of states.
    pub fn set_indicator(name: impl Into<String>, set: impl IntoIterator<Item = StateId>) -> Self {
        let set: BTreeSet<StateId> = set.into_iter().collect();
        let members = Arc::new(set.clone());
        Self::custom(name, move |x| if members.contains(x) { 1.0 } else { 0.0 })
            .with_sign(SignCertificate::NonNegative)
            .with_support(set)
    }

    /// `1_{X_r}` for the window in use: one on the window, zero outside it.
    pub fn truncation_indicator() -> Self {
        let mut f = Self::custom("1_{X_r}", |_| 1.0).with_sign(SignCertificate::NonNegative);
        f.window_bound = true;
        f
    }

    /// `f = 1`. Outside `X_r` we have `w >= r`, so `1/w <= 1/r`.
    pub fn mass() -> Self {
        Self::custom("mass", |_| 1.0)
            .with_sign(SignCertificate::NonNegative)
            .with_envelope(|r| 1.0 / r as f64)
    }

    /// `f(x) = x_0^k` on non-negative integer states, paired with `w(x) = x_0^d`, `k < d`.
    pub fn monomial(k: u32, w_degree: u32) -> Result<Self> {
        if k >= w_degree {
            return Err(Error::Config(format!(
                "objective x^{k} is not in W for w = x^{w_degree}: degree must be below {w_degree}"
            )));
        }
        Ok(Self::custom(format!("x^{k}"), move |x| (x.first() as f64).powi(k as i32))
            .with_sign(SignCertificate::NonNegative)
            .with_envelope(move |r| monomial_envelope(k, w_degree, r)))
    }

    /// `f(x) = g(x, y)`, the column of `G` at `y`. Non-negative because `G` is.
    pub fn g_column(model: Arc<dyn CilpModel>, y: OutputId) -> Self {
        let target = y.clone();
        Self::custom(format!("g(., {y})"), move |x| {
            model
                .g_row(x)
                .iter()
                .filter(|(o, _)| *o == target)
                .map(|(_, v)| *v)
                .sum()
        })
        .with_sign(SignCertificate::NonNegative)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &StateId) -> f64 {
        (self.eval)(x)
    }

    pub fn sign(&self) -> SignCertificate {
        self.sign
    }

    pub fn has_envelope(&self) -> bool {
        self.envelope.is_some()
    }

    pub fn support(&self) -> Option<&BTreeSet<StateId>> {
        self.support.as_deref()
    }

    /// True when `f` vanishes outside the given window.
    pub fn supported_within(&self, window: impl Fn(&StateId) -> bool) -> bool {
        self.window_bound
            || self
                .support
                .as_ref()
                .is_some_and(|s| s.iter().all(|x| window(x)))
    }
}

/// `sup_{x >= N} x^k / x^d = N^(k-d)` where `N` is the smallest non-negative
/// integer with `N^d >= r`, i.e. the first state outside `{x^d < r}`.
pub fn monomial_envelope(k: u32, d: u32, r: u64) -> f64 {
    let n = first_outside(d, r);
    (n as f64).powi(k as i32 - d as i32)
}

/// Smallest `n >= 0` with `n^d >= r`.
pub fn first_outside(d: u32, r: u64) -> u64 {
    if r == 0 {
        return 0;
    }
    let mut n = (r as f64).powf(1.0 / d as f64).floor() as u64;
    n = n.saturating_sub(1);
    while (n as u128).pow(d) < r as u128 {
        n += 1;
    }
    n
}

/// `sup_{x not in X_r} |f(x)|/w(x)`, when it can be known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRatio {
    Value(f64),
    Unavailable,
}

impl TailRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            TailRatio::Value(v) => Some(v),
            TailRatio::Unavailable => None,
        }
    }

    /// The value, or an "envelope required" error for a two-sided correction.
    pub fn require(self, f: &Objective) -> Result<f64> {
        self.value()
            .ok_or_else(|| Error::EnvelopeRequired(f.name().to_string()))
    }
}

/// The correction factor for `f` at window `r`.
///
/// A certified envelope wins; otherwise a declared finite support is scanned
/// exactly (states with `w >= r` lie outside `X_r`).
pub fn tail_sup_ratio(model: &dyn CilpModel, f: &Objective, r: u64) -> TailRatio {
    if f.window_bound {
        return TailRatio::Value(0.0);
    }
    if let Some(env) = &f.envelope {
        return TailRatio::Value(env(r));
    }
    if let Some(support) = &f.support {
        let threshold = r as f64;
        let ratio = support
            .iter()
            .filter_map(|x| {
                let wx = model.w(x);
                (wx >= threshold).then(|| f.eval(x).abs() / wx)
            })
            .fold(0.0, f64::max);
        return TailRatio::Value(ratio);
    }
    TailRatio::Unavailable
}

use crate::chains::{Domain, MarkovModel, TimeKind, Transitions};
use crate::error::{Error, Result};
use crate::state::{OutputId, StateId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Paths per reduction chunk. Chunk results are combined in index order,
/// which keeps floating-point sums independent of the worker count.
const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub n_paths: u64,
    pub seed: u64,
    /// Jumps allowed per path before it is censored.
    pub step_cap: u64,
    /// `0` uses the global rayon pool.
    pub workers: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            n_paths: 100_000,
            seed: 0,
            step_cap: 1_000_000,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean - value| <= k * std_error`, with a small absolute floor so
    /// zero-variance estimates of exact values still pass.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub n_paths: u64,
    pub seed: u64,
    /// Frequency of each exit location; `std_error = sqrt(p (1 - p) / n)`.
    pub exits: BTreeMap<OutputId, Estimate>,
    /// Fraction of paths that hit the step cap (or an absorbing state) inside the domain.
    pub censored: Estimate,
    /// Mean occupation per state: steps in discrete time, time in continuous time.
    pub occupation: BTreeMap<StateId, Estimate>,
}

impl SimulationResult {
    pub fn exit_frequency(&self, y: &OutputId) -> Estimate {
        self.exits.get(y).copied().unwrap_or(Estimate {
            mean: 0.0,
            std_error: 0.0,
        })
    }

    pub fn occupation_at(&self, x: &StateId) -> Estimate {
        self.occupation.get(x).copied().unwrap_or(Estimate {
            mean: 0.0,
            std_error: 0.0,
        })
    }
}

enum Outcome {
    Exit(StateId),
    Censored,
}

#[derive(Default)]
struct Tally {
    exits: BTreeMap<OutputId, u64>,
    censored: u64,
    /// Per state: sum over paths of occupation and of its square.
    occupation: BTreeMap<StateId, (f64, f64)>,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        for (y, c) in other.exits {
            *self.exits.entry(y).or_insert(0) += c;
        }
        self.censored += other.censored;
        for (x, (s1, s2)) in other.occupation {
            let e = self.occupation.entry(x).or_insert((0.0, 0.0));
            e.0 += s1;
            e.1 += s2;
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &'a [(StateId, f64)], total: f64) -> &'a StateId {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (y, w) in options {
        acc += w;
        if u < acc {
            return y;
        }
    }
    &options[options.len() - 1].0
}

fn run_path(
    t: &dyn Transitions,
    domain: &Domain,
    initial: &[(StateId, f64)],
    step_cap: u64,
    rng: &mut ChaCha8Rng,
    visits: &mut BTreeMap<StateId, f64>,
) -> Outcome {
    let mut x = pick(rng, initial, 1.0).clone();
    for _ in 0..step_cap {
        if !domain.contains(&x) {
            return Outcome::Exit(x);
        }
        let out = t.out_neighbors(&x);
        let total: f64 = out.iter().map(|(_, v)| v).sum();
        if out.is_empty() || total <= 0.0 {
            return Outcome::Censored;
        }
        let stay = match t.time() {
            TimeKind::Discrete => 1.0,
            TimeKind::Continuous => -(1.0 - rng.gen::<f64>()).ln() / total,
        };
        *visits.entry(x.clone()).or_insert(0.0) += stay;
        x = pick(rng, &out, total).clone();
    }
    if domain.contains(&x) {
        Outcome::Censored
    } else {
        Outcome::Exit(x)
    }
}

/// Seed expansion: path `i` draws from `ChaCha8Rng::seed_from_u64(seed)`
/// switched to stream `i`. It first samples its start from `initial`, then
/// per jump uses one uniform for the holding time (continuous time only,
/// `-ln(1 - U) / total_rate`) and one for the destination, scanning
/// `out_neighbors` in order.
pub fn simulate_exit(
    transitions: &dyn Transitions,
    initial: &[(StateId, f64)],
    domain: &Domain,
    options: &SimulationOptions,
) -> Result<SimulationResult> {
    if options.n_paths == 0 {
        return Err(Error::Precondition("simulate_exit needs at least one path".into()));
    }
    if initial.is_empty() {
        return Err(Error::Precondition("initial distribution is empty".into()));
    }
    let n_chunks = options.n_paths.div_ceil(CHUNK);
    let chunk = |c: u64| -> Tally {
        let mut tally = Tally::default();
        let start = c * CHUNK;
        let end = (start + CHUNK).min(options.n_paths);
        for i in start..end {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(i);
            let mut visits = BTreeMap::new();
            match run_path(transitions, domain, initial, options.step_cap, &mut rng, &mut visits) {
                Outcome::Exit(y) => *tally.exits.entry(OutputId::from(&y)).or_insert(0) += 1,
                Outcome::Censored => tally.censored += 1,
            }
            for (x, v) in visits {
                let e = tally.occupation.entry(x).or_insert((0.0, 0.0));
                e.0 += v;
                e.1 += v * v;
            }
        }
        tally
    };
    let tallies: Vec<Tally> = if options.workers == 0 {
        (0..n_chunks).into_par_iter().map(chunk).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?
            .install(|| (0..n_chunks).into_par_iter().map(chunk).collect())
    };
    let mut total = Tally::default();
    for t in tallies {
        total.absorb(t);
    }

    let n = options.n_paths as f64;
    let freq = |count: u64| {
        let p = count as f64 / n;
        Estimate {
            mean: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        }
    };
    let occupation = total
        .occupation
        .into_iter()
        .map(|(x, (s1, s2))| {
            let mean = s1 / n;
            let var = if n > 1.0 {
                ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (x, Estimate { mean, std_error: (var / n).sqrt() })
        })
        .collect();
    Ok(SimulationResult {
        n_paths: options.n_paths,
        seed: options.seed,
        exits: total.exits.into_iter().map(|(y, c)| (y, freq(c))).collect(),
        censored: freq(total.censored),
        occupation,
    })
}

/// [`simulate_exit`] on the chain, domain and initial law of an exit model.
pub fn simulate_model_exit(model: &MarkovModel, options: &SimulationOptions) -> Result<SimulationResult> {
    let domain = model
        .domain()
        .ok_or_else(|| Error::Oracle("simulation needs an exit model".into()))?;
    simulate_exit(model.transitions().as_ref(), model.initial(), domain, options)
}

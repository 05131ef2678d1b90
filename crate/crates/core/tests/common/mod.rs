//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use cilp::chains::*;
use cilp::lp::{EqualityRow, LinearProgram, RangeRow, Sense};
use cilp::model::Weight;
use cilp::StateId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn s(i: i64) -> StateId {
    StateId::scalar(i)
}

/// M/M/1 with lambda = 1, mu = 2, w = x^3 and the exact third moment c = 13.
pub fn mm1_model() -> MarkovModel {
    ct_stationary(&family_mm1(1.0, 2.0).unwrap(), Weight::Monomial(3), 13.0).unwrap()
}

/// Walk with p_up = 0.25 started at 3, killed on leaving {1, 2, ...},
/// with w = x^2 and c = nu(w) = 46.
pub fn walk_exit_model() -> MarkovModel {
    let chain = family_random_walk(0.25)
        .unwrap()
        .with_initial(vec![(s(3), 1.0)])
        .unwrap();
    dt_exit(&chain, Domain::interval(1, None).unwrap(), Weight::Monomial(2), 46.0).unwrap()
}

/// The same walk on the finite domain {1, ..., n}, for dense linear solves.
pub fn walk_exit_finite(n: i64) -> MarkovModel {
    let chain = family_random_walk(0.25)
        .unwrap()
        .with_initial(vec![(s(3), 1.0)])
        .unwrap();
    dt_exit(&chain, Domain::interval(1, Some(n)).unwrap(), Weight::Monomial(2), 46.0).unwrap()
}

/// Optimal value by enumerating every basic solution.
///
/// Every vertex of `{x >= 0, equalities, ranges}` makes all equalities and
/// `n - rank` further bounds active. Returns `None` when no vertex is
/// feasible; callers only pass bounded programs.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars;
    let dense = |coeffs: &[(usize, f64)]| {
        let mut row = vec![0.0; n];
        for &(j, a) in coeffs {
            row[j] = a;
        }
        row
    };
    // A maximal independent subset of the equalities; max_residual still
    // checks the dropped ones.
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &lp.equalities {
        let row = dense(&r.coeffs);
        let mut stacked: Vec<Vec<f64>> = eqs.iter().map(|(a, _)| a.clone()).collect();
        stacked.push(row.clone());
        if rank(stacked) > eqs.len() {
            eqs.push((row, r.rhs));
        }
    }
    let mut hyperplanes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &lp.ranges {
        if r.lower.is_finite() {
            hyperplanes.push((dense(&r.coeffs), r.lower));
        }
        if r.upper.is_finite() && r.upper != r.lower {
            hyperplanes.push((dense(&r.coeffs), r.upper));
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        hyperplanes.push((e, 0.0));
    }

    let feasible = |x: &[f64]| lp.max_residual(x) <= 1e-9;
    let mut best: Option<f64> = None;
    let need = n.saturating_sub(eqs.len());
    let mut pick = Vec::with_capacity(need);
    fn combos(
        start: usize,
        need: usize,
        total: usize,
        pick: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if pick.len() == need {
            visit(pick);
            return;
        }
        for i in start..total {
            pick.push(i);
            combos(i + 1, need, total, pick, visit);
            pick.pop();
        }
    }
    let mut visit = |chosen: &[usize]| {
        let rows: Vec<&(Vec<f64>, f64)> = eqs.iter().chain(chosen.iter().map(|&i| &hyperplanes[i])).collect();
        if let Some(x) = solve_square(&rows, n) {
            if feasible(&x) {
                let v = lp.objective_value(&x);
                best = Some(match (best, lp.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Minimize) => b.min(v),
                    (Some(b), Sense::Maximize) => b.max(v),
                });
            }
        }
    };
    if eqs.len() <= n {
        combos(0, need, hyperplanes.len(), &mut pick, &mut visit);
    }
    best
}

fn rank(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs())) else {
            break;
        };
        if rows[p][col].abs() < 1e-9 {
            continue;
        }
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            let factor = rows[i][col] / rows[rank][col];
            for k in col..cols {
                rows[i][k] -= factor * rows[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Gaussian elimination with partial pivoting on exactly `n` rows.
fn solve_square(rows: &[&(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    if rows.len() != n {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        for i in 0..n {
            if i != col {
                let factor = a[i][col] / a[col][col];
                if factor != 0.0 {
                    for k in col..=n {
                        a[i][k] -= factor * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// A feasible, bounded LP with `n_vars <= 6` and at most 8 constraint rows.
///
/// Rows are built around a random non-negative point so the program is
/// feasible; the last row caps `sum x`, which keeps it bounded.
pub fn random_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6usize);
    let m = rng.gen_range(1..=8usize);
    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..3.0) })
        .collect();
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(n, sense);
    lp.objective = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let max_eqs = (n - 1).min(3);
    for _ in 0..m - 1 {
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n);
        for j in 0..n {
            if rng.gen_bool(0.8) {
                coeffs.push((j, rng.gen_range(-4.0..4.0)));
            }
        }
        let at: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let (below, above) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        match rng.gen_range(0..4) {
            0 if lp.equalities.len() < max_eqs => lp.equalities.push(EqualityRow { coeffs, rhs: at }),
            1 => lp.ranges.push(RangeRow {
                coeffs,
                lower: at - below,
                upper: at + above,
            }),
            2 => lp.ranges.push(RangeRow {
                coeffs,
                lower: at - below,
                upper: f64::INFINITY,
            }),
            _ => lp.ranges.push(RangeRow {
                coeffs,
                lower: f64::NEG_INFINITY,
                upper: at + above,
            }),
        }
    }
    let total: f64 = x0.iter().sum();
    lp.ranges.push(RangeRow {
        coeffs: (0..n).map(|j| (j, 1.0)).collect(),
        lower: f64::NEG_INFINITY,
        upper: total + rng.gen_range(0.5..5.0),
    });
    lp
}

/// Serialises `value` with every `solve_ms` field removed, so identical
/// runs compare equal byte for byte.
pub fn numeric_json<T: serde::Serialize>(value: &T) -> String {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                map.remove("solve_ms");
                map.values_mut().for_each(strip);
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(value).unwrap();
    strip(&mut v);
    serde_json::to_string(&v).unwrap()
}

//! Closed-form moments for the shipped chain families, used as moment bounds `c`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Eulerian number `A(k, i)`: permutations of `k` elements with `i` ascents.
fn eulerian(k: u32, i: u32) -> f64 {
    let mut row = vec![1.0f64];
    for n in 1..=k {
        let mut next = vec![0.0; n as usize];
        for m in 0..n as usize {
            let stay = if m < row.len() { (m as f64 + 1.0) * row[m] } else { 0.0 };
            let rise = if m >= 1 && m - 1 < row.len() {
                (n as f64 - m as f64) * row[m - 1]
            } else {
                0.0
            };
            next[m] = stay + rise;
        }
        row = next;
    }
    row.get(i as usize).copied().unwrap_or(0.0)
}

/// `E[X^k]` for `P(X = x) = (1 - q) q^x`, `x = 0, 1, ...`.
///
/// Uses `sum_x x^k q^x = q A_k(q) / (1 - q)^(k+1)` with the Eulerian polynomial `A_k`.
pub fn geometric_moment(q: f64, k: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Config(format!(
            "geometric moments need a ratio in [0, 1), got {q}"
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let poly: f64 = (0..k).map(|i| eulerian(k, i) * q.powi(i as i32)).sum();
    Ok((1.0 - q) * q * poly / (1.0 - q).powi(k as i32 + 1))
}

/// Stationary `E[X^k]` of the M/M/1 queue, which is geometric with ratio `lambda/mu`.
pub fn mm1_stationary_moment(lambda: f64, mu: f64, k: u32) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(Error::Config(format!(
            "closed-form moments need 0 < lambda < mu, got lambda = {lambda}, mu = {mu}"
        )));
    }
    geometric_moment(lambda / mu, k)
}

/// Stationary `E[X^k]` of the reflected walk, geometric with ratio `p/(1-p)`.
pub fn random_walk_stationary_moment(p_up: f64, k: u32) -> Result<f64> {
    if !(p_up > 0.0 && p_up < 0.5) {
        return Err(Error::Config(format!(
            "the reflected walk is positive recurrent only for p_up < 1/2, got {p_up}"
        )));
    }
    geometric_moment(p_up / (1.0 - p_up), k)
}

/// Coefficients `alpha_1..alpha_{k+1}` of `F(x) = E_x[sum_{n < sigma} X_n^k]` for
/// the walk with up-probability `p < 1/2`, killed on hitting 0.
///
/// `F` is the polynomial solution of `F(x) - p F(x+1) - (1-p) F(x-1) = x^k`
/// with `F(0) = 0`; the exponential homogeneous solution is excluded because
/// `F` grows at most polynomially when the drift points down.
fn occupation_polynomial(p_up: f64, k: u32) -> Result<Vec<f64>> {
    let q = 1.0 - p_up;
    let deg = k as usize + 1;
    let binom = |n: usize, r: usize| -> f64 {
        (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    // Row e is the coefficient of x^e, column j - 1 the unknown alpha_j.
    let mut a = DMatrix::<f64>::zeros(deg + 1, deg);
    for j in 1..=deg {
        // x^j - p (x+1)^j - q (x-1)^j
        for e in 0..=j {
            let plus = binom(j, e);
            let minus = binom(j, e) * if (j - e) % 2 == 0 { 1.0 } else { -1.0 };
            let own = if e == j { 1.0 } else { 0.0 };
            a[(e, j - 1)] += own - p_up * plus - q * minus;
        }
    }
    let mut rhs = DVector::<f64>::zeros(deg + 1);
    rhs[k as usize] = 1.0;
    // The x^{k+1} row vanishes identically; drop it and solve the square part.
    let square = a.rows(0, deg).into_owned();
    let b = rhs.rows(0, deg).into_owned();
    let sol = square
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Config("occupation polynomial system is singular".into()))?;
    Ok(sol.iter().copied().collect())
}

/// `nu(w)` with `w(x) = x^k` for the walk killed at 0, started from `initial`.
pub fn random_walk_occupation_moment(p_up: f64, k: u32, initial: &[(i64, f64)]) -> Result<f64> {
    if !(p_up > 0.0 && p_up < 0.5) {
        return Err(Error::Config(format!(
            "closed-form occupation moments need p_up < 1/2, got {p_up}"
        )));
    }
    let alpha = occupation_polynomial(p_up, k)?;
    Ok(initial
        .iter()
        .map(|&(x, m)| {
            m * alpha
                .iter()
                .enumerate()
                .map(|(j, a)| a * (x as f64).powi(j as i32 + 1))
                .sum::<f64>()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_geometric(q: f64, k: u32) -> f64 {
        (0..5000)
            .map(|x| (x as f64).powi(k as i32) * (1.0 - q) * q.powi(x))
            .sum()
    }

    #[test]
    fn mm1_third_moment_is_thirteen() {
        assert!((mm1_stationary_moment(1.0, 2.0, 3).unwrap() - 13.0).abs() < 1e-12);
        assert!((mm1_stationary_moment(1.0, 2.0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((mm1_stationary_moment(1.0, 2.0, 2).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_matches_brute_force() {
        for q in [0.1, 0.3, 0.5, 0.8] {
            for k in 0..6 {
                let exact = geometric_moment(q, k).unwrap();
                let brute = brute_geometric(q, k);
                assert!((exact - brute).abs() < 1e-9 * brute.max(1.0), "q={q} k={k}");
            }
        }
    }

    #[test]
    fn unstable_queue_has_no_closed_form() {
        assert!(mm1_stationary_moment(2.0, 1.0, 1).is_err());
        assert!(random_walk_stationary_moment(0.5, 1).is_err());
    }

    #[test]
    fn occupation_moments_of_biased_walk() {
        // F(x) = x^2 + 2x for k = 1 and 2x(x^2 + 3x + 5)/3 for k = 2 at p = 1/4.
        let start = [(3, 1.0)];
        assert!((random_walk_occupation_moment(0.25, 1, &start).unwrap() - 15.0).abs() < 1e-10);
        assert!((random_walk_occupation_moment(0.25, 2, &start).unwrap() - 46.0).abs() < 1e-10);
        assert!((random_walk_occupation_moment(0.25, 0, &start).unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn occupation_moment_matches_value_iteration() {
        // Iterate F <- x^k + p F(x+1) + q F(x-1) on a long line.
        let (p, k, n) = (0.3, 2u32, 600usize);
        let mut f = vec![0.0f64; n + 2];
        for _ in 0..20_000 {
            let mut next = vec![0.0; n + 2];
            for x in 1..=n {
                next[x] = (x as f64).powi(k as i32) + p * f[x + 1] + (1.0 - p) * f[x - 1];
            }
            f = next;
        }
        for x in [1i64, 2, 5] {
            let exact = random_walk_occupation_moment(p, k, &[(x, 1.0)]).unwrap();
            assert!((exact - f[x as usize]).abs() < 1e-6 * exact, "x={x}");
        }
    }
}

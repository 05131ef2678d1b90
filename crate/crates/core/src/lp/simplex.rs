//! Two-phase revised simplex with a dense basis inverse.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule until the objective moves again. The basis
//! inverse is updated by elementary row operations and recomputed from
//! scratch every `refactor_every` pivots; a basis that turns out singular
//! in floating point at that point is repaired with unit columns.

use super::{LinearProgram, LpSolution, LpSolver, LpStatus, Sense};
use super::{FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Consecutive non-improving pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Iteration cap; `None` picks one from the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: FEASIBILITY_TOL,
            optimality_tol: OPTIMALITY_TOL,
            pivot_tol: PIVOT_TOL,
            refactor_every: 50,
            stall_limit: 30,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimplexSolver {
    pub options: SimplexOptions,
}

impl SimplexSolver {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn with_feasibility_tol(tol: f64) -> Self {
        Self::new(SimplexOptions {
            feasibility_tol: tol,
            ..Default::default()
        })
    }
}

impl LpSolver for SimplexSolver {
    fn solve(&self, lp: &LinearProgram) -> LpSolution {
        solve(lp, &self.options)
    }

    fn name(&self) -> &str {
        "embedded-revised-simplex"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

/// `A x = b`, `x >= 0`, with `b >= 0` and every row scaled to unit max-norm.
struct StandardForm {
    m: usize,
    /// Column-major sparse matrix.
    columns: Vec<Vec<(usize, f64)>>,
    kinds: Vec<ColumnKind>,
    b: Vec<f64>,
    /// Initial basic column per row.
    initial_basis: Vec<usize>,
}

enum Prepared {
    Form(StandardForm),
    TriviallyInfeasible,
}

enum RowKind {
    Eq(f64),
    Le(f64),
    Ge(f64),
}

fn standard_form(lp: &LinearProgram, feas_tol: f64) -> Prepared {
    let n = lp.n_vars;
    let mut rows: Vec<(Vec<(usize, f64)>, RowKind)> = Vec::new();
    for row in &lp.equalities {
        rows.push((row.coeffs.clone(), RowKind::Eq(row.rhs)));
    }
    for row in &lp.ranges {
        if row.lower == row.upper {
            rows.push((row.coeffs.clone(), RowKind::Eq(row.upper)));
            continue;
        }
        if row.upper.is_finite() {
            rows.push((row.coeffs.clone(), RowKind::Le(row.upper)));
        }
        if row.lower.is_finite() {
            rows.push((row.coeffs.clone(), RowKind::Ge(row.lower)));
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut kinds = vec![ColumnKind::Structural; n];
    let mut b = Vec::new();
    let mut basis = Vec::new();
    let mut pending_artificial = Vec::new();
    for (coeffs, kind) in rows {
        let coeffs: Vec<(usize, f64)> = coeffs.into_iter().filter(|(_, a)| *a != 0.0).collect();
        let scale = coeffs.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max);
        let (rhs, slack_sign) = match kind {
            RowKind::Eq(v) => (v, 0.0),
            RowKind::Le(v) => (v, 1.0),
            RowKind::Ge(v) => (v, -1.0),
        };
        if scale == 0.0 {
            // 0 = rhs, 0 <= rhs or 0 >= rhs.
            let violated = match slack_sign {
                s if s == 0.0 => rhs.abs() > feas_tol,
                s if s > 0.0 => rhs < -feas_tol,
                _ => rhs > feas_tol,
            };
            if violated {
                return Prepared::TriviallyInfeasible;
            }
            continue;
        }
        let i = b.len();
        let mut rhs = rhs / scale;
        let flip = if rhs < 0.0 { -1.0 } else { 1.0 };
        rhs *= flip;
        for (j, a) in &coeffs {
            columns[*j].push((i, flip * a / scale));
        }
        b.push(rhs);
        if slack_sign != 0.0 {
            let coef = flip * slack_sign;
            columns.push(vec![(i, coef)]);
            kinds.push(ColumnKind::Slack);
            if coef > 0.0 {
                basis.push(Some(columns.len() - 1));
                continue;
            }
        }
        basis.push(None);
        pending_artificial.push(i);
    }
    for i in pending_artificial {
        columns.push(vec![(i, 1.0)]);
        kinds.push(ColumnKind::Artificial);
        basis[i] = Some(columns.len() - 1);
    }
    Prepared::Form(StandardForm {
        m: b.len(),
        columns,
        kinds,
        b,
        initial_basis: basis.into_iter().map(|c| c.expect("every row has a basic column")).collect(),
    })
}

struct Tableau<'a> {
    form: &'a StandardForm,
    opts: &'a SimplexOptions,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major dense `B^{-1}`.
    binv: Vec<f64>,
    x_b: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    Failed,
}

impl<'a> Tableau<'a> {
    fn new(form: &'a StandardForm, opts: &'a SimplexOptions) -> Self {
        let m = form.m;
        let mut is_basic = vec![false; form.columns.len()];
        for &j in &form.initial_basis {
            is_basic[j] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Self {
            form,
            opts,
            basis: form.initial_basis.clone(),
            is_basic,
            binv,
            x_b: form.b.clone(),
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn m(&self) -> usize {
        self.form.m
    }

    /// `B^{-1} A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let mut u = vec![0.0; m];
        for &(k, a) in &self.form.columns[j] {
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += self.binv[i * m + k] * a;
            }
        }
        u
    }

    /// `c_B^T B^{-1}`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, r) in y.iter_mut().zip(row) {
                    *yk += cb * r;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j]
            - self.form.columns[j]
                .iter()
                .map(|&(k, a)| y[k] * a)
                .sum::<f64>()
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.x_b)
            .map(|(&j, &v)| cost[j] * v)
            .sum()
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[f64]) {
        let m = self.m();
        let piv = u[row];
        let theta = self.x_b[row] / piv;
        for i in 0..m {
            if i != row && u[i] != 0.0 {
                self.x_b[i] -= theta * u[i];
            }
        }
        self.x_b[row] = theta;
        let (before, rest) = self.binv.split_at_mut(row * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (i, chunk) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let i = if i < row { i } else { i + 1 };
            let factor = u[i];
            if factor != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= factor * p;
                }
            }
        }
        let leaving = self.basis[row];
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Recomputes `B^{-1}`. A basis that is singular in floating point is
    /// repaired once by swapping each dependent column for the unit column
    /// of a row left without a pivot; the swapped-in columns take the
    /// (tiny) residual of their rows as values.
    fn refactor(&mut self) -> bool {
        match self.factor() {
            Ok(()) => true,
            Err(pairs) => {
                for (pos, row) in pairs {
                    let unit = self.form.initial_basis[row];
                    self.is_basic[self.basis[pos]] = false;
                    self.is_basic[unit] = true;
                    self.basis[pos] = unit;
                }
                self.factor().is_ok()
            }
        }
    }

    /// Gauss-Jordan elimination with partial pivoting over unused rows.
    /// On failure returns `(basis position, unpivoted row)` pairs.
    fn factor(&mut self) -> Result<(), Vec<(usize, usize)>> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (col, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.form.columns[j] {
                a[i * m + col] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        let mut pivot_row = vec![usize::MAX; m];
        let mut used = vec![false; m];
        let mut deficient = Vec::new();
        for col in 0..m {
            let (mut best, mut best_abs) = (usize::MAX, 0.0);
            for r in (0..m).filter(|&r| !used[r]) {
                let v = a[r * m + col].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < 1e-13 {
                deficient.push(col);
                continue;
            }
            used[best] = true;
            pivot_row[col] = best;
            let p = a[best * m + col];
            for k in 0..m {
                a[best * m + k] /= p;
                inv[best * m + k] /= p;
            }
            for r in 0..m {
                if r != best {
                    let f = a[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[best * m + k];
                            inv[r * m + k] -= f * inv[best * m + k];
                        }
                    }
                }
            }
        }
        if !deficient.is_empty() {
            let free = (0..m).filter(|&r| !used[r]);
            return Err(deficient.into_iter().zip(free).collect());
        }
        // Row `col` of B^{-1} is the row that pivoted on basis position `col`.
        let mut binv = vec![0.0; m * m];
        for (col, &r) in pivot_row.iter().enumerate() {
            binv[col * m..(col + 1) * m].copy_from_slice(&inv[r * m..(r + 1) * m]);
        }
        self.binv = binv;
        let mut x = vec![0.0; m];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..m).map(|k| self.binv[i * m + k] * self.form.b[k]).sum();
        }
        self.x_b = x;
        self.since_refactor = 0;
        Ok(())
    }

    /// `x_B >= -tol` and `B x_B = b` to within the feasibility tolerance.
    fn basis_is_accurate(&self) -> bool {
        let tol = self.opts.feasibility_tol;
        let mut r = self.form.b.clone();
        for (&j, &v) in self.basis.iter().zip(&self.x_b) {
            for &(i, a) in &self.form.columns[j] {
                r[i] -= a * v;
            }
        }
        self.x_b.iter().all(|v| *v >= -tol) && r.iter().all(|v| v.abs() <= tol)
    }

    /// Phase-one duals `y` with `y^T b > 0` and `y^T A_j <= 0` on every
    /// non-artificial column prove `A x = b, x >= 0` infeasible.
    fn farkas_certificate(&self, phase_one_cost: &[f64]) -> bool {
        let y = self.duals(phase_one_cost);
        let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let yb: f64 = y.iter().zip(&self.form.b).map(|(a, b)| a * b).sum();
        let tol = self.opts.optimality_tol * scale;
        yb > self.opts.feasibility_tol * scale
            && (0..self.form.columns.len())
                .filter(|&j| self.form.kinds[j] != ColumnKind::Artificial)
                .all(|j| self.form.columns[j].iter().map(|&(k, a)| y[k] * a).sum::<f64>() <= tol)
    }

    fn iteration_cap(&self) -> usize {
        self.opts
            .max_iterations
            .unwrap_or(200 * (self.m() + self.form.columns.len()) + 1000)
    }

    fn run_phase(&mut self, cost: &[f64], barred: &dyn Fn(usize) -> bool, phase_two: bool) -> PhaseOutcome {
        let tol_d = 1e-10;
        let mut bland = false;
        let mut stalled = 0usize;
        let mut last_obj = self.objective(cost);
        loop {
            if self.iterations >= self.iteration_cap() {
                return PhaseOutcome::Failed;
            }
            if self.since_refactor >= self.opts.refactor_every {
                if !self.refactor() {
                    return PhaseOutcome::Failed;
                }
                for v in self.x_b.iter_mut() {
                    if *v < 0.0 && *v > -self.opts.feasibility_tol {
                        *v = 0.0;
                    }
                }
            }
            let y = self.duals(cost);
            let mut entering = None;
            let mut best = -tol_d;
            for j in 0..self.form.columns.len() {
                if self.is_basic[j] || barred(j) {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return PhaseOutcome::Optimal;
            };
            let u = self.ftran(q);
            let Some(row) = self.ratio_test(&u, bland, phase_two) else {
                return PhaseOutcome::Unbounded;
            };
            self.pivot(row, q, &u);
            let obj = self.objective(cost);
            if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled >= self.opts.stall_limit {
                    bland = true;
                }
            }
            last_obj = obj;
        }
    }

    /// Dual simplex pivots on a dual-feasible basis until every basic value
    /// is at least `-feasibility_tol`. Fails when a negative row has no
    /// admissible entering column (the basis cannot be repaired).
    fn restore_feasibility(&mut self, cost: &[f64], barred: &dyn Fn(usize) -> bool) -> bool {
        let m = self.m();
        let tol = self.opts.feasibility_tol;
        for _ in 0..2 * m + 10 {
            let worst = self
                .x_b
                .iter()
                .enumerate()
                .filter(|(_, v)| **v < -tol)
                .min_by(|a, b| a.1.total_cmp(b.1));
            let Some((r, _)) = worst else {
                return true;
            };
            let y = self.duals(cost);
            let row = &self.binv[r * m..(r + 1) * m];
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..self.form.columns.len() {
                if self.is_basic[j] || barred(j) {
                    continue;
                }
                let alpha: f64 = self.form.columns[j].iter().map(|&(k, a)| row[k] * a).sum();
                if alpha < -self.opts.pivot_tol {
                    let ratio = self.reduced_cost(cost, &y, j).max(0.0) / -alpha;
                    let better = match best {
                        None => true,
                        Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && -alpha > ba),
                    };
                    if better {
                        best = Some((j, ratio, -alpha));
                    }
                }
            }
            let Some((q, _, _)) = best else {
                return false;
            };
            let u = self.ftran(q);
            self.pivot(r, q, &u);
        }
        false
    }

    /// Harris-style two-pass ratio test; Bland mode takes the smallest basic index among ties.
    fn ratio_test(&self, u: &[f64], bland: bool, phase_two: bool) -> Option<usize> {
        let ptol = self.opts.pivot_tol;
        // Basic artificials left at zero after phase one must never grow.
        if phase_two {
            let mut pick: Option<(usize, f64)> = None;
            for (i, &j) in self.basis.iter().enumerate() {
                if self.form.kinds[j] == ColumnKind::Artificial && u[i].abs() > ptol {
                    if pick.is_none_or(|(_, a)| u[i].abs() > a) {
                        pick = Some((i, u[i].abs()));
                    }
                }
            }
            if let Some((i, _)) = pick {
                return Some(i);
            }
        }
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..u.len() {
                if u[i] > ptol {
                    let ratio = self.x_b[i].max(0.0) / u[i];
                    let better = match best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < br - 1e-12 * (1.0 + br)
                                || (ratio <= br + 1e-12 * (1.0 + br) && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            return best.map(|(i, _)| i);
        }
        let slack = self.opts.feasibility_tol * 0.1;
        let mut theta_max = f64::INFINITY;
        for i in 0..u.len() {
            if u[i] > ptol {
                theta_max = theta_max.min((self.x_b[i].max(0.0) + slack) / u[i]);
            }
        }
        if theta_max == f64::INFINITY {
            return None;
        }
        let mut best: Option<usize> = None;
        for i in 0..u.len() {
            if u[i] > ptol && self.x_b[i].max(0.0) / u[i] <= theta_max {
                if best.is_none_or(|b| u[i] > u[b]) {
                    best = Some(i);
                }
            }
        }
        best
    }

    /// Pivots basic artificials out of the basis where a structural or slack column allows it.
    fn drive_out_artificials(&mut self) {
        let m = self.m();
        for row in 0..m {
            if self.form.kinds[self.basis[row]] != ColumnKind::Artificial {
                continue;
            }
            let binv_row: Vec<f64> = self.binv[row * m..(row + 1) * m].to_vec();
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..self.form.columns.len() {
                if self.is_basic[j] || self.form.kinds[j] == ColumnKind::Artificial {
                    continue;
                }
                let v: f64 = self.form.columns[j]
                    .iter()
                    .map(|&(k, a)| binv_row[k] * a)
                    .sum();
                if v.abs() > 1e-9 && pick.is_none_or(|(_, a)| v.abs() > a) {
                    pick = Some((j, v.abs()));
                }
            }
            if let Some((j, _)) = pick {
                self.x_b[row] = 0.0;
                let u = self.ftran(j);
                self.pivot(row, j, &u);
            }
        }
    }
}

fn failure(lp: &LinearProgram, status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        objective: f64::NAN,
        primal: vec![0.0; lp.n_vars],
        max_residual: f64::NAN,
        iterations,
    }
}

pub(crate) fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> LpSolution {
    if lp.validate().is_err() {
        return failure(lp, LpStatus::NumericalFailure, 0);
    }
    let form = match standard_form(lp, opts.feasibility_tol) {
        Prepared::Form(f) => f,
        Prepared::TriviallyInfeasible => return failure(lp, LpStatus::Infeasible, 0),
    };
    let ncols = form.columns.len();
    let mut tab = Tableau::new(&form, opts);

    // Phase one: minimise the sum of artificials.
    let has_artificials = form.kinds.contains(&ColumnKind::Artificial);
    if has_artificials {
        let cost1: Vec<f64> = form
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        let kinds = &form.kinds;
        let never_reenter = |j: usize| kinds[j] == ColumnKind::Artificial;
        match tab.run_phase(&cost1, &never_reenter, false) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded | PhaseOutcome::Failed => {
                return failure(lp, LpStatus::NumericalFailure, tab.iterations)
            }
        }
        if !tab.refactor() {
            return failure(lp, LpStatus::NumericalFailure, tab.iterations);
        }
        let infeasibility = tab.objective(&cost1);
        if infeasibility > opts.feasibility_tol {
            // Only an accurately solved basis certifies infeasibility.
            let status = if tab.basis_is_accurate() || tab.farkas_certificate(&cost1) {
                LpStatus::Infeasible
            } else {
                LpStatus::NumericalFailure
            };
            return failure(lp, status, tab.iterations);
        }
        tab.drive_out_artificials();
    }

    // Phase two on the scaled original costs.
    let scale = lp.objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost2 = vec![0.0; ncols];
    if scale > 0.0 {
        for (j, c) in lp.objective.iter().enumerate() {
            cost2[j] = sign * c / scale;
        }
    }
    let kinds = &form.kinds;
    let barred = |j: usize| kinds[j] == ColumnKind::Artificial;
    match tab.run_phase(&cost2, &barred, true) {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => return failure(lp, LpStatus::Unbounded, tab.iterations),
        PhaseOutcome::Failed => return failure(lp, LpStatus::NumericalFailure, tab.iterations),
    }
    if !tab.refactor() {
        return failure(lp, LpStatus::NumericalFailure, tab.iterations);
    }
    // Drift in B^{-1} can leave basic values slightly negative after the
    // refactor; repair with dual pivots, then re-optimise.
    for _ in 0..3 {
        if tab.x_b.iter().all(|v| *v >= -opts.feasibility_tol) {
            break;
        }
        if !tab.restore_feasibility(&cost2, &barred) || !tab.refactor() {
            return failure(lp, LpStatus::NumericalFailure, tab.iterations);
        }
        match tab.run_phase(&cost2, &barred, true) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => return failure(lp, LpStatus::Unbounded, tab.iterations),
            PhaseOutcome::Failed => return failure(lp, LpStatus::NumericalFailure, tab.iterations),
        }
        if !tab.refactor() {
            return failure(lp, LpStatus::NumericalFailure, tab.iterations);
        }
    }

    let mut primal = vec![0.0; lp.n_vars];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < lp.n_vars {
            let v = tab.x_b[i];
            primal[j] = if v < 0.0 && v > -opts.feasibility_tol { 0.0 } else { v };
        }
    }
    let max_residual = lp.max_residual(&primal);
    let status = if lp.max_scaled_residual(&primal) <= opts.feasibility_tol {
        LpStatus::Optimal
    } else {
        LpStatus::NumericalFailure
    };
    LpSolution {
        status,
        objective: lp.objective_value(&primal),
        primal,
        max_residual,
        iterations: tab.iterations,
    }
}

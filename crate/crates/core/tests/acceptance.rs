//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use cilp::chains::*;
use cilp::lp::{assemble_outer_lp, LpMode, LpSolver, LpStatus, Sense, SimplexSolver};
use cilp::model::{CilpModel, Weight};
use cilp::objective::{Objective, SignCertificate};
use cilp::oracle::{
    exact_occupation, exact_stationary, simulate_model_exit, SimulationOptions,
};
use cilp::scheme_a::{bound_value, optimal_point, sweep, BoundResult};
use cilp::scheme_b::{default_image_window, image_lower, minimal_point_lower, ImageLowerBound, MinimalPointApprox};
use cilp::solve::SolveSettings;
use cilp::truncation::{build_truncation, difference_mass, measure_tv, restrict, BoundedMeasure};
use cilp::OutputId;
use common::*;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Windows `{0, ..., n-1}` of the M/M/1 model under `w = x^3`.
const MM1_WINDOWS: [u64; 5] = [10, 20, 30, 40, 50];

fn mm1_schedule() -> Vec<u64> {
    MM1_WINDOWS.iter().map(|n| n * n * n).collect()
}

const WALK_SCHEDULE: [u64; 4] = [100, 400, 900, 2500];

fn geometric_half(n: i64) -> BoundedMeasure {
    let model = mm1_model();
    BoundedMeasure::from_model(&model, (0..n).map(|x| (s(x), 0.5f64.powi(x as i32 + 1)))).unwrap()
}

fn c1_solver_soundness() -> Check {
    let start = Instant::now();
    let solver = SimplexSolver::default();
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let lp = random_lp(0x5eed_0000 + seed);
        let sol = solver.solve(&lp);
        ensure!(sol.status == LpStatus::Optimal, "seed {seed}: status {:?}", sol.status);
        let oracle = vertex_enumeration(&lp).ok_or(format!("seed {seed}: no feasible vertex"))?;
        let rel = (sol.objective - oracle).abs() / oracle.abs().max(1.0);
        ensure!(rel <= 1e-8, "seed {seed}: simplex {} vs vertices {oracle}", sol.objective);
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1} s");
    Ok(format!("500 LPs, worst relative error {worst:.1e}, {secs:.2} s"))
}

fn outer_residual(model: &dyn CilpModel, point: &BoundedMeasure, schedule: &[u64]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for &r in schedule {
        let trunc = build_truncation(model, r).map_err(|e| e.to_string())?;
        let lp = assemble_outer_lp(model, &trunc, &Objective::zero(), Sense::Minimize).map_err(|e| e.to_string())?;
        let restricted = restrict(point, &trunc);
        let x: Vec<f64> = trunc.states().iter().map(|x| restricted.mass_at(x)).collect();
        let res = lp.max_residual(&x);
        ensure!(res <= 1e-8, "r = {r}: residual {res:e}");
        worst = worst.max(res);
    }
    Ok(worst)
}

fn finite_birth_death() -> CtChain {
    family_birth_death(vec![1.0, 2.0, 0.5, 1.5, 1.0], vec![2.0, 1.0, 3.0, 1.0, 2.0]).unwrap()
}

fn finite_matrix() -> DtChain {
    family_dt_matrix(vec![
        vec![0.1, 0.6, 0.3, 0.0],
        vec![0.4, 0.2, 0.0, 0.4],
        vec![0.0, 0.5, 0.25, 0.25],
        vec![0.3, 0.0, 0.3, 0.4],
    ])
    .unwrap()
}

/// Stationary model whose moment bound is the exact `pi(w)`.
fn tight_stationary(build: impl Fn(f64) -> MarkovModel) -> (MarkovModel, BoundedMeasure) {
    let probe = build(1.0);
    let pi = exact_stationary(&probe).unwrap().unique().unwrap().clone();
    let model = build(pi.w_moment());
    (model, pi)
}

fn c2_outer_approximation() -> Check {
    let mm1 = outer_residual(&mm1_model(), &geometric_half(400), &[125, 1000, 8000, 42875, 125_000])?;
    let (bd, bd_pi) = tight_stationary(|c| ct_stationary(&finite_birth_death(), Weight::Monomial(2), c).unwrap());
    let bd_res = outer_residual(&bd, &bd_pi, &[1, 2, 5, 10, 26])?;
    let (mx, mx_pi) = tight_stationary(|c| dt_stationary(&finite_matrix(), Weight::Monomial(1), c).unwrap());
    let mx_res = outer_residual(&mx, &mx_pi, &[1, 2, 3, 4, 5])?;
    Ok(format!(
        "worst residuals: M/M/1 {mm1:.1e}, birth-death {bd_res:.1e}, 4-state matrix {mx_res:.1e}"
    ))
}

fn mm1_mean_sweep(workers: usize) -> Vec<BoundResult> {
    let settings = SolveSettings::default().with_workers(workers);
    sweep(&mm1_model(), &Objective::monomial(1, 3).unwrap(), &mm1_schedule(), &settings)
        .unwrap()
        .into_iter()
        .map(|row| row.bound.unwrap_or_else(|| panic!("r = {}: {:?}", row.r, row.error)))
        .collect()
}

fn c3_scheme_a() -> Check {
    let start = Instant::now();
    let rows = mm1_mean_sweep(0);
    let mut gaps = Vec::new();
    for b in &rows {
        let (l, u) = b.require_two_sided().map_err(|e| e.to_string())?;
        ensure!(l <= 1.0 && 1.0 <= u, "r = {}: [{l}, {u}] misses the mean", b.r);
        gaps.push(b.gap.unwrap());
    }
    ensure!(gaps.windows(2).all(|w| w[1] < w[0]), "gaps not decreasing: {gaps:?}");
    let last = rows.last().unwrap();
    ensure!(last.window_size == 50, "final window has {} states", last.window_size);
    let gap = last.gap.unwrap();
    let mid = last.midpoint.unwrap();
    ensure!(gap <= 0.06, "final gap {gap}");
    ensure!((mid - 1.0).abs() <= gap / 2.0, "midpoint {mid} further than gap/2 from 1");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 30.0, "took {secs:.1} s");
    Ok(format!(
        "gaps {}; final [{:.6}, {:.6}], midpoint {mid:.6}, {secs:.2} s",
        gaps.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(" > "),
        last.l_corrected.unwrap(),
        last.u_corrected.unwrap()
    ))
}

fn saturated_check(model: &MarkovModel, exact: &BoundedMeasure, label: &str) -> Result<f64, String> {
    let settings = SolveSettings::default();
    let states: Vec<_> = exact.iter().map(|(x, _)| x.clone()).collect();
    let trunc = build_truncation(model, 10_000).map_err(|e| e.to_string())?;
    ensure!(
        trunc.len() == model.finite_states().unwrap().len(),
        "{label}: window does not cover the space"
    );
    let mut objectives: Vec<Objective> = states.iter().map(|x| Objective::indicator(x.clone())).collect();
    objectives.push(Objective::mass());
    objectives.push(
        Objective::custom("x", |x| x.first() as f64)
            .with_sign(SignCertificate::NonNegative)
            .with_support(states.clone()),
    );
    let mut worst = 0.0f64;
    for f in &objectives {
        let target = exact.integrate(|x| f.eval(x));
        let b = bound_value(model, &trunc, f, &settings).map_err(|e| e.to_string())?;
        let err = (b.l_raw - target).abs().max((b.u_raw - target).abs());
        ensure!(err <= 1e-8, "{label}, {}: [{}, {}] vs {target}", f.name(), b.l_raw, b.u_raw);
        worst = worst.max(err);
    }
    Ok(worst)
}

fn c4_saturation() -> Check {
    let (bd, bd_pi) = tight_stationary(|c| ct_stationary(&finite_birth_death(), Weight::Monomial(2), c).unwrap());
    let a = saturated_check(&bd, &bd_pi, "birth-death stationary")?;
    let (mx, mx_pi) = tight_stationary(|c| dt_stationary(&finite_matrix(), Weight::Monomial(1), c).unwrap());
    let b = saturated_check(&mx, &mx_pi, "matrix stationary")?;

    let ruin = |c: f64| {
        let chain = family_random_walk(0.4).unwrap().with_initial(vec![(s(5), 1.0)]).unwrap();
        dt_exit(&chain, Domain::interval(1, Some(9)).unwrap(), Weight::Monomial(1), c).unwrap()
    };
    let nu = exact_occupation(&ruin(1.0)).unwrap().occupation;
    let dt = saturated_check(&ruin(nu.w_moment()), &nu, "gambler's ruin exit")?;

    let ct_ruin = |c: f64| {
        let chain = family_mm1(1.0, 1.5).unwrap().with_initial(vec![(s(2), 1.0)]).unwrap();
        ct_exit(&chain, Domain::interval(1, Some(8)).unwrap(), 2.0, c).unwrap()
    };
    let nu = exact_occupation(&ct_ruin(1.0)).unwrap().occupation;
    let ct = saturated_check(&ct_ruin(nu.w_moment()), &nu, "M/M/1 exit")?;
    Ok(format!(
        "worst |bound - exact|: stationary {:.1e}, exit {:.1e}",
        a.max(b),
        dt.max(ct)
    ))
}

struct WalkRun {
    approx: Vec<MinimalPointApprox>,
    images: Vec<ImageLowerBound>,
    secs: f64,
}

fn walk_scheme_b(workers: usize) -> WalkRun {
    let start = Instant::now();
    let model = walk_exit_model();
    let settings = SolveSettings::default().with_workers(workers);
    let mut approx = Vec::new();
    let mut images = Vec::new();
    for r in WALK_SCHEDULE {
        let trunc = build_truncation(&model, r).unwrap();
        approx.push(minimal_point_lower(&model, &trunc, &settings).unwrap());
        let window = default_image_window(&model, &trunc);
        images.push(image_lower(&model, &trunc, &window, &settings).unwrap());
    }
    WalkRun {
        approx,
        images,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn c5_scheme_b() -> Check {
    let oracle = exact_occupation(&walk_exit_finite(300)).map_err(|e| e.to_string())?;
    let nu = &oracle.occupation;
    let sim = simulate_model_exit(
        &walk_exit_model(),
        &SimulationOptions {
            n_paths: 100_000,
            seed: 20_240_601,
            step_cap: 1_000_000,
            workers: 4,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure!(sim.censored.mean == 0.0, "censored paths: {}", sim.censored.mean);
    let mut worst_sigma = 0.0f64;
    for x in 1..=12 {
        let est = sim.occupation_at(&s(x));
        let exact = nu.mass_at(&s(x));
        ensure!(est.within(exact, 3.0), "x = {x}: Monte Carlo {est:?} vs linear solve {exact}");
        worst_sigma = worst_sigma.max((est.mean - exact).abs() / est.std_error);
    }

    let run = walk_scheme_b(4);
    let mut gammas = Vec::new();
    for a in &run.approx {
        for (x, l) in a.lower.iter() {
            ensure!(l <= nu.mass_at(x) + 1e-7, "r = {}: l({x}) = {l} > {}", a.r, nu.mass_at(x));
        }
        let tv = difference_mass(
            nu.iter().map(|(x, m)| (x.clone(), m)),
            a.lower.iter().map(|(x, m)| (x.clone(), m)),
        );
        ensure!(tv <= a.gamma + 1e-7, "r = {}: TV {tv} > Gamma {}", a.r, a.gamma);
        gammas.push(a.gamma);
    }
    ensure!(gammas.windows(2).all(|w| w[1] < w[0]), "Gamma not decreasing: {gammas:?}");
    let last = *gammas.last().unwrap();
    ensure!(last <= 0.05, "final Gamma {last}");
    ensure!(run.secs < 120.0, "took {:.1} s", run.secs);
    Ok(format!(
        "Gamma {}; Monte Carlo within {worst_sigma:.2} sigma on x = 1..12; {:.2} s with 4 workers",
        gammas.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(" > "),
        run.secs
    ))
}

fn c6_image() -> Check {
    let oracle = exact_occupation(&walk_exit_finite(300)).map_err(|e| e.to_string())?;
    let run = walk_scheme_b(4);
    let zero = OutputId::scalar(0);
    let mut at_zero = Vec::new();
    let mut comparisons = Vec::new();
    for (img, approx) in run.images.iter().zip(&run.approx) {
        ensure!(img.window == vec![zero.clone()], "r = {}: window {:?}", img.r, img.window);
        let tv = difference_mass(
            oracle.exit.entries().iter().cloned(),
            img.entries.iter().cloned(),
        );
        ensure!(tv <= img.mass_gap + 1e-7, "r = {}: TV {tv} > mass gap {}", img.r, img.mass_gap);
        at_zero.push(img.entries[0].1);
        comparisons.push(format!("{:.2e}/{:.2e}", img.mass_gap, approx.g_gap));
    }
    ensure!(at_zero.windows(2).all(|w| w[1] > w[0]), "l_psi(0) not increasing: {at_zero:?}");
    let last = *at_zero.last().unwrap();
    ensure!(last > 0.99, "final l_psi(0) = {last}");
    Ok(format!(
        "l_psi(0) {}; mass gap / (1 - l(g)) per r: {}",
        at_zero.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>().join(" < "),
        comparisons.join(", ")
    ))
}

fn c7_relaxation() -> Check {
    let model = mm1_model().with_bounded_inflow_slack(2.0);
    let f = Objective::monomial(1, 3).unwrap();
    let standard = SolveSettings::default();
    let relaxed = SolveSettings::default().with_mode(LpMode::Relaxed);
    let mut last = None;
    for r in mm1_schedule() {
        let trunc = build_truncation(&model, r).map_err(|e| e.to_string())?;
        let a = bound_value(&model, &trunc, &f, &standard).map_err(|e| e.to_string())?;
        let b = bound_value(&model, &trunc, &f, &relaxed).map_err(|e| e.to_string())?;
        ensure!(b.l_raw <= a.l_raw + 1e-9, "r = {r}: relaxed min {} > standard {}", b.l_raw, a.l_raw);
        ensure!(b.u_raw >= a.u_raw - 1e-9, "r = {r}: relaxed max {} < standard {}", b.u_raw, a.u_raw);
        last = Some((a, b));
    }
    let (a, b) = last.unwrap();
    for (label, res) in [("standard", &a), ("relaxed", &b)] {
        let (l, u) = res.require_two_sided().map_err(|e| e.to_string())?;
        ensure!((l - 1.0).abs() <= 0.02 && (u - 1.0).abs() <= 0.02, "{label}: [{l}, {u}]");
    }
    Ok(format!(
        "final standard [{:.5}, {:.5}], relaxed [{:.5}, {:.5}]",
        a.l_corrected.unwrap(),
        a.u_corrected.unwrap(),
        b.l_corrected.unwrap(),
        b.u_corrected.unwrap()
    ))
}

fn c8_determinism() -> Check {
    let one = numeric_json(&mm1_mean_sweep(1));
    let four = numeric_json(&mm1_mean_sweep(4));
    ensure!(one == four, "Scheme A sweep differs between 1 and 4 workers");
    let a = walk_scheme_b(1);
    let b = walk_scheme_b(4);
    ensure!(
        numeric_json(&a.approx) == numeric_json(&b.approx),
        "Scheme B lower measures differ between 1 and 4 workers"
    );
    ensure!(
        numeric_json(&a.images) == numeric_json(&b.images),
        "Scheme B images differ between 1 and 4 workers"
    );
    Ok(format!(
        "{} + {} bytes of JSON identical for 1 and 4 workers",
        one.len(),
        numeric_json(&a.approx).len() + numeric_json(&a.images).len()
    ))
}

fn c9_ergodic_selection() -> Check {
    let chain = family_dt_matrix(vec![
        vec![0.5, 0.5, 0.0, 0.0, 0.0],
        vec![0.3, 0.7, 0.0, 0.0, 0.0],
        vec![0.25, 0.0, 0.5, 0.25, 0.0],
        vec![0.0, 0.0, 0.0, 0.2, 0.8],
        vec![0.0, 0.0, 0.0, 0.4, 0.6],
    ])
    .unwrap();
    let model = dt_stationary(&chain, Weight::Monomial(1), 10.0).unwrap();
    let oracle = exact_stationary(&model).map_err(|e| e.to_string())?;
    ensure!(oracle.classes.len() == 2, "expected two closed classes");
    let c1 = &oracle.classes[0];
    let trunc = build_truncation(&model, 100).map_err(|e| e.to_string())?;
    let f = Objective::set_indicator("1_C1", c1.states.clone());
    let point = optimal_point(&model, &trunc, &f, Sense::Maximize, &SolveSettings::default())
        .map_err(|e| e.to_string())?;
    let tv = measure_tv(&point, &c1.distribution);
    ensure!(tv <= 1e-6, "TV {tv}");
    Ok(format!("TV to the C1 ergodic distribution {tv:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("solver soundness against vertex enumeration", c1_solver_soundness),
        ("outer approximation contains restricted feasible points", c2_outer_approximation),
        ("Scheme A sandwich and convergence on the M/M/1 mean", c3_scheme_a),
        ("finite saturation exactness", c4_saturation),
        ("Scheme B validity on the biased walk", c5_scheme_b),
        ("image lower bounds on the biased walk", c6_image),
        ("relaxed LP dominance", c7_relaxation),
        ("determinism across worker counts", c8_determinism),
        ("ergodic-class selection", c9_ergodic_selection),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

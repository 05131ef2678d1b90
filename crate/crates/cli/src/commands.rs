use crate::report::*;
use crate::{exit_code, Failure, RunArgs, EXIT_VALIDATION};
use cilp::chains::MarkovModel;
use cilp::config::{parse_config, RunConfig};
use cilp::model::{validate_assumptions, CheckStatus, CilpModel};
use cilp::oracle::simulate_model_exit;
use cilp::scheme_a::sweep as sweep_a;
use cilp::scheme_b::{default_image_window, image_lower, minimal_point_lower};
use cilp::solve::SolveSettings;
use cilp::truncation::build_truncation;
use std::fs;
use std::path::PathBuf;

struct Run {
    config: RunConfig,
    model: MarkovModel,
    settings: SolveSettings,
    dir: PathBuf,
}

impl Run {
    fn load(args: &RunArgs) -> Result<Run, Failure> {
        let text = fs::read_to_string(&args.config)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.config.display())))?;
        let config = parse_config(&text).map_err(|e| Failure::config(format!("{}: {e}", args.config.display())))?;
        if let Some(tol) = args.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Failure::config(format!("--tolerance must be positive, got {tol}")));
            }
        }
        let model = config.build_model(args.relaxed)?;
        let settings = config.solve_settings(args.workers, args.relaxed, args.tolerance);
        let dir = args
            .out
            .clone()
            .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("cilp-out"));
        fs::create_dir_all(&dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Run {
            config,
            model,
            settings,
            dir,
        })
    }

    fn info(&self, command: &str) -> RunInfo {
        RunInfo {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            workers: self.settings.workers,
            mode: self.settings.mode,
            moment_bound: self.model.moment_bound(),
        }
    }
}

pub fn validate(args: &RunArgs) -> Result<u8, Failure> {
    let run = Run::load(args)?;
    let report = validate_assumptions(&run.model, run.config.horizon())?;
    for entry in &report.checks {
        let status = match &entry.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail { witnesses, detail } => format!("FAIL ({detail}; witnesses {witnesses:?})"),
            CheckStatus::NotCheckable { reason } => format!("not checkable ({reason})"),
            CheckStatus::Certified { by } => format!("certified by {by}"),
        };
        println!("{:<24} {status}", entry.check);
    }
    let passed = report.passed();
    write_json(
        &run.dir,
        "validation.json",
        &ValidationFile {
            run: run.info("validate"),
            passed,
            report,
        },
    )?;
    Ok(if passed { 0 } else { EXIT_VALIDATION })
}

fn run_bounds(run: &Run) -> Result<u8, Failure> {
    let objectives = run.config.build_objectives()?;
    let mut records = Vec::new();
    let mut code = 0;
    for f in &objectives {
        for row in sweep_a(&run.model, f, &run.config.schedule, &run.settings)? {
            match (row.bound, row.failure) {
                (Some(b), _) => {
                    match (b.l_corrected, b.u_corrected) {
                        (Some(l), Some(u)) => println!("r = {:<8} {:<10} [{l:.8}, {u:.8}]", b.r, b.objective),
                        _ => println!("r = {:<8} {:<10} one-sided: {:?} / {:?}", b.r, b.objective, b.l_corrected, b.u_corrected),
                    }
                    records.push(BoundRecord::ok(b));
                }
                (None, failure) => {
                    let message = row.error.unwrap_or_default();
                    eprintln!("r = {}: {}: {message}", row.r, f.name());
                    code = code.max(failure.as_ref().map_or(crate::EXIT_MODEL, exit_code));
                    records.push(BoundRecord::failed(row.r, f.name(), message));
                }
            }
        }
    }
    write_bounds(
        &run.dir,
        &BoundFile {
            run: run.info("bound"),
            records,
        },
    )?;
    Ok(code)
}

fn run_minimal(run: &Run, seed: Option<u64>) -> Result<u8, Failure> {
    if !run.config.has_minimal_point() {
        return Err(Failure::config(
            "refusing Scheme B: this stationary model may have several stationary distributions, \
             so its feasible set need not have a minimal point. Set model.unique_stationary = true \
             if the chain is known to have exactly one.",
        ));
    }
    let mut records = Vec::new();
    let mut code = 0;
    for &r in &run.config.schedule {
        let outcome = build_truncation(&run.model, r).and_then(|trunc| {
            let approx = minimal_point_lower(&run.model, &trunc, &run.settings)?;
            let window = run
                .config
                .image_outputs()
                .unwrap_or_else(|| default_image_window(&run.model, &trunc));
            let image = image_lower(&run.model, &trunc, &window, &run.settings)?;
            Ok((approx, image))
        });
        match outcome {
            Ok((approx, image)) => {
                println!(
                    "r = {r:<8} |X_r| = {:<6} Gamma = {:.6e}  image mass gap = {:.6e}",
                    approx.lower.len(),
                    approx.gamma,
                    image.mass_gap
                );
                records.push(MinimalRecord {
                    r,
                    approximation: Some(approx),
                    image: Some(image),
                    error: None,
                });
            }
            Err(e) => {
                eprintln!("r = {r}: {e}");
                code = code.max(exit_code(&e));
                records.push(MinimalRecord {
                    r,
                    approximation: None,
                    image: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let monte_carlo = match run.config.simulation_options(seed, run.settings.workers) {
        Some(opts) => Some(simulate_model_exit(&run.model, &opts)?.into()),
        None => None,
    };
    write_minimal(
        &run.dir,
        &MinimalFile {
            run: run.info("minimal"),
            records,
            monte_carlo,
        },
    )?;
    Ok(code)
}

pub fn bound(args: &RunArgs) -> Result<u8, Failure> {
    let run = Run::load(args)?;
    if !run.config.scheme.includes_a() {
        return Err(Failure::config("`bound` runs Scheme A, but the config selects scheme B only"));
    }
    run_bounds(&run)
}

pub fn minimal(args: &RunArgs) -> Result<u8, Failure> {
    let run = Run::load(args)?;
    if !run.config.scheme.includes_b() {
        return Err(Failure::config("`minimal` runs Scheme B, but the config selects scheme A only"));
    }
    run_minimal(&run, args.seed)
}

pub fn sweep(args: &RunArgs) -> Result<u8, Failure> {
    let run = Run::load(args)?;
    let mut code = 0;
    if run.config.scheme.includes_a() {
        code = code.max(run_bounds(&run)?);
    }
    if run.config.scheme.includes_b() {
        code = code.max(run_minimal(&run, args.seed)?);
    }
    Ok(code)
}

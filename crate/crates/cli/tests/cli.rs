use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

struct Run {
    out: Output,
    dir: PathBuf,
    _tmp: TempDir,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.dir.join(name)).unwrap()).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.dir.join(name)).unwrap()
    }
}

fn cilp(command: &str, config: &Value, extra: &[&str], env: &[(&str, &str)]) -> Run {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("config.json");
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let dir = tmp.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cilp"));
    cmd.arg(command).arg("--config").arg(&path).arg("--out").arg(&dir).args(extra);
    cmd.env_remove("CILP_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    Run {
        out: cmd.output().unwrap(),
        dir,
        _tmp: tmp,
    }
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("solve_ms");
            map.remove("workers");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn records_for<'a>(file: &'a Value, objective: &str) -> Vec<&'a Value> {
    file["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["objective"] == objective)
        .collect()
}

#[test]
fn valid_mm1_config_validates() {
    let run = cilp("validate", &load("mm1_mean.json"), &[], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let report = run.json("validation.json");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["passed"], true);
    assert_eq!(report["report"]["horizon"], 125_000);
}

#[test]
fn negative_rate_is_a_config_error_with_field_path() {
    let mut cfg = load("mm1_mean.json");
    cfg["model"]["chain"]["lambda"] = json!(-1.0);
    let run = cilp("validate", &cfg, &[], &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("model.chain.lambda"), "{}", run.stderr());
}

#[test]
fn objective_outside_w_is_rejected() {
    let mut cfg = load("mm1_mean.json");
    cfg["objectives"] = json!([{"kind": "monomial", "degree": 3}]);
    let run = cilp("bound", &cfg, &[], &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("not in W"), "{}", run.stderr());
    assert!(run.stderr().contains("objectives[0].degree"), "{}", run.stderr());
}

#[test]
fn syntax_error_reports_line() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{\n  \"schema_version\": 1,\n  \"model\": ,\n}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cilp"))
        .args(["validate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cilp"))
        .args(["bound", "--config", "/nonexistent/cilp.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mm1_mean_gap_column_decreases() {
    let run = cilp("bound", &load("mm1_mean.json"), &[], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let file = run.json("bound.json");
    let gaps: Vec<f64> = records_for(&file, "x^1")
        .iter()
        .map(|r| r["gap"].as_f64().unwrap())
        .collect();
    assert_eq!(gaps.len(), 5);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let csv = run.text("bound.csv");
    assert!(csv.starts_with("r,objective,window_size,l_raw,u_raw,l_corrected,u_corrected,gap,midpoint,solve_ms,note"));
    assert_eq!(csv.lines().count(), 1 + 4 * 5);
}

#[test]
fn finite_chain_gap_vanishes_at_saturation() {
    let run = cilp("bound", &load("finite_birth_death.json"), &[], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let file = run.json("bound.json");
    for objective in ["x^1", "1_{4}"] {
        let last = *records_for(&file, objective).last().unwrap();
        assert_eq!(last["r"], 26);
        assert!(last["gap"].as_f64().unwrap() < 1e-9, "{last}");
    }
}

#[test]
fn gamblers_ruin_gamma_within_c_over_r() {
    let run = cilp("minimal", &load("gamblers_ruin.json"), &[], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let file = run.json("minimal.json");
    let c = file["moment_bound"].as_f64().unwrap();
    assert!((c - 125.0).abs() < 1e-9);
    let last = file["records"].as_array().unwrap().last().unwrap();
    let gamma = last["approximation"]["gamma"].as_f64().unwrap();
    assert!(gamma <= c / 1000.0 + 1e-9, "{gamma}");
    let image = &last["image"]["entries"];
    for entry in image.as_array().unwrap() {
        assert!((entry[1].as_f64().unwrap() - 0.5).abs() < 1e-7);
    }
}

#[test]
fn biased_walk_image_at_zero_increases() {
    let mut cfg = load("walk_exit.json");
    cfg["monte_carlo"] = Value::Null;
    let run = cilp("minimal", &cfg, &[], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let file = run.json("minimal.json");
    let at_zero: Vec<f64> = file["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let entries = r["image"]["entries"].as_array().unwrap();
            assert_eq!(entries[0][0], 0);
            entries[0][1].as_f64().unwrap()
        })
        .collect();
    assert!(at_zero.windows(2).all(|w| w[1] > w[0]), "{at_zero:?}");
    let lower = run.text("minimal_lower.csv");
    assert!(lower.starts_with("r,state,lower"));
    assert!(run.text("image.csv").starts_with("r,y,lower"));
}

#[test]
fn unasserted_stationary_model_is_refused() {
    let run = cilp("minimal", &load("two_class.json"), &[], &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("unique_stationary"), "{}", run.stderr());
    assert!(!run.dir.join("minimal.json").exists());
}

#[test]
fn infeasible_moment_bound_is_a_solver_failure_with_partial_results() {
    let mut cfg = load("mm1_mean.json");
    cfg["c"] = json!(0.001);
    let run = cilp("bound", &cfg, &[], &[]);
    assert_eq!(run.code(), 4, "{}", run.stderr());
    let file = run.json("bound.json");
    let records = file["records"].as_array().unwrap();
    assert_eq!(records.len(), 20);
    assert!(records.iter().all(|r| r["error"].as_str().unwrap().contains("infeasible")));
    assert!(run.text("bound.csv").contains("error: "));
}

#[test]
fn inconsistent_kernel_is_a_model_error() {
    let mut cfg = load("two_class.json");
    cfg["model"]["chain"]["matrix"][0] = json!([0.5, 0.4, 0.0, 0.0, 0.0]);
    let run = cilp("validate", &cfg, &[], &[]);
    assert_eq!(run.code(), 3, "{}", run.stderr());
}

#[test]
fn relaxed_mode_without_slack_is_a_config_error() {
    let cfg = json!({
        "schema_version": 1,
        "model": {"chain": {"family": "linear_birth_death", "birth": 1.0, "death": 2.0},
                  "setting": "exit", "domain": {"lower": 1}},
        "w": 2, "c": 1000.0, "schedule": [100],
        "objectives": [{"kind": "mass"}]
    });
    assert_eq!(cilp("bound", &cfg, &[], &[]).code(), 0);
    assert_eq!(cilp("bound", &cfg, &["--relaxed"], &[]).code(), 2);
}

#[test]
fn relaxed_flag_switches_mode() {
    let run = cilp("bound", &load("mm1_mean.json"), &["--relaxed"], &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let file = run.json("bound.json");
    assert_eq!(file["mode"], "relaxed");
    assert_eq!(file["records"][0]["diagnostics"]["mode"], "relaxed");
}

#[test]
fn worker_count_from_env_and_flag() {
    let cfg = load("gamblers_ruin.json");
    let env = cilp("minimal", &cfg, &[], &[("CILP_WORKERS", "3")]);
    assert_eq!(env.json("minimal.json")["workers"], 3);
    let flag = cilp("minimal", &cfg, &["--workers", "2"], &[("CILP_WORKERS", "3")]);
    assert_eq!(flag.json("minimal.json")["workers"], 2);
}

#[test]
fn results_reproduce_across_runs_and_worker_counts() {
    let cfg = load("walk_exit.json");
    let a = cilp("sweep", &cfg, &["--workers", "1", "--seed", "11"], &[]);
    let b = cilp("sweep", &cfg, &["--workers", "4", "--seed", "11"], &[]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    assert_eq!(b.code(), 0, "{}", b.stderr());
    for name in ["bound.json", "minimal.json"] {
        let (mut x, mut y) = (a.json(name), b.json(name));
        strip_timing(&mut x);
        strip_timing(&mut y);
        assert_eq!(x, y, "{name}");
    }
    let mc = &a.json("minimal.json")["monte_carlo"];
    assert_eq!(mc["seed"], 11);
    assert_eq!(mc["n_paths"], 20_000);
}

#[test]
fn tolerance_flag_is_validated() {
    let run = cilp("bound", &load("mm1_mean.json"), &["--tolerance", "-1"], &[]);
    assert_eq!(run.code(), 2);
}

#[test]
fn shipped_configs_all_parse() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let out = Command::new(env!("CARGO_BIN_EXE_cilp"))
            .arg("validate")
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(TempDir::new().unwrap().path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", path.display());
    }
}

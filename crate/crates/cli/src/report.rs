//! Result files. Every JSON file carries `schema_version` and re-parses
//! into the types below; CSV tables are flat projections for plotting.

use crate::Failure;
use cilp::model::ValidationReport;
use cilp::oracle::SimulationResult;
use cilp::scheme_a::{BoundDiagnostics, BoundResult};
use cilp::scheme_b::{ImageLowerBound, MinimalPointApprox};
use cilp::{OutputId, StateId};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub schema_version: u32,
    pub command: String,
    pub workers: usize,
    pub mode: cilp::lp::LpMode,
    pub moment_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationFile {
    #[serde(flatten)]
    pub run: RunInfo,
    pub passed: bool,
    pub report: ValidationReport,
}

/// One `(r, objective)` row of Scheme A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub r: u64,
    pub objective: String,
    pub window_size: Option<usize>,
    pub l_raw: Option<f64>,
    pub u_raw: Option<f64>,
    pub l_corrected: Option<f64>,
    pub u_corrected: Option<f64>,
    pub gap: Option<f64>,
    pub midpoint: Option<f64>,
    pub one_sided: bool,
    pub solve_ms: Option<f64>,
    pub error: Option<String>,
    pub diagnostics: Option<BoundDiagnostics>,
}

impl BoundRecord {
    pub fn ok(b: BoundResult) -> Self {
        BoundRecord {
            r: b.r,
            objective: b.objective,
            window_size: Some(b.window_size),
            l_raw: Some(b.l_raw),
            u_raw: Some(b.u_raw),
            l_corrected: b.l_corrected,
            u_corrected: b.u_corrected,
            gap: b.gap,
            midpoint: b.midpoint,
            one_sided: b.one_sided,
            solve_ms: Some(b.diagnostics.min.solve_ms + b.diagnostics.max.solve_ms),
            error: None,
            diagnostics: Some(b.diagnostics),
        }
    }

    pub fn failed(r: u64, objective: &str, error: String) -> Self {
        BoundRecord {
            r,
            objective: objective.to_string(),
            window_size: None,
            l_raw: None,
            u_raw: None,
            l_corrected: None,
            u_corrected: None,
            gap: None,
            midpoint: None,
            one_sided: false,
            solve_ms: None,
            error: Some(error),
            diagnostics: None,
        }
    }

    fn note(&self) -> String {
        match (&self.error, self.one_sided) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "one-sided".into(),
            (None, false) => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFile {
    #[serde(flatten)]
    pub run: RunInfo,
    pub records: Vec<BoundRecord>,
}

#[derive(Serialize)]
struct BoundCsvRow<'a> {
    r: u64,
    objective: &'a str,
    window_size: Option<usize>,
    l_raw: Option<f64>,
    u_raw: Option<f64>,
    l_corrected: Option<f64>,
    u_corrected: Option<f64>,
    gap: Option<f64>,
    midpoint: Option<f64>,
    solve_ms: Option<f64>,
    note: String,
}

/// Scheme B at one `r`, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalRecord {
    pub r: u64,
    pub approximation: Option<MinimalPointApprox>,
    pub image: Option<ImageLowerBound>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow<K> {
    pub id: K,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_paths: u64,
    pub seed: u64,
    pub censored: f64,
    pub exits: Vec<EstimateRow<OutputId>>,
    pub occupation: Vec<EstimateRow<StateId>>,
}

impl From<SimulationResult> for MonteCarloSummary {
    fn from(s: SimulationResult) -> Self {
        MonteCarloSummary {
            n_paths: s.n_paths,
            seed: s.seed,
            censored: s.censored.mean,
            exits: s
                .exits
                .into_iter()
                .map(|(id, e)| EstimateRow {
                    id,
                    mean: e.mean,
                    std_error: e.std_error,
                })
                .collect(),
            occupation: s
                .occupation
                .into_iter()
                .map(|(id, e)| EstimateRow {
                    id,
                    mean: e.mean,
                    std_error: e.std_error,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalFile {
    #[serde(flatten)]
    pub run: RunInfo,
    pub records: Vec<MinimalRecord>,
    pub monte_carlo: Option<MonteCarloSummary>,
}

#[derive(Serialize)]
struct MinimalCsvRow {
    r: u64,
    window_size: Option<usize>,
    captured_mass: Option<f64>,
    u_indicator: Option<f64>,
    gamma: Option<f64>,
    g_gap: Option<f64>,
    image_mass_gap: Option<f64>,
    solve_ms: Option<f64>,
    note: String,
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::config(format!("cannot write {}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("result types serialise");
    fs::write(&path, text + "\n").map_err(|e| io_failure(&path, e))
}

fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), Failure> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_failure(&path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_failure(&path, e))?;
    }
    w.flush().map_err(|e| io_failure(&path, e))
}

pub fn write_bounds(dir: &Path, file: &BoundFile) -> Result<(), Failure> {
    write_json(dir, "bound.json", file)?;
    write_csv(
        dir,
        "bound.csv",
        file.records.iter().map(|rec| BoundCsvRow {
            r: rec.r,
            objective: &rec.objective,
            window_size: rec.window_size,
            l_raw: rec.l_raw,
            u_raw: rec.u_raw,
            l_corrected: rec.l_corrected,
            u_corrected: rec.u_corrected,
            gap: rec.gap,
            midpoint: rec.midpoint,
            solve_ms: rec.solve_ms,
            note: rec.note(),
        }),
    )
}

#[derive(Serialize)]
struct LowerRow {
    r: u64,
    state: String,
    lower: f64,
}

#[derive(Serialize)]
struct ImageRow {
    r: u64,
    y: String,
    lower: f64,
}

pub fn write_minimal(dir: &Path, file: &MinimalFile) -> Result<(), Failure> {
    write_json(dir, "minimal.json", file)?;
    write_csv(
        dir,
        "minimal.csv",
        file.records.iter().map(|rec| {
            let a = rec.approximation.as_ref();
            MinimalCsvRow {
                r: rec.r,
                window_size: a.map(|a| a.lower.len()),
                captured_mass: a.map(|a| a.captured_mass),
                u_indicator: a.map(|a| a.u_indicator),
                gamma: a.map(|a| a.gamma),
                g_gap: a.map(|a| a.g_gap),
                image_mass_gap: rec.image.as_ref().map(|i| i.mass_gap),
                solve_ms: a.map(|a| {
                    a.diagnostics.iter().map(|d| d.lp.solve_ms).sum::<f64>() + a.window_diagnostics.solve_ms
                }),
                note: rec.error.as_ref().map(|e| format!("error: {e}")).unwrap_or_default(),
            }
        }),
    )?;
    write_csv(
        dir,
        "minimal_lower.csv",
        file.records.iter().filter_map(|rec| rec.approximation.as_ref()).flat_map(|a| {
            a.lower.iter().map(move |(x, m)| LowerRow {
                r: a.r,
                state: x.to_string(),
                lower: m,
            })
        }),
    )?;
    write_csv(
        dir,
        "image.csv",
        file.records.iter().filter_map(|rec| rec.image.as_ref()).flat_map(|img| {
            img.entries.iter().map(move |(y, v)| ImageRow {
                r: img.r,
                y: y.to_string(),
                lower: *v,
            })
        }),
    )
}

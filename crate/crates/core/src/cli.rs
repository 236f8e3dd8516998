//! Configuration files, figure presets, CSV output and the run manifest.
//!
//! The JSON config is flat; every field is optional and falls back to the
//! default system (32 subcarriers, 4×4 antennas, 10 symbols, four
//! equal-power paths and targets, unit noise, adjacent correlation 0.5):
//!
//! ```json
//! {
//!   "dims": { "n_subcarriers": 32, "n_tx": 4, "n_rx": 4, "n_symbols": 10 },
//!   "tap_powers_comm": [0.25, 0.25, 0.25, 0.25],
//!   "rho_comm": 0.5, "rho_sense": 0.5,
//!   "snr_db": 10, "omega_r": 0.5,
//!   "sweep": { "snr_db": { "start": -5, "stop": 20, "step": 5 } },
//!   "n_trials": 400, "master_seed": 7,
//!   "schemes": ["OPC", "OPS", "ISAC", "EA", "RA"],
//!   "est_err_var": 0.01
//! }
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use log::info;
use serde::{Deserialize, Serialize};

use crate::channel::SystemDims;
use crate::error::{IsacError, Result};
use crate::optimizer::Scheme;
use crate::simulator::{run_sweep, ExperimentConfig, SchemeVariant, Sweep, SweepResult, SweepRow};

pub const CSV_HEADER: [&str; 9] = [
    "sweep_var",
    "sweep_value",
    "scheme",
    "spectral_efficiency",
    "sensing_rate",
    "weighted_mi",
    "se_stderr",
    "sr_stderr",
    "wmi_stderr",
];

/// Longest grid a `{start, stop, step}` range may expand to.
const MAX_RANGE_POINTS: usize = 10_000;

fn invalid(field: &str, reason: impl Into<String>) -> IsacError {
    IsacError::ConfigValidation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDims {
    n_subcarriers: Option<i64>,
    n_tx: Option<i64>,
    n_rx: Option<i64>,
    n_symbols: Option<i64>,
    n_paths_comm: Option<i64>,
    n_paths_sense: Option<i64>,
    noise_var: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    snr_db: Option<Grid>,
    omega_r: Option<Grid>,
    n_subcarriers: Option<Grid>,
    spatial_rho: Option<Grid>,
    antenna_pairs: Option<Vec<[i64; 2]>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dims: Option<RawDims>,
    tap_powers_comm: Option<Vec<f64>>,
    tap_powers_sense: Option<Vec<f64>>,
    rho_comm: Option<f64>,
    rho_sense: Option<f64>,
    snr_db: Option<f64>,
    omega_r: Option<f64>,
    sweep: Option<RawSweep>,
    n_trials: Option<i64>,
    master_seed: Option<u64>,
    schemes: Option<Vec<String>>,
    est_err_var: Option<f64>,
    workers: Option<i64>,
}

fn count(field: &str, value: Option<i64>, default: usize) -> Result<usize> {
    match value {
        None => Ok(default),
        Some(v) if v >= 1 => Ok(v as usize),
        Some(v) => Err(invalid(field, format!("{v} must be at least 1"))),
    }
}

fn expand(field: &str, grid: Grid) -> Result<Vec<f64>> {
    match grid {
        Grid::List(v) => Ok(v),
        Grid::Range { start, stop, step } => {
            if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                return Err(invalid(field, "range bounds must be finite"));
            }
            if step <= 0.0 || stop < start {
                return Err(invalid(field, "range needs step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > MAX_RANGE_POINTS {
                return Err(invalid(field, format!("range expands to {n} points")));
            }
            Ok((0..n).map(|k| start + k as f64 * step).collect())
        }
    }
}

fn integer_grid(field: &str, values: Vec<f64>) -> Result<Vec<usize>> {
    values
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 1.0 {
                Ok(v as usize)
            } else {
                Err(invalid(field, format!("{v} is not a positive integer")))
            }
        })
        .collect()
}

fn build_sweep(raw: RawSweep) -> Result<Sweep> {
    let mut found = Vec::new();
    if let Some(g) = raw.snr_db {
        found.push(Sweep::SnrDb(expand("sweep.snr_db", g)?));
    }
    if let Some(g) = raw.omega_r {
        found.push(Sweep::OmegaR(expand("sweep.omega_r", g)?));
    }
    if let Some(g) = raw.n_subcarriers {
        let v = expand("sweep.n_subcarriers", g)?;
        found.push(Sweep::NSubcarriers(integer_grid("sweep.n_subcarriers", v)?));
    }
    if let Some(g) = raw.spatial_rho {
        found.push(Sweep::SpatialRho(expand("sweep.spatial_rho", g)?));
    }
    if let Some(pairs) = raw.antenna_pairs {
        let v = pairs
            .into_iter()
            .map(|[t, r]| {
                if t >= 1 && r >= 1 {
                    Ok((t as usize, r as usize))
                } else {
                    Err(invalid(
                        "sweep.antenna_pairs",
                        format!("[{t}, {r}] has a count below 1"),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        found.push(Sweep::AntennaPairs(v));
    }
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        0 => Err(invalid("sweep", "names no swept parameter")),
        _ => Err(invalid("sweep", "must name exactly one swept parameter")),
    }
}

fn parse_error(e: serde_json::Error) -> IsacError {
    IsacError::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parse JSON config text. Blank text gives the default config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = if text.trim().is_empty() {
        RawConfig::default()
    } else {
        serde_json::from_str(text).map_err(parse_error)?
    };
    let def = ExperimentConfig::default();
    let d = raw.dims.unwrap_or_default();

    let n_paths_comm = match (d.n_paths_comm, &raw.tap_powers_comm) {
        (None, Some(p)) => p.len(),
        (v, _) => count("dims.n_paths_comm", v, def.dims.n_paths_comm)?,
    };
    let n_paths_sense = match (d.n_paths_sense, &raw.tap_powers_sense) {
        (None, Some(p)) => p.len(),
        (v, _) => count("dims.n_paths_sense", v, def.dims.n_paths_sense)?,
    };
    let dims = SystemDims {
        n_subcarriers: count(
            "dims.n_subcarriers",
            d.n_subcarriers,
            def.dims.n_subcarriers,
        )?,
        n_tx: count("dims.n_tx", d.n_tx, def.dims.n_tx)?,
        n_rx: count("dims.n_rx", d.n_rx, def.dims.n_rx)?,
        n_symbols: count("dims.n_symbols", d.n_symbols, def.dims.n_symbols)?,
        n_paths_comm,
        n_paths_sense,
        noise_var: d.noise_var.unwrap_or(def.dims.noise_var),
    };
    if !(dims.noise_var > 0.0 && dims.noise_var.is_finite()) {
        return Err(invalid("dims.noise_var", "must be positive"));
    }
    let uniform = |n: usize| vec![1.0 / n as f64; n];
    let schemes = match raw.schemes {
        None => def.schemes.clone(),
        Some(names) => names
            .iter()
            .map(|s| {
                s.parse::<Scheme>()
                    .map_err(|e| invalid("schemes", e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let workers = match raw.workers {
        None => None,
        Some(w) => Some(count("workers", Some(w), 1)?),
    };
    let config = ExperimentConfig {
        dims,
        tap_powers_comm: raw.tap_powers_comm.unwrap_or_else(|| uniform(n_paths_comm)),
        tap_powers_sense: raw
            .tap_powers_sense
            .unwrap_or_else(|| uniform(n_paths_sense)),
        rho_comm: raw.rho_comm.unwrap_or(def.rho_comm),
        rho_sense: raw.rho_sense.unwrap_or(def.rho_sense),
        snr_db: raw.snr_db.unwrap_or(def.snr_db),
        omega_r: raw.omega_r.unwrap_or(def.omega_r),
        sweep: match raw.sweep {
            None => def.sweep.clone(),
            Some(s) => build_sweep(s)?,
        },
        n_trials: count("n_trials", raw.n_trials, def.n_trials)?,
        master_seed: raw.master_seed.unwrap_or(def.master_seed),
        schemes,
        est_err_var: raw.est_err_var.unwrap_or(def.est_err_var),
        workers,
    };
    config.validate()?;
    Ok(config)
}

/// Read and parse a JSON config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| IsacError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_error(path: &Path, e: csv::Error) -> IsacError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    IsacError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serialize `result` as CSV (9 significant digits, LF line endings).
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        let value = match r.sweep_value {
            crate::simulator::SweepValue::Scalar(x) => fmt_float(x),
            pair => pair.to_string(),
        };
        w.write_record([
            result.sweep_var.clone(),
            value,
            r.scheme.to_string(),
            fmt_float(r.spectral_efficiency),
            fmt_float(r.sensing_rate),
            fmt_float(r.weighted_mi),
            fmt_float(r.se_stderr),
            fmt_float(r.sr_stderr),
            fmt_float(r.wmi_stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `result` to `path`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| IsacError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

/// Parse CSV produced by [`write_csv`]. A header-only file gives an empty
/// result whose `sweep_var` is empty.
pub fn read_csv(text: &str) -> Result<SweepResult> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| IsacError::input(format!("unreadable CSV header: {e}")))?
        .clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(IsacError::input(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut sweep_var = String::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IsacError::input(format!("CSV row {}: {e}", i + 1)))?;
        let num = |k: usize| {
            rec[k].parse::<f64>().map_err(|e| {
                IsacError::input(format!("CSV row {}, column {}: {e}", i + 1, CSV_HEADER[k]))
            })
        };
        if sweep_var.is_empty() {
            sweep_var = rec[0].to_string();
        } else if sweep_var != rec[0] {
            return Err(IsacError::input("CSV mixes several sweep variables"));
        }
        rows.push(SweepRow {
            sweep_value: rec[1].parse()?,
            scheme: rec[2].parse::<SchemeVariant>()?,
            spectral_efficiency: num(3)?,
            sensing_rate: num(4)?,
            weighted_mi: num(5)?,
            se_stderr: num(6)?,
            sr_stderr: num(7)?,
            wmi_stderr: num(8)?,
        });
    }
    Ok(SweepResult { sweep_var, rows })
}

/// One sweep of a figure preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRun {
    /// Distinguishes runs of the same figure; empty for single-run figures.
    pub label: String,
    pub config: ExperimentConfig,
}

/// Preset sweeps reproducing one figure at desk scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRecipe {
    pub name: String,
    pub title: String,
    pub runs: Vec<FigureRun>,
}

pub const FIGURE_NAMES: [&str; 12] = [
    "fig3", "fig4", "fig5", "fig6a", "fig6b", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
    "fig13",
];

/// Trials per run in the presets; raise with `--trials`.
pub const RECIPE_TRIALS: usize = 400;

fn snr_grid() -> Vec<f64> {
    vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
}

fn omega_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn single(config: ExperimentConfig) -> Vec<FigureRun> {
    vec![FigureRun {
        label: String::new(),
        config,
    }]
}

/// Preset for a named figure.
pub fn figure_recipes(name: &str) -> Result<FigureRecipe> {
    let base = ExperimentConfig {
        n_trials: RECIPE_TRIALS,
        ..ExperimentConfig::default()
    };
    let snr_all = ExperimentConfig {
        sweep: Sweep::SnrDb(snr_grid()),
        est_err_var: 0.01,
        ..base.clone()
    };
    let omega_at = |snr: f64| ExperimentConfig {
        sweep: Sweep::OmegaR(omega_grid()),
        snr_db: snr,
        est_err_var: 0.01,
        schemes: vec![Scheme::Opc, Scheme::Ops, Scheme::Isac, Scheme::Ea],
        ..base.clone()
    };
    let subcarriers = ExperimentConfig {
        sweep: Sweep::NSubcarriers(vec![5, 10, 20, 32, 50]),
        snr_db: 1.0,
        ..base.clone()
    };
    let rho = ExperimentConfig {
        sweep: Sweep::SpatialRho(omega_grid()[..10].to_vec()),
        snr_db: 10.0,
        ..base.clone()
    };
    let antennas = || {
        [(2, 2), (4, 4), (8, 8)]
            .into_iter()
            .map(|(t, r)| FigureRun {
                label: format!("{t}x{r}"),
                config: ExperimentConfig {
                    dims: SystemDims {
                        n_tx: t,
                        n_rx: r,
                        ..base.dims
                    },
                    sweep: Sweep::SnrDb(snr_grid()),
                    schemes: vec![Scheme::Isac],
                    ..base.clone()
                },
            })
            .collect()
    };
    let (title, runs) = match name {
        "fig3" => ("Spectral efficiency vs. SNR", single(snr_all)),
        "fig4" => ("Sensing rate vs. SNR", single(snr_all)),
        "fig5" => (
            "ISAC rates vs. SNR for several sensing weights",
            [0.2, 0.5, 0.8]
                .into_iter()
                .map(|w| FigureRun {
                    label: format!("omega{w}"),
                    config: ExperimentConfig {
                        sweep: Sweep::SnrDb(snr_grid()),
                        omega_r: w,
                        schemes: vec![Scheme::Opc, Scheme::Ops, Scheme::Isac],
                        ..base.clone()
                    },
                })
                .collect(),
        ),
        "fig6a" => (
            "Weighted MI vs. sensing weight at 1 dB",
            single(omega_at(1.0)),
        ),
        "fig6b" => (
            "Weighted MI vs. sensing weight at 10 dB",
            single(omega_at(10.0)),
        ),
        "fig7" => (
            "Sensing/communication trade-off",
            [1.0, 10.0]
                .into_iter()
                .map(|snr| FigureRun {
                    label: format!("snr{snr}"),
                    config: ExperimentConfig {
                        sweep: Sweep::OmegaR(omega_grid()),
                        snr_db: snr,
                        schemes: vec![Scheme::Opc, Scheme::Ops, Scheme::Isac],
                        ..base.clone()
                    },
                })
                .collect(),
        ),
        "fig8" => (
            "Spectral efficiency vs. number of subcarriers",
            single(subcarriers),
        ),
        "fig9" => (
            "Sensing rate vs. number of subcarriers",
            single(subcarriers),
        ),
        "fig10" => ("Spectral efficiency vs. spatial correlation", single(rho)),
        "fig11" => ("Sensing rate vs. spatial correlation", single(rho)),
        "fig12" => (
            "ISAC spectral efficiency vs. SNR per antenna setup",
            antennas(),
        ),
        "fig13" => ("ISAC sensing rate vs. SNR per antenna setup", antennas()),
        _ => {
            return Err(IsacError::UnknownFigure {
                name: name.to_string(),
                valid: FIGURE_NAMES.join(", "),
            })
        }
    };
    Ok(FigureRecipe {
        name: name.to_string(),
        title: title.to_string(),
        runs,
    })
}

/// Command-line flags of the `isac-sim` binary.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "isac-sim",
    version,
    allow_negative_numbers = true,
    about = "Monte Carlo sweeps of MI-based ISAC power allocation",
    after_help = "SNR convention: noise variance 1 per mode and total power \
                  E = 10^(SNR/10) * N_t * N_c * noise_var, so equal allocation \
                  puts the nominal SNR on every mode.\n\
                  ISAC_THREADS caps the worker count; results do not depend on it."
)]
pub struct CliArgs {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH", conflicts_with = "figure")]
    pub config: Option<PathBuf>,
    /// Figure preset (fig3 .. fig13, fig6a, fig6b).
    #[arg(long, value_name = "NAME")]
    pub figure: Option<String>,
    /// Monte Carlo trials per sweep point.
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory for CSV files and the manifest.
    #[arg(long, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// Comma-separated scheme list, e.g. OPC,ISAC.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub schemes: Option<Vec<Scheme>>,
    /// Channel estimation error variance.
    #[arg(long = "est-err", value_name = "VAR")]
    pub est_err: Option<f64>,
}

/// Record of a finished run, written next to its CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub figure: Option<String>,
    pub configs: Vec<ExperimentConfig>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn apply_overrides(mut config: ExperimentConfig, args: &CliArgs) -> Result<ExperimentConfig> {
    if let Some(n) = args.trials {
        config.n_trials = n;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(list) = &args.schemes {
        config.schemes = list.clone();
    }
    if let Some(v) = args.est_err {
        config.est_err_var = v;
    }
    config.validate()?;
    Ok(config)
}

/// Resolve the runs a command line asks for, flags applied.
pub fn plan_runs(args: &CliArgs) -> Result<Vec<(String, ExperimentConfig)>> {
    let runs: Vec<(String, ExperimentConfig)> = if let Some(name) = &args.figure {
        figure_recipes(name)?
            .runs
            .into_iter()
            .map(|r| {
                let stem = if r.label.is_empty() {
                    name.clone()
                } else {
                    format!("{name}_{}", r.label)
                };
                (stem, r.config)
            })
            .collect()
    } else {
        let config = match &args.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        vec![(format!("sweep_{}", config.sweep.name()), config)]
    };
    runs.into_iter()
        .map(|(stem, c)| Ok((stem, apply_overrides(c, args)?)))
        .collect()
}

/// Run every sweep, write one CSV per sweep plus `manifest.json`.
pub fn run(args: &CliArgs) -> Result<RunManifest> {
    let started = Instant::now();
    let runs = plan_runs(args)?;
    fs::create_dir_all(&args.out).map_err(|source| IsacError::Io {
        path: args.out.clone(),
        source,
    })?;
    let mut outputs = Vec::with_capacity(runs.len());
    for (stem, config) in &runs {
        info!(
            "running {stem}: {} points x {} trials",
            config.sweep.len(),
            config.n_trials
        );
        let result = run_sweep(config)?;
        let path = args.out.join(format!("{stem}.csv"));
        emit_csv(&result, &path)?;
        outputs.push(path);
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: runs[0].1.master_seed,
        figure: args.figure.clone(),
        configs: runs.into_iter().map(|(_, c)| c).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let path = args.out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|source| IsacError::Io { path, source })?;
    Ok(manifest)
}

/// Machine-readable error line for standard error.
pub fn error_json(err: &IsacError) -> String {
    let kind = match err {
        IsacError::InvalidParameter { .. } => "invalid_parameter",
        IsacError::InvalidInput(_) => "invalid_input",
        IsacError::NoFeasibleGain => "no_feasible_gain",
        IsacError::InfeasibleShape(_) => "infeasible_shape",
        IsacError::SolverFailure(_) => "solver_failure",
        IsacError::OracleTooLarge(_) => "oracle_too_large",
        IsacError::Trial { .. } => "trial_failed",
        IsacError::SweepFailed { .. } => "sweep_failed",
        IsacError::ConfigParse { .. } => "config_parse",
        IsacError::ConfigValidation { .. } => "config_validation",
        IsacError::UnknownFigure { .. } => "unknown_figure",
        IsacError::Io { .. } => "io",
    };
    serde_json::json!({ "error": kind, "message": err.to_string() }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_and_empty_object_give_defaults() {
        let want = ExperimentConfig::default();
        assert_eq!(parse_config("").unwrap(), want);
        assert_eq!(parse_config("{}").unwrap(), want);
    }

    #[test]
    fn range_expands_inclusively() {
        let c =
            parse_config(r#"{"sweep": {"snr_db": {"start": -5, "stop": 20, "step": 5}}}"#).unwrap();
        assert_eq!(
            c.sweep,
            Sweep::SnrDb(vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
        );
    }

    #[test]
    fn negative_trials_name_the_field() {
        match parse_config(r#"{"n_trials": -1}"#) {
            Err(IsacError::ConfigValidation { field, .. }) => assert_eq!(field, "n_trials"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{\n  \"n_trials\": 5,\n  oops\n}") {
            Err(IsacError::ConfigParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tap_powers_set_the_path_count() {
        let c = parse_config(r#"{"tap_powers_comm": [0.7, 0.3]}"#).unwrap();
        assert_eq!(c.dims.n_paths_comm, 2);
        let c = parse_config(r#"{"dims": {"n_paths_sense": 2}}"#).unwrap();
        assert_eq!(c.tap_powers_sense, vec![0.5, 0.5]);
    }

    #[test]
    fn every_recipe_is_valid() {
        for name in FIGURE_NAMES {
            let r = figure_recipes(name).unwrap();
            assert!(!r.runs.is_empty());
            for run in &r.runs {
                run.config.validate().unwrap();
            }
        }
    }

    #[test]
    fn unknown_figure_lists_names() {
        let msg = figure_recipes("fig99").unwrap_err().to_string();
        assert!(msg.contains("fig3") && msg.contains("fig13"));
    }

    #[test]
    fn flags_override_config() {
        let args = CliArgs {
            figure: Some("fig8".into()),
            trials: Some(3),
            seed: Some(11),
            schemes: Some(vec![Scheme::Ops]),
            ..CliArgs::default()
        };
        let runs = plan_runs(&args).unwrap();
        assert_eq!(runs[0].0, "fig8");
        assert_eq!(runs[0].1.n_trials, 3);
        assert_eq!(runs[0].1.master_seed, 11);
        assert_eq!(runs[0].1.schemes, vec![Scheme::Ops]);
    }

    #[test]
    fn error_json_is_parseable() {
        let v: serde_json::Value =
            serde_json::from_str(&error_json(&IsacError::NoFeasibleGain)).unwrap();
        assert_eq!(v["error"], "no_feasible_gain");
    }
}

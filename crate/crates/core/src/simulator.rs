//! Monte Carlo sweeps over SNR, weighting, subcarrier count, spatial
//! correlation and antenna count.
//!
//! Every trial owns a ChaCha stream keyed by `(master_seed, point, trial)`,
//! and trial results are reduced in trial order, so the output does not
//! depend on how many workers ran the trials.

use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    add_estimation_error, draw_taps, sensing_correlation_matrix, SensingCorrelation, SystemDims,
    TapSet,
};
use crate::error::{IsacError, Result};
use crate::linalg;
use crate::mi;
use crate::optimizer::{
    cross_evaluate, eig_comm, eig_sensing, equal_allocation, random_allocation, waterfill,
    weighted_allocate, CrossTarget, Eigenstructure, PowerAllocation, Scheme, WeightedProblem,
};

/// Largest tolerated fraction of failed trials per sweep point.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "ISAC_THREADS";

/// The swept parameter and its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    SnrDb(Vec<f64>),
    OmegaR(Vec<f64>),
    NSubcarriers(Vec<usize>),
    /// Communication-channel correlation only; the sensing side keeps its own.
    SpatialRho(Vec<f64>),
    /// `(N_t, N_r)` pairs.
    AntennaPairs(Vec<(usize, usize)>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::SnrDb(_) => "snr_db",
            Sweep::OmegaR(_) => "omega_r",
            Sweep::NSubcarriers(_) => "n_subcarriers",
            Sweep::SpatialRho(_) => "spatial_rho",
            Sweep::AntennaPairs(_) => "antenna_pairs",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::SnrDb(v) | Sweep::OmegaR(v) | Sweep::SpatialRho(v) => v.len(),
            Sweep::NSubcarriers(v) => v.len(),
            Sweep::AntennaPairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<SweepValue> {
        match self {
            Sweep::SnrDb(v) | Sweep::OmegaR(v) | Sweep::SpatialRho(v) => {
                v.iter().map(|&x| SweepValue::Scalar(x)).collect()
            }
            Sweep::NSubcarriers(v) => v.iter().map(|&n| SweepValue::Scalar(n as f64)).collect(),
            Sweep::AntennaPairs(v) => v.iter().map(|&(t, r)| SweepValue::Pair(t, r)).collect(),
        }
    }
}

/// One grid value of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepValue {
    Scalar(f64),
    /// Written as `NtxNr`, e.g. `4x4`.
    Pair(usize, usize),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Scalar(x) => write!(f, "{x}"),
            SweepValue::Pair(t, r) => write!(f, "{t}x{r}"),
        }
    }
}

impl FromStr for SweepValue {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((t, r)) = s.split_once('x') {
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| IsacError::input(format!("bad antenna pair `{s}`: {e}")))
            };
            return Ok(SweepValue::Pair(parse(t)?, parse(r)?));
        }
        s.trim()
            .parse::<f64>()
            .map(SweepValue::Scalar)
            .map_err(|e| IsacError::input(format!("bad sweep value `{s}`: {e}")))
    }
}

/// Everything a sweep needs. Parameters not being swept take the fixed
/// values below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dims: SystemDims,
    /// Per-path powers of the communication channel (renormalized to sum 1).
    pub tap_powers_comm: Vec<f64>,
    /// Per-target powers of the sensing channel (renormalized to sum 1).
    pub tap_powers_sense: Vec<f64>,
    pub rho_comm: f64,
    pub rho_sense: f64,
    pub snr_db: f64,
    pub omega_r: f64,
    pub sweep: Sweep,
    pub n_trials: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    /// Variance of the additive channel estimation error; `0` means perfect CSI.
    pub est_err_var: f64,
    /// Worker count; `None` defers to `ISAC_THREADS`, then to the core count.
    /// Never affects results.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: SystemDims::default(),
            tap_powers_comm: vec![0.25; 4],
            tap_powers_sense: vec![0.25; 4],
            rho_comm: 0.5,
            rho_sense: 0.5,
            snr_db: 10.0,
            omega_r: 0.5,
            sweep: Sweep::SnrDb(vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]),
            n_trials: 4000,
            master_seed: 1,
            schemes: Scheme::ALL.to_vec(),
            est_err_var: 0.0,
            workers: None,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> IsacError {
    IsacError::ConfigValidation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_rho(field: &str, rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(field, format!("{rho} must be in [0, 1)")));
    }
    Ok(())
}

fn check_omega(field: &str, omega: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(invalid(field, format!("{omega} must be in [0, 1]")));
    }
    Ok(())
}

fn check_powers(field: &str, powers: &[f64], n_paths: usize, n_subcarriers: usize) -> Result<()> {
    if powers.len() != n_paths {
        return Err(invalid(
            field,
            format!(
                "has {} entries but the path count is {n_paths}",
                powers.len()
            ),
        ));
    }
    if powers.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(invalid(field, "every tap power must be positive"));
    }
    if n_paths > n_subcarriers {
        return Err(invalid(
            field,
            format!("{n_paths} taps do not fit in {n_subcarriers} subcarriers"),
        ));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.dims
            .validate()
            .map_err(|e| invalid("dims", e.to_string()))?;
        if self.n_trials == 0 {
            return Err(invalid("n_trials", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must name at least one scheme"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(invalid("schemes", format!("{s} listed twice")));
            }
        }
        if !(self.est_err_var >= 0.0 && self.est_err_var.is_finite()) {
            return Err(invalid("est_err_var", "must be finite and >= 0"));
        }
        if !self.snr_db.is_finite() {
            return Err(invalid("snr_db", "must be finite"));
        }
        check_omega("omega_r", self.omega_r)?;
        check_rho("rho_comm", self.rho_comm)?;
        check_rho("rho_sense", self.rho_sense)?;
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be at least 1"));
        }
        if self.sweep.is_empty() {
            return Err(invalid("sweep", "has no points"));
        }
        match &self.sweep {
            Sweep::SnrDb(v) => {
                if v.iter().any(|s| !s.is_finite()) {
                    return Err(invalid("sweep.snr_db", "values must be finite"));
                }
            }
            Sweep::OmegaR(v) => {
                for &w in v {
                    check_omega("sweep.omega_r", w)?;
                }
            }
            Sweep::SpatialRho(v) => {
                for &r in v {
                    check_rho("sweep.spatial_rho", r)?;
                }
            }
            Sweep::NSubcarriers(v) => {
                if v.contains(&0) {
                    return Err(invalid("sweep.n_subcarriers", "values must be >= 1"));
                }
            }
            Sweep::AntennaPairs(v) => {
                if v.iter().any(|&(t, r)| t == 0 || r == 0) {
                    return Err(invalid(
                        "sweep.antenna_pairs",
                        "antenna counts must be >= 1",
                    ));
                }
            }
        }
        for point in self.sweep_points() {
            let d = &point.dims;
            check_powers(
                "tap_powers_comm",
                &self.tap_powers_comm,
                d.n_paths_comm,
                d.n_subcarriers,
            )?;
            check_powers(
                "tap_powers_sense",
                &self.tap_powers_sense,
                d.n_paths_sense,
                d.n_subcarriers,
            )?;
        }
        Ok(())
    }

    /// The concrete parameter set of every grid point.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        self.sweep
            .values()
            .into_iter()
            .enumerate()
            .map(|(index, value)| {
                let mut p = SweepPoint {
                    index,
                    value,
                    dims: self.dims,
                    snr_db: self.snr_db,
                    omega_r: self.omega_r,
                    rho_comm: self.rho_comm,
                    rho_sense: self.rho_sense,
                };
                match (&self.sweep, value) {
                    (Sweep::SnrDb(_), SweepValue::Scalar(x)) => p.snr_db = x,
                    (Sweep::OmegaR(_), SweepValue::Scalar(x)) => p.omega_r = x,
                    (Sweep::SpatialRho(_), SweepValue::Scalar(x)) => p.rho_comm = x,
                    (Sweep::NSubcarriers(_), SweepValue::Scalar(x)) => {
                        p.dims.n_subcarriers = x as usize
                    }
                    (Sweep::AntennaPairs(_), SweepValue::Pair(t, r)) => {
                        p.dims.n_tx = t;
                        p.dims.n_rx = r;
                    }
                    _ => unreachable!("sweep values match their sweep kind"),
                }
                p
            })
            .collect()
    }

    /// Rows reported per sweep point, in output order.
    pub fn variants(&self) -> Vec<SchemeVariant> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            out.push(SchemeVariant::perfect(scheme));
            if scheme == Scheme::Isac && self.est_err_var > 0.0 {
                out.push(SchemeVariant::imperfect(scheme));
            }
        }
        out
    }
}

/// Parameters of one sweep grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: SweepValue,
    pub dims: SystemDims,
    pub snr_db: f64,
    pub omega_r: f64,
    pub rho_comm: f64,
    pub rho_sense: f64,
}

impl SweepPoint {
    /// Total power `E = 10^{SNR/10} · N_t · N_c · σ_n²`, so equal allocation
    /// puts the nominal SNR on every mode.
    pub fn budget(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0) * self.dims.n_modes() as f64 * self.dims.noise_var
    }
}

/// Per-point quantities shared by all trials: the sensing statistics do not
/// change from trial to trial.
#[derive(Debug, Clone)]
pub struct PreparedPoint {
    point: SweepPoint,
    comm_taps: TapSet,
    sensing: SensingCorrelation,
    sense_eig: Eigenstructure,
    ops: PowerAllocation,
    f_r: f64,
}

impl PreparedPoint {
    pub fn new(config: &ExperimentConfig, point: SweepPoint) -> Result<Self> {
        let dims = point.dims;
        let mut comm_taps =
            TapSet::exponential(&config.tap_powers_comm, dims.n_tx, point.rho_comm)?;
        comm_taps.normalize_powers();
        let mut sense_taps =
            TapSet::exponential(&config.tap_powers_sense, dims.n_tx, point.rho_sense)?;
        sense_taps.normalize_powers();
        let sensing = sensing_correlation_matrix(&sense_taps, &dims)?;
        let sense_eig = eig_sensing(sensing.full())?;
        let ops =
            waterfill(sense_eig.eigenvalues(), point.budget(), dims.noise_var)?.tagged(Scheme::Ops);
        let f_r = mi::sensing_mi_eigen(sense_eig.eigenvalues(), &ops.powers, &dims)?.total_bits;
        Ok(PreparedPoint {
            point,
            comm_taps,
            sensing,
            sense_eig,
            ops,
            f_r,
        })
    }

    pub fn point(&self) -> &SweepPoint {
        &self.point
    }

    pub fn sensing(&self) -> &SensingCorrelation {
        &self.sensing
    }

    pub fn sensing_eigen(&self) -> &Eigenstructure {
        &self.sense_eig
    }

    /// Maximum sensing MI `F_r`.
    pub fn f_r(&self) -> f64 {
        self.f_r
    }
}

/// A scheme, optionally designed from an erroneous channel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SchemeVariant {
    pub scheme: Scheme,
    pub imperfect_csi: bool,
}

impl SchemeVariant {
    pub fn perfect(scheme: Scheme) -> Self {
        SchemeVariant {
            scheme,
            imperfect_csi: false,
        }
    }

    pub fn imperfect(scheme: Scheme) -> Self {
        SchemeVariant {
            scheme,
            imperfect_csi: true,
        }
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.imperfect_csi {
            write!(f, "{}-ICSI", self.scheme)
        } else {
            write!(f, "{}", self.scheme)
        }
    }
}

impl FromStr for SchemeVariant {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.len().checked_sub(5).map(|i| s.split_at(i)) {
            Some((base, suffix)) if suffix.eq_ignore_ascii_case("-icsi") => {
                Ok(SchemeVariant::imperfect(base.parse()?))
            }
            _ => Ok(SchemeVariant::perfect(s.parse()?)),
        }
    }
}

/// MIs of one scheme in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeMetrics {
    pub i_comm: f64,
    pub i_sens: f64,
    /// `ω_r · I_sens/F_r + (1 − ω_r) · I_comm/F_c`.
    pub f_omega: f64,
}

/// All schemes' metrics in one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub point: usize,
    pub trial: usize,
    pub f_r: f64,
    pub f_c: f64,
    pub metrics: Vec<(SchemeVariant, SchemeMetrics)>,
}

impl TrialOutcome {
    pub fn get(&self, variant: SchemeVariant) -> Option<&SchemeMetrics> {
        self.metrics
            .iter()
            .find(|(v, _)| *v == variant)
            .map(|(_, m)| m)
    }

    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeMetrics> {
        self.get(SchemeVariant::perfect(scheme))
    }
}

/// The random stream of one trial. Streams of distinct `(point, trial)`
/// pairs never overlap.
pub fn trial_rng(master_seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 40) | trial as u64);
    rng
}

/// Run one trial of `config` at sweep point `point_index`.
pub fn run_trial(
    config: &ExperimentConfig,
    point_index: usize,
    trial: usize,
) -> Result<TrialOutcome> {
    config.validate()?;
    let point = *config
        .sweep_points()
        .get(point_index)
        .ok_or_else(|| IsacError::param("point_index", format!("{point_index} is out of range")))?;
    let prepared = PreparedPoint::new(config, point)?;
    run_prepared_trial(config, &prepared, trial)
}

/// Run one trial against a precomputed sweep point.
pub fn run_prepared_trial(
    config: &ExperimentConfig,
    prepared: &PreparedPoint,
    trial: usize,
) -> Result<TrialOutcome> {
    let point = &prepared.point;
    trial_body(config, prepared, trial).map_err(|e| IsacError::Trial {
        point: point.index,
        trial,
        source: Box::new(e),
    })
}

fn trial_body(
    config: &ExperimentConfig,
    prep: &PreparedPoint,
    trial: usize,
) -> Result<TrialOutcome> {
    let point = &prep.point;
    let dims = &point.dims;
    let budget = point.budget();
    let omega = point.omega_r;
    let n = dims.n_modes();
    let lambda = prep.sense_eig.eigenvalues();
    let f_r = prep.f_r;

    // Draw order is fixed so perfect-CSI rows do not depend on est_err_var.
    let mut rng = trial_rng(config.master_seed, point.index, trial);
    let chan = draw_taps(&prep.comm_taps, dims, &mut rng)?;
    let ra = random_allocation(budget, n, &mut rng)?;
    let estimate = if config.est_err_var > 0.0 {
        Some(add_estimation_error(&chan, config.est_err_var, &mut rng)?)
    } else {
        None
    };

    let comm_eig = eig_comm(&chan, dims)?;
    let mu = comm_eig.eigenvalues();
    let opc = waterfill(mu, budget, dims.noise_var)?.tagged(Scheme::Opc);
    let f_c = mi::comm_mi_eigen(mu, &opc.powers, dims)?.total_bits;
    let score = |i_sens: f64, i_comm: f64| SchemeMetrics {
        i_comm,
        i_sens,
        f_omega: mi::combine(omega, i_sens / f_r, i_comm / f_c),
    };
    let eigen_forms = |powers: &[f64]| -> Result<SchemeMetrics> {
        Ok(score(
            mi::sensing_mi_eigen(lambda, powers, dims)?.total_bits,
            mi::comm_mi_eigen(mu, powers, dims)?.total_bits,
        ))
    };

    let mut metrics = Vec::with_capacity(config.schemes.len() + 1);
    for variant in config.variants() {
        let m = match (variant.scheme, variant.imperfect_csi) {
            (Scheme::Opc, _) => {
                let target = CrossTarget::SensingEigen(&prep.sense_eig);
                score(
                    cross_evaluate(&opc, &comm_eig, target, dims)?.total_bits,
                    f_c,
                )
            }
            (Scheme::Ops, _) => {
                let target = CrossTarget::Communication(&chan);
                score(
                    f_r,
                    cross_evaluate(&prep.ops, &prep.sense_eig, target, dims)?.total_bits,
                )
            }
            (Scheme::Isac, false) => {
                let prob =
                    WeightedProblem::from_eigenvalues(lambda, mu, omega, f_r, f_c, budget, dims)?;
                eigen_forms(&weighted_allocate(&prob)?.powers)?
            }
            (Scheme::Isac, true) => {
                let est = estimate
                    .as_ref()
                    .expect("estimate drawn when est_err_var > 0");
                let est_eig = eig_comm(est, dims)?;
                let mu_hat = est_eig.eigenvalues();
                let f_c_hat = mi::comm_mi_eigen(
                    mu_hat,
                    &waterfill(mu_hat, budget, dims.noise_var)?.powers,
                    dims,
                )?
                .total_bits;
                let prob = WeightedProblem::from_eigenvalues(
                    lambda, mu_hat, omega, f_r, f_c_hat, budget, dims,
                )?;
                let alloc = weighted_allocate(&prob)?;
                let factor = linalg::gram_factor(est_eig.basis(), &alloc.powers);
                score(
                    mi::sensing_mi_eigen(lambda, &alloc.powers, dims)?.total_bits,
                    mi::comm_mi_factored(&factor, &chan, dims)?.total_bits,
                )
            }
            (Scheme::Ea, _) => eigen_forms(&equal_allocation(budget, n)?.powers)?,
            (Scheme::Ra, _) => eigen_forms(&ra.powers)?,
        };
        if !(m.i_comm.is_finite() && m.i_sens.is_finite() && m.f_omega.is_finite()) {
            return Err(IsacError::SolverFailure(format!(
                "{variant} produced a non-finite MI"
            )));
        }
        metrics.push((variant, m));
    }
    Ok(TrialOutcome {
        point: point.index,
        trial,
        f_r,
        f_c,
        metrics,
    })
}

/// Trial outcomes of one sweep point.
#[derive(Debug)]
pub struct PointTrials {
    pub point: SweepPoint,
    pub outcomes: Vec<TrialOutcome>,
    /// Failed trials, in trial order.
    pub failures: Vec<IsacError>,
}

/// Workers used for `config`: explicit setting, then `ISAC_THREADS`, then
/// the available parallelism.
pub fn worker_count(config: &ExperimentConfig) -> usize {
    if let Some(w) = config.workers {
        return w;
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => return n,
            _ => warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer"),
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Run every trial of every sweep point and keep the raw outcomes.
pub fn collect_trials(config: &ExperimentConfig) -> Result<Vec<PointTrials>> {
    config.validate()?;
    let workers = worker_count(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| IsacError::SolverFailure(format!("could not start {workers} workers: {e}")))?;
    let mut out = Vec::with_capacity(config.sweep.len());
    for point in config.sweep_points() {
        let prepared = PreparedPoint::new(config, point)?;
        let results: Vec<Result<TrialOutcome>> = pool.install(|| {
            (0..config.n_trials)
                .into_par_iter()
                .map(|t| run_prepared_trial(config, &prepared, t))
                .collect()
        });
        let mut outcomes = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for r in results {
            match r {
                Ok(o) => outcomes.push(o),
                Err(e) => failures.push(e),
            }
        }
        if !failures.is_empty() {
            warn!(
                "sweep point {}: {} of {} trials failed, first: {}",
                point.index,
                failures.len(),
                config.n_trials,
                failures[0]
            );
        }
        if failures.len() as f64 > MAX_FAILURE_RATE * config.n_trials as f64 {
            return Err(IsacError::SweepFailed {
                point: point.index,
                failed: failures.len(),
                total: config.n_trials,
                first: failures[0].to_string(),
            });
        }
        info!(
            "{} = {}: {} trials done on {workers} workers",
            config.sweep.name(),
            point.value,
            outcomes.len()
        );
        out.push(PointTrials {
            point,
            outcomes,
            failures,
        });
    }
    Ok(out)
}

/// Averaged rates of one scheme at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_value: SweepValue,
    pub scheme: SchemeVariant,
    pub spectral_efficiency: f64,
    pub sensing_rate: f64,
    pub weighted_mi: f64,
    pub se_stderr: f64,
    pub sr_stderr: f64,
    pub wmi_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Name of the swept parameter, e.g. `snr_db`.
    pub sweep_var: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, value: SweepValue, scheme: SchemeVariant) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == value && r.scheme == scheme)
    }

    /// Rows of one scheme in sweep order.
    pub fn series(&self, scheme: SchemeVariant) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error of the mean (zero for a single sample
/// or identical samples).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    // Identical samples (deterministic metrics) get an exact zero.
    if n == 1 || values.iter().all(|&v| v == values[0]) {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Average raw outcomes into rows, one per `(point, variant)`.
pub fn summarize(config: &ExperimentConfig, points: &[PointTrials]) -> SweepResult {
    let variants = config.variants();
    let mut rows = Vec::with_capacity(points.len() * variants.len());
    for pt in points {
        let dims = &pt.point.dims;
        for &variant in &variants {
            let ms: Vec<&SchemeMetrics> =
                pt.outcomes.iter().filter_map(|o| o.get(variant)).collect();
            let se: Vec<f64> = ms
                .iter()
                .map(|m| mi::spectral_efficiency(m.i_comm, dims))
                .collect();
            let sr: Vec<f64> = ms
                .iter()
                .map(|m| mi::sensing_rate(m.i_sens, dims))
                .collect();
            let w: Vec<f64> = ms.iter().map(|m| m.f_omega).collect();
            let (se_mean, se_err) = mean_stderr(&se);
            let (sr_mean, sr_err) = mean_stderr(&sr);
            let (w_mean, w_err) = mean_stderr(&w);
            rows.push(SweepRow {
                sweep_value: pt.point.value,
                scheme: variant,
                spectral_efficiency: se_mean,
                sensing_rate: sr_mean,
                weighted_mi: w_mean,
                se_stderr: se_err,
                sr_stderr: sr_err,
                wmi_stderr: w_err,
            });
        }
    }
    SweepResult {
        sweep_var: config.sweep.name().to_string(),
        rows,
    }
}

/// Run the sweep and average each scheme over its trials.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let points = collect_trials(config)?;
    Ok(summarize(config, &points))
}

/// One ISAC operating point of a sensing/communication trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub omega_r: f64,
    pub sensing_rate: f64,
    pub spectral_efficiency: f64,
    pub sr_stderr: f64,
    pub se_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    pub snr_db: f64,
    pub points: Vec<TradeoffPoint>,
}

/// ISAC trade-off curves: one per SNR, traced over the `omega_r` sweep of
/// `config`. All curves share the seed, so they see the same channels.
pub fn tradeoff_curve(config: &ExperimentConfig, snrs_db: &[f64]) -> Result<Vec<TradeoffCurve>> {
    if !matches!(config.sweep, Sweep::OmegaR(_)) {
        return Err(invalid("sweep", "a trade-off curve needs an omega_r sweep"));
    }
    if snrs_db.is_empty() {
        return Err(IsacError::param("snrs_db", "need at least one SNR"));
    }
    let isac = SchemeVariant::perfect(Scheme::Isac);
    snrs_db
        .iter()
        .map(|&snr| {
            let cfg = ExperimentConfig {
                snr_db: snr,
                schemes: vec![Scheme::Isac],
                est_err_var: 0.0,
                ..config.clone()
            };
            let result = run_sweep(&cfg)?;
            let points = cfg
                .sweep_points()
                .iter()
                .map(|p| {
                    let row = result
                        .row(p.value, isac)
                        .expect("every point has an ISAC row");
                    TradeoffPoint {
                        omega_r: p.omega_r,
                        sensing_rate: row.sensing_rate,
                        spectral_efficiency: row.spectral_efficiency,
                        sr_stderr: row.sr_stderr,
                        se_stderr: row.se_stderr,
                    }
                })
                .collect();
            Ok(TradeoffCurve {
                snr_db: snr,
                points,
            })
        })
        .collect()
}

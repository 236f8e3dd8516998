//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line,
//! written straight to stdout so it survives output capture.
//!
//! Ordering claims use two-sigma bands: "A ≥ B" is rejected only when the
//! mean of `A − B` falls more than two standard errors below zero.

mod common;

use std::io::Write;
use std::time::Instant;

use common::{rel_close, rng};
use isac_waveform::channel::{
    draw_taps, empirical_sensing_correlation, sensing_correlation_matrix, SystemDims, TapSet,
};
use isac_waveform::cli::{figure_recipes, write_csv};
use isac_waveform::linalg;
use isac_waveform::mi::{comm_mi_eigen, comm_mi_general, sensing_mi_eigen, sensing_mi_general};
use isac_waveform::optimizer::{
    covariance, eig_comm, eig_sensing, reconstruct_waveform, subcarrier_blocks, waterfill,
    weighted_allocate, OrthonormalBlocks, Scheme, WeightedProblem,
};
use isac_waveform::oracle::{
    grid_search_allocation, GridSpec, LogSumObjective, SeparableObjective,
};
use isac_waveform::simulator::{
    collect_trials, mean_stderr, run_sweep, summarize, tradeoff_curve, ExperimentConfig,
    PointTrials, SchemeVariant, Sweep, SweepRow,
};
use rand::Rng;

const TRIALS: usize = 400;

fn report(id: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id}: {verdict} ({detail})").unwrap();
    out.flush().unwrap();
}

fn random_dims<R: Rng>(r: &mut R, max_modes: usize) -> SystemDims {
    loop {
        let n_tx = r.random_range(1..=4);
        let n_subcarriers = r.random_range(1..=4);
        if n_tx * n_subcarriers > max_modes {
            continue;
        }
        let paths = r.random_range(1..=n_subcarriers);
        return SystemDims {
            n_subcarriers,
            n_tx,
            n_rx: r.random_range(1..=4),
            n_symbols: r.random_range(n_tx..=n_tx + 3),
            n_paths_comm: paths,
            n_paths_sense: r.random_range(1..=n_subcarriers),
            noise_var: 1.0,
        };
    }
}

/// Random sensing eigenvalues and communication eigenvalues of one instance.
fn random_eigs<R: Rng>(d: &SystemDims, r: &mut R) -> (Vec<f64>, Vec<f64>) {
    let powers = |n: usize, r: &mut R| {
        (0..n)
            .map(|_| r.random_range(0.05..1.0))
            .collect::<Vec<_>>()
    };
    let ps = powers(d.n_paths_sense, r);
    let sense = TapSet::exponential(&ps, d.n_tx, r.random_range(0.0..0.95)).unwrap();
    let sigma = sensing_correlation_matrix(&sense, d).unwrap();
    let lambda = eig_sensing(sigma.full()).unwrap().eigenvalues().to_vec();
    let pc = powers(d.n_paths_comm, r);
    let comm = TapSet::exponential(&pc, d.n_tx, r.random_range(0.0..0.95)).unwrap();
    let chan = draw_taps(&comm, d, r).unwrap();
    let mu = eig_comm(&chan, d).unwrap().eigenvalues().to_vec();
    (lambda, mu)
}

fn budget<R: Rng>(d: &SystemDims, r: &mut R) -> f64 {
    10f64.powf(r.random_range(-5.0..20.0) / 10.0) * d.n_modes() as f64 * d.noise_var
}

/// Weighted objective `ω I_s/F_r + (1−ω) I_c/F_c` as an oracle objective.
fn weighted_objective(
    lambda: &[f64],
    mu: &[f64],
    omega: f64,
    f_r: f64,
    f_c: f64,
    d: &SystemDims,
) -> LogSumObjective {
    let ln2 = std::f64::consts::LN_2;
    let ws = omega * d.n_rx as f64 / (f_r * ln2);
    let wc = (1.0 - omega) * d.n_symbols as f64 / (f_c * ln2);
    LogSumObjective::new(
        lambda
            .iter()
            .zip(mu)
            .map(|(&l, &m)| vec![(ws, l / d.noise_var), (wc, m / d.noise_var)])
            .collect(),
    )
}

#[test]
fn criterion_1_mi_identities() {
    let start = Instant::now();
    let mut r = rng(101);
    let d = SystemDims {
        n_subcarriers: 2,
        n_tx: 2,
        n_rx: 2,
        n_symbols: 2,
        n_paths_comm: 2,
        n_paths_sense: 2,
        noise_var: 1.0,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let e = budget(&d, &mut r);
        let ps: Vec<f64> = (0..2).map(|_| r.random_range(0.05..1.0)).collect();
        let taps = TapSet::exponential(&ps, 2, r.random_range(0.0..0.95)).unwrap();
        let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
        let se = eig_sensing(sigma.full()).unwrap();
        let xi = isac_waveform::optimizer::random_allocation(e, d.n_modes(), &mut r).unwrap();
        let x = reconstruct_waveform(&xi, &se, &d, &OrthonormalBlocks::Dft)
            .unwrap()
            .transmit;
        let general = sensing_mi_general(&x, sigma.full(), &d).unwrap().total_bits;
        let eigen = sensing_mi_eigen(se.eigenvalues(), &xi.powers, &d)
            .unwrap()
            .total_bits;
        worst = worst.max((general - eigen).abs() / eigen.abs().max(1e-300));

        let chan = draw_taps(&taps, &d, &mut r).unwrap();
        let ce = eig_comm(&chan, &d).unwrap();
        let q = isac_waveform::optimizer::random_allocation(e, d.n_modes(), &mut r).unwrap();
        let covs = subcarrier_blocks(&covariance(&q, &ce), &d);
        let general = comm_mi_general(&covs, &chan, &d).unwrap().total_bits;
        let eigen = comm_mi_eigen(ce.eigenvalues(), &q.powers, &d)
            .unwrap()
            .total_bits;
        worst = worst.max((general - eigen).abs() / eigen.abs().max(1e-300));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-9 && secs < 10.0;
    report(
        "1",
        pass,
        &format!("max relative gap {worst:.2e} over 200 instances, {secs:.2} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_grid_oracle() {
    let start = Instant::now();
    let mut r = rng(202);
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..100 {
        let d = random_dims(&mut r, 4);
        let (lambda, mu) = random_eigs(&d, &mut r);
        let e = budget(&d, &mut r);
        let n = d.n_modes();
        let grid = GridSpec::new(n, 1.0 / 2000.0, e).unwrap();

        let ops = waterfill(&lambda, e, d.noise_var).unwrap();
        let s_obj = LogSumObjective::single(d.n_rx as f64, &lambda, d.noise_var);
        let f_r = s_obj.value(&ops.powers);
        worst = worst.min(f_r - grid_search_allocation(&s_obj, &grid).unwrap().value);

        let opc = waterfill(&mu, e, d.noise_var).unwrap();
        let c_obj = LogSumObjective::single(d.n_symbols as f64, &mu, d.noise_var);
        let f_c = c_obj.value(&opc.powers);
        worst = worst.min(f_c - grid_search_allocation(&c_obj, &grid).unwrap().value);

        let omega = r.random_range(0.0..=1.0);
        let prob = WeightedProblem::from_eigenvalues(&lambda, &mu, omega, f_r, f_c, e, &d).unwrap();
        let w = weighted_allocate(&prob).unwrap();
        let w_obj = weighted_objective(&lambda, &mu, omega, f_r, f_c, &d);
        worst = worst
            .min(w_obj.value(&w.powers) - grid_search_allocation(&w_obj, &grid).unwrap().value);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst >= -1e-4 && secs < 120.0;
    report(
        "2",
        pass,
        &format!("min (solver - lattice) {worst:.2e} over 100 instances, {secs:.1} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_kkt_fuzz() {
    let mut r = rng(303);
    let mut failures = Vec::new();
    for k in 0..1000 {
        let prob = if k % 2 == 0 {
            let d = random_dims(&mut r, 16);
            let (lambda, mu) = random_eigs(&d, &mut r);
            let e = budget(&d, &mut r);
            let f_r = sensing_mi_eigen(&lambda, &waterfill(&lambda, e, 1.0).unwrap().powers, &d)
                .unwrap()
                .total_bits;
            let f_c = comm_mi_eigen(&mu, &waterfill(&mu, e, 1.0).unwrap().powers, &d)
                .unwrap()
                .total_bits;
            let omega = [0.0, 1.0, r.random_range(0.0..1.0)][r.random_range(0..3)];
            WeightedProblem::from_eigenvalues(&lambda, &mu, omega, f_r, f_c, e, &d).unwrap()
        } else {
            let n = r.random_range(1..=64);
            let gain = |r: &mut rand_chacha::ChaCha8Rng| {
                if r.random_bool(0.2) {
                    0.0
                } else {
                    10f64.powf(r.random_range(-4.0..3.0))
                }
            };
            let mut nu: Vec<f64> = (0..n).map(|_| gain(&mut r)).collect();
            let phi: Vec<f64> = (0..n).map(|_| gain(&mut r)).collect();
            nu[0] = nu[0].max(1e-3);
            WeightedProblem::new(
                nu,
                phi,
                r.random_range(0.0..2.0),
                r.random_range(0.0..2.0),
                10f64.powf(r.random_range(-2.0..4.0)),
            )
            .unwrap()
        };
        let alloc = weighted_allocate(&prob).unwrap();
        let gamma = alloc
            .multiplier
            .expect("weighted solver reports its multiplier");
        let e = prob.budget;
        let total: f64 = alloc.powers.iter().sum();
        let mut ok = (total - e).abs() <= 1e-8 * e && gamma > 0.0;
        for (i, &x) in alloc.powers.iter().enumerate() {
            let (nu, phi) = (prob.nu[i], prob.phi[i]);
            // Derivative of ε ln(1+νx) + η ln(1+φx), written out independently.
            let slope = |x: f64| prob.eps * nu / (1.0 + nu * x) + prob.eta * phi / (1.0 + phi * x);
            ok &= x >= 0.0;
            if x > 0.0 {
                ok &= (slope(x) - gamma).abs() < 1e-7 * gamma;
            } else {
                ok &= slope(0.0) <= gamma * (1.0 + 1e-7);
            }
        }
        if !ok {
            failures.push(k);
        }
    }
    let pass = failures.is_empty();
    report(
        "3",
        pass,
        &format!(
            "{} of 1000 instances violate a KKT condition",
            failures.len()
        ),
    );
    assert!(pass, "failing instances: {failures:?}");
}

#[test]
fn criterion_4_boundary_reductions() {
    let mut r = rng(404);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = random_dims(&mut r, 16);
        let (lambda, mu) = random_eigs(&d, &mut r);
        let e = budget(&d, &mut r);
        let ops = waterfill(&lambda, e, d.noise_var).unwrap();
        let opc = waterfill(&mu, e, d.noise_var).unwrap();
        let f_r = sensing_mi_eigen(&lambda, &ops.powers, &d)
            .unwrap()
            .total_bits;
        let f_c = comm_mi_eigen(&mu, &opc.powers, &d).unwrap().total_bits;
        for (omega, want) in [(1.0, &ops), (0.0, &opc)] {
            let prob =
                WeightedProblem::from_eigenvalues(&lambda, &mu, omega, f_r, f_c, e, &d).unwrap();
            let got = weighted_allocate(&prob).unwrap();
            for (a, b) in got.powers.iter().zip(&want.powers) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let pass = worst <= 1e-8;
    report(
        "4",
        pass,
        &format!("max per-mode gap {worst:.2e} over 100 instances at both endpoints"),
    );
    assert!(pass);
}

fn table2(trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_trials: trials,
        ..ExperimentConfig::default()
    }
}

#[test]
fn criterion_5_per_trial_dominance() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        sweep: Sweep::SnrDb(vec![1.0, 10.0]),
        omega_r: 0.5,
        schemes: Scheme::ALL.to_vec(),
        ..table2(TRIALS)
    };
    let points = collect_trials(&cfg).unwrap();
    let mut violations = 0;
    let mut checked = 0;
    let tol = |v: f64| 1e-6 * v.abs().max(1.0);
    for p in &points {
        assert!(p.failures.is_empty());
        for out in &p.outcomes {
            let m = |s| *out.scheme(s).unwrap();
            let (opc, ops, isac) = (m(Scheme::Opc), m(Scheme::Ops), m(Scheme::Isac));
            for s in Scheme::ALL {
                let x = m(s);
                checked += 1;
                if x.i_comm > opc.i_comm + tol(opc.i_comm)
                    || x.i_sens > ops.i_sens + tol(ops.i_sens)
                    || x.f_omega > isac.f_omega + tol(isac.f_omega)
                {
                    violations += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = violations == 0 && secs < 600.0;
    report(
        "5",
        pass,
        &format!("{violations} violations in {checked} scheme-trials at 1 and 10 dB, {secs:.1} s"),
    );
    assert!(pass);
}

/// `mean(a − b)` and its standard error over paired trials.
fn paired(
    points: &PointTrials,
    a: SchemeVariant,
    b: SchemeVariant,
    metric: fn(&isac_waveform::simulator::SchemeMetrics) -> f64,
) -> (f64, f64) {
    let diffs: Vec<f64> = points
        .outcomes
        .iter()
        .map(|o| metric(o.get(a).unwrap()) - metric(o.get(b).unwrap()))
        .collect();
    mean_stderr(&diffs)
}

/// `a ≥ b` within a two-sigma band, for independent estimates.
fn not_below(a: f64, a_se: f64, b: f64, b_se: f64) -> bool {
    a - b > -2.0 * a_se.hypot(b_se)
}

fn increasing(rows: &[&SweepRow], metric: fn(&SweepRow) -> (f64, f64)) -> bool {
    rows.windows(2).all(|w| {
        let ((a, sa), (b, sb)) = (metric(w[0]), metric(w[1]));
        not_below(b, sb, a, sa)
    })
}

fn decreasing(rows: &[&SweepRow], metric: fn(&SweepRow) -> (f64, f64)) -> bool {
    rows.windows(2).all(|w| {
        let ((a, sa), (b, sb)) = (metric(w[0]), metric(w[1]));
        not_below(a, sa, b, sb)
    })
}

fn se_of(r: &SweepRow) -> (f64, f64) {
    (r.spectral_efficiency, r.se_stderr)
}

fn sr_of(r: &SweepRow) -> (f64, f64) {
    (r.sensing_rate, r.sr_stderr)
}

#[test]
fn criterion_6_trends() {
    let mut verdicts = Vec::new();

    // (a) and (e): SNR sweep with imperfect CSI enabled.
    let cfg = ExperimentConfig {
        sweep: Sweep::SnrDb(vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]),
        est_err_var: 0.01,
        ..table2(TRIALS)
    };
    let points = collect_trials(&cfg).unwrap();
    let result = summarize(&cfg, &points);
    let a = Scheme::ALL.iter().all(|&s| {
        let rows = result.series(SchemeVariant::perfect(s));
        increasing(&rows, se_of) && increasing(&rows, sr_of)
    });
    verdicts.push((
        "6a",
        a,
        "SE and SR of every scheme non-decreasing in SNR".to_string(),
    ));

    let perfect = SchemeVariant::perfect(Scheme::Isac);
    let icsi = SchemeVariant::imperfect(Scheme::Isac);
    let mut e_ok = true;
    let mut notes = Vec::new();
    for p in &points {
        let (dc, sc) = paired(p, perfect, icsi, |m| m.i_comm);
        let (ds, ss) = paired(p, perfect, icsi, |m| m.i_sens);
        let comm_ok = dc > -2.0 * sc;
        let sens_ok = ds > -2.0 * ss;
        e_ok &= comm_ok && sens_ok;
        if !(comm_ok && sens_ok) {
            notes.push(format!(
                "{} dB: comm gap {dc:+.3}±{sc:.3}, sensing gap {ds:+.3}±{ss:.3} bits",
                p.point.snr_db
            ));
        }
    }
    let e_detail = if notes.is_empty() {
        "perfect-CSI ISAC at or above imperfect-CSI ISAC for both MIs at every SNR".to_string()
    } else {
        format!("imperfect CSI significantly higher at {}", notes.join("; "))
    };
    verdicts.push(("6e", e_ok, e_detail));

    // (b): OPS sensing rate against the number of subcarriers.
    let fig9 = figure_recipes("fig9").unwrap().runs.remove(0).config;
    let cfg = ExperimentConfig {
        n_trials: TRIALS,
        schemes: vec![Scheme::Ops],
        est_err_var: 0.0,
        ..fig9
    };
    let r9 = run_sweep(&cfg).unwrap();
    let ops_rows = r9.series(SchemeVariant::perfect(Scheme::Ops));
    let b = decreasing(&ops_rows, sr_of);
    let trace: Vec<String> = ops_rows
        .iter()
        .map(|r| format!("{:.3}", r.sensing_rate))
        .collect();
    verdicts.push((
        "6b",
        b,
        format!("OPS sensing rate over N_c: {}", trace.join(", ")),
    ));

    // (c): weighted MI across the sensing weight at 1 dB.
    let fig6 = figure_recipes("fig6a").unwrap().runs.remove(0).config;
    let cfg = ExperimentConfig {
        n_trials: TRIALS,
        schemes: vec![Scheme::Opc, Scheme::Ops, Scheme::Isac],
        est_err_var: 0.0,
        ..fig6
    };
    let points = collect_trials(&cfg).unwrap();
    let isac = SchemeVariant::perfect(Scheme::Isac);
    let opc = SchemeVariant::perfect(Scheme::Opc);
    let ops = SchemeVariant::perfect(Scheme::Ops);
    let last = points.len() - 1;
    let endpoint_gap = points[0]
        .outcomes
        .iter()
        .map(|o| (o.get(isac).unwrap().f_omega - o.get(opc).unwrap().f_omega).abs())
        .chain(
            points[last]
                .outcomes
                .iter()
                .map(|o| (o.get(isac).unwrap().f_omega - o.get(ops).unwrap().f_omega).abs()),
        )
        .fold(0.0, f64::max);
    let interior = &points[1..last];
    let mean_gap = |other| {
        let stats: Vec<(f64, f64)> = interior
            .iter()
            .map(|p| paired(p, isac, other, |m| m.f_omega))
            .collect();
        let k = stats.len() as f64;
        let mean = stats.iter().map(|s| s.0).sum::<f64>() / k;
        let se = stats.iter().map(|s| s.1 * s.1).sum::<f64>().sqrt() / k;
        (mean, se)
    };
    let (g_opc, s_opc) = mean_gap(opc);
    let (g_ops, s_ops) = mean_gap(ops);
    let c = endpoint_gap <= 1e-8 && g_opc > 2.0 * s_opc && g_ops > 2.0 * s_ops;
    verdicts.push((
        "6c",
        c,
        format!(
            "endpoint gap {endpoint_gap:.1e}; interior mean lead over OPC {g_opc:.4}±{s_opc:.4}, over OPS {g_ops:.4}±{s_ops:.4}"
        ),
    ));

    // (d): trade-off curves at 10 dB dominate those at 1 dB.
    let fig7 = figure_recipes("fig7").unwrap().runs.remove(0).config;
    let cfg = ExperimentConfig {
        n_trials: TRIALS,
        ..fig7
    };
    let curves = tradeoff_curve(&cfg, &[1.0, 10.0]).unwrap();
    let d = curves[0]
        .points
        .iter()
        .zip(&curves[1].points)
        .all(|(lo, hi)| {
            not_below(hi.sensing_rate, hi.sr_stderr, lo.sensing_rate, lo.sr_stderr)
                && not_below(
                    hi.spectral_efficiency,
                    hi.se_stderr,
                    lo.spectral_efficiency,
                    lo.se_stderr,
                )
        });
    verdicts.push((
        "6d",
        d,
        "10 dB curve componentwise above 1 dB curve at every weight".to_string(),
    ));

    verdicts.sort_by_key(|v| v.0);
    for (id, pass, detail) in &verdicts {
        report(id, *pass, detail);
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.1).map(|v| v.0).collect();
    assert!(failed.is_empty(), "failed trend checks: {failed:?}");
}

#[test]
fn criterion_7_channel_statistics() {
    let d = SystemDims::default();
    let taps = TapSet::exponential(&[0.25; 4], d.n_tx, 0.5).unwrap();
    let analytic = sensing_correlation_matrix(&taps, &d).unwrap();
    let mut r = rng(707);
    let empirical = empirical_sensing_correlation(&taps, &d, 10_000, &mut r).unwrap();
    let full_err = linalg::frobenius_rel_error(&empirical, analytic.full());

    let nt = d.n_tx;
    let half = d.n_subcarriers / 2;
    let diag_norm = linalg::frobenius(&analytic.block(0, 0));
    let analytic_half = linalg::frobenius(&analytic.block(0, half)) / diag_norm;
    let empirical_half =
        linalg::frobenius(&empirical.view((0, half * nt), (nt, nt)).into_owned()) / diag_norm;
    let pass = full_err < 0.03 && analytic_half < 1e-12 && empirical_half < 0.02;
    report(
        "7",
        pass,
        &format!(
            "full error {:.2}%, half-band block {analytic_half:.1e} analytic, {:.2}% empirical",
            100.0 * full_err,
            100.0 * empirical_half
        ),
    );
    assert!(rel_close(
        analytic.full().trace().re,
        empirical.trace().re,
        0.03
    ));
    assert!(pass);
}

#[test]
fn criterion_8_determinism() {
    let cfg = ExperimentConfig {
        sweep: Sweep::SnrDb(vec![1.0, 10.0]),
        est_err_var: 0.01,
        ..table2(100)
    };
    let csv = |workers| {
        let result = run_sweep(&ExperimentConfig {
            workers: Some(workers),
            ..cfg.clone()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&result, &mut buf).unwrap();
        buf
    };
    let runs = [csv(1), csv(8), csv(1), csv(8)];
    let pass = runs.iter().all(|b| *b == runs[0]);
    report(
        "8",
        pass,
        &format!(
            "{} identical CSV bytes across 1 and 8 workers, two runs each",
            runs[0].len()
        ),
    );
    assert!(pass);
}

//! Correlated frequency-selective MIMO-OFDM channel synthesis.
//!
//! Each tap of the tapped-delay-line is colored on the transmit side by a
//! spatial correlation matrix (`H_l = σ_l · R_l^{1/2} · W`, `W` i.i.d.
//! CN(0, 1)); the receive side is uncorrelated. Channel matrices are
//! `N_t × N_r`, and the per-subcarrier response is the DFT of the taps.

use std::f64::consts::PI;

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{self, CMatrix, C64};

/// Eigenvalues of a spatial correlation matrix above `-ROOT_TOL·max` are
/// clamped to zero before taking the square root.
const ROOT_TOL: f64 = 1e-12;

/// All problem dimensions plus the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemDims {
    pub n_subcarriers: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_symbols: usize,
    /// Number of communication paths (`L_c + 1`).
    pub n_paths_comm: usize,
    /// Number of sensing paths / targets (`L_r + 1`).
    pub n_paths_sense: usize,
    pub noise_var: f64,
}

impl Default for SystemDims {
    fn default() -> Self {
        SystemDims {
            n_subcarriers: 32,
            n_tx: 4,
            n_rx: 4,
            n_symbols: 10,
            n_paths_comm: 4,
            n_paths_sense: 4,
            noise_var: 1.0,
        }
    }
}

impl SystemDims {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_subcarriers", self.n_subcarriers),
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_symbols", self.n_symbols),
            ("n_paths_comm", self.n_paths_comm),
            ("n_paths_sense", self.n_paths_sense),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(IsacError::param(name, "must be at least 1"));
            }
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(IsacError::param("noise_var", "must be positive and finite"));
        }
        if self.n_paths_comm > self.n_subcarriers {
            return Err(IsacError::param(
                "n_paths_comm",
                "delay spread must fit within one OFDM symbol (paths <= subcarriers)",
            ));
        }
        if self.n_paths_sense > self.n_subcarriers {
            return Err(IsacError::param(
                "n_paths_sense",
                "delay spread must fit within one OFDM symbol (paths <= subcarriers)",
            ));
        }
        Ok(())
    }

    /// Number of eigen-domain modes, `N_t · N_c`.
    pub fn n_modes(&self) -> usize {
        self.n_tx * self.n_subcarriers
    }
}

/// `e^{-j2π·delay·p/N_c}` with the exponent reduced modulo `N_c` first.
pub fn subcarrier_phase(delay: usize, p: isize, n_subcarriers: usize) -> C64 {
    let n = n_subcarriers as isize;
    let k = ((delay as isize) * p).rem_euclid(n);
    C64::from_polar(1.0, -2.0 * PI * k as f64 / n_subcarriers as f64)
}

/// Exponential transmit correlation, `R_ij = ρ^{|i−j|}`.
pub fn make_exponential_correlation(n_tx: usize, rho: f64) -> Result<CMatrix> {
    if n_tx == 0 {
        return Err(IsacError::param("n_tx", "must be at least 1"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(IsacError::param("rho", format!("{rho} is outside [0, 1)")));
    }
    Ok(CMatrix::from_fn(n_tx, n_tx, |i, j| {
        C64::new(rho.powi(i.abs_diff(j) as i32), 0.0)
    }))
}

#[derive(Debug, Clone)]
pub struct Tap {
    delay: usize,
    spatial_corr: CMatrix,
    root: CMatrix,
    power: f64,
}

impl Tap {
    pub fn new(delay: usize, spatial_corr: CMatrix, power: f64) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(IsacError::param(
                "tap_power",
                format!("{power} must be >= 0"),
            ));
        }
        if !spatial_corr.is_square() {
            return Err(IsacError::input("spatial correlation must be square"));
        }
        for i in 0..spatial_corr.nrows() {
            if (spatial_corr[(i, i)] - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(IsacError::input(format!(
                    "spatial correlation of tap {delay} has diagonal entry {} != 1",
                    spatial_corr[(i, i)]
                )));
            }
        }
        let root = linalg::psd_sqrt(&spatial_corr, ROOT_TOL)?;
        Ok(Tap {
            delay,
            spatial_corr,
            root,
            power,
        })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn spatial_corr(&self) -> &CMatrix {
        &self.spatial_corr
    }

    /// `R^{1/2}`, computed once at construction.
    pub fn spatial_root(&self) -> &CMatrix {
        &self.root
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Tap profile of a frequency-selective channel ensemble.
#[derive(Debug, Clone)]
pub struct TapSet {
    taps: Vec<Tap>,
}

impl TapSet {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        let Some(first) = taps.first() else {
            return Err(IsacError::input("tap set is empty"));
        };
        let n_tx = first.spatial_corr.nrows();
        for (i, tap) in taps.iter().enumerate() {
            if tap.spatial_corr.nrows() != n_tx {
                return Err(IsacError::input("taps disagree on the antenna count"));
            }
            if taps[..i].iter().any(|t| t.delay == tap.delay) {
                return Err(IsacError::input(format!(
                    "duplicate tap delay {}",
                    tap.delay
                )));
            }
        }
        Ok(TapSet { taps })
    }

    /// Taps at delays `0..powers.len()` sharing one exponential correlation.
    pub fn exponential(powers: &[f64], n_tx: usize, rho: f64) -> Result<Self> {
        let corr = make_exponential_correlation(n_tx, rho)?;
        let taps = powers
            .iter()
            .enumerate()
            .map(|(l, &p)| Tap::new(l, corr.clone(), p))
            .collect::<Result<Vec<_>>>()?;
        TapSet::new(taps)
    }

    /// `n_paths` equal-power taps summing to one.
    pub fn uniform(n_paths: usize, n_tx: usize, rho: f64) -> Result<Self> {
        if n_paths == 0 {
            return Err(IsacError::param("n_paths", "must be at least 1"));
        }
        TapSet::exponential(&vec![1.0 / n_paths as f64; n_paths], n_tx, rho)
    }

    /// Rescale tap powers to sum to one. Returns `true` if anything changed.
    pub fn normalize_powers(&mut self) -> bool {
        let total = self.total_power();
        if total <= 0.0 || (total - 1.0).abs() <= 1e-12 {
            return false;
        }
        warn!("tap powers sum to {total}, renormalizing to 1");
        for tap in &mut self.taps {
            tap.power /= total;
        }
        true
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].spatial_corr.nrows()
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.power).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.delay).max().unwrap_or(0)
    }

    fn check_dims(&self, dims: &SystemDims) -> Result<()> {
        dims.validate()?;
        if self.n_tx() != dims.n_tx {
            return Err(IsacError::input(format!(
                "tap set has {} transmit antennas, dims say {}",
                self.n_tx(),
                dims.n_tx
            )));
        }
        if self.max_delay() >= dims.n_subcarriers {
            return Err(IsacError::input(format!(
                "tap delay {} does not fit in {} subcarriers",
                self.max_delay(),
                dims.n_subcarriers
            )));
        }
        Ok(())
    }
}

/// One draw of the channel: time-domain taps and the per-subcarrier response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    tap_delays: Vec<usize>,
    tap_matrices: Vec<CMatrix>,
    freq_response: Vec<CMatrix>,
}

impl ChannelRealization {
    /// Build from taps, evaluating `H(p) = Σ_l H_l e^{-j2π d_l p / N_c}`.
    pub fn from_taps(delays: Vec<usize>, taps: Vec<CMatrix>, n_subcarriers: usize) -> Result<Self> {
        if delays.len() != taps.len() || taps.is_empty() {
            return Err(IsacError::input(
                "need one delay per tap and at least one tap",
            ));
        }
        let (rows, cols) = taps[0].shape();
        if taps.iter().any(|t| t.shape() != (rows, cols)) {
            return Err(IsacError::input("tap matrices differ in shape"));
        }
        let freq_response = dft_of_taps(&delays, &taps, n_subcarriers);
        Ok(ChannelRealization {
            tap_delays: delays,
            tap_matrices: taps,
            freq_response,
        })
    }

    /// A channel known only through its frequency response (e.g. an estimate).
    pub fn from_frequency(freq_response: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = freq_response.first() else {
            return Err(IsacError::input("frequency response is empty"));
        };
        let shape = first.shape();
        if freq_response.iter().any(|m| m.shape() != shape) {
            return Err(IsacError::input("subcarrier matrices differ in shape"));
        }
        Ok(ChannelRealization {
            tap_delays: Vec::new(),
            tap_matrices: Vec::new(),
            freq_response,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.freq_response.len()
    }

    pub fn n_tx(&self) -> usize {
        self.freq_response[0].nrows()
    }

    pub fn n_rx(&self) -> usize {
        self.freq_response[0].ncols()
    }

    pub fn tap_matrices(&self) -> &[CMatrix] {
        &self.tap_matrices
    }

    pub fn tap_delays(&self) -> &[usize] {
        &self.tap_delays
    }

    pub fn freq_response(&self) -> &[CMatrix] {
        &self.freq_response
    }

    /// Largest relative deviation between the stored response and the DFT of
    /// the stored taps; `None` for frequency-only channels.
    pub fn dft_consistency_error(&self) -> Option<f64> {
        if self.tap_matrices.is_empty() {
            return None;
        }
        let regen = dft_of_taps(&self.tap_delays, &self.tap_matrices, self.n_subcarriers());
        let scale = self
            .freq_response
            .iter()
            .map(linalg::frobenius)
            .fold(0.0, f64::max)
            .max(1e-300);
        let worst = regen
            .iter()
            .zip(&self.freq_response)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(0.0, f64::max);
        Some(worst / scale)
    }

    /// Block-diagonal `diag{H(0), …, H(N_c−1)}` of size `N_tN_c × N_rN_c`.
    pub fn block_matrix(&self) -> CMatrix {
        linalg::block_diag(&self.freq_response)
    }

    /// Subcarrier responses stacked vertically, `N_tN_c × N_r`.
    pub fn stacked(&self) -> CMatrix {
        let (nt, nr) = (self.n_tx(), self.n_rx());
        let mut out = linalg::zeros(nt * self.n_subcarriers(), nr);
        for (p, m) in self.freq_response.iter().enumerate() {
            out.view_mut((p * nt, 0), (nt, nr)).copy_from(m);
        }
        out
    }

    pub fn dims_match(&self, dims: &SystemDims) -> bool {
        self.n_subcarriers() == dims.n_subcarriers
            && self.n_tx() == dims.n_tx
            && self.n_rx() == dims.n_rx
    }
}

fn dft_of_taps(delays: &[usize], taps: &[CMatrix], n_subcarriers: usize) -> Vec<CMatrix> {
    let (rows, cols) = taps[0].shape();
    (0..n_subcarriers)
        .map(|p| {
            let mut acc = linalg::zeros(rows, cols);
            for (&d, tap) in delays.iter().zip(taps) {
                acc += tap * subcarrier_phase(d, p as isize, n_subcarriers);
            }
            acc
        })
        .collect()
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Draw one channel from the ensemble described by `tapset`.
pub fn draw_taps<R: Rng + ?Sized>(
    tapset: &TapSet,
    dims: &SystemDims,
    rng: &mut R,
) -> Result<ChannelRealization> {
    tapset.check_dims(dims)?;
    let (nt, nr) = (dims.n_tx, dims.n_rx);
    let mut delays = Vec::with_capacity(tapset.taps.len());
    let mut taps = Vec::with_capacity(tapset.taps.len());
    for tap in &tapset.taps {
        let white = CMatrix::from_fn(nt, nr, |_, _| complex_gaussian(rng, 1.0));
        let scale = C64::new(tap.power.sqrt(), 0.0);
        taps.push(tap.spatial_root() * white * scale);
        delays.push(tap.delay);
    }
    ChannelRealization::from_taps(delays, taps, dims.n_subcarriers)
}

/// Add i.i.d. CN(0, `err_var`) to every frequency-domain entry.
///
/// The result is a frequency-only channel (its taps are dropped) unless
/// `err_var` is zero, in which case an identical copy is returned.
pub fn add_estimation_error<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    err_var: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if !(err_var >= 0.0 && err_var.is_finite()) {
        return Err(IsacError::param(
            "err_var",
            format!("{err_var} must be >= 0"),
        ));
    }
    if err_var == 0.0 {
        return Ok(chan.clone());
    }
    let freq = chan
        .freq_response
        .iter()
        .map(|m| m.map(|z| z + complex_gaussian(rng, err_var)))
        .collect();
    ChannelRealization::from_frequency(freq)
}

/// Sensing-channel correlation `Σ_G = E[G Gᴴ] / N_r` and its block-diagonal
/// truncation `Σ_G'` (cross-subcarrier blocks zeroed).
#[derive(Debug, Clone)]
pub struct SensingCorrelation {
    full: CMatrix,
    blockdiag: CMatrix,
    n_subcarriers: usize,
    n_tx: usize,
}

impl SensingCorrelation {
    pub fn full(&self) -> &CMatrix {
        &self.full
    }

    pub fn blockdiag(&self) -> &CMatrix {
        &self.blockdiag
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// The `N_t × N_t` block for subcarrier pair `(p1, p2)` of the full matrix.
    pub fn block(&self, p1: usize, p2: usize) -> CMatrix {
        let nt = self.n_tx;
        self.full.view((p1 * nt, p2 * nt), (nt, nt)).into_owned()
    }
}

/// Analytic sensing-channel correlation for the ensemble `tapset`:
/// block `(p1, p2)` is `Σ_l σ_l² R_l e^{-j2π l (p1−p2)/N_c}`.
pub fn sensing_correlation_matrix(
    tapset: &TapSet,
    dims: &SystemDims,
) -> Result<SensingCorrelation> {
    tapset.check_dims(dims)?;
    let (nc, nt) = (dims.n_subcarriers, dims.n_tx);
    // Blocks only depend on p1 − p2 (mod N_c).
    let by_offset: Vec<CMatrix> = (0..nc)
        .map(|k| {
            let mut acc = linalg::zeros(nt, nt);
            for tap in &tapset.taps {
                let w = subcarrier_phase(tap.delay, k as isize, nc) * tap.power;
                acc += &tap.spatial_corr * w;
            }
            acc
        })
        .collect();
    let mut full = linalg::zeros(nc * nt, nc * nt);
    let mut blockdiag = linalg::zeros(nc * nt, nc * nt);
    for p1 in 0..nc {
        for p2 in p1..nc {
            let k = (p1 as isize - p2 as isize).rem_euclid(nc as isize) as usize;
            full.view_mut((p1 * nt, p2 * nt), (nt, nt))
                .copy_from(&by_offset[k]);
            if p2 != p1 {
                // Mirror so Hermitian symmetry is exact rather than up to rounding.
                full.view_mut((p2 * nt, p1 * nt), (nt, nt))
                    .copy_from(&by_offset[k].adjoint());
            }
        }
        blockdiag
            .view_mut((p1 * nt, p1 * nt), (nt, nt))
            .copy_from(&by_offset[0]);
    }
    Ok(SensingCorrelation {
        full,
        blockdiag,
        n_subcarriers: nc,
        n_tx: nt,
    })
}

/// Monte Carlo estimate of `E[G Gᴴ] / N_r` from `n_draws` channels.
pub fn empirical_sensing_correlation<R: Rng + ?Sized>(
    tapset: &TapSet,
    dims: &SystemDims,
    n_draws: usize,
    rng: &mut R,
) -> Result<CMatrix> {
    let n = dims.n_modes();
    let mut acc = linalg::zeros(n, n);
    for _ in 0..n_draws {
        let g = draw_taps(tapset, dims, rng)?.stacked();
        acc += &g * g.adjoint();
    }
    Ok(acc.unscale((n_draws * dims.n_rx) as f64))
}

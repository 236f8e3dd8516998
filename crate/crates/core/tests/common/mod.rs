#![allow(dead_code)]

use isac_waveform::channel::{draw_taps, ChannelRealization, SystemDims, TapSet};
use isac_waveform::linalg::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dims(n_subcarriers: usize, n_tx: usize, n_rx: usize, n_symbols: usize) -> SystemDims {
    SystemDims {
        n_subcarriers,
        n_tx,
        n_rx,
        n_symbols,
        n_paths_comm: n_subcarriers.min(4),
        n_paths_sense: n_subcarriers.min(4),
        noise_var: 1.0,
    }
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random Hermitian PSD matrix of rank `rank`.
pub fn random_psd<R: Rng>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let a = gaussian_matrix(n, rank, rng);
    &a * a.adjoint()
}

/// Channel of a random ensemble: random tap powers and correlation.
pub fn random_channel<R: Rng>(dims: &SystemDims, rng: &mut R) -> ChannelRealization {
    let powers: Vec<f64> = (0..dims.n_paths_comm)
        .map(|_| rng.random_range(0.1..1.0))
        .collect();
    let taps = TapSet::exponential(&powers, dims.n_tx, rng.random_range(0.0..0.9)).unwrap();
    draw_taps(&taps, dims, rng).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

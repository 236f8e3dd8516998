//! Sensing/communication trade-off traced by the weighted allocation on one
//! channel realization.

use isac_waveform::channel::{draw_taps, sensing_correlation_matrix, SystemDims, TapSet};
use isac_waveform::mi::{comm_mi_eigen, sensing_mi_eigen, sensing_rate, spectral_efficiency};
use isac_waveform::optimizer::{
    eig_comm, eig_sensing, waterfill, weighted_allocate, WeightedProblem,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> isac_waveform::Result<()> {
    let dims = SystemDims::default();
    let budget = 10f64.powf(0.1) * dims.n_modes() as f64 * dims.noise_var;
    let taps = TapSet::exponential(&[0.25; 4], dims.n_tx, 0.5)?;
    let lambda = eig_sensing(sensing_correlation_matrix(&taps, &dims)?.full())?
        .eigenvalues()
        .to_vec();
    let chan = draw_taps(&taps, &dims, &mut ChaCha8Rng::seed_from_u64(11))?;
    let mu = eig_comm(&chan, &dims)?.eigenvalues().to_vec();

    let f_r =
        sensing_mi_eigen(&lambda, &waterfill(&lambda, budget, 1.0)?.powers, &dims)?.total_bits;
    let f_c = comm_mi_eigen(&mu, &waterfill(&mu, budget, 1.0)?.powers, &dims)?.total_bits;
    println!("omega  sensing rate  spectral eff.");
    for k in 0..=10 {
        let omega = k as f64 / 10.0;
        let prob = WeightedProblem::from_eigenvalues(&lambda, &mu, omega, f_r, f_c, budget, &dims)?;
        let alloc = weighted_allocate(&prob)?;
        let i_s = sensing_mi_eigen(&lambda, &alloc.powers, &dims)?.total_bits;
        let i_c = comm_mi_eigen(&mu, &alloc.powers, &dims)?.total_bits;
        println!(
            "{omega:>5.1}  {:>12.4}  {:>13.4}",
            sensing_rate(i_s, &dims),
            spectral_efficiency(i_c, &dims)
        );
    }
    Ok(())
}

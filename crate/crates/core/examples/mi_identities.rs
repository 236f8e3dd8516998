//! Determinant MI of a synthesized waveform agrees with the eigen-domain sum.

use isac_waveform::channel::{draw_taps, sensing_correlation_matrix, SystemDims, TapSet};
use isac_waveform::mi::{comm_mi_eigen, comm_mi_general, sensing_mi_eigen, sensing_mi_general};
use isac_waveform::optimizer::{
    covariance, eig_comm, eig_sensing, reconstruct_waveform, subcarrier_blocks, waterfill,
    OrthonormalBlocks,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> isac_waveform::Result<()> {
    let dims = SystemDims {
        n_subcarriers: 8,
        n_tx: 2,
        n_rx: 2,
        n_symbols: 4,
        ..SystemDims::default()
    };
    let budget = 10.0 * dims.n_modes() as f64;
    let taps = TapSet::exponential(&[0.4, 0.3, 0.2, 0.1], dims.n_tx, 0.5)?;

    let sigma = sensing_correlation_matrix(&taps, &dims)?;
    let se = eig_sensing(sigma.full())?;
    let ops = waterfill(se.eigenvalues(), budget, dims.noise_var)?;
    let x = reconstruct_waveform(&ops, &se, &dims, &OrthonormalBlocks::Dft)?.transmit;
    println!(
        "sensing MI: determinant {:.10} bits, eigen {:.10} bits",
        sensing_mi_general(&x, sigma.full(), &dims)?.total_bits,
        sensing_mi_eigen(se.eigenvalues(), &ops.powers, &dims)?.total_bits
    );

    let chan = draw_taps(&taps, &dims, &mut ChaCha8Rng::seed_from_u64(3))?;
    let ce = eig_comm(&chan, &dims)?;
    let opc = waterfill(ce.eigenvalues(), budget, dims.noise_var)?;
    let covs = subcarrier_blocks(&covariance(&opc, &ce), &dims);
    println!(
        "communication MI: determinant {:.10} bits, eigen {:.10} bits",
        comm_mi_general(&covs, &chan, &dims)?.total_bits,
        comm_mi_eigen(ce.eigenvalues(), &opc.powers, &dims)?.total_bits
    );
    Ok(())
}

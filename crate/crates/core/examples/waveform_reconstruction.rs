//! Build a transmit matrix from an eigen-domain allocation and confirm its
//! Gram matrix and power.

use isac_waveform::channel::{sensing_correlation_matrix, SystemDims, TapSet};
use isac_waveform::linalg;
use isac_waveform::optimizer::{
    covariance, eig_sensing, reconstruct_waveform, waterfill, OrthonormalBlocks,
};

fn main() -> isac_waveform::Result<()> {
    let dims = SystemDims {
        n_subcarriers: 4,
        n_tx: 2,
        n_rx: 2,
        n_symbols: 3,
        ..SystemDims::default()
    };
    let taps = TapSet::exponential(&[0.5, 0.3, 0.2], dims.n_tx, 0.7)?;
    let se = eig_sensing(sensing_correlation_matrix(&taps, &dims)?.full())?;
    let budget = 20.0;
    let alloc = waterfill(se.eigenvalues(), budget, dims.noise_var)?;
    let x = reconstruct_waveform(&alloc, &se, &dims, &OrthonormalBlocks::Dft)?.transmit;
    let gram = x.adjoint() * &x;
    println!("transmit matrix: {} x {}", x.nrows(), x.ncols());
    println!("power {:.12} (budget {budget})", gram.trace().re);
    println!(
        "Gram vs target covariance relative error: {:.2e}",
        linalg::frobenius_rel_error(&gram, &covariance(&alloc, &se))
    );

    let short = SystemDims {
        n_symbols: 1,
        ..dims
    };
    match reconstruct_waveform(&alloc, &se, &short, &OrthonormalBlocks::Dft) {
        Ok(_) => println!("unexpected success with one symbol"),
        Err(e) => println!("one symbol per subcarrier is rejected: {e}"),
    }
    Ok(())
}

//! Subcarrier correlation of a four-tap channel: analytic blocks against a
//! Monte Carlo estimate.

use isac_waveform::channel::{
    empirical_sensing_correlation, sensing_correlation_matrix, SystemDims, TapSet,
};
use isac_waveform::linalg;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> isac_waveform::Result<()> {
    let dims = SystemDims::default();
    let taps = TapSet::exponential(&[0.25; 4], dims.n_tx, 0.5)?;
    let sigma = sensing_correlation_matrix(&taps, &dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let empirical = empirical_sensing_correlation(&taps, &dims, 5_000, &mut rng)?;

    let nt = dims.n_tx;
    let diag = linalg::frobenius(&sigma.block(0, 0));
    println!("offset  analytic  empirical   (block norm / diagonal block norm)");
    for offset in 0..=dims.n_subcarriers / 2 {
        let analytic = linalg::frobenius(&sigma.block(0, offset)) / diag;
        let measured =
            linalg::frobenius(&empirical.view((0, offset * nt), (nt, nt)).into_owned()) / diag;
        println!("{offset:>6}  {analytic:>8.4}  {measured:>9.4}");
    }
    println!(
        "full matrix relative error: {:.2}%",
        100.0 * linalg::frobenius_rel_error(&empirical, sigma.full())
    );
    Ok(())
}

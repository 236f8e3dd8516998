//! A small Monte Carlo SNR sweep of all five schemes, printed as CSV.

use isac_waveform::channel::SystemDims;
use isac_waveform::cli::write_csv;
use isac_waveform::simulator::{run_sweep, ExperimentConfig, Sweep};

fn main() -> isac_waveform::Result<()> {
    let config = ExperimentConfig {
        dims: SystemDims {
            n_subcarriers: 16,
            ..SystemDims::default()
        },
        sweep: Sweep::SnrDb(vec![-5.0, 5.0, 15.0]),
        n_trials: 100,
        est_err_var: 0.01,
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&config)?;
    write_csv(&result, std::io::stdout().lock()).expect("stdout is writable");
    Ok(())
}

//! Run a named figure preset at reduced size and print its rows.

use isac_waveform::cli::figure_recipes;
use isac_waveform::simulator::run_sweep;

fn main() -> isac_waveform::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fig9".to_string());
    let recipe = figure_recipes(&name)?;
    println!("{}: {}", recipe.name, recipe.title);
    for run in recipe.runs {
        let config = isac_waveform::simulator::ExperimentConfig {
            n_trials: 50,
            ..run.config
        };
        let result = run_sweep(&config)?;
        for row in &result.rows {
            println!(
                "{:>8} {}={:<8} {:<10} SE {:>8.4}  SR {:>8.4}  F {:>7.4}",
                run.label,
                result.sweep_var,
                row.sweep_value.to_string(),
                row.scheme.to_string(),
                row.spectral_efficiency,
                row.sensing_rate,
                row.weighted_mi
            );
        }
    }
    Ok(())
}

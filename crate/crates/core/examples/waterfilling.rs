//! Water-filling over a few modes, checked against the exhaustive lattice
//! oracle.

use isac_waveform::optimizer::waterfill;
use isac_waveform::oracle::{
    grid_search_allocation, GridSpec, LogSumObjective, SeparableObjective,
};

fn main() -> isac_waveform::Result<()> {
    let gains = [2.0, 1.0, 0.5, 0.05];
    for budget in [0.5, 2.0, 8.0, 32.0] {
        let wf = waterfill(&gains, budget, 1.0)?;
        let obj = LogSumObjective::single(1.0, &gains, 1.0);
        let lattice =
            grid_search_allocation(&obj, &GridSpec::new(gains.len(), 1.0 / 1000.0, budget)?)?;
        println!(
            "E = {budget:>4}: level {:.4}, powers {:?}, {:.6} bits (lattice best {:.6})",
            wf.water_level().unwrap_or(f64::NAN),
            wf.powers
                .iter()
                .map(|p| (p * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            obj.value(&wf.powers),
            lattice.value
        );
    }
    Ok(())
}

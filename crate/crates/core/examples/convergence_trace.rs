//! Per-iteration objective, step and backtracks of one design run, as CSV on stdout.

use ris_star::model::SystemModel;
use ris_star::optimizer::{alternating_optimize, random_start, write_trace_csv, AoParams};
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let model = SystemModel::from_scenario(&presets::desk())?;
    let params = AoParams {
        restarts: 1,
        seed: 7,
        ..AoParams::default()
    };
    let res = alternating_optimize(&model, &params, |rng| random_start(&model, rng))?;
    let run = res.best_run();
    for (i, t) in run.traces.iter().enumerate() {
        eprintln!("block {i}: {} iterations, {:?}", t.records.len(), t.termination);
    }
    write_trace_csv(std::io::stdout().lock(), &run.traces)
}

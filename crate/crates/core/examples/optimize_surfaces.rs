//! Alternating projected-gradient design of both surfaces from several random starts.

use ris_star::model::SystemModel;
use ris_star::optimizer::{alternating_optimize, random_start, AoParams};
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let model = SystemModel::from_scenario(&presets::desk())?;
    let params = AoParams {
        restarts: 5,
        seed: 42,
        ..AoParams::default()
    };
    let res = alternating_optimize(&model, &params, |rng| random_start(&model, rng))?;
    for run in &res.runs {
        println!(
            "restart {}: {:.4} -> {:.4} bit/s/Hz in {} rounds, {} inner iterations",
            run.restart,
            run.rounds[0],
            run.sum_se,
            run.rounds.len() - 1,
            run.iterations()
        );
    }
    let best = res.best_run();
    println!("best restart {} with sum SE {:.4}", best.restart, best.sum_se);
    let star = &best.surfaces.star;
    let reflect: f64 = star.beta_r.iter().map(|b| b * b).sum::<f64>() / star.len() as f64;
    println!("STAR-RIS energy share to reflection: {:.2}", reflect);
    Ok(())
}

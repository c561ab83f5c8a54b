//! Sample covariances and LMMSE statistics of the simulated channels against
//! their closed forms.

use ris_star::channel_stats::SurfaceConfig;
use ris_star::experiment::fidelity_scenario;
use ris_star::model::SystemModel;
use ris_star::montecarlo::{covariance_fidelity, estimation_fidelity};
use ris_star::optimizer::restart_rng;
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let model = SystemModel::from_scenario(&fidelity_scenario(&presets::desk()))?;
    let s = SurfaceConfig::random(4, 4, &mut restart_rng(5, 0));
    let cov = covariance_fidelity(&model, &s, 10_000, 1)?;
    let est = estimation_fidelity(&model, &s, 10_000, 2)?;
    let names = ["direct + double", "RIS", "STAR-RIS"];
    for (k, (c, e)) in cov.iter().zip(&est).enumerate() {
        for l in 0..3 {
            println!(
                "ue{k} {:<16} covariance {:>5.2}%  orthogonality {:>5.2}%  mse {:>5.2}%",
                names[l],
                100.0 * c[l],
                100.0 * e[l].0,
                100.0 * e[l].1
            );
        }
    }
    Ok(())
}

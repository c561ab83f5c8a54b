//! Analytic gradients against central differences on small random instances.

use ris_star::channel_stats::SurfaceConfig;
use ris_star::experiment::{gradient_fd_errors, mixed_regions, FD_STEP};
use ris_star::optimizer::restart_rng;
use ris_star::presets::random_small_model;

fn main() -> ris_star::error::Result<()> {
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10}", "seed", "ris", "theta_t", "theta_r", "beta_t", "beta_r");
    for seed in 0..10 {
        let model = random_small_model(seed, 4, 4, 4, mixed_regions(2))?;
        let s = SurfaceConfig::random(4, 4, &mut restart_rng(seed, 0));
        let e = gradient_fd_errors(&model, &s, FD_STEP)?;
        println!("{seed:>4} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}", e[0], e[1], e[2], e[3], e[4]);
    }
    Ok(())
}

//! Load a scenario file and evaluate the deterministic-equivalent sum SE at a
//! few fixed surface configurations.
//!
//! ```text
//! cargo run --release --example evaluate_scenario -- crates/core/examples/data/desk.toml
//! ```

use ris_star::channel_stats::{RisPhases, StarConfig, SurfaceConfig};
use ris_star::model::SystemModel;
use ris_star::optimizer::restart_rng;
use ris_star::presets;
use ris_star::scenario::{compute_path_losses, linear_to_db, load_scenario_file};

fn main() -> ris_star::error::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => load_scenario_file(path)?,
        None => presets::desk(),
    };
    let pl = compute_path_losses(&cfg)?;
    println!("noise {:.1} dBm, prelog {:.2}", linear_to_db(cfg.noise_variance()), cfg.prelog());
    for k in 0..cfg.system.users {
        println!(
            "ue{k} ({:?}): direct {:.1} dB, double hop {:.1} dB, RIS hop {:.1} dB, STAR hop {:.1} dB",
            cfg.system.regions[k],
            linear_to_db(pl.direct[k]),
            linear_to_db(pl.double_hop[k]),
            linear_to_db(pl.ris_hop[k]),
            linear_to_db(pl.star_hop[k]),
        );
    }

    let model = SystemModel::from_scenario(&cfg)?;
    let (n1, n2) = (model.ris_elements(), model.star_elements());
    let configs = [
        ("balanced", SurfaceConfig::balanced(n1, n2)),
        ("all reflect", SurfaceConfig::new(RisPhases::aligned(n1), StarConfig::split_mask(n2, 0))),
        ("random", SurfaceConfig::random(n1, n2, &mut restart_rng(1, 0))),
    ];
    for (name, s) in &configs {
        let perf = model.evaluate(s)?;
        let per_user: Vec<String> = perf.rates().iter().map(|r| format!("{r:.4}")).collect();
        println!("{name:<12} sum SE {:.4} bit/s/Hz, per UE [{}]", perf.sum_se, per_user.join(", "));
    }
    Ok(())
}

//! Deterministic equivalent against the Monte-Carlo oracle as the transmit
//! power grows. The two agree while the link is noise-limited.

use ris_star::channel_stats::SurfaceConfig;
use ris_star::montecarlo::empirical_sum_se;
use ris_star::model::SystemModel;
use ris_star::optimizer::restart_rng;
use ris_star::performance::LinkBudget;
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let cfg = presets::desk();
    let base = SystemModel::from_scenario(&cfg)?;
    let s = SurfaceConfig::random(base.ris_elements(), base.star_elements(), &mut restart_rng(3, 0));
    println!("{:>10} {:>10} {:>10} {:>9} {:>7}", "power_mw", "de", "mc", "stderr", "gap_%");
    for scale in [0.25, 1.0, 4.0, 16.0, 64.0] {
        let power = cfg.protocol.total_power_mw * scale;
        let model = base.clone().with_budget(LinkBudget { power, ..base.budget });
        let de = model.sum_se(&s)?;
        let mc = empirical_sum_se(&model, &s, 2000, 17)?;
        println!(
            "{power:>10.2e} {de:>10.5} {:>10.5} {:>9.5} {:>7.2}",
            mc.perf.sum_se,
            mc.stderr,
            100.0 * (de - mc.perf.sum_se) / mc.perf.sum_se
        );
    }
    Ok(())
}

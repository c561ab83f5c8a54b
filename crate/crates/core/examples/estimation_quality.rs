//! Channel estimation quality against training energy, and the prelog trade-off
//! of longer training.

use ris_star::channel_stats::SurfaceConfig;
use ris_star::estimation::{link_estimate, CsiModel};
use ris_star::model::SystemModel;
use ris_star::operator::HermitianOp;
use ris_star::optimizer::restart_rng;
use ris_star::presets;
use ris_star::scenario::CsiMode;

fn main() -> ris_star::error::Result<()> {
    let cfg = presets::desk();
    let model = SystemModel::from_scenario(&cfg)?;
    let s = SurfaceConfig::random(model.ris_elements(), model.star_elements(), &mut restart_rng(2, 0));
    let stats = model.dense_statistics(&s)?;

    println!("pilot_mw,estimated_share");
    for scale in [1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let p = cfg.pilot_power() * scale;
        let csi = CsiModel::from_training(cfg.noise_variance(), cfg.protocol.training_length, p)?;
        let (mut psi, mut r) = (0.0, 0.0);
        for cov in &stats.cov.aggregate {
            psi += link_estimate(cov, csi)?.psi.trace();
            r += cov.trace();
        }
        println!("{p:.1e},{:.4}", psi / r);
    }

    println!("training,sum_se");
    for tau in [0, 2, 10, 20, 40, 80] {
        let mut c = cfg.clone();
        c.protocol.training_length = tau;
        c.protocol.csi = if tau == 0 { CsiMode::Perfect } else { CsiMode::Imperfect };
        println!("{tau},{:.5}", SystemModel::from_scenario(&c)?.sum_se(&s)?);
    }
    Ok(())
}

//! Best-of-five designs of every architecture at one scenario.

use ris_star::experiment::{Architecture, ArchitectureSetup};
use ris_star::optimizer::AoParams;
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let cfg = match std::env::args().nth(1).as_deref() {
        Some("full") => presets::full_scale(),
        _ => presets::desk(),
    };
    let params = AoParams {
        restarts: 5,
        seed: 1,
        ..AoParams::default()
    };
    for arch in Architecture::ALL {
        let setup = ArchitectureSetup::build(&cfg, arch)?;
        let d = setup.design(&params)?;
        println!("{:<13} {:.4} bit/s/Hz ({} iterations)", arch, d.sum_se, d.iterations);
    }
    Ok(())
}

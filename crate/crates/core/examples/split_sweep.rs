//! Sum SE as the elements move between the RIS and the STAR-RIS at a fixed total.

use ris_star::experiment::{apply_sweep, Architecture, ArchitectureSetup, SweepVariable};
use ris_star::optimizer::AoParams;
use ris_star::presets;

fn main() -> ris_star::error::Result<()> {
    let cfg = presets::desk();
    let n = cfg.ris_elements() + cfg.star_elements();
    let params = AoParams {
        restarts: 5,
        seed: 3,
        ..AoParams::default()
    };
    println!("n1,n2,sum_se");
    for n1 in (2..n).step_by(2) {
        let point = apply_sweep(&cfg, SweepVariable::Split, n1 as f64)?;
        let d = ArchitectureSetup::build(&point, Architecture::RisStar)?.design(&params)?;
        println!("{n1},{},{:.5}", n - n1, d.sum_se);
    }
    Ok(())
}

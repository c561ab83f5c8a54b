//! Ready-made scenarios.
//!
//! [`full_scale`] is the large layout (64 BS antennas, 64 surface elements split
//! over two surfaces, 4 users). [`desk`] is a smaller layout that runs the
//! Monte-Carlo oracles in seconds. Both share the geometry and path-loss law.
//!
//! The BS-RIS and RIS-STAR hops are line-of-sight (exponent 2), the direct
//! BS-STAR and RIS-UE hops are obstructed (3.2), so the cooperative double hop
//! carries most of the surface gain. The desk transmit power keeps the links
//! noise-limited, where the deterministic equivalent is tight at 16 antennas.
//! Pilots are sent at UE power, independent of the downlink budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correlation::{build_bs_correlation, build_surface_correlation_with, CorrelationSet};
use crate::error::Result;
use crate::estimation::CsiModel;
use crate::model::SystemModel;
use crate::performance::LinkBudget;
use crate::scenario::*;
use crate::C64;

fn base(m: usize, ris: SurfaceGrid, star: SurfaceGrid, regions: Vec<Region>, power_mw: f64, pilot_mw: f64) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        system: SystemSection {
            bs_antennas: m,
            users: regions.len(),
            regions,
        },
        ris,
        star,
        protocol: ProtocolSection {
            coherence_block: 200,
            training_length: 20,
            total_power_mw: power_mw,
            pilot_power_mw: Some(pilot_mw),
            bandwidth_hz: 200e3,
            noise_psd_dbm_hz: -174.0,
            noise_variance_mw: None,
            csi: CsiMode::Imperfect,
        },
        geometry: GeometrySection {
            wavelength: 0.1,
            element_width: None,
            element_height: None,
            bs: [0.0, 0.0, 0.0],
            ris: [50.0, 10.0, 20.0],
            star: [100.0, 30.0, 20.0],
            ue_spread: 20.0,
            ue_height: 0.0,
            ue_positions: None,
        },
        pathloss: PathLossSection {
            element_area: 1.0,
            exponents: PathLossExponents {
                direct: 3.7,
                bs_ris: 2.0,
                ris_star: 2.0,
                bs_star: 3.2,
                ris_ue: 3.2,
                star_ue: 2.0,
            },
            penetration_loss_db: 15.0,
        },
        correlation: CorrelationSection {
            bs_model: BsCorrelationModel::Exponential,
            bs_coefficient: 0.5,
            surface_model: SurfaceCorrelationModel::Sinc,
            surface_gain: SurfaceGain::Unit,
            layout: GridLayout::RowMajor,
            trace_reading: TraceReading::Consistent,
        },
    }
}

/// `M = 64`, two 32-element surfaces, users `(t, t, r, r)`.
pub fn full_scale() -> ScenarioConfig {
    base(
        64,
        SurfaceGrid { horizontal: 8, vertical: 4 },
        SurfaceGrid { horizontal: 8, vertical: 4 },
        vec![Region::Transmission, Region::Transmission, Region::Reflection, Region::Reflection],
        1e-7,
        1e-4,
    )
}

pub fn full_scale_toml() -> String {
    full_scale().to_toml()
}

/// Desk-scale layout: `M = 16`, two 8-element surfaces, users `(t, r)`.
pub fn desk() -> ScenarioConfig {
    base(
        16,
        SurfaceGrid { horizontal: 4, vertical: 2 },
        SurfaceGrid { horizontal: 4, vertical: 2 },
        vec![Region::Transmission, Region::Reflection],
        1e-7,
        1e-4,
    )
}

/// Random well-conditioned instance for oracle tests: random exponential BS
/// correlation, sinc surfaces with random spacing, unit-scale path losses.
pub fn random_small_model(seed: u64, m: usize, n1: usize, n2: usize, regions: Vec<Region>) -> Result<SystemModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeff = C64::from_polar(rng.random_range(0.1..0.8), rng.random_range(0.0..std::f64::consts::TAU));
    let r_t = build_bs_correlation(m, BsCorrelationModel::Exponential, coeff)?;
    let mut surface = |n: usize| {
        let grid = SurfaceGrid::near_square(n);
        let lambda = 0.1;
        let d = lambda * rng.random_range(0.15..0.6);
        build_surface_correlation_with(grid.horizontal, grid.vertical, d, d, lambda, GridLayout::RowMajor) / (d * d)
    };
    let r_1 = surface(n1);
    let r_2 = surface(n2);
    let corr = CorrelationSet::new(r_t, r_1, r_2)?;
    let k = regions.len();
    let mut draw = |lo: f64, hi: f64, n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(lo..hi)).collect() };
    let infra = draw(0.05, 0.3, 3);
    let pl = PathLossSet::new(
        infra[0],
        infra[1],
        infra[2] / n2.max(1) as f64,
        draw(0.05, 0.3, k).into_iter().map(|x| x / n1.max(1) as f64).collect(),
        draw(0.05, 0.3, k),
        draw(0.01, 0.1, k),
    )?;
    let budget = LinkBudget {
        power: 1.0,
        noise: 0.2,
        prelog: 0.9,
    };
    SystemModel::new(corr, pl, regions, budget, CsiModel::Imperfect { effective_noise: 0.05 }, TraceReading::Consistent)
}

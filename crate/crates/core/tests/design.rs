//! End-to-end surface design on the presets.

use ris_star::channel_stats::FEASIBILITY_TOL;
use ris_star::experiment::{Architecture, ArchitectureSetup};
use ris_star::model::SystemModel;
use ris_star::optimizer::{alternating_optimize, random_start, write_trace_csv, AoParams};
use ris_star::presets::desk;

fn params(seed: u64) -> AoParams {
    AoParams {
        restarts: 3,
        seed,
        ..AoParams::default()
    }
}

#[test]
fn alternating_rounds_never_decrease() {
    let model = SystemModel::from_scenario(&desk()).unwrap();
    let res = alternating_optimize(&model, &params(5), |rng| random_start(&model, rng)).unwrap();
    for run in &res.runs {
        assert!(run.rounds.windows(2).all(|w| w[1] >= w[0]), "restart {}: {:?}", run.restart, run.rounds);
        assert!(run.traces.iter().all(|t| t.is_monotone()));
        assert!(run.surfaces.feasibility_residual() <= FEASIBILITY_TOL);
        assert_eq!(run.sum_se, *run.rounds.last().unwrap());
    }
    let best = res.best_run();
    assert!(res.runs.iter().all(|r| r.sum_se <= best.sum_se));
}

#[test]
fn design_is_reproducible_from_seed() {
    let setup = ArchitectureSetup::build(&desk(), Architecture::RisStar).unwrap();
    let a = setup.design(&params(11)).unwrap();
    let b = setup.design(&params(11)).unwrap();
    assert_eq!(a.surfaces, b.surfaces);
    assert_eq!(a.sum_se.to_bits(), b.sum_se.to_bits());
}

#[test]
fn optimized_beats_its_own_start() {
    let cfg = desk();
    for seed in 0..3 {
        let random = ArchitectureSetup::build(&cfg, Architecture::RandomPhase).unwrap().design(&params(seed)).unwrap();
        let optimized = ArchitectureSetup::build(&cfg, Architecture::RisStar).unwrap().design(&params(seed)).unwrap();
        assert!(optimized.sum_se >= random.sum_se, "seed {seed}: {} < {}", optimized.sum_se, random.sum_se);
    }
}

#[test]
fn frozen_blocks_are_untouched() {
    let cfg = desk();
    let setup = ArchitectureSetup::build(&cfg, Architecture::DoubleRis).unwrap();
    let d = setup.design(&params(2)).unwrap();
    let n2 = cfg.star_elements();
    for i in 0..n2 {
        let (t, r) = (d.surfaces.star.beta_t[i], d.surfaces.star.beta_r[i]);
        if i < n2 / 2 {
            assert_eq!((t, r), (1.0, 0.0));
        } else {
            assert_eq!((t, r), (0.0, 1.0));
        }
    }
}

#[test]
fn trace_csv_lists_every_iteration() {
    let model = SystemModel::from_scenario(&desk()).unwrap();
    let res = alternating_optimize(&model, &params(8), |rng| random_start(&model, rng)).unwrap();
    let run = res.best_run();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &run.traces).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["iteration", "objective", "step", "backtracks"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), run.iterations() + 1);
    let objectives: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(objectives.windows(2).all(|w| w[1] >= w[0]));
}

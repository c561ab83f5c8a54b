//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! report is printed by `cargo test` regardless of output capture.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ris_star::channel_stats::{StarConfig, SurfaceConfig, FEASIBILITY_TOL};
use ris_star::correlation::CorrelationSet;
use ris_star::estimation::{link_estimate, CsiModel};
use ris_star::experiment::{apply_sweep, fidelity_scenario, gradient_fd_errors, mixed_regions, FD_STEP, Architecture, ArchitectureSetup, SweepVariable};
use ris_star::gradients::gradient;
use ris_star::model::SystemModel;
use ris_star::montecarlo::{covariance_fidelity, empirical_sum_se, estimation_fidelity};
use ris_star::operator::HermitianOp;
use ris_star::optimizer::{pgam_ris, pgam_star, restart_rng, AoParams, LineSearchParams, Termination};
use ris_star::performance::LinkBudget;
use ris_star::presets::{desk, random_small_model};
use ris_star::scenario::{CsiMode, PathLossSet, ScenarioConfig, TraceReading};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn best_of_five(cfg: &ScenarioConfig, arch: Architecture, seed: u64) -> f64 {
    let setup = ArchitectureSetup::build(cfg, arch).expect("setup");
    let params = AoParams {
        restarts: 5,
        seed,
        ..AoParams::default()
    };
    setup.design(&params).expect("design").sum_se
}

/// 1. DE vs Monte-Carlo at the desk preset (M = 16, N1 = N2 = 8, K = 2), 2000 blocks.
fn de_tightness() -> Outcome {
    let start = Instant::now();
    let cfg = desk();
    let setup = ArchitectureSetup::build(&cfg, Architecture::RisStar).unwrap();
    let s = setup.start(&mut restart_rng(SEED, 0));
    let de = setup.model.sum_se(&s).unwrap();
    let mc = empirical_sum_se(&setup.model, &s, 2000, SEED).unwrap();
    let gap = (de - mc.perf.sum_se).abs() / mc.perf.sum_se;
    let elapsed = start.elapsed();
    // Reported, not gated: beamformed cascaded channels are far from Gaussian at
    // this size and the deterministic equivalent runs optimistic there.
    let design = setup
        .design(&AoParams {
            seed: SEED,
            ..AoParams::default()
        })
        .unwrap()
        .surfaces;
    let de_opt = setup.model.sum_se(&design).unwrap();
    let mc_opt = empirical_sum_se(&setup.model, &design, 2000, SEED).unwrap().perf.sum_se;
    outcome(
        gap < 0.05 && elapsed < Duration::from_secs(120),
        format!(
            "random surfaces: DE {de:.5}, MC {:.5} +- {:.5}, gap {:.2}% (< 5%), {:.1}s (< 120s); \
             optimized surfaces (not gated): DE {de_opt:.4}, MC {mc_opt:.4}, gap {:.1}%",
            mc.perf.sum_se,
            mc.stderr,
            100.0 * gap,
            elapsed.as_secs_f64(),
            100.0 * (de_opt - mc_opt).abs() / mc_opt
        ),
    )
}

/// 2. Every gradient block against central differences on 20 random instances.
fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let model = random_small_model(SEED + i, 4, 4, 4, mixed_regions(2)).unwrap();
        let s = SurfaceConfig::random(4, 4, &mut restart_rng(SEED, i as usize));
        let errs = gradient_fd_errors(&model, &s, FD_STEP).unwrap();
        worst = worst.max(errs.into_iter().fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-5 && elapsed < Duration::from_secs(30),
        format!("worst block relative error {worst:.2e} (< 1e-5), {:.1}s (< 30s)", elapsed.as_secs_f64()),
    )
}

/// 3. Feasibility, monotone ascent and termination over 50 seeded PGAM runs.
fn feasibility_and_ascent() -> Outcome {
    let params = LineSearchParams::default();
    let mut infeasible = 0;
    let mut decreases = 0;
    let mut bad_stop = 0;
    let mut max_backtracks = 0;
    let mut iterations = 0;
    for i in 0..50u64 {
        let model = if i % 5 == 0 {
            SystemModel::from_scenario(&desk()).unwrap()
        } else {
            random_small_model(SEED + i, 4, 4, 4, mixed_regions(2)).unwrap()
        };
        let s = SurfaceConfig::random(model.ris_elements(), model.star_elements(), &mut restart_rng(SEED + 100, i as usize));
        let (out, trace) = if i % 2 == 0 {
            pgam_ris(&model, &s, &params).unwrap()
        } else {
            pgam_star(&model, &s, &params, true).unwrap()
        };
        infeasible += trace.records.iter().filter(|r| r.feasibility > FEASIBILITY_TOL).count();
        if out.feasibility_residual() > FEASIBILITY_TOL {
            infeasible += 1;
        }
        if !trace.is_monotone() {
            decreases += 1;
        }
        if !matches!(trace.termination, Termination::Converged | Termination::IterationCap | Termination::Stationary) {
            bad_stop += 1;
        }
        max_backtracks = max_backtracks.max(trace.max_backtracks());
        iterations += trace.records.len();
    }
    outcome(
        infeasible == 0 && decreases == 0 && bad_stop == 0 && max_backtracks <= params.max_backtracks,
        format!(
            "{infeasible} infeasible iterates, {decreases} runs with a decrease, {bad_stop} runs stopped outside the rule, \
             max backtracks {max_backtracks} (<= 60), {iterations} iterations total"
        ),
    )
}

/// 4. With identity correlations the phases do not matter.
fn phase_invariance() -> Outcome {
    let (m, n1, n2) = (6, 5, 4);
    let pl = PathLossSet::new(0.3, 0.2, 0.1, vec![0.05, 0.04, 0.03], vec![0.2, 0.1, 0.3], vec![0.01, 0.02, 0.015]).unwrap();
    let model = SystemModel::new(
        CorrelationSet::identity(m, n1, n2),
        pl,
        mixed_regions(3),
        LinkBudget {
            power: 1.0,
            noise: 0.1,
            prelog: 0.9,
        },
        CsiModel::Imperfect { effective_noise: 0.05 },
        TraceReading::Consistent,
    )
    .unwrap();
    let mut rng = restart_rng(SEED, 4);
    let amplitudes = StarConfig::random(n2, &mut rng);
    let mut reference = None;
    let mut spread = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..100 {
        let mut s = SurfaceConfig::random(n1, n2, &mut rng);
        s.star.beta_t = amplitudes.beta_t.clone();
        s.star.beta_r = amplitudes.beta_r.clone();
        let (se, g) = gradient(&model, &s).unwrap();
        let r = *reference.get_or_insert(se);
        spread = spread.max((se - r).abs());
        let (a, b, c) = g.phase_derivatives(&s);
        worst_grad = worst_grad.max(a.norm()).max(b.norm()).max(c.norm());
    }
    outcome(
        spread < 1e-10 && worst_grad < 1e-10,
        format!("SE spread {spread:.2e} (< 1e-10), largest phase-gradient norm {worst_grad:.2e} (< 1e-10)"),
    )
}

/// 5. Sample covariances and LMMSE statistics at M = N1 = N2 = 4 (desk layout), 10^4 draws.
fn covariance_fidelity_check() -> Outcome {
    let model = SystemModel::from_scenario(&fidelity_scenario(&desk())).unwrap();
    let s = SurfaceConfig::random(4, 4, &mut restart_rng(SEED, 5));
    let cov = covariance_fidelity(&model, &s, 10_000, SEED).unwrap();
    let est = estimation_fidelity(&model, &s, 10_000, SEED + 1).unwrap();
    let worst_cov = cov.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let worst_orth = est.iter().flatten().fold(0.0f64, |a, &(o, _)| a.max(o));
    outcome(
        worst_cov < 0.05 && worst_orth < 0.05,
        format!("worst covariance error {:.2}% (< 5%), worst orthogonality residual {:.2}% (< 5%)", 100.0 * worst_cov, 100.0 * worst_orth),
    )
}

/// 6. Qualitative trends at the desk preset.
fn qualitative_trends() -> Outcome {
    let base = desk();
    let mut notes = Vec::new();
    let mut pass = true;

    let sweeps: [(SweepVariable, &[f64]); 3] = [
        (SweepVariable::N, &[8.0, 16.0, 32.0]),
        (SweepVariable::M, &[8.0, 16.0, 32.0]),
        (SweepVariable::Snr, &[45.0, 50.0, 55.0, 60.0]),
    ];
    let mut below_random = 0;
    for (var, grid) in sweeps {
        let mut values = Vec::new();
        for (i, &v) in grid.iter().enumerate() {
            let cfg = apply_sweep(&base, var, v).unwrap();
            let opt = best_of_five(&cfg, Architecture::RisStar, SEED + i as u64);
            let rnd = best_of_five(&cfg, Architecture::RandomPhase, SEED + i as u64);
            if opt < rnd {
                below_random += 1;
            }
            values.push(opt);
        }
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        pass &= monotone;
        notes.push(format!(
            "{} [{}]{}",
            var.name(),
            values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "),
            if monotone { "" } else { " NOT MONOTONE" }
        ));
    }
    pass &= below_random == 0;
    notes.push(format!("{below_random} points below random phases"));

    let se = |a| best_of_five(&base, a, SEED);
    let (rs, dr, ss, sr) = (
        se(Architecture::RisStar),
        se(Architecture::DoubleRis),
        se(Architecture::SingleStar),
        se(Architecture::SingleRis),
    );
    let ordered = rs >= dr && rs >= ss && dr >= sr;
    pass &= ordered;
    notes.push(format!("ris-star {rs:.3} >= double-ris {dr:.3}, single-star {ss:.3}; double-ris >= single-ris {sr:.3}"));

    let n = base.ris_elements() + base.star_elements();
    let splits: Vec<usize> = (2..n).step_by(2).collect();
    let curve: Vec<f64> = splits
        .iter()
        .map(|&n1| best_of_five(&apply_sweep(&base, SweepVariable::Split, n1 as f64).unwrap(), Architecture::RisStar, SEED))
        .collect();
    let arg = curve.iter().enumerate().fold(0, |b, (i, &v)| if v > curve[b] { i } else { b });
    let best = splits[arg] as f64;
    let middle = best >= n as f64 / 3.0 && best <= 2.0 * n as f64 / 3.0;
    pass &= middle;
    notes.push(format!("split maximum at N1 = {best} of {n}"));

    outcome(pass, notes.join("; "))
}

/// 7. Estimation quality against training energy and the perfect-CSI ordering.
fn estimation_limits() -> Outcome {
    let cfg = desk();
    let model = SystemModel::from_scenario(&cfg).unwrap();
    let s = ArchitectureSetup::build(&cfg, Architecture::RisStar)
        .unwrap()
        .start(&mut restart_rng(SEED, 7));
    let stats = model.dense_statistics(&s).unwrap();
    let sigma2 = cfg.noise_variance();
    let tau = cfg.protocol.training_length;
    let base = cfg.pilot_power();
    let ratios: Vec<f64> = [1e-3, 1e-2, 1e-1, 1.0]
        .iter()
        .map(|&scale| {
            let csi = CsiModel::from_training(sigma2, tau, base * scale).unwrap();
            let (psi, r) = stats.cov.aggregate.iter().fold((0.0, 0.0), |(p, t), r| {
                (p + link_estimate(r, csi).unwrap().psi.trace(), t + r.trace())
            });
            psi / r
        })
        .collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]) && *ratios.last().unwrap() <= 1.0;

    let design = ArchitectureSetup::build(&cfg, Architecture::RisStar)
        .unwrap()
        .design(&AoParams {
            seed: SEED,
            ..AoParams::default()
        })
        .unwrap()
        .surfaces;
    let se_at = |training: usize, csi: CsiMode| {
        let mut c = cfg.clone();
        c.protocol.training_length = training;
        c.protocol.csi = csi;
        SystemModel::from_scenario(&c).unwrap().sum_se(&design).unwrap()
    };
    let perfect = se_at(0, CsiMode::Perfect);
    let t20 = se_at(20, CsiMode::Imperfect);
    let t40 = se_at(40, CsiMode::Imperfect);
    let ordered = perfect >= t20 && t20 >= t40;
    outcome(
        increasing && ordered,
        format!(
            "tr(Psi)/tr(R) over tau P x1e-3..1: [{}]; SE perfect {perfect:.4} >= tau=20 {t20:.4} >= tau=40 {t40:.4}",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 DE tightness", de_tightness),
        ("2 gradient correctness", gradient_correctness),
        ("3 feasibility and monotone ascent", feasibility_and_ascent),
        ("4 phase invariance under identity correlations", phase_invariance),
        ("5 covariance fidelity", covariance_fidelity_check),
        ("6 qualitative trends", qualitative_trends),
        ("7 estimation limits", estimation_limits),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

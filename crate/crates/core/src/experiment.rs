//! Experiment driver: baseline architectures, parameter sweeps, persisted
//! manifests and the validation suites behind the command-line tool.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_stats::{StarConfig, SurfaceConfig, FEASIBILITY_TOL};
use crate::correlation::CorrelationSet;
use crate::error::{Error, Result};
use crate::gradients::gradient;
use crate::model::{budget_of, csi_of, SystemModel};
use crate::montecarlo::{covariance_fidelity, empirical_sum_se, estimation_fidelity};
use crate::optimizer::{alternating_optimize, project_amplitude_pair, project_unit_modulus, restart_rng, AoParams, FreeBlocks};
use crate::scenario::{compute_path_losses, Region, ScenarioConfig, SurfaceGrid, TraceReading};
use crate::C64;

/// System layouts compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// Reflect-only RIS near the BS cooperating with a STAR-RIS near the users.
    RisStar,
    /// Same layout with the STAR-RIS replaced by a surface whose first half only
    /// transmits and second half only reflects.
    DoubleRis,
    /// All `N1 + N2` elements on one STAR-RIS at the STAR position.
    SingleStar,
    /// All elements on one reflect-only surface at the STAR position; transmission-side
    /// users keep only their direct link.
    SingleRis,
    /// Proposed layout with random phases and an even energy split, not optimized.
    RandomPhase,
    /// Proposed layout without direct links.
    NoDirect,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::RisStar,
        Architecture::DoubleRis,
        Architecture::SingleStar,
        Architecture::SingleRis,
        Architecture::RandomPhase,
        Architecture::NoDirect,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Architecture::RisStar => "ris-star",
            Architecture::DoubleRis => "double-ris",
            Architecture::SingleStar => "single-star",
            Architecture::SingleRis => "single-ris",
            Architecture::RandomPhase => "random-phase",
            Architecture::NoDirect => "no-direct",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// How an architecture draws its starting points.
#[derive(Debug, Clone, PartialEq)]
pub enum StartKind {
    /// Random phases everywhere, even energy split.
    Random,
    /// Random phases with the given fixed amplitudes.
    FixedAmplitudes { beta_t: Vec<f64>, beta_r: Vec<f64> },
}

/// A model plus the blocks the optimizer may move.
#[derive(Debug, Clone)]
pub struct ArchitectureSetup {
    pub architecture: Architecture,
    pub model: SystemModel,
    pub free: FreeBlocks,
    pub start: StartKind,
    /// `false` for the random-phase baseline.
    pub optimize: bool,
}

impl ArchitectureSetup {
    pub fn build(cfg: &ScenarioConfig, architecture: Architecture) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.ris_elements() + cfg.star_elements();
        let full = || SystemModel::from_scenario(cfg);
        let single = || -> Result<SystemModel> {
            if cfg.correlation.trace_reading == TraceReading::Verbatim {
                return Err(Error::InvalidValue {
                    key: "correlation.trace_reading".into(),
                    reason: "single-surface baselines need the consistent reading".into(),
                });
            }
            let corr = CorrelationSet::for_grids(cfg, SurfaceGrid { horizontal: 0, vertical: 0 }, SurfaceGrid::near_square(n))?;
            let pl = compute_path_losses(cfg)?.without_ris();
            SystemModel::new(corr, pl, cfg.system.regions.clone(), budget_of(cfg), csi_of(cfg)?, TraceReading::Consistent)
        };
        let all = FreeBlocks::default();
        let phases_only = FreeBlocks {
            star_amplitudes: false,
            ..all
        };
        let fixed = |s: StarConfig| StartKind::FixedAmplitudes {
            beta_t: s.beta_t.iter().copied().collect(),
            beta_r: s.beta_r.iter().copied().collect(),
        };
        let (model, free, start, optimize) = match architecture {
            Architecture::RisStar => (full()?, all, StartKind::Random, true),
            Architecture::RandomPhase => (full()?, all, StartKind::Random, false),
            Architecture::NoDirect => {
                let m = full()?;
                let pl = m.pathloss.without_direct();
                let corr = (*m.corr).clone();
                let m = SystemModel::new(corr, pl, m.regions.clone(), m.budget, m.csi, cfg.correlation.trace_reading)?;
                (m, all, StartKind::Random, true)
            }
            Architecture::DoubleRis => {
                let n2 = cfg.star_elements();
                (full()?, phases_only, fixed(StarConfig::split_mask(n2, n2 / 2)), true)
            }
            Architecture::SingleStar => (single()?, all, StartKind::Random, true),
            Architecture::SingleRis => (single()?, phases_only, fixed(StarConfig::split_mask(n, 0)), true),
        };
        Ok(Self {
            architecture,
            model,
            free,
            start,
            optimize,
        })
    }

    pub fn start(&self, rng: &mut ChaCha8Rng) -> SurfaceConfig {
        let mut s = SurfaceConfig::random(self.model.ris_elements(), self.model.star_elements(), rng);
        if let StartKind::FixedAmplitudes { beta_t, beta_r } = &self.start {
            s.star.beta_t = nalgebra::DVector::from_column_slice(beta_t);
            s.star.beta_r = nalgebra::DVector::from_column_slice(beta_r);
        }
        s
    }

    /// Optimized (or, for the random-phase baseline, initial) design.
    pub fn design(&self, params: &AoParams) -> Result<Design> {
        let mut p = *params;
        p.free = self.free;
        if !self.optimize {
            let s = self.start(&mut restart_rng(params.seed, 0));
            let sum_se = self.model.sum_se(&s)?;
            return Ok(Design {
                surfaces: s,
                sum_se,
                iterations: 0,
                restart: 0,
            });
        }
        let res = alternating_optimize(&self.model, &p, |rng| self.start(rng))?;
        let best = res.best_run();
        Ok(Design {
            surfaces: best.surfaces.clone(),
            sum_se: best.sum_se,
            iterations: best.iterations(),
            restart: best.restart,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Design {
    pub surfaces: SurfaceConfig,
    pub sum_se: f64,
    pub iterations: usize,
    pub restart: usize,
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    /// Total surface elements, split evenly.
    N,
    /// BS antennas.
    M,
    /// `rho / sigma^2` in dB at fixed noise.
    Snr,
    /// RIS-1 elements at a fixed total.
    Split,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::N => "n",
            SweepVariable::M => "m",
            SweepVariable::Snr => "snr",
            SweepVariable::Split => "split",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(SweepVariable::N),
            "m" => Ok(SweepVariable::M),
            "snr" => Ok(SweepVariable::Snr),
            "split" | "n1-split" | "n1" => Ok(SweepVariable::Split),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

fn as_count(key: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidValue {
            key: key.into(),
            reason: format!("{v} is not a positive integer"),
        })
    }
}

/// The scenario with one sweep value applied.
pub fn apply_sweep(cfg: &ScenarioConfig, variable: SweepVariable, value: f64) -> Result<ScenarioConfig> {
    let mut out = cfg.clone();
    match variable {
        SweepVariable::N => {
            let n = as_count("sweep.n", value)?;
            if n < 2 {
                return Err(Error::InvalidValue {
                    key: "sweep.n".into(),
                    reason: "need at least one element per surface".into(),
                });
            }
            out.ris = SurfaceGrid::near_square(n / 2);
            out.star = SurfaceGrid::near_square(n - n / 2);
        }
        SweepVariable::M => out.system.bs_antennas = as_count("sweep.m", value)?,
        SweepVariable::Snr => out.protocol.total_power_mw = cfg.noise_variance() * 10f64.powf(value / 10.0),
        SweepVariable::Split => {
            let n = cfg.ris_elements() + cfg.star_elements();
            let n1 = as_count("sweep.split", value)?;
            if n1 >= n {
                return Err(Error::InvalidValue {
                    key: "sweep.split".into(),
                    reason: format!("RIS-1 share {n1} leaves no STAR elements out of {n}"),
                });
            }
            // keep the scenario's row count where it divides both shares
            let rows = cfg.ris.vertical.max(1);
            let grid = |e: usize| {
                if e.is_multiple_of(rows) {
                    SurfaceGrid {
                        horizontal: e / rows,
                        vertical: rows,
                    }
                } else {
                    SurfaceGrid::near_square(e)
                }
            };
            out.ris = grid(n1);
            out.star = grid(n - n1);
        }
    }
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// `variable=v1,v2,...`, e.g. `n=16,32,64`.
    fn from_str(s: &str) -> Result<Self> {
        let (var, vals) = s.split_once('=').ok_or_else(|| Error::InvalidValue {
            key: "sweep".into(),
            reason: format!("expected `variable=v1,v2,...`, got `{s}`"),
        })?;
        let values = vals
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::InvalidValue {
                    key: "sweep".into(),
                    reason: format!("`{v}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            variable: var.trim().parse()?,
            values,
        })
    }
}

/// Everything needed to rerun a sweep bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub scenario: String,
    pub sweep: SweepSpec,
    pub architectures: Vec<Architecture>,
    pub seed: u64,
    pub restarts: usize,
    #[serde(default)]
    pub mc_blocks: Option<usize>,
    pub output: PathBuf,
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<()> {
        if self.sweep.values.is_empty() {
            return Err(Error::InvalidValue {
                key: "sweep.values".into(),
                reason: "grid is empty".into(),
            });
        }
        if self.architectures.is_empty() {
            return Err(Error::InvalidValue {
                key: "architectures".into(),
                reason: "no architecture selected".into(),
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidValue {
                key: "restarts".into(),
                reason: "need at least one restart".into(),
            });
        }
        if let Some(b) = self.mc_blocks {
            if b < crate::performance::MIN_MC_SAMPLES {
                return Err(Error::TooFewSamples {
                    required: crate::performance::MIN_MC_SAMPLES,
                    got: b,
                });
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

/// One grid point of one architecture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub architecture: Architecture,
    pub value: f64,
    pub de_sum_se: f64,
    pub mc_sum_se: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
}

/// Seed of grid point `index`, derived from the run seed.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_point(cfg: &ScenarioConfig, manifest: &ExperimentManifest, architecture: Architecture, index: usize) -> Result<SweepRow> {
    let value = manifest.sweep.values[index];
    let start = Instant::now();
    let point = apply_sweep(cfg, manifest.sweep.variable, value)?;
    let setup = ArchitectureSetup::build(&point, architecture)?;
    let params = AoParams {
        restarts: manifest.restarts,
        seed: point_seed(manifest.seed, index),
        ..AoParams::default()
    };
    let design = setup.design(&params)?;
    let (mc_sum_se, mc_stderr) = match manifest.mc_blocks {
        Some(blocks) => {
            let mc = empirical_sum_se(&setup.model, &design.surfaces, blocks, params.seed)?;
            (Some(mc.perf.sum_se), Some(mc.stderr))
        }
        None => (None, None),
    };
    Ok(SweepRow {
        architecture,
        value,
        de_sum_se: design.sum_se,
        mc_sum_se,
        mc_stderr,
        iterations: design.iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every grid point of every architecture; rows come back grouped by
/// architecture in grid order.
pub fn run_sweep(cfg: &ScenarioConfig, manifest: &ExperimentManifest) -> Result<Vec<SweepRow>> {
    manifest.validate()?;
    let jobs: Vec<(Architecture, usize)> = manifest
        .architectures
        .iter()
        .flat_map(|&a| (0..manifest.sweep.values.len()).map(move |i| (a, i)))
        .collect();
    jobs.par_iter()
        .map(|&(a, i)| run_point(cfg, manifest, a, i))
        .collect()
}

pub const CSV_HEADER: [&str; 7] = [
    "architecture",
    "value",
    "de_sum_se",
    "mc_sum_se",
    "mc_stderr",
    "iterations",
    "wall_time_s",
];

pub fn write_rows_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.architecture.to_string(),
            r.value.to_string(),
            r.de_sum_se.to_string(),
            opt(r.mc_sum_se),
            opt(r.mc_stderr),
            r.iterations.to_string(),
            format!("{:.3}", r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per architecture plus `manifest.toml` and `scenario.toml`;
/// returns the CSV paths.
pub fn persist_sweep(dir: &Path, cfg: &ScenarioConfig, manifest: &ExperimentManifest, rows: &[SweepRow]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("manifest.toml"), manifest.to_toml())?;
    std::fs::write(dir.join("scenario.toml"), cfg.to_toml())?;
    let mut paths = Vec::new();
    for &a in &manifest.architectures {
        let path = dir.join(format!("{}_{}.csv", manifest.sweep.variable.name(), a));
        let mine: Vec<SweepRow> = rows.iter().filter(|r| r.architecture == a).cloned().collect();
        write_rows_csv(std::fs::File::create(&path)?, &mine)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Oracle suites available from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gradients,
    Projections,
    DeTightness,
    Covariance,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradients" => Ok(Suite::Gradients),
            "projections" => Ok(Suite::Projections),
            "de-tightness" => Ok(Suite::DeTightness),
            "covariance" => Ok(Suite::Covariance),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured < self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

/// Relative errors of every gradient block against central differences of the
/// SE on the real parametrization (phase angles, amplitudes): `[ris, t, r, beta_t, beta_r]`.
pub fn gradient_fd_errors(model: &SystemModel, s: &SurfaceConfig, h: f64) -> Result<[f64; 5]> {
    let (_, g) = gradient(model, s)?;
    let (dr, dt, dq) = g.phase_derivatives(s);
    let central = |perturb: &dyn Fn(&mut SurfaceConfig, f64)| -> Result<f64> {
        let mut p = s.clone();
        perturb(&mut p, h);
        let mut m = s.clone();
        perturb(&mut m, -h);
        Ok((model.sum_se(&p)? - model.sum_se(&m)?) / (2.0 * h))
    };
    let rot = |v: &mut nalgebra::DVector<C64>, i: usize, h: f64| v[i] *= C64::from_polar(1.0, h);
    let block = |analytic: &nalgebra::DVector<f64>, perturb: &dyn Fn(&mut SurfaceConfig, usize, f64)| -> Result<f64> {
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..analytic.len() {
            let fd = central(&|c, h| perturb(c, i, h))?;
            diff += (fd - analytic[i]).powi(2);
            norm += fd * fd;
        }
        Ok(if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() })
    };
    Ok([
        block(&dr, &|c, i, h| rot(&mut c.ris.theta, i, h))?,
        block(&dt, &|c, i, h| rot(&mut c.star.theta_t, i, h))?,
        block(&dq, &|c, i, h| rot(&mut c.star.theta_r, i, h))?,
        block(&g.star.beta_t, &|c, i, h| c.star.beta_t[i] += h)?,
        block(&g.star.beta_r, &|c, i, h| c.star.beta_r[i] += h)?,
    ])
}

/// Central-difference step for the gradient checks. Smaller steps let rounding
/// dominate on blocks whose gradient is small.
pub const FD_STEP: f64 = 1e-4;

/// The scenario shrunk to `M = N1 = N2 = 4` (2 x 2 surfaces) for the sampling checks.
pub fn fidelity_scenario(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut out = cfg.clone();
    out.system.bs_antennas = 4;
    out.ris = SurfaceGrid { horizontal: 2, vertical: 2 };
    out.star = SurfaceGrid { horizontal: 2, vertical: 2 };
    out
}

pub fn mixed_regions(k: usize) -> Vec<Region> {
    (0..k)
        .map(|i| if i % 2 == 0 { Region::Transmission } else { Region::Reflection })
        .collect()
}

/// Runs one validation suite on `cfg` (the desk preset is a good default).
pub fn run_validation(suite: Suite, cfg: &ScenarioConfig, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    match suite {
        Suite::Gradients => {
            let mut worst = 0.0f64;
            for i in 0..10 {
                let model = crate::presets::random_small_model(seed + i, 4, 4, 4, mixed_regions(2))?;
                let s = SurfaceConfig::random(4, 4, &mut restart_rng(seed, i as usize));
                let e = gradient_fd_errors(&model, &s, FD_STEP)?;
                worst = worst.max(e.into_iter().fold(0.0, f64::max));
            }
            checks.push(Check {
                name: "gradient vs central differences (10 instances, worst block)".into(),
                measured: worst,
                tolerance: 1e-5,
            });
        }
        Suite::Projections => {
            let mut rng = restart_rng(seed, 0);
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let s = SurfaceConfig::random(16, 16, &mut rng);
                let scale = |v: &nalgebra::DVector<C64>| v.map(|z| z * 3.7);
                let theta = project_unit_modulus(&scale(&s.ris.theta));
                worst = worst.max(theta.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max));
                let raw: Vec<f64> = (0..32).map(|i| ((i * 7919 + 13) % 101) as f64 / 50.0 - 1.0).collect();
                let p = project_amplitude_pair(&raw);
                worst = worst.max((0..16).map(|i| (p[i].hypot(p[i + 16]) - 1.0).abs()).fold(0.0, f64::max));
            }
            checks.push(Check {
                name: "projection feasibility residual".into(),
                measured: worst,
                tolerance: FEASIBILITY_TOL,
            });
        }
        Suite::DeTightness => {
            let setup = ArchitectureSetup::build(cfg, Architecture::RisStar)?;
            let s = setup.start(&mut restart_rng(seed, 0));
            let de = setup.model.sum_se(&s)?;
            let mc = empirical_sum_se(&setup.model, &s, 2000, seed)?;
            checks.push(Check {
                name: format!("|DE - MC| / MC (DE {de:.4}, MC {:.4})", mc.perf.sum_se),
                measured: (de - mc.perf.sum_se).abs() / mc.perf.sum_se,
                tolerance: 0.05,
            });
        }
        Suite::Covariance => {
            let model = SystemModel::from_scenario(&fidelity_scenario(cfg))?;
            let s = SurfaceConfig::random(4, 4, &mut restart_rng(seed, 0));
            let cov = covariance_fidelity(&model, &s, 10_000, seed)?;
            let est = estimation_fidelity(&model, &s, 10_000, seed + 1)?;
            checks.push(Check {
                name: "sample vs closed-form covariance (worst link)".into(),
                measured: cov.iter().flatten().copied().fold(0.0, f64::max),
                tolerance: 0.05,
            });
            checks.push(Check {
                name: "LMMSE orthogonality residual (worst link)".into(),
                measured: est.iter().flatten().map(|e| e.0).fold(0.0, f64::max),
                tolerance: 0.05,
            });
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn architecture_names_round_trip() {
        for a in Architecture::ALL {
            assert_eq!(a.name().parse::<Architecture>().unwrap(), a);
        }
        assert!("triple-ris".parse::<Architecture>().is_err());
    }

    #[test]
    fn sweep_spec_parsing() {
        let s: SweepSpec = "n=16,32,64".parse().unwrap();
        assert_eq!(s.variable, SweepVariable::N);
        assert_eq!(s.values, vec![16.0, 32.0, 64.0]);
        assert!("bogus=1".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let m = ExperimentManifest {
            scenario: "desk".into(),
            sweep: SweepSpec {
                variable: SweepVariable::N,
                values: vec![],
            },
            architectures: vec![Architecture::RisStar],
            seed: 0,
            restarts: 1,
            mc_blocks: None,
            output: "out".into(),
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = ExperimentManifest {
            scenario: "desk".into(),
            sweep: "snr=-10,0".parse().unwrap(),
            architectures: vec![Architecture::RisStar, Architecture::SingleRis],
            seed: 42,
            restarts: 2,
            mc_blocks: Some(200),
            output: "out".into(),
        };
        assert_eq!(ExperimentManifest::from_toml(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn sweep_application() {
        let cfg = presets::desk();
        let n = apply_sweep(&cfg, SweepVariable::N, 32.0).unwrap();
        assert_eq!(n.ris_elements() + n.star_elements(), 32);
        let s = apply_sweep(&cfg, SweepVariable::Split, 4.0).unwrap();
        assert_eq!((s.ris_elements(), s.star_elements()), (4, 12));
        assert!(apply_sweep(&cfg, SweepVariable::Split, 16.0).is_err());
        let p = apply_sweep(&cfg, SweepVariable::Snr, 10.0).unwrap();
        assert!((p.protocol.total_power_mw / cfg.noise_variance() - 10.0).abs() < 1e-9);
        assert!(apply_sweep(&cfg, SweepVariable::M, 2.5).is_err());
    }

    #[test]
    fn baselines_have_expected_shapes() {
        let cfg = presets::desk();
        let single = ArchitectureSetup::build(&cfg, Architecture::SingleStar).unwrap();
        assert_eq!(single.model.ris_elements(), 0);
        assert_eq!(single.model.star_elements(), 16);
        let ris = ArchitectureSetup::build(&cfg, Architecture::SingleRis).unwrap();
        let s = ris.start(&mut restart_rng(0, 0));
        assert!(s.star.beta_t.iter().all(|&b| b == 0.0));
        let dbl = ArchitectureSetup::build(&cfg, Architecture::DoubleRis).unwrap();
        let s = dbl.start(&mut restart_rng(0, 0));
        assert_eq!(s.star.beta_t.iter().filter(|&&b| b == 1.0).count(), 4);
        let nd = ArchitectureSetup::build(&cfg, Architecture::NoDirect).unwrap();
        assert!(nd.model.pathloss.direct.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn random_phase_is_first_restart_start() {
        let cfg = presets::desk();
        let params = AoParams {
            restarts: 2,
            ..AoParams::default()
        };
        let rp = ArchitectureSetup::build(&cfg, Architecture::RandomPhase).unwrap();
        let d = rp.design(&params).unwrap();
        assert_eq!(d.iterations, 0);
        let ours = ArchitectureSetup::build(&cfg, Architecture::RisStar).unwrap();
        assert_eq!(ours.start(&mut restart_rng(params.seed, 0)), d.surfaces);
    }
}

//! Projected gradient ascent for both surfaces and the alternating driver.
//!
//! Each iteration steps along the gradient, projects back onto the feasible set
//! and backtracks the step until the new objective beats the quadratic model
//!
//! ```text
//! Q = f + 2 Re<g, d_theta> + <b, d_beta> - (|d_theta|^2 + |d_beta|^2) / mu
//! ```
//!
//! and does not fall below the current value. The step carries over between
//! iterations.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel_stats::{SurfaceConfig, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::gradients::{grad_ris, grad_star, phase_derivative, GradientWorkspace, StarGradient};
use crate::model::SystemModel;
use crate::C64;

/// `v_n / |v_n|`, with zero entries mapped to `1`.
pub fn project_unit_modulus(v: &DVector<C64>) -> DVector<C64> {
    v.map(|z| {
        let r = z.norm();
        if r == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            z / r
        }
    })
}

/// Normalizes each pair `(beta_i, beta_{i+N})` of a length-`2N` vector onto the
/// unit circle, keeping signs. A `(0, 0)` pair maps to `(sqrt 0.5, sqrt 0.5)`.
pub fn project_amplitude_pair(beta: &[f64]) -> Vec<f64> {
    assert!(beta.len().is_multiple_of(2), "amplitude vector must have even length");
    let n = beta.len() / 2;
    let mut out = beta.to_vec();
    for i in 0..n {
        let (t, r) = (beta[i], beta[i + n]);
        let norm = t.hypot(r);
        if norm == 0.0 {
            out[i] = FRAC_1_SQRT_2;
            out[i + n] = FRAC_1_SQRT_2;
        } else {
            out[i] = t / norm;
            out[i + n] = r / norm;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub initial_step: f64,
    pub kappa: f64,
    pub max_backtracks: usize,
    pub min_step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Stop when the tangential gradient is this small relative to the full gradient.
    pub stationarity: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            initial_step: 1e3,
            kappa: 0.5,
            max_backtracks: 60,
            min_step: 1e-12,
            tolerance: 1e-5,
            max_iterations: 200,
            stationarity: 1e-9,
        }
    }
}

/// Step size and progress carried across iterations of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchState {
    pub mu: f64,
    pub kappa: f64,
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Increase between the last two iterations fell below the tolerance.
    Converged,
    IterationCap,
    /// Step dropped below the floor without an acceptable point.
    StepFloor,
    BacktrackCap,
    /// The gradient has no component along the feasible set.
    Stationary,
    /// Nothing to optimize (empty surface or frozen block).
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub step: f64,
    pub backtracks: usize,
    pub feasibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub initial_objective: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl OptimizationTrace {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(self.initial_objective, |r| r.objective)
    }

    pub fn is_monotone(&self) -> bool {
        let mut last = self.initial_objective;
        self.records.iter().all(|r| {
            let ok = r.objective >= last;
            last = r.objective;
            ok
        })
    }

    pub fn max_backtracks(&self) -> usize {
        self.records.iter().map(|r| r.backtracks).max().unwrap_or(0)
    }
}

/// Writes `iteration,objective,step,backtracks` rows, numbering iterations consecutively.
pub fn write_trace_csv<W: Write>(out: W, traces: &[OptimizationTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective", "step", "backtracks"])?;
    let mut n = 0usize;
    if let Some(first) = traces.first() {
        w.write_record([
            "0".to_string(),
            first.initial_objective.to_string(),
            String::new(),
            "0".to_string(),
        ])?;
    }
    for t in traces {
        for r in &t.records {
            n += 1;
            w.write_record([
                n.to_string(),
                r.objective.to_string(),
                r.step.to_string(),
                r.backtracks.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Which blocks of the surfaces are free. Amplitudes are only stepped together
/// with the STAR phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeBlocks {
    pub ris: bool,
    pub star_phases: bool,
    pub star_amplitudes: bool,
}

impl Default for FreeBlocks {
    fn default() -> Self {
        Self {
            ris: true,
            star_phases: true,
            star_amplitudes: true,
        }
    }
}

fn objective(model: &SystemModel, s: &SurfaceConfig) -> Result<f64> {
    let f = model.sum_se(s)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    Ok(f)
}

/// Generic PGAM loop; `step` proposes `(candidate, model increase, squared distance)`
/// for a step size and `stationary` inspects the workspace at the current point.
fn pgam<S, P>(
    model: &SystemModel,
    init: &SurfaceConfig,
    params: &LineSearchParams,
    stationary: S,
    propose: P,
) -> Result<(SurfaceConfig, OptimizationTrace)>
where
    S: Fn(&GradientWorkspace, &SurfaceConfig) -> Result<Option<Direction>>,
    P: Fn(&SurfaceConfig, &Direction, f64) -> (SurfaceConfig, f64, f64),
{
    let mut s = init.clone();
    let mut state = LineSearchState {
        mu: params.initial_step,
        kappa: params.kappa,
        iteration: 0,
        objective: objective(model, &s)?,
    };
    let mut records = Vec::new();
    let termination = loop {
        if state.iteration >= params.max_iterations {
            break Termination::IterationCap;
        }
        let ws = GradientWorkspace::for_model(model, &s)?;
        let Some(dir) = stationary(&ws, &s)? else {
            break Termination::Stationary;
        };
        let mut backtracks = 0;
        let accepted = loop {
            let (cand, linear, dist2) = propose(&s, &dir, state.mu);
            let f_new = objective(model, &cand)?;
            let q = state.objective + linear - dist2 / state.mu;
            if f_new > q && f_new >= state.objective {
                break Some((cand, f_new));
            }
            if backtracks >= params.max_backtracks {
                break None;
            }
            state.mu *= state.kappa;
            backtracks += 1;
            if state.mu < params.min_step {
                break None;
            }
        };
        let Some((cand, f_new)) = accepted else {
            break if state.mu < params.min_step {
                Termination::StepFloor
            } else {
                Termination::BacktrackCap
            };
        };
        let gain = f_new - state.objective;
        s = cand;
        state.objective = f_new;
        state.iteration += 1;
        records.push(IterationRecord {
            iteration: state.iteration,
            objective: f_new,
            step: state.mu,
            backtracks,
            feasibility: s.feasibility_residual(),
        });
        if gain < params.tolerance {
            break Termination::Converged;
        }
    };
    Ok((
        s,
        OptimizationTrace {
            initial_objective: objective(model, init)?,
            records,
            termination,
        },
    ))
}

/// Ascent direction for one step.
#[derive(Debug, Clone)]
pub enum Direction {
    Ris(DVector<C64>),
    Star { grad: StarGradient, amplitudes: bool },
}

fn tangential_small(tangent: f64, full: f64, tol: f64) -> bool {
    full == 0.0 || tangent <= tol * full
}

/// Projected gradient ascent over the RIS-1 phases with the STAR-RIS frozen.
pub fn pgam_ris(model: &SystemModel, init: &SurfaceConfig, params: &LineSearchParams) -> Result<(SurfaceConfig, OptimizationTrace)> {
    if init.ris.is_empty() {
        let f = objective(model, init)?;
        return Ok((
            init.clone(),
            OptimizationTrace {
                initial_objective: f,
                records: vec![],
                termination: Termination::Empty,
            },
        ));
    }
    pgam(
        model,
        init,
        params,
        |ws, s| {
            let g = grad_ris(model, ws, s)?;
            let tangent = phase_derivative(&g, &s.ris.theta).norm();
            if tangential_small(tangent, 2.0 * g.norm(), params.stationarity) {
                return Ok(None);
            }
            Ok(Some(Direction::Ris(g)))
        },
        |s, dir, mu| {
            let Direction::Ris(g) = dir else { unreachable!() };
            let theta = project_unit_modulus(&(&s.ris.theta + g * C64::new(mu, 0.0)));
            let d = &theta - &s.ris.theta;
            let linear = 2.0 * g.dotc(&d).re;
            let dist2 = d.norm_squared();
            let mut cand = s.clone();
            cand.ris.theta = theta;
            (cand, linear, dist2)
        },
    )
}

/// Flips `(beta, theta)` to `(-beta, -theta)` wherever `beta < 0`; the product is unchanged.
fn canonicalize(beta: &mut DVector<f64>, theta: &mut DVector<C64>) {
    for (b, t) in beta.iter_mut().zip(theta.iter_mut()) {
        if *b < 0.0 {
            *b = -*b;
            *t = -*t;
        }
    }
}

/// Joint projected gradient ascent over the STAR phases (and amplitudes when
/// `amplitudes` is set) with RIS-1 frozen.
pub fn pgam_star(
    model: &SystemModel,
    init: &SurfaceConfig,
    params: &LineSearchParams,
    amplitudes: bool,
) -> Result<(SurfaceConfig, OptimizationTrace)> {
    if init.star.is_empty() {
        let f = objective(model, init)?;
        return Ok((
            init.clone(),
            OptimizationTrace {
                initial_objective: f,
                records: vec![],
                termination: Termination::Empty,
            },
        ));
    }
    pgam(
        model,
        init,
        params,
        |ws, s| {
            let g = grad_star(model, ws, s)?;
            let st = &s.star;
            let mut tangent = phase_derivative(&g.theta_t, &st.theta_t).norm_squared()
                + phase_derivative(&g.theta_r, &st.theta_r).norm_squared();
            let mut full = 4.0 * (g.theta_t.norm_squared() + g.theta_r.norm_squared());
            if amplitudes {
                for i in 0..st.len() {
                    let along = -st.beta_r[i] * g.beta_t[i] + st.beta_t[i] * g.beta_r[i];
                    tangent += along * along;
                }
                full += g.beta_t.norm_squared() + g.beta_r.norm_squared();
            }
            if tangential_small(tangent.sqrt(), full.sqrt(), params.stationarity) {
                return Ok(None);
            }
            Ok(Some(Direction::Star { grad: g, amplitudes }))
        },
        |s, dir, mu| {
            let Direction::Star { grad: g, amplitudes } = dir else { unreachable!() };
            let st = &s.star;
            let step = C64::new(mu, 0.0);
            let mut theta_t = project_unit_modulus(&(&st.theta_t + &g.theta_t * step));
            let mut theta_r = project_unit_modulus(&(&st.theta_r + &g.theta_r * step));
            let dt = &theta_t - &st.theta_t;
            let dr = &theta_r - &st.theta_r;
            let mut linear = 2.0 * (g.theta_t.dotc(&dt).re + g.theta_r.dotc(&dr).re);
            let mut dist2 = dt.norm_squared() + dr.norm_squared();
            let (mut beta_t, mut beta_r) = (st.beta_t.clone(), st.beta_r.clone());
            if *amplitudes {
                let n = st.len();
                let raw: Vec<f64> = st
                    .beta_t
                    .iter()
                    .zip(g.beta_t.iter())
                    .chain(st.beta_r.iter().zip(g.beta_r.iter()))
                    .map(|(b, d)| b + mu * d)
                    .collect();
                let proj = project_amplitude_pair(&raw);
                beta_t = DVector::from_column_slice(&proj[..n]);
                beta_r = DVector::from_column_slice(&proj[n..]);
                let db_t = &beta_t - &st.beta_t;
                let db_r = &beta_r - &st.beta_r;
                linear += g.beta_t.dot(&db_t) + g.beta_r.dot(&db_r);
                dist2 += db_t.norm_squared() + db_r.norm_squared();
            }
            canonicalize(&mut beta_t, &mut theta_t);
            canonicalize(&mut beta_r, &mut theta_r);
            let mut cand = s.clone();
            cand.star.theta_t = theta_t;
            cand.star.theta_r = theta_r;
            cand.star.beta_t = beta_t;
            cand.star.beta_r = beta_r;
            (cand, linear, dist2)
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoParams {
    pub line_search: LineSearchParams,
    pub outer_tolerance: f64,
    pub max_rounds: usize,
    pub restarts: usize,
    pub seed: u64,
    pub free: FreeBlocks,
}

impl Default for AoParams {
    fn default() -> Self {
        Self {
            line_search: LineSearchParams::default(),
            outer_tolerance: 1e-4,
            max_rounds: 20,
            restarts: 5,
            seed: 0,
            free: FreeBlocks::default(),
        }
    }
}

/// One alternating-optimization run from a single starting point.
#[derive(Debug, Clone)]
pub struct AoRun {
    pub restart: usize,
    pub seed: u64,
    pub stream: u64,
    pub initial: SurfaceConfig,
    pub surfaces: SurfaceConfig,
    pub sum_se: f64,
    /// Objective after each outer round, starting with the initial value.
    pub rounds: Vec<f64>,
    /// Inner traces in execution order (RIS, STAR, RIS, ...).
    pub traces: Vec<OptimizationTrace>,
}

impl AoRun {
    pub fn iterations(&self) -> usize {
        self.traces.iter().map(|t| t.records.len()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct AoResult {
    pub best: usize,
    pub runs: Vec<AoRun>,
}

impl AoResult {
    pub fn best_run(&self) -> &AoRun {
        &self.runs[self.best]
    }

    pub fn sum_se(&self) -> f64 {
        self.best_run().sum_se
    }
}

/// Generator for restart `r`: the run seed with stream `r`.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Alternates RIS-1 and STAR-RIS ascent from one starting point.
pub fn alternate_from(model: &SystemModel, init: &SurfaceConfig, params: &AoParams) -> Result<(SurfaceConfig, Vec<f64>, Vec<OptimizationTrace>)> {
    if init.feasibility_residual() > FEASIBILITY_TOL {
        return Err(Error::InvalidValue {
            key: "init".into(),
            reason: format!("infeasible start, residual {:.3e}", init.feasibility_residual()),
        });
    }
    let mut s = init.clone();
    let mut f = objective(model, &s)?;
    let mut rounds = vec![f];
    let mut traces = Vec::new();
    for _ in 0..params.max_rounds {
        if params.free.ris {
            let (next, t) = pgam_ris(model, &s, &params.line_search)?;
            s = next;
            traces.push(t);
        }
        if params.free.star_phases {
            let (next, t) = pgam_star(model, &s, &params.line_search, params.free.star_amplitudes)?;
            s = next;
            traces.push(t);
        }
        let f_new = objective(model, &s)?;
        rounds.push(f_new);
        let gain = f_new - f;
        f = f_new;
        if gain < params.outer_tolerance {
            break;
        }
    }
    Ok((s, rounds, traces))
}

/// Multi-start alternating optimization; restarts run concurrently and the best
/// run (lowest index among ties) is reported.
pub fn alternating_optimize<F>(model: &SystemModel, params: &AoParams, init: F) -> Result<AoResult>
where
    F: Fn(&mut ChaCha8Rng) -> SurfaceConfig + Sync,
{
    if params.restarts == 0 {
        return Err(Error::InvalidValue {
            key: "restarts".into(),
            reason: "need at least one restart".into(),
        });
    }
    let runs: Vec<AoRun> = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(params.seed, r);
            let start = init(&mut rng);
            let (surfaces, rounds, traces) = alternate_from(model, &start, params)?;
            Ok(AoRun {
                restart: r,
                seed: params.seed,
                stream: r as u64,
                initial: start,
                sum_se: *rounds.last().expect("rounds start with the initial value"),
                surfaces,
                rounds,
                traces,
            })
        })
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.sum_se > runs[b].sum_se { i } else { b });
    Ok(AoResult { best, runs })
}

/// Uniform random phases on both surfaces with the even energy split.
pub fn random_start(model: &SystemModel, rng: &mut ChaCha8Rng) -> SurfaceConfig {
    SurfaceConfig::random(model.ris_elements(), model.star_elements(), rng)
}

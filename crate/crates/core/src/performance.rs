//! Deterministic-equivalent SINR and sum SE, plus the sample-mean oracle for the
//! same use-and-then-forget bound.

use nalgebra::DMatrix;

use crate::channel_stats::ChannelCovariances;
use crate::error::{Error, Result};
use crate::estimation::EstimationStatistics;
use crate::operator::HermitianOp;
use crate::C64;

/// Fewest Monte-Carlo samples the oracle accepts.
pub const MIN_MC_SAMPLES: usize = 100;

/// Relative imaginary trace residue tolerated before a covariance is declared corrupt.
const TRACE_IMAG_TOL: f64 = 1e-10;

/// Constants of the downlink: `rho`, `sigma^2` and the pre-log factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub power: f64,
    pub noise: f64,
    pub prelog: f64,
}

impl LinkBudget {
    /// `K sigma^2 / rho`, the weight of the normalization term.
    pub fn noise_weight(&self, users: usize) -> f64 {
        users as f64 * self.noise / self.power
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceResult {
    pub signal: Vec<f64>,
    pub interference: Vec<f64>,
    pub sinr: Vec<f64>,
    pub sum_se: f64,
    pub prelog: f64,
}

impl PerformanceResult {
    pub fn from_terms(signal: Vec<f64>, interference: Vec<f64>, prelog: f64) -> Self {
        let sinr: Vec<f64> = signal
            .iter()
            .zip(&interference)
            .map(|(&s, &i)| if s > 0.0 && i > 0.0 { s / i } else { 0.0 })
            .collect();
        let sum_se = prelog * sinr.iter().map(|g| (1.0 + g).log2()).sum::<f64>();
        Self {
            signal,
            interference,
            sinr,
            sum_se,
            prelog,
        }
    }

    pub fn users(&self) -> usize {
        self.sinr.len()
    }

    /// Per-UE rates `prelog * log2(1 + gamma_k)`.
    pub fn rates(&self) -> Vec<f64> {
        self.sinr.iter().map(|g| self.prelog * (1.0 + g).log2()).collect()
    }
}

fn checked_trace<T: HermitianOp>(t: &T, what: &'static str) -> Result<f64> {
    let re = t.trace();
    let im = t.trace_imag();
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::NonFinite(what));
    }
    if im.abs() > TRACE_IMAG_TOL * re.abs().max(f64::MIN_POSITIVE) && im.abs() > TRACE_IMAG_TOL {
        return Err(Error::NotHermitian(im.abs() / re.abs().max(f64::MIN_POSITIVE)));
    }
    Ok(re)
}

/// Deterministic-equivalent SINR:
///
/// ```text
/// S_k = tr(Psi_k)^2
/// I_k = sum_i tr(R_k Psi_i) - tr(Psi_k^2) + (K sigma^2 / rho) sum_i tr(Psi_i)
/// ```
pub fn de_sinr<T: HermitianOp>(
    est: &EstimationStatistics<T>,
    cov: &ChannelCovariances<T>,
    budget: &LinkBudget,
) -> Result<PerformanceResult> {
    let k = est.aggregate.len();
    if cov.users() != k {
        return Err(Error::Dimension(format!("{} covariances for {} estimates", cov.users(), k)));
    }
    if k == 0 {
        return Ok(PerformanceResult::from_terms(vec![], vec![], budget.prelog));
    }
    let psi_sum = est
        .aggregate
        .iter()
        .skip(1)
        .fold(est.aggregate[0].clone(), |acc, p| acc.add(p));
    let total = checked_trace(&psi_sum, "sum of estimate covariances")?;
    let c = budget.noise_weight(k);
    let mut signal = Vec::with_capacity(k);
    let mut interference = Vec::with_capacity(k);
    for (psi, rbar) in est.aggregate.iter().zip(&cov.aggregate) {
        let t = checked_trace(psi, "estimate covariance")?;
        let cross = rbar.trace_mul(&psi_sum);
        let own = psi.trace_mul(psi);
        let i_k = cross - own + c * total;
        if !i_k.is_finite() || !cross.is_finite() {
            return Err(Error::NonFinite("interference term"));
        }
        signal.push(t * t);
        interference.push(i_k);
    }
    Ok(PerformanceResult::from_terms(signal, interference, budget.prelog))
}

/// Running sample means of the use-and-then-forget terms with MRT precoding.
///
/// Per sample it takes the true aggregate channels `H` and the precoders `F`
/// (both `M x K`, one column per UE). The power normalization is
/// `lambda = 1 / sum_i E||f_i||^2`, which together with `p_i = rho / K` gives
/// the noise term `(K sigma^2 / rho) sum_i E||f_i||^2`.
#[derive(Debug, Clone)]
pub struct UatfAccumulator {
    users: usize,
    count: usize,
    /// `sum h_k^H f_k`
    gain: Vec<C64>,
    /// `sum |h_k^H f_i|^2`, row `k`, column `i`
    cross: DMatrix<f64>,
    /// `sum ||f_i||^2`
    power: Vec<f64>,
}

impl UatfAccumulator {
    pub fn new(users: usize) -> Self {
        Self {
            users,
            count: 0,
            gain: vec![C64::new(0.0, 0.0); users],
            cross: DMatrix::zeros(users, users),
            power: vec![0.0; users],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, h: &DMatrix<C64>, f: &DMatrix<C64>) {
        debug_assert_eq!(h.ncols(), self.users);
        debug_assert_eq!(f.ncols(), self.users);
        let inner = h.adjoint() * f;
        for k in 0..self.users {
            self.gain[k] += inner[(k, k)];
            for i in 0..self.users {
                self.cross[(k, i)] += inner[(k, i)].norm_sqr();
            }
            self.power[k] += f.column(k).norm_squared();
        }
        self.count += 1;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        self.count += other.count;
        for k in 0..self.users {
            self.gain[k] += other.gain[k];
            self.power[k] += other.power[k];
        }
        self.cross += &other.cross;
        self
    }

    /// SINR from the sample means; also returns `lambda = 1 / sum_i E||f_i||^2`.
    pub fn finish(&self, budget: &LinkBudget) -> Result<(PerformanceResult, f64)> {
        if self.count < MIN_MC_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_MC_SAMPLES,
                got: self.count,
            });
        }
        Ok(self.finish_unchecked(budget).expect("count is positive"))
    }

    /// Same as [`finish`](Self::finish) without the sample-count floor; `None` when empty.
    pub fn finish_unchecked(&self, budget: &LinkBudget) -> Option<(PerformanceResult, f64)> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        let power: f64 = self.power.iter().sum::<f64>() / n;
        let c = budget.noise_weight(self.users);
        let mut signal = Vec::with_capacity(self.users);
        let mut interference = Vec::with_capacity(self.users);
        for k in 0..self.users {
            let s = (self.gain[k] / n).norm_sqr();
            let total: f64 = (0..self.users).map(|i| self.cross[(k, i)]).sum::<f64>() / n;
            signal.push(s);
            interference.push(total - s + c * power);
        }
        let lambda = if power > 0.0 { 1.0 / power } else { 0.0 };
        Some((PerformanceResult::from_terms(signal, interference, budget.prelog), lambda))
    }
}

/// UatF sum SE from explicit `(H, F)` draws.
pub fn mc_sinr_oracle(samples: &[(DMatrix<C64>, DMatrix<C64>)], budget: &LinkBudget) -> Result<PerformanceResult> {
    let users = samples.first().map(|(h, _)| h.ncols()).unwrap_or(0);
    let mut acc = UatfAccumulator::new(users);
    for (h, f) in samples {
        acc.push(h, f);
    }
    Ok(acc.finish(budget)?.0)
}

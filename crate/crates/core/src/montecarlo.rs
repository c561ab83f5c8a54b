//! Monte-Carlo oracle: correlated Rayleigh draws, pilot training and the
//! use-and-then-forget SE by sample averages.
//!
//! Draws are colored as `X = sqrt(beta) R_a^{1/2} X~ R_b^{1/2}` with the
//! antenna-side factor on the left. The inter-surface matrix `D` is stored
//! `N1 x N2` so that the double-reflection channel reads
//! `G1 Phi1 D Phi2 g2`.
//!
//! Every block uses its own generator, the run seed with the block index as
//! stream, and blocks are reduced in a fixed order, so results are bit-identical
//! for a given seed regardless of the thread count.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel_stats::{region_index, SurfaceConfig};
use crate::correlation::CorrelationSet;
use crate::error::{Error, Result};
use crate::estimation::CsiModel;
use crate::model::SystemModel;
use crate::performance::{PerformanceResult, UatfAccumulator, MIN_MC_SAMPLES};
use crate::scenario::{PathLossSet, Region};
use crate::C64;

/// `M x N` matrix of i.i.d. `CN(0, 1)` entries.
pub fn complex_normal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

fn colored(rng: &mut ChaCha8Rng, left: &DMatrix<C64>, right: &DMatrix<C64>, gain: f64) -> DMatrix<C64> {
    let white = complex_normal(rng, left.ncols(), right.nrows());
    if gain == 0.0 {
        return DMatrix::zeros(left.nrows(), right.ncols());
    }
    left * white * right * C64::new(gain.sqrt(), 0.0)
}

/// One realization of every small-scale fading block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// BS -> RIS-1, `M x N1`
    pub g1: DMatrix<C64>,
    /// RIS-1 -> STAR, `N1 x N2`
    pub d: DMatrix<C64>,
    /// BS -> STAR, `M x N2`
    pub u2: DMatrix<C64>,
    /// STAR -> UE, one column per UE
    pub g2: DMatrix<C64>,
    /// RIS-1 -> UE, one column per UE
    pub u1: DMatrix<C64>,
    /// BS -> UE direct, one column per UE
    pub c: DMatrix<C64>,
}

pub fn sample_channels(corr: &CorrelationSet, pl: &PathLossSet, rng: &mut ChaCha8Rng) -> ChannelDraw {
    let k = pl.users();
    let one = DMatrix::<C64>::identity(1, 1);
    let g1 = colored(rng, &corr.sqrt_t, &corr.sqrt_1, pl.bs_ris);
    let d = colored(rng, &corr.sqrt_1, &corr.sqrt_2, pl.ris_star);
    let u2 = colored(rng, &corr.sqrt_t, &corr.sqrt_2, pl.bs_star);
    let column = |rng: &mut ChaCha8Rng, sqrt: &DMatrix<C64>, gains: &[f64]| {
        let mut out = DMatrix::zeros(sqrt.nrows(), k);
        for (i, &b) in gains.iter().enumerate() {
            out.set_column(i, &colored(rng, sqrt, &one, b).column(0));
        }
        out
    };
    let g2 = column(rng, &corr.sqrt_2, &pl.star_ue);
    let u1 = column(rng, &corr.sqrt_1, &pl.ris_ue);
    let c = column(rng, &corr.sqrt_t, &pl.direct);
    ChannelDraw { g1, d, u2, g2, u1, c }
}

impl ChannelDraw {
    /// `[H, H1, H2]`, each `M x K`: the direct-plus-double link, the RIS-1 link and the STAR link.
    pub fn links(&self, s: &SurfaceConfig, regions: &[Region]) -> [DMatrix<C64>; 3] {
        let m = self.g1.nrows();
        let k = regions.len();
        let phi1 = &s.ris.theta;
        let phi2 = [
            s.star.coefficients(Region::Transmission),
            s.star.coefficients(Region::Reflection),
        ];
        // G1 Phi1 and G1 Phi1 D, shared by all users
        let g1p = DMatrix::from_fn(m, phi1.len(), |i, j| self.g1[(i, j)] * phi1[j]);
        let g1pd = &g1p * &self.d;
        let mut h0 = self.c.clone();
        let mut h1 = DMatrix::zeros(m, k);
        let mut h2 = DMatrix::zeros(m, k);
        for (kk, &w) in regions.iter().enumerate() {
            let phi = &phi2[region_index(w)];
            let g = self.g2.column(kk).component_mul(phi);
            h0.set_column(kk, &(h0.column(kk) + &g1pd * &g));
            h1.set_column(kk, &(&g1p * self.u1.column(kk)));
            h2.set_column(kk, &(&self.u2 * &g));
        }
        [h0, h1, h2]
    }
}

/// Pilot matrix `K x tau` with orthogonal rows of squared norm `tau P` (DFT rows).
pub fn orthogonal_pilots(users: usize, tau: usize, pilot_power: f64) -> Result<DMatrix<C64>> {
    if tau < users {
        return Err(Error::TooFewPilots { tau, users });
    }
    let amp = pilot_power.sqrt();
    Ok(DMatrix::from_fn(users, tau, |k, t| {
        C64::from_polar(amp, -2.0 * std::f64::consts::PI * (k * t) as f64 / tau as f64)
    }))
}

#[derive(Debug, Clone)]
pub struct TrainingRealization {
    /// `K x tau`, row `k` is `x_k^T`.
    pub pilots: DMatrix<C64>,
    /// `M x tau`
    pub received: DMatrix<C64>,
    /// `M x K`, column `k` is `r_k = Y conj(x_k) / (tau P)`.
    pub despread: DMatrix<C64>,
    /// `M x K` LMMSE estimates.
    pub estimates: DMatrix<C64>,
}

/// Uplink training for channels `h` (`M x K`): `Y = sum_i h_i x_i^T + Z`, despreading
/// with the own pilot and the per-UE LMMSE filter `R Q` (`None` keeps `r_k`).
pub fn simulate_training(
    h: &DMatrix<C64>,
    pilots: &DMatrix<C64>,
    sigma2: f64,
    pilot_power: f64,
    filters: &[Option<DMatrix<C64>>],
    rng: &mut ChaCha8Rng,
) -> TrainingRealization {
    let (m, k) = h.shape();
    let tau = pilots.ncols();
    let noise = complex_normal(rng, m, tau) * C64::new(sigma2.sqrt(), 0.0);
    let received = h * pilots + noise;
    let scale = C64::new(1.0 / (tau as f64 * pilot_power), 0.0);
    let despread = &received * pilots.adjoint() * scale;
    let mut estimates = DMatrix::zeros(m, k);
    for i in 0..k {
        let r = despread.column(i);
        match &filters[i] {
            Some(a) => estimates.set_column(i, &(a * r)),
            None => estimates.set_column(i, &r),
        }
    }
    TrainingRealization {
        pilots: pilots.clone(),
        received,
        despread,
        estimates,
    }
}

/// Training parameters for the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSetup {
    pub tau: usize,
    pub pilot_power: f64,
    pub noise: f64,
}

impl TrainingSetup {
    pub fn effective_noise(&self) -> f64 {
        self.noise / (self.tau as f64 * self.pilot_power)
    }

    /// Smallest training that fits `users` orthogonal pilots at effective noise `eps`.
    pub fn for_effective_noise(users: usize, eps: f64) -> Self {
        let tau = users.max(1);
        Self {
            tau,
            pilot_power: 1.0,
            noise: eps * tau as f64,
        }
    }
}

/// Per-link LMMSE filters `R_lk Q_lk` of the model at `s`; `None` under perfect CSI.
pub fn lmmse_filters(model: &SystemModel, s: &SurfaceConfig) -> Result<Vec<[Option<DMatrix<C64>>; 3]>> {
    let stats = model.dense_statistics(s)?;
    Ok(stats
        .cov
        .links
        .iter()
        .zip(&stats.est.links)
        .map(|(r, e)| {
            std::array::from_fn(|l| e[l].q.as_ref().map(|q| &r[l].0 * &q.0))
        })
        .collect())
}

/// One block: fresh channels, one training phase per link, estimates and channels summed over links.
#[derive(Debug, Clone)]
pub struct BlockSample {
    pub links: [DMatrix<C64>; 3],
    pub estimates: [DMatrix<C64>; 3],
}

impl BlockSample {
    pub fn channel(&self) -> DMatrix<C64> {
        &self.links[0] + &self.links[1] + &self.links[2]
    }

    pub fn estimate(&self) -> DMatrix<C64> {
        &self.estimates[0] + &self.estimates[1] + &self.estimates[2]
    }
}

/// Draws blocks for one model and surface configuration.
pub struct BlockSampler<'a> {
    model: &'a SystemModel,
    surfaces: &'a SurfaceConfig,
    filters: Vec<[Option<DMatrix<C64>>; 3]>,
    training: Option<(TrainingSetup, DMatrix<C64>)>,
}

impl<'a> BlockSampler<'a> {
    pub fn new(model: &'a SystemModel, surfaces: &'a SurfaceConfig) -> Result<Self> {
        let filters = lmmse_filters(model, surfaces)?;
        let training = match model.csi {
            CsiModel::Perfect => None,
            CsiModel::Imperfect { effective_noise } => {
                let setup = TrainingSetup::for_effective_noise(model.users(), effective_noise);
                let pilots = orthogonal_pilots(model.users(), setup.tau, setup.pilot_power)?;
                Some((setup, pilots))
            }
        };
        Ok(Self {
            model,
            surfaces,
            filters,
            training,
        })
    }

    /// Uses an explicit training setup; its effective noise must match the model's.
    pub fn with_training(mut self, setup: TrainingSetup) -> Result<Self> {
        if let CsiModel::Imperfect { effective_noise } = self.model.csi {
            let eps = setup.effective_noise();
            if (eps - effective_noise).abs() > 1e-12 * effective_noise {
                return Err(Error::InvalidValue {
                    key: "training".into(),
                    reason: format!("effective noise {eps} differs from the model's {effective_noise}"),
                });
            }
            let pilots = orthogonal_pilots(self.model.users(), setup.tau, setup.pilot_power)?;
            self.training = Some((setup, pilots));
        }
        Ok(self)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> BlockSample {
        let draw = sample_channels(&self.model.corr, &self.model.pathloss, rng);
        let links = draw.links(self.surfaces, &self.model.regions);
        let estimates = std::array::from_fn(|l| match &self.training {
            None => links[l].clone(),
            Some((setup, pilots)) => {
                let filters: Vec<Option<DMatrix<C64>>> = self.filters.iter().map(|f| f[l].clone()).collect();
                simulate_training(&links[l], pilots, setup.noise, setup.pilot_power, &filters, rng).estimates
            }
        });
        BlockSample { links, estimates }
    }
}

/// Generator of block `b` for run `seed`.
pub fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Processes blocks `0..n` in fixed chunks and merges the chunk results in order.
pub fn map_blocks<A, F, M>(n: usize, seed: u64, init: impl Fn() -> A + Sync, step: F, merge: M) -> A
where
    A: Send,
    F: Fn(&mut A, &mut ChaCha8Rng) + Sync,
    M: Fn(A, A) -> A,
{
    const CHUNK: usize = 64;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for b in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = block_rng(seed, b);
                step(&mut acc, &mut rng);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

#[derive(Debug, Clone)]
pub struct McResult {
    pub perf: PerformanceResult,
    /// `1 / sum_i E||f_i||^2`
    pub lambda: f64,
    /// Standard error of the sum SE from ten batch means.
    pub stderr: f64,
    pub blocks: usize,
}

/// UatF sum SE with MRT on the estimates, expectations replaced by block averages.
pub fn empirical_sum_se(model: &SystemModel, surfaces: &SurfaceConfig, n_blocks: usize, seed: u64) -> Result<McResult> {
    if n_blocks < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_MC_SAMPLES,
            got: n_blocks,
        });
    }
    let sampler = BlockSampler::new(model, surfaces)?;
    const BATCHES: usize = 10;
    let k = model.users();
    let per_batch = n_blocks.div_ceil(BATCHES);
    let batches = map_blocks(
        n_blocks,
        seed,
        Vec::<(usize, UatfAccumulator)>::new,
        |acc, rng| {
            // the block index is recovered from the stream
            let b = rng.get_stream() as usize;
            let sample = sampler.sample(rng);
            let batch = b / per_batch;
            match acc.iter_mut().find(|(i, _)| *i == batch) {
                Some((_, a)) => a.push(&sample.channel(), &sample.estimate()),
                None => {
                    let mut a = UatfAccumulator::new(k);
                    a.push(&sample.channel(), &sample.estimate());
                    acc.push((batch, a));
                }
            }
        },
        |mut a, b| {
            for (i, x) in b {
                match a.iter_mut().find(|(j, _)| *j == i) {
                    Some((_, y)) => *y = y.clone().merge(&x),
                    None => a.push((i, x)),
                }
            }
            a
        },
    );
    let mut batches = batches;
    batches.sort_by_key(|(i, _)| *i);
    let total = batches
        .iter()
        .fold(UatfAccumulator::new(k), |acc, (_, a)| acc.merge(a));
    let (perf, lambda) = total.finish(&model.budget)?;
    let batch_se: Vec<f64> = batches
        .iter()
        .filter_map(|(_, a)| a.finish_unchecked(&model.budget).map(|(p, _)| p.sum_se))
        .collect();
    let stderr = if batch_se.len() > 1 {
        let n = batch_se.len() as f64;
        let mean = batch_se.iter().sum::<f64>() / n;
        let var = batch_se.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    Ok(McResult {
        perf,
        lambda,
        stderr,
        blocks: n_blocks,
    })
}

/// Relative Frobenius errors of the sample covariances of the three links of
/// every UE against the closed forms, `[user][link]`.
pub fn covariance_fidelity(model: &SystemModel, surfaces: &SurfaceConfig, n: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    let k = model.users();
    let m = model.bs_antennas();
    let sums = map_blocks(
        n,
        seed,
        || vec![std::array::from_fn::<DMatrix<C64>, 3, _>(|_| DMatrix::zeros(m, m)); k],
        |acc, rng| {
            let draw = sample_channels(&model.corr, &model.pathloss, rng);
            let links = draw.links(surfaces, &model.regions);
            for (kk, a) in acc.iter_mut().enumerate() {
                for l in 0..3 {
                    let h = links[l].column(kk);
                    *a.get_mut(l).unwrap() += h * h.adjoint();
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for l in 0..3 {
                    x[l] += &y[l];
                }
            }
            a
        },
    );
    let stats = model.dense_statistics(surfaces)?;
    Ok(sums
        .iter()
        .zip(&stats.cov.links)
        .map(|(s, r)| {
            std::array::from_fn(|l| {
                let sample = &s[l] / C64::new(n as f64, 0.0);
                let exact = &r[l].0;
                let norm = exact.norm();
                if norm == 0.0 {
                    sample.norm()
                } else {
                    (sample - exact).norm() / norm
                }
            })
        })
        .collect())
}

/// Sample LMMSE statistics per UE and link: `(|E[h^ (h - h^)^H]|_F / |Psi|_F,
/// |E||h - h^||^2 - tr(E)| / tr(E))`.
pub fn estimation_fidelity(model: &SystemModel, surfaces: &SurfaceConfig, n: usize, seed: u64) -> Result<Vec<[(f64, f64); 3]>> {
    let k = model.users();
    let m = model.bs_antennas();
    let sampler = BlockSampler::new(model, surfaces)?;
    let zero = || vec![std::array::from_fn::<(DMatrix<C64>, f64), 3, _>(|_| (DMatrix::zeros(m, m), 0.0)); k];
    let sums = map_blocks(
        n,
        seed,
        zero,
        |acc, rng| {
            let b = sampler.sample(rng);
            for (kk, a) in acc.iter_mut().enumerate() {
                for l in 0..3 {
                    let est = b.estimates[l].column(kk);
                    let err = b.links[l].column(kk) - est;
                    a[l].0 += est * err.adjoint();
                    a[l].1 += err.norm_squared();
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for l in 0..3 {
                    x[l].0 += &y[l].0;
                    x[l].1 += y[l].1;
                }
            }
            a
        },
    );
    let stats = model.dense_statistics(surfaces)?;
    Ok(sums
        .iter()
        .zip(&stats.est.links)
        .map(|(s, e)| {
            std::array::from_fn(|l| {
                let nn = n as f64;
                let psi = e[l].psi.0.norm();
                let cross = (&s[l].0 / C64::new(nn, 0.0)).norm();
                let mse = s[l].1 / nn;
                let tr_e = e[l].err.0.trace().re;
                (
                    if psi > 0.0 { cross / psi } else { cross },
                    if tr_e > 0.0 { (mse - tr_e).abs() / tr_e } else { mse },
                )
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::performance::de_sinr;
    use crate::scenario::TraceReading;

    #[test]
    fn pilots_are_orthogonal() {
        let x = orthogonal_pilots(3, 5, 2.0).unwrap();
        let gram = &x * x.adjoint();
        for i in 0..3 {
            assert!((gram[(i, i)].re - 10.0).abs() < 1e-12);
            for j in 0..3 {
                if i != j {
                    assert!(gram[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!(orthogonal_pilots(3, 2, 1.0).is_err());
    }

    #[test]
    fn noiseless_despreading_recovers_channels() {
        let mut rng = block_rng(1, 0);
        let h = complex_normal(&mut rng, 4, 3);
        let x = orthogonal_pilots(3, 4, 0.5).unwrap();
        let t = simulate_training(&h, &x, 0.0, 0.5, &[None, None, None], &mut rng);
        assert!((t.despread - &h).norm() < 1e-12);
    }

    #[test]
    fn single_user_despreading_is_identity() {
        let mut rng = block_rng(2, 0);
        let h = complex_normal(&mut rng, 3, 1);
        let x = orthogonal_pilots(1, 1, 2.0).unwrap();
        let t = simulate_training(&h, &x, 0.0, 2.0, &[None], &mut rng);
        assert!((t.despread - &h).norm() < 1e-14);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let corr = CorrelationSet::identity(3, 2, 2);
        let pl = PathLossSet::new(1.0, 1.0, 1.0, vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let a = sample_channels(&corr, &pl, &mut block_rng(9, 4));
        let b = sample_channels(&corr, &pl, &mut block_rng(9, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_gain_block_is_zero() {
        let corr = CorrelationSet::identity(3, 2, 2);
        let pl = PathLossSet::new(0.0, 1.0, 1.0, vec![1.0], vec![1.0], vec![0.0]).unwrap();
        let d = sample_channels(&corr, &pl, &mut block_rng(0, 0));
        assert_eq!(d.g1.norm(), 0.0);
        assert_eq!(d.c.norm(), 0.0);
        assert!(d.u2.norm() > 0.0);
    }

    #[test]
    fn identity_block_covariance() {
        let corr = CorrelationSet::identity(4, 4, 4);
        let pl = PathLossSet::new(0.3, 1.0, 1.0, vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let n = 10_000;
        let acc = map_blocks(
            n,
            5,
            || DMatrix::<C64>::zeros(16, 16),
            |a, rng| {
                let d = sample_channels(&corr, &pl, rng);
                let v = DMatrix::from_column_slice(16, 1, d.g1.as_slice());
                *a += &v * v.adjoint();
            },
            |a, b| a + b,
        );
        let sample = acc / C64::new(n as f64, 0.0);
        let target = DMatrix::<C64>::identity(16, 16) * C64::new(0.3, 0.0);
        assert!((sample - &target).norm() / target.norm() < 0.05);
    }

    #[test]
    fn too_few_blocks() {
        let model = crate::presets::random_small_model(1, 2, 2, 2, vec![Region::Transmission]).unwrap();
        let s = SurfaceConfig::balanced(2, 2);
        assert!(matches!(empirical_sum_se(&model, &s, 50, 0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn empirical_se_is_reproducible() {
        let model = crate::presets::random_small_model(1, 3, 2, 2, vec![Region::Transmission, Region::Reflection]).unwrap();
        let s = SurfaceConfig::balanced(2, 2);
        let a = empirical_sum_se(&model, &s, 300, 7).unwrap();
        let b = empirical_sum_se(&model, &s, 300, 7).unwrap();
        assert_eq!(a.perf, b.perf);
    }

    #[test]
    fn vanishing_power_gives_vanishing_rate() {
        let model = crate::presets::random_small_model(2, 3, 2, 2, vec![Region::Transmission]).unwrap();
        let mut budget = model.budget;
        budget.power = 1e-12;
        let model = model.with_budget(budget);
        let s = SurfaceConfig::balanced(2, 2);
        let mc = empirical_sum_se(&model, &s, 200, 1).unwrap();
        assert!(mc.perf.sum_se < 1e-9);
    }

    #[test]
    fn single_antenna_pair_matches_de() {
        let corr = CorrelationSet::identity(2, 1, 1);
        let pl = PathLossSet::new(0.0, 0.0, 0.0, vec![0.0], vec![0.0], vec![1.0]).unwrap();
        let model = SystemModel::new(
            corr,
            pl,
            vec![Region::Transmission],
            crate::performance::LinkBudget { power: 0.01, noise: 1.0, prelog: 1.0 },
            CsiModel::Imperfect { effective_noise: 0.1 },
            TraceReading::Consistent,
        )
        .unwrap();
        let s = SurfaceConfig::balanced(1, 1);
        let de = model.evaluate(&s).unwrap();
        let mc = empirical_sum_se(&model, &s, 10_000, 3).unwrap();
        assert!((mc.perf.sum_se - de.sum_se).abs() / mc.perf.sum_se < 0.05);
        let stats = model.dense_statistics(&s).unwrap();
        let dense = de_sinr(&stats.est, &stats.cov, &model.budget).unwrap();
        assert!((dense.sum_se - de.sum_se).abs() < 1e-12 * de.sum_se);
    }
}

//! The static part of one system: correlations, path losses, UE regions and link
//! budget. A [`SystemModel`] turns a surface configuration into covariances,
//! estimation statistics and the deterministic-equivalent sum SE.

use std::sync::Arc;

use crate::channel_stats::{
    channel_covariances, link_gains, ChannelCovariances, LinkBases, LinkGains, SurfaceConfig, SurfaceTraces,
    TraceKernels,
};
use crate::correlation::CorrelationSet;
use crate::error::{Error, Result};
use crate::estimation::{estimation_statistics, CsiModel, EstimationStatistics};
use crate::operator::{Dense, HermitianOp, Spectral};
use crate::performance::{de_sinr, LinkBudget, PerformanceResult};
use crate::scenario::{compute_path_losses, CsiMode, PathLossSet, Region, ScenarioConfig, TraceReading};

/// Matrix representation used for the antenna-domain statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Full `M x M` matrices.
    Dense,
    /// Eigenvalues in the eigenbasis of `R_t`; needs the consistent trace reading.
    Spectral,
}

/// Everything the closed forms produce for one surface configuration.
#[derive(Debug, Clone)]
pub struct Statistics<T> {
    pub traces: SurfaceTraces,
    pub gains: Vec<LinkGains>,
    pub cov: ChannelCovariances<T>,
    pub est: EstimationStatistics<T>,
    pub perf: PerformanceResult,
}

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub corr: Arc<CorrelationSet>,
    pub pathloss: PathLossSet,
    pub regions: Vec<Region>,
    pub budget: LinkBudget,
    pub csi: CsiModel,
    pub kernels: TraceKernels,
    dense: LinkBases<Dense>,
    spectral: Option<LinkBases<Spectral>>,
    engine: Engine,
}

impl SystemModel {
    pub fn new(
        corr: CorrelationSet,
        pathloss: PathLossSet,
        regions: Vec<Region>,
        budget: LinkBudget,
        csi: CsiModel,
        reading: TraceReading,
    ) -> Result<Self> {
        if regions.len() != pathloss.users() {
            return Err(Error::RegionCount {
                found: regions.len(),
                expected: pathloss.users(),
            });
        }
        if !(budget.power > 0.0) || !(budget.noise > 0.0) {
            return Err(Error::InvalidValue {
                key: "budget".into(),
                reason: "power and noise must be positive".into(),
            });
        }
        let kernels = TraceKernels::new(&corr, reading)?;
        let dense = LinkBases::dense(&corr, reading)?;
        let spectral = match reading {
            TraceReading::Consistent => {
                let basis = Arc::new(corr.eig_t.vectors.clone());
                let rt = Spectral::new(corr.eig_t.values.clone(), basis);
                Some(LinkBases {
                    direct: rt.clone(),
                    double: rt.clone(),
                    ris: rt.clone(),
                    star: rt,
                })
            }
            TraceReading::Verbatim => None,
        };
        let engine = if spectral.is_some() { Engine::Spectral } else { Engine::Dense };
        Ok(Self {
            corr: Arc::new(corr),
            pathloss,
            regions,
            budget,
            csi,
            kernels,
            dense,
            spectral,
            engine,
        })
    }

    /// The proposed architecture exactly as the scenario describes it.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let corr = CorrelationSet::from_scenario(cfg)?;
        let pathloss = compute_path_losses(cfg)?;
        Self::new(
            corr,
            pathloss,
            cfg.system.regions.clone(),
            budget_of(cfg),
            csi_of(cfg)?,
            cfg.correlation.trace_reading,
        )
    }

    pub fn with_engine(mut self, engine: Engine) -> Result<Self> {
        if engine == Engine::Spectral && self.spectral.is_none() {
            return Err(Error::InvalidValue {
                key: "engine".into(),
                reason: "spectral engine needs the consistent trace reading".into(),
            });
        }
        self.engine = engine;
        Ok(self)
    }

    pub fn with_csi(mut self, csi: CsiModel) -> Self {
        self.csi = csi;
        self
    }

    pub fn with_budget(mut self, budget: LinkBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn users(&self) -> usize {
        self.regions.len()
    }

    pub fn bs_antennas(&self) -> usize {
        self.corr.bs_antennas()
    }

    pub fn ris_elements(&self) -> usize {
        self.corr.ris_elements()
    }

    pub fn star_elements(&self) -> usize {
        self.corr.star_elements()
    }

    pub fn dense_bases(&self) -> &LinkBases<Dense> {
        &self.dense
    }

    pub fn spectral_bases(&self) -> Option<&LinkBases<Spectral>> {
        self.spectral.as_ref()
    }

    pub fn gains(&self, s: &SurfaceConfig) -> Result<(SurfaceTraces, Vec<LinkGains>)> {
        let traces = self.kernels.traces(s)?;
        let gains = self
            .regions
            .iter()
            .enumerate()
            .map(|(k, &w)| link_gains(&self.pathloss, &traces, k, w))
            .collect();
        Ok((traces, gains))
    }

    pub fn statistics_with<T: HermitianOp>(&self, bases: &LinkBases<T>, s: &SurfaceConfig) -> Result<Statistics<T>> {
        let (traces, gains) = self.gains(s)?;
        let cov = channel_covariances(bases, &gains);
        let est = estimation_statistics(&cov, self.csi)?;
        let perf = de_sinr(&est, &cov, &self.budget)?;
        Ok(Statistics {
            traces,
            gains,
            cov,
            est,
            perf,
        })
    }

    pub fn dense_statistics(&self, s: &SurfaceConfig) -> Result<Statistics<Dense>> {
        self.statistics_with(&self.dense, s)
    }

    /// Deterministic-equivalent performance with the configured engine.
    pub fn evaluate(&self, s: &SurfaceConfig) -> Result<PerformanceResult> {
        match (self.engine, &self.spectral) {
            (Engine::Spectral, Some(b)) => Ok(self.statistics_with(b, s)?.perf),
            _ => Ok(self.dense_statistics(s)?.perf),
        }
    }

    pub fn sum_se(&self, s: &SurfaceConfig) -> Result<f64> {
        Ok(self.evaluate(s)?.sum_se)
    }
}

pub fn budget_of(cfg: &ScenarioConfig) -> LinkBudget {
    LinkBudget {
        power: cfg.protocol.total_power_mw,
        noise: cfg.noise_variance(),
        prelog: cfg.prelog(),
    }
}

pub fn csi_of(cfg: &ScenarioConfig) -> Result<CsiModel> {
    match cfg.protocol.csi {
        CsiMode::Perfect => Ok(CsiModel::Perfect),
        CsiMode::Imperfect => CsiModel::from_training(cfg.noise_variance(), cfg.protocol.training_length, cfg.pilot_power()),
    }
}

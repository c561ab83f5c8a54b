//! Closed-form gradients of the deterministic-equivalent sum SE.
//!
//! The SE depends on the surfaces only through the per-UE link coefficients
//! `a_lk` of [`LinkGains`](crate::channel_stats::LinkGains). The workspace holds
//! the sensitivities `dSE/da_lk`; the surface gradients follow from
//! `d(phi^H W phi)/d phi* = W phi`.
//!
//! Complex blocks are Wirtinger gradients `dSE/dtheta*`. For `theta_n = e^{j x_n}`
//! the derivative with respect to the phase angle is `2 Im(g_n conj(theta_n))`.
//! Amplitude blocks are ordinary real derivatives.

use std::hash::{Hash, Hasher};

use nalgebra::DVector;

use crate::channel_stats::{region_index, SurfaceConfig, SurfaceTraces};
use crate::error::{Error, Result};
use crate::estimation::psi_derivative;
use crate::model::{Engine, Statistics, SystemModel};
use crate::operator::HermitianOp;
use crate::scenario::Region;
use crate::C64;

/// Hash of every coefficient of a surface configuration.
pub fn surface_tag(s: &SurfaceConfig) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for z in s.ris.theta.iter().chain(s.star.theta_t.iter()).chain(s.star.theta_r.iter()) {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    for b in s.star.beta_t.iter().chain(s.star.beta_r.iter()) {
        b.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Sensitivities of the SE to the link coefficients at one configuration.
#[derive(Debug, Clone)]
pub struct GradientWorkspace {
    tag: u64,
    pub traces: SurfaceTraces,
    /// `dSE/da_lk` for `l = double, ris, star`.
    pub sensitivity: Vec<[f64; 3]>,
    pub sum_se: f64,
}

impl GradientWorkspace {
    pub fn build<T: HermitianOp>(model: &SystemModel, bases: &crate::channel_stats::LinkBases<T>, s: &SurfaceConfig) -> Result<Self> {
        let stats = model.statistics_with(bases, s)?;
        Self::from_statistics(model, bases, s, &stats)
    }

    /// Workspace for `s` using the model's configured engine.
    pub fn for_model(model: &SystemModel, s: &SurfaceConfig) -> Result<Self> {
        match (model.engine(), model.spectral_bases()) {
            (Engine::Spectral, Some(b)) => Self::build(model, b, s),
            _ => Self::build(model, model.dense_bases(), s),
        }
    }

    pub fn from_statistics<T: HermitianOp>(
        model: &SystemModel,
        bases: &crate::channel_stats::LinkBases<T>,
        s: &SurfaceConfig,
        stats: &Statistics<T>,
    ) -> Result<Self> {
        let k = model.users();
        let perf = &stats.perf;
        let pre = perf.prelog / std::f64::consts::LN_2;
        let c = model.budget.noise_weight(k);
        let mut sensitivity = vec![[0.0; 3]; k];
        if k == 0 {
            return Ok(Self {
                tag: surface_tag(s),
                traces: stats.traces,
                sensitivity,
                sum_se: perf.sum_se,
            });
        }

        let psi = &stats.est.aggregate;
        let psi_sum = psi.iter().skip(1).fold(psi[0].clone(), |acc, p| acc.add(p));
        let weights: Vec<f64> = (0..k)
            .map(|j| {
                let i = perf.interference[j];
                if i > 0.0 {
                    1.0 / ((1.0 + perf.sinr[j]) * i * i)
                } else {
                    0.0
                }
            })
            .collect();
        // Z = sum_k w_k S_k (R_k + c I)
        let mut z = psi[0].zeros_like();
        let id = psi[0].identity_like();
        for j in 0..k {
            let ws = weights[j] * perf.signal[j];
            z.axpy(ws, &stats.cov.aggregate[j]);
            z.axpy(ws * c, &id);
        }
        let link_bases = [&bases.double, &bases.ris, &bases.star];
        let base_psi: Vec<f64> = link_bases.iter().map(|l| l.trace_mul(&psi_sum)).collect();

        for j in 0..k {
            let tr_psi = psi[j].trace();
            let (s_j, i_j, w_j) = (perf.signal[j], perf.interference[j], weights[j]);
            for l in 0..3 {
                let r = &stats.cov.links[j][l];
                let est = &stats.est.links[j][l];
                let d = psi_derivative(r, est.q.as_ref(), link_bases[l]);
                let d_tr = d.trace();
                let own = psi[j].trace_mul(&d);
                let local = w_j * (i_j * 2.0 * tr_psi * d_tr - s_j * (base_psi[l] - 2.0 * own));
                sensitivity[j][l] = pre * (local - z.trace_mul(&d));
            }
        }
        if sensitivity.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient sensitivities"));
        }
        Ok(Self {
            tag: surface_tag(s),
            traces: stats.traces,
            sensitivity,
            sum_se: perf.sum_se,
        })
    }

    fn check(&self, s: &SurfaceConfig) -> Result<()> {
        if self.tag != surface_tag(s) {
            return Err(Error::StaleWorkspace);
        }
        Ok(())
    }
}

/// Gradient blocks of the STAR-RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGradient {
    pub theta_t: DVector<C64>,
    pub theta_r: DVector<C64>,
    pub beta_t: DVector<f64>,
    pub beta_r: DVector<f64>,
}

/// All gradient blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGradient {
    pub ris: DVector<C64>,
    pub star: StarGradient,
}

/// `dSE/d(angle)` for unit-modulus `theta` given the Wirtinger gradient `g`.
pub fn phase_derivative(g: &DVector<C64>, theta: &DVector<C64>) -> DVector<f64> {
    g.zip_map(theta, |g, t| 2.0 * (g * t.conj()).im)
}

impl SurfaceGradient {
    /// Derivatives with respect to the phase angles: `(ris, t, r)`.
    pub fn phase_derivatives(&self, s: &SurfaceConfig) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        (
            phase_derivative(&self.ris, &s.ris.theta),
            phase_derivative(&self.star.theta_t, &s.star.theta_t),
            phase_derivative(&self.star.theta_r, &s.star.theta_r),
        )
    }
}

/// `dSE/d theta_bar*`.
pub fn grad_ris(model: &SystemModel, ws: &GradientWorkspace, s: &SurfaceConfig) -> Result<DVector<C64>> {
    ws.check(s)?;
    let pl = &model.pathloss;
    let mut double = 0.0;
    let mut single = 0.0;
    for (k, &w) in model.regions.iter().enumerate() {
        double += ws.sensitivity[k][0] * pl.double_hop[k] * ws.traces.star_double[region_index(w)];
        single += ws.sensitivity[k][1] * pl.ris_hop[k];
    }
    let theta = &s.ris.theta;
    let mut g = (&model.kernels.ris_double * theta) * C64::new(double, 0.0);
    g += (&model.kernels.ris_single * theta) * C64::new(single, 0.0);
    Ok(g)
}

/// `dSE/d theta_t*`, `dSE/d theta_r*`, `dSE/d beta_t`, `dSE/d beta_r`.
pub fn grad_star(model: &SystemModel, ws: &GradientWorkspace, s: &SurfaceConfig) -> Result<StarGradient> {
    ws.check(s)?;
    let pl = &model.pathloss;
    let mut double = [0.0; 2];
    let mut single = [0.0; 2];
    for (k, &w) in model.regions.iter().enumerate() {
        let i = region_index(w);
        double[i] += ws.sensitivity[k][0] * pl.double_hop[k] * ws.traces.ris_double;
        single[i] += ws.sensitivity[k][2] * pl.star_hop[k];
    }
    let block = |region: Region| -> (DVector<C64>, DVector<f64>) {
        let i = region_index(region);
        let phi = s.star.coefficients(region);
        let v = (&model.kernels.star_double * &phi) * C64::new(double[i], 0.0)
            + (&model.kernels.star_single * &phi) * C64::new(single[i], 0.0);
        let theta = s.star.theta(region);
        let beta = s.star.beta(region);
        let g_theta = v.zip_map(beta, |v, b| v * b);
        let g_beta = v.zip_map(theta, |v, t| 2.0 * (t.conj() * v).re);
        (g_theta, g_beta)
    };
    let (theta_t, beta_t) = block(Region::Transmission);
    let (theta_r, beta_r) = block(Region::Reflection);
    Ok(StarGradient {
        theta_t,
        theta_r,
        beta_t,
        beta_r,
    })
}

/// Both blocks at `s`, building a fresh workspace.
pub fn gradient(model: &SystemModel, s: &SurfaceConfig) -> Result<(f64, SurfaceGradient)> {
    let ws = GradientWorkspace::for_model(model, s)?;
    let ris = grad_ris(model, &ws, s)?;
    let star = grad_star(model, &ws, s)?;
    Ok((ws.sum_se, SurfaceGradient { ris, star }))
}

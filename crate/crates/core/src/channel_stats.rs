//! Surface configurations and the closed-form covariances of the cascaded channels.
//!
//! Every covariance is a real multiple of a fixed antenna-domain basis matrix:
//!
//! ```text
//! R_0k = bbar_k R_t + bhat_k  s1 s2_w  L_0      (double reflection + direct)
//! R_1k =             bhat_1k s1'        L_1      (BS -> RIS-1 -> UE)
//! R_2k =             bhat_2k s2_w'      L_2      (BS -> STAR -> UE)
//! ```
//!
//! where each `s` is a surface trace `tr(A Phi B Phi^H) = phi^H (A o B^T) phi`.
//! [`TraceKernels`] holds the Hermitian kernels `A o B^T` for the chosen
//! [`TraceReading`]; the consistent reading uses `A = B` = that surface's own
//! correlation and `L_0 = L_1 = L_2 = R_t`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::correlation::{to_complex, CorrelationSet};
use crate::error::{Error, Result};
use crate::operator::{Dense, HermitianOp};
use crate::scenario::{PathLossSet, Region, TraceReading};
use crate::C64;

/// Unit-modulus and energy-conservation tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Phase shifts of the reflect-only RIS (the diagonal of `Phi_1`).
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhases {
    pub theta: DVector<C64>,
}

impl RisPhases {
    pub fn new(theta: DVector<C64>) -> Result<Self> {
        let out = Self { theta };
        let res = out.feasibility_residual();
        if res > FEASIBILITY_TOL {
            return Err(Error::InvalidValue {
                key: "ris.theta".into(),
                reason: format!("unit-modulus residual {res:.3e}"),
            });
        }
        Ok(out)
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            theta: DVector::from_iterator(angles.len(), angles.iter().map(|&a| C64::from_polar(1.0, a))),
        }
    }

    /// All phases zero.
    pub fn aligned(n: usize) -> Self {
        Self {
            theta: DVector::from_element(n, C64::new(1.0, 0.0)),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            theta: DVector::from_fn(n, |_, _| C64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.arg()).collect()
    }

    pub fn feasibility_residual(&self) -> f64 {
        self.theta.iter().map(|t| (t.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Transmission/reflection coefficients of the STAR-RIS under energy splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct StarConfig {
    pub theta_t: DVector<C64>,
    pub theta_r: DVector<C64>,
    pub beta_t: DVector<f64>,
    pub beta_r: DVector<f64>,
}

impl StarConfig {
    pub fn new(
        theta_t: DVector<C64>,
        theta_r: DVector<C64>,
        beta_t: DVector<f64>,
        beta_r: DVector<f64>,
    ) -> Result<Self> {
        let n = theta_t.len();
        if theta_r.len() != n || beta_t.len() != n || beta_r.len() != n {
            return Err(Error::Dimension(format!(
                "STAR vectors have lengths {}, {}, {}, {}",
                n,
                theta_r.len(),
                beta_t.len(),
                beta_r.len()
            )));
        }
        let out = Self {
            theta_t,
            theta_r,
            beta_t,
            beta_r,
        };
        let res = out.feasibility_residual();
        if res > FEASIBILITY_TOL {
            return Err(Error::InvalidValue {
                key: "star".into(),
                reason: format!("feasibility residual {res:.3e}"),
            });
        }
        Ok(out)
    }

    /// Zero phases and an even energy split `beta = sqrt(0.5)`.
    pub fn balanced(n: usize) -> Self {
        Self {
            theta_t: DVector::from_element(n, C64::new(1.0, 0.0)),
            theta_r: DVector::from_element(n, C64::new(1.0, 0.0)),
            beta_t: DVector::from_element(n, FRAC_1_SQRT_2),
            beta_r: DVector::from_element(n, FRAC_1_SQRT_2),
        }
    }

    /// Uniform random phases with an even energy split.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut out = Self::balanced(n);
        out.theta_t = RisPhases::random(n, rng).theta;
        out.theta_r = RisPhases::random(n, rng).theta;
        out
    }

    /// Conventional split surface: the first `n_t` elements only transmit, the rest only reflect.
    pub fn split_mask(n: usize, n_t: usize) -> Self {
        let mut out = Self::balanced(n);
        for i in 0..n {
            let t = i < n_t;
            out.beta_t[i] = if t { 1.0 } else { 0.0 };
            out.beta_r[i] = if t { 0.0 } else { 1.0 };
        }
        out
    }

    pub fn len(&self) -> usize {
        self.theta_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_t.is_empty()
    }

    pub fn theta(&self, region: Region) -> &DVector<C64> {
        match region {
            Region::Transmission => &self.theta_t,
            Region::Reflection => &self.theta_r,
        }
    }

    pub fn beta(&self, region: Region) -> &DVector<f64> {
        match region {
            Region::Transmission => &self.beta_t,
            Region::Reflection => &self.beta_r,
        }
    }

    /// Diagonal of `Phi_{2,w}`: `beta_w o theta_w`.
    pub fn coefficients(&self, region: Region) -> DVector<C64> {
        self.theta(region)
            .zip_map(self.beta(region), |t, b| t * b)
    }

    /// Largest violation of unit modulus, energy conservation or nonnegativity.
    pub fn feasibility_residual(&self) -> f64 {
        let modulus = self
            .theta_t
            .iter()
            .chain(self.theta_r.iter())
            .map(|t| (t.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let energy = self
            .beta_t
            .iter()
            .zip(self.beta_r.iter())
            .map(|(t, r)| (t * t + r * r - 1.0).abs())
            .fold(0.0, f64::max);
        let sign = self
            .beta_t
            .iter()
            .chain(self.beta_r.iter())
            .map(|b| (-b).max(0.0))
            .fold(0.0, f64::max);
        modulus.max(energy).max(sign)
    }
}

/// Both surfaces together.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub ris: RisPhases,
    pub star: StarConfig,
}

impl SurfaceConfig {
    pub fn new(ris: RisPhases, star: StarConfig) -> Self {
        Self { ris, star }
    }

    pub fn balanced(n1: usize, n2: usize) -> Self {
        Self::new(RisPhases::aligned(n1), StarConfig::balanced(n2))
    }

    pub fn random<R: Rng + ?Sized>(n1: usize, n2: usize, rng: &mut R) -> Self {
        Self::new(RisPhases::random(n1, rng), StarConfig::random(n2, rng))
    }

    pub fn feasibility_residual(&self) -> f64 {
        self.ris.feasibility_residual().max(self.star.feasibility_residual())
    }
}

/// `W_ij = A_ij B_ji`, so that `tr(A diag(x) B diag(x)^H) = x^H W x`.
pub fn trace_kernel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::Dimension(format!(
            "trace kernel needs equal square operands, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * b[(j, i)]))
}

/// `Re(x^H W x)`.
pub fn quadratic_form(w: &DMatrix<C64>, x: &DVector<C64>) -> f64 {
    x.dotc(&(w * x)).re
}

/// Surface-trace kernels for one reading of the covariance model.
#[derive(Debug, Clone)]
pub struct TraceKernels {
    pub reading: TraceReading,
    /// RIS-1 factor of the double-reflection link.
    pub ris_double: DMatrix<C64>,
    /// RIS-1 factor of the BS -> RIS-1 -> UE link.
    pub ris_single: DMatrix<C64>,
    /// STAR factor of the double-reflection link.
    pub star_double: DMatrix<C64>,
    /// STAR factor of the BS -> STAR -> UE link.
    pub star_single: DMatrix<C64>,
}

impl TraceKernels {
    pub fn new(corr: &CorrelationSet, reading: TraceReading) -> Result<Self> {
        let r1 = to_complex(&corr.r_1);
        let r2 = to_complex(&corr.r_2);
        match reading {
            TraceReading::Consistent => {
                let k1 = trace_kernel(&r1, &r1)?;
                let k2 = trace_kernel(&r2, &r2)?;
                Ok(Self {
                    reading,
                    ris_double: k1.clone(),
                    ris_single: k1,
                    star_double: k2.clone(),
                    star_single: k2,
                })
            }
            TraceReading::Verbatim => {
                let mixed = trace_kernel(&r1, &r2)?;
                Ok(Self {
                    reading,
                    ris_double: mixed.clone(),
                    ris_single: trace_kernel(&corr.r_t, &r1)?,
                    star_double: mixed,
                    star_single: trace_kernel(&corr.r_t, &r2)?,
                })
            }
        }
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_double.nrows()
    }

    pub fn star_elements(&self) -> usize {
        self.star_double.nrows()
    }

    pub fn traces(&self, s: &SurfaceConfig) -> Result<SurfaceTraces> {
        if s.ris.len() != self.ris_elements() || s.star.len() != self.star_elements() {
            return Err(Error::Dimension(format!(
                "surfaces have {}+{} elements, model expects {}+{}",
                s.ris.len(),
                s.star.len(),
                self.ris_elements(),
                self.star_elements()
            )));
        }
        let phi_t = s.star.coefficients(Region::Transmission);
        let phi_r = s.star.coefficients(Region::Reflection);
        Ok(SurfaceTraces {
            ris_double: quadratic_form(&self.ris_double, &s.ris.theta),
            ris_single: quadratic_form(&self.ris_single, &s.ris.theta),
            star_double: [
                quadratic_form(&self.star_double, &phi_t),
                quadratic_form(&self.star_double, &phi_r),
            ],
            star_single: [
                quadratic_form(&self.star_single, &phi_t),
                quadratic_form(&self.star_single, &phi_r),
            ],
        })
    }
}

pub(crate) fn region_index(region: Region) -> usize {
    match region {
        Region::Transmission => 0,
        Region::Reflection => 1,
    }
}

/// Scalar surface traces; the STAR entries are indexed `[t, r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceTraces {
    pub ris_double: f64,
    pub ris_single: f64,
    pub star_double: [f64; 2],
    pub star_single: [f64; 2],
}

/// Coefficients of one UE's covariances on the four basis matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub direct: f64,
    pub double: f64,
    pub ris: f64,
    pub star: f64,
}

pub fn link_gains(pl: &PathLossSet, traces: &SurfaceTraces, k: usize, region: Region) -> LinkGains {
    let w = region_index(region);
    LinkGains {
        direct: pl.direct[k],
        double: pl.double_hop[k] * traces.ris_double * traces.star_double[w],
        ris: pl.ris_hop[k] * traces.ris_single,
        star: pl.star_hop[k] * traces.star_single[w],
    }
}

/// Antenna-domain basis matrices: `R_t` for the direct link and `L_0, L_1, L_2`.
#[derive(Debug, Clone)]
pub struct LinkBases<T> {
    pub direct: T,
    pub double: T,
    pub ris: T,
    pub star: T,
}

impl LinkBases<Dense> {
    pub fn dense(corr: &CorrelationSet, reading: TraceReading) -> Result<Self> {
        let rt = Dense(corr.r_t.clone());
        match reading {
            TraceReading::Consistent => Ok(Self {
                direct: rt.clone(),
                double: rt.clone(),
                ris: rt.clone(),
                star: rt,
            }),
            TraceReading::Verbatim => {
                let m = corr.bs_antennas();
                if corr.ris_elements() != m || corr.star_elements() != m {
                    return Err(Error::Dimension(format!(
                        "verbatim reading needs M = N1 = N2, got {m}, {}, {}",
                        corr.ris_elements(),
                        corr.star_elements()
                    )));
                }
                Ok(Self {
                    direct: rt.clone(),
                    double: rt,
                    ris: Dense(to_complex(&corr.r_1)),
                    star: Dense(to_complex(&corr.r_2)),
                })
            }
        }
    }
}

/// Per-UE covariances of the three links and their sum.
#[derive(Debug, Clone)]
pub struct ChannelCovariances<T> {
    /// `[R_0k, R_1k, R_2k]` per UE.
    pub links: Vec<[T; 3]>,
    /// `R_bar_k`
    pub aggregate: Vec<T>,
}

impl<T: HermitianOp> ChannelCovariances<T> {
    pub fn users(&self) -> usize {
        self.aggregate.len()
    }
}

pub fn link_covariances<T: HermitianOp>(bases: &LinkBases<T>, g: &LinkGains) -> [T; 3] {
    let mut r0 = bases.direct.scaled(g.direct);
    r0.axpy(g.double, &bases.double);
    [r0, bases.ris.scaled(g.ris), bases.star.scaled(g.star)]
}

/// `R_0 + R_1 + R_2`.
pub fn aggregate_cov<T: HermitianOp>(parts: &[T; 3]) -> T {
    let mut out = parts[0].clone();
    out.axpy(1.0, &parts[1]);
    out.axpy(1.0, &parts[2]);
    out
}

pub fn channel_covariances<T: HermitianOp>(bases: &LinkBases<T>, gains: &[LinkGains]) -> ChannelCovariances<T> {
    let links: Vec<[T; 3]> = gains.iter().map(|g| link_covariances(bases, g)).collect();
    let aggregate = links.iter().map(aggregate_cov).collect();
    ChannelCovariances { links, aggregate }
}

fn dense_gains(
    corr: &CorrelationSet,
    pl: &PathLossSet,
    surfaces: &SurfaceConfig,
    k: usize,
    region: Region,
    reading: TraceReading,
) -> Result<(LinkBases<Dense>, LinkGains)> {
    if k >= pl.users() {
        return Err(Error::Dimension(format!("UE index {k} out of range for {} users", pl.users())));
    }
    let kernels = TraceKernels::new(corr, reading)?;
    let traces = kernels.traces(surfaces)?;
    let bases = LinkBases::dense(corr, reading)?;
    Ok((bases, link_gains(pl, &traces, k, region)))
}

/// `R_0k`: direct plus double-reflection covariance of UE `k` in `region`.
pub fn double_reflection_cov(
    corr: &CorrelationSet,
    pl: &PathLossSet,
    surfaces: &SurfaceConfig,
    k: usize,
    region: Region,
    reading: TraceReading,
) -> Result<DMatrix<C64>> {
    let (bases, g) = dense_gains(corr, pl, surfaces, k, region, reading)?;
    Ok(link_covariances(&bases, &g)[0].0.clone())
}

/// `(R_1k, R_2k)`: the two single-reflection covariances of UE `k`.
pub fn single_reflection_covs(
    corr: &CorrelationSet,
    pl: &PathLossSet,
    surfaces: &SurfaceConfig,
    k: usize,
    region: Region,
    reading: TraceReading,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let (bases, g) = dense_gains(corr, pl, surfaces, k, region, reading)?;
    let [_, r1, r2] = link_covariances(&bases, &g);
    Ok((r1.0, r2.0))
}

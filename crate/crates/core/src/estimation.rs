//! LMMSE estimation statistics of the cascaded channels.
//!
//! The estimator sees each link through `r = h + n` with `n ~ CN(0, eps I)` and
//! `eps = sigma^2 / (tau P)`. Only `eps` enters the statistics, so the module is
//! parametrized by it directly.

use crate::channel_stats::ChannelCovariances;
use crate::error::{Error, Result};
use crate::operator::HermitianOp;

/// Quality of the channel knowledge at the BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsiModel {
    /// LMMSE estimates with effective noise variance `eps = sigma^2 / (tau P)`.
    Imperfect { effective_noise: f64 },
    /// The BS knows every channel exactly.
    Perfect,
}

impl CsiModel {
    pub fn from_training(sigma2: f64, tau: usize, pilot_power: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || tau == 0 || !(pilot_power > 0.0) {
            return Err(Error::InvalidValue {
                key: "training".into(),
                reason: format!("need sigma2, tau, P > 0 (got {sigma2}, {tau}, {pilot_power})"),
            });
        }
        Ok(CsiModel::Imperfect {
            effective_noise: sigma2 / (tau as f64 * pilot_power),
        })
    }
}

/// `Q = (R + eps I)^-1`, `Psi = R Q R`, `E = R - Psi` for one link.
#[derive(Debug, Clone)]
pub struct LinkEstimate<T> {
    /// Absent under perfect CSI.
    pub q: Option<T>,
    pub psi: T,
    pub err: T,
}

pub fn lmmse_statistics<T: HermitianOp>(r: &T, sigma2: f64, tau: usize, pilot_power: f64) -> Result<LinkEstimate<T>> {
    link_estimate(r, CsiModel::from_training(sigma2, tau, pilot_power)?)
}

pub fn link_estimate<T: HermitianOp>(r: &T, csi: CsiModel) -> Result<LinkEstimate<T>> {
    match csi {
        CsiModel::Perfect => Ok(LinkEstimate {
            q: None,
            psi: r.clone(),
            err: r.zeros_like(),
        }),
        CsiModel::Imperfect { effective_noise } => {
            let q = r.shifted_inverse(effective_noise)?;
            let psi = r.filtered(effective_noise)?;
            let err = r.sub(&psi);
            Ok(LinkEstimate { q: Some(q), psi, err })
        }
    }
}

/// `Psi_bar_k = Psi_0k + Psi_1k + Psi_2k`.
pub fn aggregate_estimate_cov<T: HermitianOp>(parts: &[LinkEstimate<T>; 3]) -> T {
    let mut out = parts[0].psi.clone();
    out.axpy(1.0, &parts[1].psi);
    out.axpy(1.0, &parts[2].psi);
    out
}

#[derive(Debug, Clone)]
pub struct EstimationStatistics<T> {
    pub csi: CsiModel,
    pub links: Vec<[LinkEstimate<T>; 3]>,
    /// `Psi_bar_k`
    pub aggregate: Vec<T>,
}

pub fn estimation_statistics<T: HermitianOp>(cov: &ChannelCovariances<T>, csi: CsiModel) -> Result<EstimationStatistics<T>> {
    let mut links = Vec::with_capacity(cov.users());
    for parts in &cov.links {
        links.push([
            link_estimate(&parts[0], csi)?,
            link_estimate(&parts[1], csi)?,
            link_estimate(&parts[2], csi)?,
        ]);
    }
    let aggregate = links.iter().map(aggregate_estimate_cov).collect();
    Ok(EstimationStatistics { csi, links, aggregate })
}

/// `d Psi / d a` when `R = D + a L`: `L Q R + R Q L - R Q L Q R`, or `L` under perfect CSI.
pub fn psi_derivative<T: HermitianOp>(r: &T, q: Option<&T>, l: &T) -> T {
    match q {
        None => l.clone(),
        Some(q) => {
            let lqr = l.mul(q).mul(r);
            let rql = r.mul(q).mul(l);
            let rqlqr = r.mul(q).mul(&lqr);
            let mut out = lqr;
            out.axpy(1.0, &rql);
            out.axpy(-1.0, &rqlqr);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Dense;
    use crate::C64;
    use nalgebra::DMatrix;

    fn dense(rows: usize, data: &[f64]) -> Dense {
        Dense(DMatrix::from_row_slice(rows, rows, data).map(|x| C64::new(x, 0.0)))
    }

    #[test]
    fn scalar_case() {
        let (r, sigma2, tau, p) = (3.0, 0.5, 4, 0.25);
        let est = lmmse_statistics(&dense(1, &[r]), sigma2, tau, p).unwrap();
        let eps = sigma2 / (tau as f64 * p);
        assert!((est.psi.0[(0, 0)].re - r * r / (r + eps)).abs() < 1e-15);
        assert!((est.q.unwrap().0[(0, 0)].re - 1.0 / (r + eps)).abs() < 1e-15);
    }

    #[test]
    fn identity_with_unit_noise() {
        let r = dense(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let est = link_estimate(&r, CsiModel::Imperfect { effective_noise: 1.0 }).unwrap();
        let half = r.scaled(0.5);
        assert!((est.psi.0 - &half.0).norm() < 1e-15);
        assert!((est.err.0 - &half.0).norm() < 1e-15);
    }

    #[test]
    fn vanishing_noise_recovers_channel() {
        let r = dense(2, &[2.0, 0.7, 0.7, 1.0]);
        let est = link_estimate(&r, CsiModel::Imperfect { effective_noise: 1e-12 }).unwrap();
        assert!((est.psi.0.clone() - &r.0).norm() / r.0.norm() < 1e-10);
        assert!(est.err.0.norm() / r.0.norm() < 1e-10);
        let perfect = link_estimate(&r, CsiModel::Perfect).unwrap();
        assert_eq!(perfect.psi, r);
        assert_eq!(perfect.err.0.norm(), 0.0);
    }

    #[test]
    fn split_is_exact_and_ordered() {
        let r = dense(3, &[2.0, 0.7, 0.1, 0.7, 1.0, 0.3, 0.1, 0.3, 0.5]);
        let est = link_estimate(&r, CsiModel::Imperfect { effective_noise: 0.3 }).unwrap();
        assert_eq!(est.psi.add(&est.err), r.clone());
        let tp = est.psi.trace();
        assert!(tp >= 0.0 && tp <= r.trace());
        let min_eig = |d: &Dense| d.0.clone().symmetric_eigen().eigenvalues.min();
        assert!(min_eig(&est.psi) >= -1e-14);
        assert!(min_eig(&est.err) >= -1e-14);
    }

    #[test]
    fn non_psd_rejected() {
        let r = dense(2, &[1.0, 0.0, 0.0, -2.0]);
        assert!(link_estimate(&r, CsiModel::Imperfect { effective_noise: 0.1 }).is_err());
    }

    #[test]
    fn aggregate_sums_links() {
        let r = dense(2, &[1.0, 0.2, 0.2, 1.0]);
        let est = link_estimate(&r, CsiModel::Imperfect { effective_noise: 0.5 }).unwrap();
        let three = aggregate_estimate_cov(&[est.clone(), est.clone(), est.clone()]);
        assert!((three.0 - est.psi.0.clone() * C64::new(3.0, 0.0)).norm() < 1e-15);
        let zero = link_estimate(&r.zeros_like(), CsiModel::Imperfect { effective_noise: 0.5 }).unwrap();
        let two = aggregate_estimate_cov(&[est.clone(), zero, est.clone()]);
        assert!((two.0 - est.psi.0 * C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn psi_derivative_matches_difference() {
        let d = dense(2, &[1.0, 0.3, 0.3, 0.8]);
        let l = dense(2, &[0.5, 0.1, 0.1, 0.9]);
        let eps = 0.4;
        let at = |a: f64| {
            let mut r = d.clone();
            r.axpy(a, &l);
            link_estimate(&r, CsiModel::Imperfect { effective_noise: eps }).unwrap()
        };
        let a = 0.7;
        let h = 1e-6;
        let fd = at(a + h).psi.sub(&at(a - h).psi).scaled(0.5 / h);
        let mut r = d.clone();
        r.axpy(a, &l);
        let est = at(a);
        let an = psi_derivative(&r, est.q.as_ref(), &l);
        assert!((fd.0 - an.0).norm() < 1e-8);
    }
}

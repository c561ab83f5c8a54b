//! Spatial correlation matrices of the BS array and of both surfaces.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scenario::{BsCorrelationModel, GridLayout, ScenarioConfig, SurfaceCorrelationModel, SurfaceGain};
use crate::C64;

/// Eigenvalues below this fraction of the largest one are clamped to zero.
pub const CLAMP_RELATIVE: f64 = 1e-10;
/// Relative asymmetry accepted before a matrix is declared non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Normalized sinc, `sin(pi x)/(pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Position of element `e` (zero-based) on an `n_h x n_v` grid in the y-z plane.
pub fn element_position(e: usize, n_h: usize, n_v: usize, d_h: f64, d_v: f64, layout: GridLayout) -> [f64; 3] {
    let row = match layout {
        GridLayout::Verbatim => e / n_v,
        GridLayout::RowMajor => e / n_h,
    };
    [0.0, (e % n_h) as f64 * d_h, row as f64 * d_v]
}

/// Sinc-kernel correlation of a planar surface, `r_ij = d_H d_V sinc(2 |u_i - u_j| / lambda)`,
/// with the [`GridLayout::Verbatim`] element positions (vertical index divided by `N_V`).
pub fn build_surface_correlation(n_h: usize, n_v: usize, d_h: f64, d_v: f64, wavelength: f64) -> DMatrix<f64> {
    build_surface_correlation_with(n_h, n_v, d_h, d_v, wavelength, GridLayout::Verbatim)
}

pub fn build_surface_correlation_with(
    n_h: usize,
    n_v: usize,
    d_h: f64,
    d_v: f64,
    wavelength: f64,
    layout: GridLayout,
) -> DMatrix<f64> {
    let n = n_h * n_v;
    let pos: Vec<[f64; 3]> = (0..n)
        .map(|e| element_position(e, n_h, n_v, d_h, d_v, layout))
        .collect();
    let area = d_h * d_v;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            area
        } else {
            area * sinc(2.0 * crate::scenario::distance(&pos[i], &pos[j]) / wavelength)
        }
    })
}

/// BS array correlation. The exponential model gives `R[i,j] = r^(j-i)` above the
/// diagonal and its conjugate below; a real `r` reduces to `r^|i-j|`.
pub fn build_bs_correlation(m: usize, model: BsCorrelationModel, param: C64) -> Result<DMatrix<C64>> {
    match model {
        BsCorrelationModel::Identity => Ok(DMatrix::identity(m, m)),
        BsCorrelationModel::Exponential => {
            if !(param.norm() < 1.0) {
                return Err(Error::InvalidValue {
                    key: "correlation.bs_coefficient".into(),
                    reason: format!("exponential model needs |r| < 1, got {}", param.norm()),
                });
            }
            Ok(DMatrix::from_fn(m, m, |i, j| {
                if j >= i {
                    param.powu((j - i) as u32)
                } else {
                    param.powu((i - j) as u32).conj()
                }
            }))
        }
    }
}

/// Same as [`build_bs_correlation`] but selected by name (`"exponential"` or `"identity"`).
pub fn build_bs_correlation_named(m: usize, model: &str, param: f64) -> Result<DMatrix<C64>> {
    let model = match model {
        "exponential" => BsCorrelationModel::Exponential,
        "identity" => BsCorrelationModel::Identity,
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    build_bs_correlation(m, model, C64::new(param, 0.0))
}

pub fn relative_asymmetry(r: &DMatrix<C64>) -> f64 {
    let norm = r.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (r - r.adjoint()).norm() / norm
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues clamped to be nonnegative.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
    /// Smallest eigenvalue before clamping.
    pub min_raw: f64,
}

impl HermitianEigen {
    pub fn new(r: &DMatrix<C64>) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", r.nrows(), r.ncols())));
        }
        let asym = relative_asymmetry(r);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        if r.nrows() == 0 {
            return Ok(Self {
                values: DVector::zeros(0),
                vectors: DMatrix::zeros(0, 0),
                min_raw: 0.0,
            });
        }
        let sym = (r + r.adjoint()).scale(0.5);
        let eig = sym.symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min_raw = eig.eigenvalues.min();
        let floor = CLAMP_RELATIVE * max.max(0.0);
        let values = eig.eigenvalues.map(|v| if v < floor { 0.0 } else { v });
        Ok(Self {
            values,
            vectors: eig.eigenvectors,
            min_raw,
        })
    }

    /// `U f(diag) U^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        &scaled * self.vectors.adjoint()
    }
}

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues are clamped.
pub fn psd_sqrt(r: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    Ok(HermitianEigen::new(r)?.reconstruct_with(f64::sqrt))
}

pub fn to_complex(r: &DMatrix<f64>) -> DMatrix<C64> {
    r.map(|x| C64::new(x, 0.0))
}

/// The three correlation matrices of a scenario and their square roots.
#[derive(Debug, Clone)]
pub struct CorrelationSet {
    pub r_t: DMatrix<C64>,
    pub r_1: DMatrix<f64>,
    pub r_2: DMatrix<f64>,
    pub sqrt_t: DMatrix<C64>,
    pub sqrt_1: DMatrix<C64>,
    pub sqrt_2: DMatrix<C64>,
    /// Eigenbasis of `R_t`, shared by every antenna-domain covariance.
    pub eig_t: HermitianEigen,
}

impl CorrelationSet {
    pub fn new(r_t: DMatrix<C64>, r_1: DMatrix<f64>, r_2: DMatrix<f64>) -> Result<Self> {
        let eig_t = HermitianEigen::new(&r_t)?;
        let sqrt_t = eig_t.reconstruct_with(f64::sqrt);
        let sqrt_1 = psd_sqrt(&to_complex(&r_1))?;
        let sqrt_2 = psd_sqrt(&to_complex(&r_2))?;
        Ok(Self {
            r_t,
            r_1,
            r_2,
            sqrt_t,
            sqrt_1,
            sqrt_2,
            eig_t,
        })
    }

    pub fn identity(m: usize, n1: usize, n2: usize) -> Self {
        Self::new(DMatrix::identity(m, m), DMatrix::identity(n1, n1), DMatrix::identity(n2, n2))
            .expect("identity is PSD")
    }

    /// Builds all three matrices for the given surface grids.
    pub fn for_grids(
        cfg: &ScenarioConfig,
        ris: crate::scenario::SurfaceGrid,
        star: crate::scenario::SurfaceGrid,
    ) -> Result<Self> {
        let c = &cfg.correlation;
        let r_t = build_bs_correlation(cfg.bs_antennas(), c.bs_model, C64::new(c.bs_coefficient, 0.0))?;
        let d_h = cfg.element_width();
        let d_v = cfg.element_height();
        let surface = |g: crate::scenario::SurfaceGrid| -> DMatrix<f64> {
            let n = g.elements();
            if n == 0 {
                return DMatrix::zeros(0, 0);
            }
            let r = match c.surface_model {
                SurfaceCorrelationModel::Identity => DMatrix::identity(n, n),
                SurfaceCorrelationModel::Sinc => build_surface_correlation_with(
                    g.horizontal,
                    g.vertical,
                    d_h,
                    d_v,
                    cfg.geometry.wavelength,
                    c.layout,
                ),
            };
            match (c.surface_model, c.surface_gain) {
                (SurfaceCorrelationModel::Sinc, SurfaceGain::Unit) => r / (d_h * d_v),
                _ => r,
            }
        };
        Self::new(r_t, surface(ris), surface(star))
    }

    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        Self::for_grids(cfg, cfg.ris, cfg.star)
    }

    pub fn bs_antennas(&self) -> usize {
        self.r_t.nrows()
    }

    pub fn ris_elements(&self) -> usize {
        self.r_1.nrows()
    }

    pub fn star_elements(&self) -> usize {
        self.r_2.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn min_eig(r: &DMatrix<f64>) -> f64 {
        r.clone().symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn diagonal_is_element_area() {
        let (dh, dv) = (0.025, 0.03);
        let r = build_surface_correlation(4, 4, dh, dv, 0.1);
        for i in 0..16 {
            assert_eq!(r[(i, i)], dh * dv);
        }
        assert!((r.trace() - 16.0 * dh * dv).abs() < 1e-15);
    }

    #[test]
    fn adjacent_quarter_wavelength() {
        let lambda = 0.1;
        let d = lambda / 4.0;
        let r = build_surface_correlation(4, 4, d, d, lambda);
        let expected = d * d * 2.0 / PI;
        assert!((r[(0, 1)] - expected).abs() < 1e-15 * expected.max(1.0));
    }

    #[test]
    fn single_element() {
        let r = build_surface_correlation(1, 1, 0.02, 0.03, 0.1);
        assert_eq!(r.shape(), (1, 1));
        assert_eq!(r[(0, 0)], 0.02 * 0.03);
    }

    #[test]
    fn verbatim_and_row_major_differ_on_rectangular_grids() {
        let a = build_surface_correlation_with(4, 2, 0.025, 0.025, 0.1, GridLayout::Verbatim);
        let b = build_surface_correlation_with(4, 2, 0.025, 0.025, 0.1, GridLayout::RowMajor);
        assert!((a - b).norm() > 1e-6);
        let a = build_surface_correlation_with(3, 3, 0.025, 0.025, 0.1, GridLayout::Verbatim);
        let b = build_surface_correlation_with(3, 3, 0.025, 0.025, 0.1, GridLayout::RowMajor);
        assert_eq!(a, b);
    }

    #[test]
    fn wide_spacing_decorrelates() {
        let lambda = 0.1;
        let d = 500.0 * lambda;
        let r = build_surface_correlation(3, 3, d, d, lambda);
        let target = DMatrix::<f64>::identity(9, 9) * (d * d);
        assert!((r - &target).norm() / target.norm() < 1e-3);
    }

    #[test]
    fn bs_models() {
        let id = build_bs_correlation(3, BsCorrelationModel::Identity, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(id, DMatrix::identity(3, 3));
        let zero = build_bs_correlation(4, BsCorrelationModel::Exponential, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(zero, DMatrix::identity(4, 4));
        let half = build_bs_correlation(2, BsCorrelationModel::Exponential, C64::new(0.5, 0.0)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]).map(|x| C64::new(x, 0.0));
        assert_eq!(half, expected);
        assert!(build_bs_correlation(2, BsCorrelationModel::Exponential, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn complex_exponential_is_hermitian() {
        let r = build_bs_correlation(5, BsCorrelationModel::Exponential, C64::from_polar(0.7, 0.4)).unwrap();
        assert_eq!(relative_asymmetry(&r), 0.0);
        assert!((r[(0, 2)] - C64::from_polar(0.49, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn unknown_model_name() {
        assert!(matches!(
            build_bs_correlation_named(3, "toeplitz", 0.2),
            Err(Error::UnknownModel(_))
        ));
        assert_eq!(build_bs_correlation_named(3, "identity", 0.2).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let i = DMatrix::<C64>::identity(4, 4);
        assert!((psd_sqrt(&i).unwrap() - &i).norm() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(4.0, 0.0), C64::new(9.0, 0.0)]));
        let s = psd_sqrt(&d).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-14);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-14);
        assert!(s[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn sqrt_rejects_non_hermitian() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]).map(|x| C64::new(x, 0.0));
        assert!(matches!(psd_sqrt(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sqrt_clamps_tiny_negative_eigenvalues() {
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let mut r = &v * v.adjoint();
        r[(0, 0)] -= C64::new(1e-14, 0.0);
        let s = psd_sqrt(&r).unwrap();
        assert!(s.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
        assert!((&s * s.adjoint() - &r).norm() / r.norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn surface_kernel_is_psd(n_h in 1usize..6, n_v in 1usize..6, frac in 0.05f64..1.5, row_major in any::<bool>()) {
            let lambda = 0.1;
            let layout = if row_major { GridLayout::RowMajor } else { GridLayout::Verbatim };
            let d = frac * lambda;
            let r = build_surface_correlation_with(n_h, n_v, d, d, lambda, layout);
            prop_assert!((&r - r.transpose()).norm() == 0.0);
            prop_assert!(min_eig(&r) >= -1e-8 * r.norm());
        }

        #[test]
        fn random_psd_sqrt_reconstructs(seed in 0u64..1000, n in 1usize..8) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(n, n + 1, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let r = &a * a.adjoint();
            let s = psd_sqrt(&r).unwrap();
            prop_assert!((&s * s.adjoint() - &r).norm() / r.norm() < 1e-10);
        }
    }
}

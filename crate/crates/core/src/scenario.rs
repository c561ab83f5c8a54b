//! Experiment configuration: dimensions, geometry, powers and protocol constants.
//!
//! A scenario is one TOML document. Every length is in meters, every power in mW
//! and every loss suffixed `_db` is in dB. The document carries a schema version
//! so that persisted runs can be replayed exactly.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Side of the STAR-RIS a user sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Transmission region (far side of the STAR-RIS).
    #[serde(rename = "t")]
    Transmission,
    /// Reflection region (same side as the incident wave).
    #[serde(rename = "r")]
    Reflection,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Transmission => write!(f, "t"),
            Region::Reflection => write!(f, "r"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    #[default]
    Imperfect,
    /// Estimates equal the channels; training still costs `training_length` symbols.
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsCorrelationModel {
    #[default]
    Exponential,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceCorrelationModel {
    #[default]
    Sinc,
    Identity,
}

/// Scale of the surface correlation matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceGain {
    /// Diagonal equals the element area `d_H * d_V`.
    #[default]
    Area,
    /// Diagonal equals one; the element area only enters through the path loss.
    Unit,
}

/// Element-position layout used in the sinc kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridLayout {
    /// Vertical index `floor((e-1)/N_V)`; skews non-square grids.
    #[default]
    Verbatim,
    /// Vertical index `floor((e-1)/N_H)`, i.e. a plain row-major grid.
    RowMajor,
}

/// How the surface traces of the cascaded covariances are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceReading {
    /// Each surface trace uses that surface's own correlation on both sides and
    /// every cascaded covariance is lifted to the antenna domain through `R_t`.
    #[default]
    Consistent,
    /// Mixed kernels `R_1 o R_2^T` and `R_t o R_q^T` with `R_q` as the lift;
    /// only defined when `M = N1 = N2`.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub bs_antennas: usize,
    pub users: usize,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceGrid {
    pub horizontal: usize,
    pub vertical: usize,
}

impl SurfaceGrid {
    pub fn elements(&self) -> usize {
        self.horizontal * self.vertical
    }

    /// Most square `H x V` factorization of `n` with `H >= V`.
    pub fn near_square(n: usize) -> Self {
        let mut v = (n as f64).sqrt().floor() as usize;
        while v > 1 && !n.is_multiple_of(v) {
            v -= 1;
        }
        let v = v.max(1);
        Self {
            horizontal: n / v,
            vertical: v,
        }
    }
}

fn default_bandwidth() -> f64 {
    200e3
}

fn default_noise_psd() -> f64 {
    -174.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub coherence_block: usize,
    pub training_length: usize,
    pub total_power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_power_mw: Option<f64>,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_noise_psd")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance_mw: Option<f64>,
    #[serde(default)]
    pub csi: CsiMode,
}

fn default_spread() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub wavelength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_height: Option<f64>,
    pub bs: [f64; 3],
    pub ris: [f64; 3],
    pub star: [f64; 3],
    #[serde(default = "default_spread")]
    pub ue_spread: f64,
    #[serde(default)]
    pub ue_height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue_positions: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossExponents {
    pub direct: f64,
    pub bs_ris: f64,
    pub ris_star: f64,
    pub bs_star: f64,
    pub ris_ue: f64,
    pub star_ue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossSection {
    pub element_area: f64,
    pub exponents: PathLossExponents,
    #[serde(default)]
    pub penetration_loss_db: f64,
}

fn default_bs_coefficient() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default)]
    pub bs_model: BsCorrelationModel,
    #[serde(default = "default_bs_coefficient")]
    pub bs_coefficient: f64,
    #[serde(default)]
    pub surface_model: SurfaceCorrelationModel,
    #[serde(default)]
    pub surface_gain: SurfaceGain,
    #[serde(default)]
    pub layout: GridLayout,
    #[serde(default)]
    pub trace_reading: TraceReading,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        Self {
            bs_model: BsCorrelationModel::default(),
            bs_coefficient: default_bs_coefficient(),
            surface_model: SurfaceCorrelationModel::default(),
            surface_gain: SurfaceGain::default(),
            layout: GridLayout::default(),
            trace_reading: TraceReading::default(),
        }
    }
}

/// The full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub system: SystemSection,
    pub ris: SurfaceGrid,
    pub star: SurfaceGrid,
    pub protocol: ProtocolSection,
    pub geometry: GeometrySection,
    pub pathloss: PathLossSection,
    #[serde(default)]
    pub correlation: CorrelationSection,
}

/// Per-link large-scale gains.
///
/// `bs_ris`, `ris_star` and `bs_star` are the infrastructure links; the per-UE
/// vectors hold the RIS-1 to UE, STAR-RIS to UE and direct gains. The three
/// cascaded products are filled in by [`PathLossSet::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossSet {
    pub bs_ris: f64,
    pub ris_star: f64,
    pub bs_star: f64,
    pub ris_ue: Vec<f64>,
    pub star_ue: Vec<f64>,
    pub direct: Vec<f64>,
    /// `bs_ris * star_ue[k] * ris_star`
    pub double_hop: Vec<f64>,
    /// `ris_ue[k] * bs_ris`
    pub ris_hop: Vec<f64>,
    /// `star_ue[k] * bs_star`
    pub star_hop: Vec<f64>,
}

impl PathLossSet {
    pub fn new(
        bs_ris: f64,
        ris_star: f64,
        bs_star: f64,
        ris_ue: Vec<f64>,
        star_ue: Vec<f64>,
        direct: Vec<f64>,
    ) -> Result<Self> {
        let k = direct.len();
        if ris_ue.len() != k || star_ue.len() != k {
            return Err(Error::Dimension(format!(
                "per-UE gain vectors have lengths {}, {}, {}",
                ris_ue.len(),
                star_ue.len(),
                k
            )));
        }
        for (key, v) in [("bs_ris", bs_ris), ("ris_star", ris_star), ("bs_star", bs_star)]
            .into_iter()
            .chain(ris_ue.iter().map(|&v| ("ris_ue", v)))
            .chain(star_ue.iter().map(|&v| ("star_ue", v)))
            .chain(direct.iter().map(|&v| ("direct", v)))
        {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NonPositive {
                    key: key.into(),
                    value: v,
                });
            }
        }
        let double_hop = star_ue.iter().map(|&b2| bs_ris * b2 * ris_star).collect();
        let ris_hop = ris_ue.iter().map(|&b1| b1 * bs_ris).collect();
        let star_hop = star_ue.iter().map(|&b2| b2 * bs_star).collect();
        Ok(Self {
            bs_ris,
            ris_star,
            bs_star,
            ris_ue,
            star_ue,
            direct,
            double_hop,
            ris_hop,
            star_hop,
        })
    }

    pub fn users(&self) -> usize {
        self.direct.len()
    }

    /// Same set with every direct link removed.
    pub fn without_direct(&self) -> Self {
        let mut out = self.clone();
        out.direct.iter_mut().for_each(|b| *b = 0.0);
        out
    }

    /// Same set with the RIS-1 links removed (single-surface layouts).
    pub fn without_ris(&self) -> Self {
        let mut out = self.clone();
        out.bs_ris = 0.0;
        out.ris_star = 0.0;
        out.ris_ue.iter_mut().for_each(|b| *b = 0.0);
        out.double_hop.iter_mut().for_each(|b| *b = 0.0);
        out.ris_hop.iter_mut().for_each(|b| *b = 0.0);
        out
    }
}

/// `area * d^(-exponent)`.
pub fn distance_gain(area: f64, distance: f64, exponent: f64) -> f64 {
    area * distance.powf(-exponent)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Parses and validates a scenario document.
pub fn load_scenario(source: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    load_scenario(&text)
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            key: key.into(),
            value,
        })
    }
}

fn positive_count(key: &str, value: usize) -> Result<()> {
    if value > 0 {
        Ok(())
    } else {
        Err(Error::NonPositive {
            key: key.into(),
            value: 0.0,
        })
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        positive_count("system.bs_antennas", self.system.bs_antennas)?;
        positive_count("system.users", self.system.users)?;
        if self.system.regions.len() != self.system.users {
            return Err(Error::RegionCount {
                found: self.system.regions.len(),
                expected: self.system.users,
            });
        }
        positive_count("ris.horizontal", self.ris.horizontal)?;
        positive_count("ris.vertical", self.ris.vertical)?;
        positive_count("star.horizontal", self.star.horizontal)?;
        positive_count("star.vertical", self.star.vertical)?;

        let p = &self.protocol;
        positive_count("protocol.coherence_block", p.coherence_block)?;
        if p.training_length >= p.coherence_block {
            return Err(Error::TrainingTooLong {
                tau: p.training_length,
                tau_c: p.coherence_block,
            });
        }
        if p.csi == CsiMode::Imperfect {
            positive_count("protocol.training_length", p.training_length)?;
            if p.training_length < self.system.users {
                return Err(Error::TooFewPilots {
                    tau: p.training_length,
                    users: self.system.users,
                });
            }
        }
        positive("protocol.total_power_mw", p.total_power_mw)?;
        if let Some(pp) = p.pilot_power_mw {
            positive("protocol.pilot_power_mw", pp)?;
        }
        positive("protocol.bandwidth_hz", p.bandwidth_hz)?;
        if let Some(n) = p.noise_variance_mw {
            positive("protocol.noise_variance_mw", n)?;
        }

        let g = &self.geometry;
        positive("geometry.wavelength", g.wavelength)?;
        if let Some(w) = g.element_width {
            positive("geometry.element_width", w)?;
        }
        if let Some(h) = g.element_height {
            positive("geometry.element_height", h)?;
        }
        positive("geometry.ue_spread", g.ue_spread)?;
        if let Some(ps) = &g.ue_positions {
            if ps.len() != self.system.users {
                return Err(Error::InvalidValue {
                    key: "geometry.ue_positions".into(),
                    reason: format!("{} positions for {} users", ps.len(), self.system.users),
                });
            }
        }

        let pl = &self.pathloss;
        positive("pathloss.element_area", pl.element_area)?;
        let e = &pl.exponents;
        for (key, v) in [
            ("pathloss.exponents.direct", e.direct),
            ("pathloss.exponents.bs_ris", e.bs_ris),
            ("pathloss.exponents.ris_star", e.ris_star),
            ("pathloss.exponents.bs_star", e.bs_star),
            ("pathloss.exponents.ris_ue", e.ris_ue),
            ("pathloss.exponents.star_ue", e.star_ue),
        ] {
            positive(key, v)?;
        }
        if !(pl.penetration_loss_db >= 0.0) {
            return Err(Error::InvalidValue {
                key: "pathloss.penetration_loss_db".into(),
                reason: "must be >= 0".into(),
            });
        }

        let c = &self.correlation;
        if c.bs_model == BsCorrelationModel::Exponential && !(c.bs_coefficient.abs() < 1.0) {
            return Err(Error::InvalidValue {
                key: "correlation.bs_coefficient".into(),
                reason: "exponential model needs |coefficient| < 1".into(),
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn bs_antennas(&self) -> usize {
        self.system.bs_antennas
    }

    pub fn users(&self) -> usize {
        self.system.users
    }

    pub fn ris_elements(&self) -> usize {
        self.ris.elements()
    }

    pub fn star_elements(&self) -> usize {
        self.star.elements()
    }

    /// `(K_t, K_r)`
    pub fn region_counts(&self) -> (usize, usize) {
        let t = self
            .system
            .regions
            .iter()
            .filter(|r| **r == Region::Transmission)
            .count();
        (t, self.system.regions.len() - t)
    }

    pub fn element_width(&self) -> f64 {
        self.geometry
            .element_width
            .unwrap_or(self.geometry.wavelength / 4.0)
    }

    pub fn element_height(&self) -> f64 {
        self.geometry
            .element_height
            .unwrap_or(self.geometry.wavelength / 4.0)
    }

    /// Noise variance in mW: explicit value, else thermal floor over the bandwidth.
    pub fn noise_variance(&self) -> f64 {
        let p = &self.protocol;
        p.noise_variance_mw
            .unwrap_or_else(|| db_to_linear(p.noise_psd_dbm_hz + 10.0 * p.bandwidth_hz.log10()))
    }

    /// Pilot power; defaults to the per-user share of the downlink budget.
    pub fn pilot_power(&self) -> f64 {
        self.protocol
            .pilot_power_mw
            .unwrap_or(self.protocol.total_power_mw / self.system.users as f64)
    }

    pub fn prelog(&self) -> f64 {
        let p = &self.protocol;
        (p.coherence_block - p.training_length) as f64 / p.coherence_block as f64
    }

    /// User positions: explicit list, or the two segments next to the STAR-RIS.
    ///
    /// Reflection-side users sit on `y = y_SR - d0/2`, transmission-side users on
    /// `y = y_SR + d0/2`, each group spread evenly over `x_SR +- d0/2`.
    pub fn ue_positions(&self) -> Vec<[f64; 3]> {
        if let Some(ps) = &self.geometry.ue_positions {
            return ps.clone();
        }
        let g = &self.geometry;
        let [xs, ys, _] = g.star;
        let half = g.ue_spread / 2.0;
        let (kt, kr) = self.region_counts();
        let mut seen_t = 0;
        let mut seen_r = 0;
        self.system
            .regions
            .iter()
            .map(|region| {
                let (idx, count, y) = match region {
                    Region::Transmission => {
                        seen_t += 1;
                        (seen_t - 1, kt, ys + half)
                    }
                    Region::Reflection => {
                        seen_r += 1;
                        (seen_r - 1, kr, ys - half)
                    }
                };
                let x = if count == 1 {
                    xs
                } else {
                    xs - half + g.ue_spread * idx as f64 / (count - 1) as f64
                };
                [x, y, g.ue_height]
            })
            .collect()
    }
}

/// Large-scale gains from node positions: `A * d^(-alpha)` per link, with the
/// penetration loss applied on the direct links.
pub fn compute_path_losses(cfg: &ScenarioConfig) -> Result<PathLossSet> {
    let g = &cfg.geometry;
    let pl = &cfg.pathloss;
    let e = &pl.exponents;
    let area = pl.element_area;

    let link = |a: &[f64; 3], an: &str, b: &[f64; 3], bn: &str, alpha: f64| -> Result<f64> {
        let d = distance(a, b);
        if d == 0.0 {
            return Err(Error::ZeroDistance {
                a: an.into(),
                b: bn.into(),
            });
        }
        Ok(distance_gain(area, d, alpha))
    };

    let bs_ris = link(&g.bs, "bs", &g.ris, "ris", e.bs_ris)?;
    let ris_star = link(&g.ris, "ris", &g.star, "star", e.ris_star)?;
    let bs_star = link(&g.bs, "bs", &g.star, "star", e.bs_star)?;
    let penetration = db_to_linear(-pl.penetration_loss_db);

    let positions = cfg.ue_positions();
    let mut ris_ue = Vec::with_capacity(positions.len());
    let mut star_ue = Vec::with_capacity(positions.len());
    let mut direct = Vec::with_capacity(positions.len());
    for (k, p) in positions.iter().enumerate() {
        let ue = format!("ue{k}");
        ris_ue.push(link(&g.ris, "ris", p, &ue, e.ris_ue)?);
        star_ue.push(link(&g.star, "star", p, &ue, e.star_ue)?);
        direct.push(link(&g.bs, "bs", p, &ue, e.direct)? * penetration);
    }
    PathLossSet::new(bs_ris, ris_star, bs_star, ris_ue, star_ue, direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn full_scale_preset_parses() {
        let cfg = load_scenario(&presets::full_scale_toml()).unwrap();
        assert_eq!(cfg.bs_antennas(), 64);
        assert_eq!(cfg.ris_elements() + cfg.star_elements(), 64);
        assert_eq!(cfg.users(), 4);
        assert_eq!(cfg.protocol.coherence_block, 200);
        assert_eq!(cfg.protocol.training_length, 20);
        assert_eq!(cfg.element_width(), cfg.geometry.wavelength / 4.0);
        assert_eq!(cfg.element_height(), cfg.geometry.wavelength / 4.0);
        let expected = 10f64.powf((-174.0 + 10.0 * 200000f64.log10()) / 10.0);
        assert!((cfg.noise_variance() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn training_must_fit_in_block() {
        let mut cfg = presets::full_scale();
        cfg.protocol.training_length = 200;
        let err = load_scenario(&cfg.to_toml()).unwrap_err();
        assert!(err.to_string().contains("training length must be < coherence block"));
    }

    #[test]
    fn pilots_must_be_orthogonal() {
        let mut cfg = presets::full_scale();
        cfg.protocol.training_length = 3;
        assert!(matches!(cfg.validate(), Err(Error::TooFewPilots { .. })));
        cfg.protocol.csi = CsiMode::Perfect;
        cfg.protocol.training_length = 0;
        cfg.validate().unwrap();
    }

    #[test]
    fn region_counting() {
        let mut cfg = presets::full_scale();
        cfg.system.regions = vec![
            Region::Transmission,
            Region::Transmission,
            Region::Reflection,
            Region::Reflection,
        ];
        assert_eq!(cfg.region_counts(), (2, 2));
        cfg.system.regions.pop();
        assert!(matches!(
            cfg.validate(),
            Err(Error::RegionCount { found: 3, expected: 4 })
        ));
    }

    #[test]
    fn missing_key_is_named() {
        let text = presets::full_scale_toml().replace("bs_antennas = 64\n", "");
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("bs_antennas"), "{err}");
    }

    #[test]
    fn non_positive_value_is_named() {
        let mut cfg = presets::full_scale();
        cfg.geometry.wavelength = 0.0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("geometry.wavelength"), "{err}");
        let mut cfg = presets::full_scale();
        cfg.protocol.total_power_mw = -1.0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("protocol.total_power_mw"), "{err}");
    }

    #[test]
    fn unknown_schema_rejected() {
        let mut cfg = presets::full_scale();
        cfg.schema_version = 7;
        assert!(matches!(cfg.validate(), Err(Error::SchemaVersion { found: 7, .. })));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = presets::full_scale();
        let back = load_scenario(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn single_link_gain() {
        assert!((distance_gain(0.01, 10.0, 2.0) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn euclidean_distance() {
        let d = distance(&[0.0, 0.0, 0.0], &[50.0, 10.0, 20.0]);
        assert_eq!(d, 3000f64.sqrt());
    }

    #[test]
    fn penetration_loss_on_direct_link() {
        let mut cfg = presets::full_scale();
        cfg.pathloss.penetration_loss_db = 0.0;
        let raw = compute_path_losses(&cfg).unwrap();
        cfg.pathloss.penetration_loss_db = 15.0;
        let lossy = compute_path_losses(&cfg).unwrap();
        for (g, l) in raw.direct.iter().zip(&lossy.direct) {
            assert!((l - g * 10f64.powf(-1.5)).abs() <= 1e-15 * g);
        }
        assert_eq!(raw.star_ue, lossy.star_ue);
    }

    #[test]
    fn derived_products_are_exact() {
        let pl = compute_path_losses(&presets::full_scale()).unwrap();
        for k in 0..pl.users() {
            assert_eq!(pl.double_hop[k], pl.bs_ris * pl.star_ue[k] * pl.ris_star);
            assert_eq!(pl.ris_hop[k], pl.ris_ue[k] * pl.bs_ris);
            assert_eq!(pl.star_hop[k], pl.star_ue[k] * pl.bs_star);
        }
    }

    #[test]
    fn coincident_nodes_rejected() {
        let mut cfg = presets::full_scale();
        cfg.geometry.ris = cfg.geometry.bs;
        assert!(matches!(
            compute_path_losses(&cfg),
            Err(Error::ZeroDistance { .. })
        ));
    }

    #[test]
    fn default_ue_layout() {
        let cfg = presets::full_scale();
        let ps = cfg.ue_positions();
        let [xs, ys, _] = cfg.geometry.star;
        let d0 = cfg.geometry.ue_spread;
        for (p, r) in ps.iter().zip(&cfg.system.regions) {
            let y = match r {
                Region::Transmission => ys + d0 / 2.0,
                Region::Reflection => ys - d0 / 2.0,
            };
            assert_eq!(p[1], y);
            assert!(p[0] >= xs - d0 / 2.0 && p[0] <= xs + d0 / 2.0);
        }
    }

    #[test]
    fn path_losses_deterministic() {
        let cfg = presets::full_scale();
        assert_eq!(compute_path_losses(&cfg).unwrap(), compute_path_losses(&cfg).unwrap());
    }

    #[test]
    fn near_square_grids() {
        assert_eq!(SurfaceGrid::near_square(64), SurfaceGrid { horizontal: 8, vertical: 8 });
        assert_eq!(SurfaceGrid::near_square(32), SurfaceGrid { horizontal: 8, vertical: 4 });
        assert_eq!(SurfaceGrid::near_square(7), SurfaceGrid { horizontal: 7, vertical: 1 });
    }
}

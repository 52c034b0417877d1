//! JSON experiment configuration with strict key checking and defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stabq_core::oracles::unit_ball_volume;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    KnnKth,
    KnnTotal,
    VoronoiDeviation,
    FundamentalRegion,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::KnnKth => "knn-kth",
            Self::KnnTotal => "knn-total",
            Self::VoronoiDeviation => "voronoi-deviation",
            Self::FundamentalRegion => "fundamental-region",
        }
    }

    pub fn is_voronoi(self) -> bool {
        matches!(self, Self::VoronoiDeviation | Self::FundamentalRegion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub p0: f64,
    pub p1: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { p0: 0.2, p1: 0.8, step: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeansConfig {
    pub p0: f64,
    pub p1: f64,
}

impl Default for MeansConfig {
    fn default() -> Self {
        Self { p0: 0.1, p1: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    /// Replicates per ladder rung.
    pub replicates: usize,
    /// KS distance above which a rung is flagged.
    pub threshold: f64,
    /// Origin samples for the stabilization tail fit and the extended law.
    pub origin_samples: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            replicates: 1,
            threshold: 0.03,
            origin_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LilConfig {
    pub n0: f64,
    /// Ladder `n0 2^j` for `j = 0..=rungs`.
    pub rungs: u32,
    /// The normal control walk runs to `2^control_log2` steps.
    pub control_log2: u32,
}

impl Default for LilConfig {
    fn default() -> Self {
        Self {
            n0: 256.0,
            rungs: 8,
            control_log2: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub n0: f64,
    pub rungs: u32,
    pub seeds: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            n0: 256.0,
            rungs: 6,
            seeds: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoronoiConfig {
    /// Window volume for the mean-area check.
    pub n: f64,
    pub cells: usize,
    /// Minimum fundamental-region samples per face count.
    pub per_face: usize,
}

impl Default for VoronoiConfig {
    fn default() -> Self {
        Self {
            n: 1.6e4,
            cells: 10_000,
            per_face: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_d")]
    pub d: usize,
    pub family: Family,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Radius of the ball holding the extra point of the extended law; `√d`
    /// when absent.
    #[serde(default)]
    pub extended_radius: Option<f64>,
    #[serde(default = "default_ladder")]
    pub n_ladder: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// `w_d / 2` when absent.
    #[serde(default)]
    pub c_stab: Option<f64>,
    /// `4 / c_stab` when absent.
    #[serde(default)]
    pub c_star: Option<f64>,
    /// `d` when absent.
    #[serde(default)]
    pub alpha_stab: Option<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub p_grid: GridConfig,
    #[serde(default)]
    pub means: MeansConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub lil: LilConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub voronoi: VoronoiConfig,
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_d() -> usize {
    2
}
fn default_k() -> u32 {
    1
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_ladder() -> Vec<f64> {
    vec![1e3, 4e3, 1.6e4, 6.4e4]
}
fn default_replicates() -> usize {
    100
}
fn default_p() -> f64 {
    0.5
}
fn default_output() -> String {
    "out".into()
}

impl ExperimentConfig {
    /// A default configuration for `family`.
    pub fn new(family: Family) -> Self {
        Self {
            d: default_d(),
            family,
            k: default_k(),
            epsilon: default_epsilon(),
            extended_radius: None,
            n_ladder: default_ladder(),
            replicates: default_replicates(),
            seed: 0,
            c_stab: None,
            c_star: None,
            alpha_stab: None,
            p: default_p(),
            p_grid: GridConfig::default(),
            means: MeansConfig::default(),
            density: DensityConfig::default(),
            lil: LilConfig::default(),
            coupling: CouplingConfig::default(),
            voronoi: VoronoiConfig::default(),
            output: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<(Self, Vec<String>)> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.resolve()
    }

    /// Fills the derived constants and validates every field. Returns the
    /// configuration and any warnings.
    pub fn resolve(mut self) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        if !(self.d == 2 || self.d == 3) {
            return Err(Error::config("d", format!("supported dimensions are 2 and 3, got {}", self.d)));
        }
        if self.family.is_voronoi() && self.d != 2 {
            return Err(Error::config("d", format!("{} is planar only", self.family.name())));
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1)"));
        }
        let radius = self.extended_radius.unwrap_or((self.d as f64).sqrt());
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("extended_radius", "must be positive"));
        }
        self.extended_radius = Some(radius);
        if self.n_ladder.is_empty() {
            return Err(Error::config("n_ladder", "must not be empty"));
        }
        if self.n_ladder.iter().any(|n| !(*n >= 16.0 && n.is_finite())) {
            return Err(Error::config("n_ladder", "window volumes must be finite and at least 16"));
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_ladder", "must be strictly increasing"));
        }
        if self.replicates < 2 {
            return Err(Error::config("replicates", "at least 2 are required"));
        }
        let c_stab = self.c_stab.unwrap_or(unit_ball_volume(self.d) / 2.0);
        if !(c_stab > 0.0 && c_stab.is_finite()) {
            return Err(Error::config("c_stab", "must be positive"));
        }
        let c_star = self.c_star.unwrap_or(4.0 / c_stab);
        if !(c_star > 0.0 && c_star.is_finite()) {
            return Err(Error::config("c_star", "must be positive"));
        }
        if c_star < 4.0 / c_stab * (1.0 - 1e-12) {
            warnings.push(format!(
                "c_star = {c_star} is below 4/c_stab = {}; trimming may be too thin",
                4.0 / c_stab
            ));
        }
        let alpha = self.alpha_stab.unwrap_or(self.d as f64);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::config("alpha_stab", "must be positive"));
        }
        self.c_stab = Some(c_stab);
        self.c_star = Some(c_star);
        self.alpha_stab = Some(alpha);
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config("p", "must lie in (0, 1)"));
        }
        let g = self.p_grid;
        if !(g.p0 > 0.0 && g.p0 <= g.p1 && g.p1 < 1.0) || !(g.step > 0.0) {
            return Err(Error::config("p_grid", "needs 0 < p0 <= p1 < 1 and step > 0"));
        }
        let m = self.means;
        if !(m.p0 > 0.0 && m.p0 < m.p1 && m.p1 < 1.0) {
            return Err(Error::config("means", "needs 0 < p0 < p1 < 1"));
        }
        if self.density.replicates == 0 || !(self.density.threshold > 0.0) {
            return Err(Error::config("density", "needs replicates >= 1 and threshold > 0"));
        }
        if self.density.origin_samples < 100 {
            return Err(Error::config("density", "origin_samples must be at least 100"));
        }
        if !(self.lil.n0 >= 16.0) {
            return Err(Error::config("lil", "n0 must be at least 16"));
        }
        if self.lil.rungs < 6 {
            return Err(Error::config("lil", "rungs must be at least 6"));
        }
        if !(4..=30).contains(&self.lil.control_log2) {
            return Err(Error::config("lil", "control_log2 must lie in 4..=30"));
        }
        if !(self.coupling.n0 >= 16.0) || self.coupling.rungs < 3 || self.coupling.seeds == 0 {
            return Err(Error::config("coupling", "needs n0 >= 16, rungs >= 3 and seeds >= 1"));
        }
        if !(self.voronoi.n >= 16.0) || self.voronoi.cells == 0 || self.voronoi.per_face == 0 {
            return Err(Error::config("voronoi", "needs n >= 16, cells >= 1 and per_face >= 1"));
        }
        Ok((self, warnings))
    }

    pub fn c_stab(&self) -> f64 {
        self.c_stab.unwrap_or(unit_ball_volume(self.d) / 2.0)
    }

    pub fn c_star(&self) -> f64 {
        self.c_star.unwrap_or(4.0 / self.c_stab())
    }

    pub fn alpha_stab(&self) -> f64 {
        self.alpha_stab.unwrap_or(self.d as f64)
    }

    pub fn extended_radius(&self) -> f64 {
        self.extended_radius.unwrap_or((self.d as f64).sqrt())
    }

    /// The trimming radius for window volume `n`.
    pub fn trim_radius(&self, n: f64) -> Result<f64> {
        Ok(stabq_core::empirical::trim_radius(n, self.c_star(), self.alpha_stab())?)
    }

    /// SHA-256 of the canonical (sorted-key) JSON, leaving out the output
    /// directory.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_config(path: &Path) -> Result<(ExperimentConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn minimal_config_gets_defaults() {
        let (cfg, warnings) = ExperimentConfig::from_json(r#"{"family": "knn-kth"}"#).unwrap();
        assert!(warnings.is_empty());
        assert_eq!((cfg.d, cfg.k, cfg.replicates), (2, 1, 100));
        assert!((cfg.c_stab.unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((cfg.c_star.unwrap() - 8.0 / PI).abs() < 1e-15);
        assert_eq!(cfg.alpha_stab, Some(2.0));
        assert_eq!(cfg.p_grid, GridConfig { p0: 0.2, p1: 0.8, step: 1e-3 });
        assert_eq!(cfg.n_ladder, vec![1e3, 4e3, 1.6e4, 6.4e4]);
    }

    #[test]
    fn rejects_bad_fields() {
        for text in [
            r#"{"family": "knn-kth", "replicates": 1}"#,
            r#"{"family": "knn-kth", "bogus": 3}"#,
            r#"{"family": "knn-kth", "p_grid": {"p0": 0.2, "p1": 0.8, "step": 0.01, "x": 1}}"#,
            r#"{"family": "knn-kth", "n_ladder": [1000, 1000]}"#,
            r#"{"family": "voronoi-deviation", "d": 3}"#,
            r#"{"family": "knn-kth", "lil": {"n0": 8}}"#,
            r#"{"family": "triangles"}"#,
            r#"{}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
        let err = ExperimentConfig::from_json(r#"{"family": "knn-kth", "replicates": 1}"#).unwrap_err();
        assert!(err.to_string().contains("replicates"));
    }

    #[test]
    fn thin_trimming_warns_but_proceeds() {
        let (cfg, warnings) = ExperimentConfig::from_json(r#"{"family": "knn-kth", "c_star": 1.0}"#).unwrap();
        assert_eq!(cfg.c_star, Some(1.0));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn round_trip_and_hash_stability() {
        let (a, _) = ExperimentConfig::from_json(r#"{"family": "knn-kth", "k": 2, "seed": 9}"#).unwrap();
        let (b, _) = ExperimentConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        let (c, _) = ExperimentConfig::from_json(r#"{"seed": 9, "k": 2, "family": "knn-kth"}"#).unwrap();
        assert_eq!(a.hash(), c.hash());
        let (e, _) = ExperimentConfig::from_json(r#"{"seed": 9, "k": 2, "family": "knn-kth", "output": "x"}"#).unwrap();
        assert_eq!(a.hash(), e.hash());
        let (d, _) = ExperimentConfig::from_json(r#"{"seed": 10, "k": 2, "family": "knn-kth"}"#).unwrap();
        assert_ne!(a.hash(), d.hash());
    }
}

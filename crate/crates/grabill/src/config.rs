//! Experiment configuration files (TOML or JSON).

use std::path::{Path, PathBuf};

use grabill_core::hamiltonian::TBParams;
use grabill_core::lattice::{Edge, Orientation, Perturbation, SectorSize, SectorSpec};
use grabill_core::unfold::{DEFAULT_DEGREE, MAX_DEGREE};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("TOML error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationName {
    Zigzag,
    Armchair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeName {
    First,
    Second,
}

impl From<EdgeName> for Edge {
    fn from(e: EdgeName) -> Edge {
        match e {
            EdgeName::First => Edge::First,
            EdgeName::Second => Edge::Second,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    RemoveEdgeRow { edge: EdgeName },
    AddEdgeRow { edge: EdgeName },
    RemoveTipAtoms { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub orientation: OrientationName,
    #[serde(default)]
    pub perturbations: Vec<PerturbationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// eV
    #[serde(default = "default_t")]
    pub t: f64,
    /// eV
    #[serde(default)]
    pub t_prime: f64,
    #[serde(default = "one")]
    pub boundary_t_scale: f64,
}

fn default_t() -> f64 {
    TBParams::default().t
}

fn one() -> f64 {
    1.0
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { t: default_t(), t_prime: 0.0, boundary_t_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Nnsd,
    Delta3,
    Lengths,
    QbMatch,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnfoldMethodName {
    Polynomial,
    AnalyticDos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnfoldConfig {
    pub method: UnfoldMethodName,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

impl Default for UnfoldConfig {
    fn default() -> Self {
        UnfoldConfig { method: UnfoldMethodName::Polynomial, degree: DEFAULT_DEGREE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    /// Monte Carlo reference ensembles.
    #[serde(default = "default_reference_seed")]
    pub reference: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_reference_seed() -> u64 {
    0x5eed
}

fn default_realizations() -> usize {
    200
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig { reference: default_reference_seed(), realizations: default_realizations() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sector: SectorConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    /// `[E_lo, E_hi]` in units of `t`.
    pub windows: Vec<[f64; 2]>,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub unfold: UnfoldConfig,
    /// NNSD bin width.
    #[serde(default = "default_bins")]
    pub bins: f64,
    /// Largest `L` for Δ₃ and largest `ℓ` for length spectra.
    #[serde(default = "default_l_max")]
    pub l_max: f64,
    #[serde(default)]
    pub seeds: SeedConfig,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

fn default_bins() -> f64 {
    grabill_core::rmtstats::DEFAULT_BIN_WIDTH
}

fn default_l_max() -> f64 {
    20.0
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| ConfigError::Json { line: e.line(), column: e.column(), message: e.to_string() })?
        } else {
            toml::from_str(text)?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sector;
        if s.n == 0 {
            return Err(invalid("sector.n", "must be at least 1"));
        }
        match (s.target_size, s.radius) {
            (Some(_), Some(_)) => return Err(invalid("sector", "set exactly one of target_size and radius")),
            (None, None) => return Err(invalid("sector", "one of target_size and radius is required")),
            (Some(0), _) => return Err(invalid("sector.target_size", "must be positive")),
            (_, Some(r)) if !(r.is_finite() && r > 0.0) => return Err(invalid("sector.radius", "must be positive")),
            _ => {}
        }
        for (i, p) in s.perturbations.iter().enumerate() {
            if let PerturbationConfig::RemoveTipAtoms { count: 0 } = p {
                return Err(invalid(format!("sector.perturbations[{i}].count"), "must be at least 1"));
            }
        }
        self.tb_params().validate().map_err(|e| invalid("params", e.to_string()))?;
        if self.analyses.is_empty() {
            return Err(invalid("analyses", "at least one analysis is required"));
        }
        if self.windows.is_empty() {
            return Err(invalid("windows", "at least one window is required"));
        }
        let (lo_bound, hi_bound) = self.window_bounds();
        for (i, &[lo, hi]) in self.windows.iter().enumerate() {
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(invalid(format!("windows[{i}]"), format!("need E_lo < E_hi, got [{lo}, {hi}]")));
            }
            if lo < lo_bound || hi > hi_bound {
                return Err(invalid(
                    format!("windows[{i}]"),
                    format!("[{lo}, {hi}] leaves the allowed range [{lo_bound}, {hi_bound}]"),
                ));
            }
        }
        if self.unfold.degree == 0 || self.unfold.degree > MAX_DEGREE {
            return Err(invalid("unfold.degree", format!("must be in 1..={MAX_DEGREE}")));
        }
        if !(self.bins.is_finite() && self.bins > 0.0) {
            return Err(invalid("bins", "must be positive"));
        }
        if !(self.l_max.is_finite() && self.l_max > 0.0) {
            return Err(invalid("l_max", "must be positive"));
        }
        if self.seeds.realizations == 0 {
            return Err(invalid("seeds.realizations", "must be positive"));
        }
        Ok(())
    }

    /// `[−3 − 6|t′/t|, 3 + 6|t′/t|]`
    pub fn window_bounds(&self) -> (f64, f64) {
        let r = (self.params.t_prime / self.params.t).abs();
        (-3.0 - 6.0 * r, 3.0 + 6.0 * r)
    }

    pub fn sector_spec(&self) -> SectorSpec {
        let s = &self.sector;
        let size = match (s.target_size, s.radius) {
            (Some(n), _) => SectorSize::TargetSize(n),
            (None, Some(r)) => SectorSize::Radius(r),
            (None, None) => SectorSize::TargetSize(0),
        };
        let orientation = match s.orientation {
            OrientationName::Zigzag => Orientation::ZigzagFirstEdge,
            OrientationName::Armchair => Orientation::ArmchairFirstEdge,
        };
        let perturbations = s
            .perturbations
            .iter()
            .map(|p| match *p {
                PerturbationConfig::RemoveEdgeRow { edge } => Perturbation::RemoveEdgeRow(edge.into()),
                PerturbationConfig::AddEdgeRow { edge } => Perturbation::AddEdgeRow(edge.into()),
                PerturbationConfig::RemoveTipAtoms { count } => Perturbation::RemoveTipAtoms(count),
            })
            .collect();
        SectorSpec { n: s.n, size, orientation, perturbations }
    }

    pub fn tb_params(&self) -> TBParams {
        TBParams { t: self.params.t, t_prime: self.params.t_prime, boundary_t_scale: self.params.boundary_t_scale }
    }

    pub fn wants(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }

    /// Hash over every field except the output and cache locations.
    pub fn hash(&self) -> String {
        let physics = ExperimentConfig { output_dir: PathBuf::new(), cache_dir: None, ..self.clone() };
        sha256_hex(serde_json::to_string(&physics).expect("config serializes").as_bytes())
    }

    /// Key of the lattice and Hamiltonian alone.
    pub fn hamiltonian_hash(&self) -> String {
        let key = serde_json::json!({ "sector": self.sector, "params": self.params });
        sha256_hex(key.to_string().as_bytes())
    }

    /// Cache key of one spectrum: Hamiltonian plus window and whether
    /// eigenvectors are stored.
    pub fn spectrum_key(&self, window: Option<(f64, f64)>, vectors: bool) -> String {
        let key = serde_json::json!({
            "hamiltonian": self.hamiltonian_hash(),
            "window": window.map(|(a, b)| [a, b]),
            "vectors": vectors,
        });
        sha256_hex(key.to_string().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2B: &str = r#"
        analyses = ["nnsd", "delta3"]
        windows = [[0.02, 0.2]]
        output_dir = "out"

        [sector]
        n = 12
        target_size = 50000
        orientation = "zigzag"
    "#;

    #[test]
    fn minimal_toml() {
        let c = ExperimentConfig::parse(FIG2B).unwrap();
        assert_eq!(c.sector.n, 12);
        assert_eq!(c.unfold.degree, DEFAULT_DEGREE);
        assert_eq!(c.bins, 0.25);
        assert_eq!(c.sector_spec().size, SectorSize::TargetSize(50000));
    }

    #[test]
    fn json_is_equivalent() {
        let toml_cfg = ExperimentConfig::parse(FIG2B).unwrap();
        let json = serde_json::to_string_pretty(&toml_cfg).unwrap();
        let json_cfg = ExperimentConfig::parse(&json).unwrap();
        assert_eq!(toml_cfg, json_cfg);
        assert_eq!(toml_cfg.hash(), json_cfg.hash());
    }

    #[test]
    fn empty_analyses_rejected() {
        let text = FIG2B.replace(r#"["nnsd", "delta3"]"#, "[]");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("analyses"), "{err}");
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = FIG2B.replace("n = 12", "n = 12\nangle = 15");
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("angle") && err.contains("line"), "{err}");
        let err = ExperimentConfig::parse("{\"windows\": [],\n \"x\": }").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn window_bounds_follow_t_prime() {
        let text = FIG2B.replace("[[0.02, 0.2]]", "[[3.2, 3.4]]");
        assert!(ExperimentConfig::parse(&text).is_err());
        let with_nnn = format!("{text}\n[params]\nt_prime = 0.28\n");
        assert!(ExperimentConfig::parse(&with_nnn).is_ok());
    }

    #[test]
    fn hash_ignores_paths_only() {
        let a = ExperimentConfig::parse(FIG2B).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.cache_dir = Some("c".into());
        assert_eq!(a.hash(), b.hash());
        b.windows[0][1] = 0.21;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.sector.perturbations.push(PerturbationConfig::RemoveEdgeRow { edge: EdgeName::Second });
        assert_ne!(a.hash(), c.hash());
        assert_ne!(a.hamiltonian_hash(), c.hamiltonian_hash());
        assert_ne!(a.spectrum_key(Some((0.0, 1.0)), false), a.spectrum_key(Some((0.0, 1.0)), true));
    }
}

//! Run configuration: structured-text blocks for the model, geometry,
//! frequency and synthesis settings, validated before any computation.
//!
//! The schema is strict (unknown fields are rejected) and every default
//! is materialized into the resolved configuration that run manifests
//! echo, so a manifest always contains every numeric value a run used.

use serde::{Deserialize, Serialize};

use crate::attenuation::AttenuationModel;
use crate::error::{Error, Result};
use crate::geometry::BallGeometry;
use crate::operator::{DiagonalRule, WeakGramOptions};
use crate::signals::SynthesisGrid;

/// Model block, e.g. {"model": "power_law", "alpha": 1.0, "gamma": 0.5}.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    ThermoViscous { tau: f64 },
    KowarScherzerBonnefond { gamma: f64, alpha: f64, tau: f64 },
    PowerLaw { gamma: f64, alpha: f64 },
    ModifiedSzabo { gamma: f64, alpha: f64 },
    NachmanSmithWaag { c0: f64, tau: f64, tau_tilde: f64 },
    #[serde(alias = "linear_non_attenuating")]
    Linear { c: f64 },
}

impl ModelConfig {
    pub fn build(&self) -> Result<AttenuationModel> {
        let model = match *self {
            ModelConfig::ThermoViscous { tau } => AttenuationModel::ThermoViscous { tau },
            ModelConfig::KowarScherzerBonnefond { gamma, alpha, tau } => {
                AttenuationModel::KowarScherzerBonnefond { gamma, alpha, tau }
            }
            ModelConfig::PowerLaw { gamma, alpha } => AttenuationModel::PowerLaw { gamma, alpha },
            ModelConfig::ModifiedSzabo { gamma, alpha } => {
                AttenuationModel::ModifiedSzabo { gamma, alpha }
            }
            ModelConfig::NachmanSmithWaag { c0, tau, tau_tilde } => {
                AttenuationModel::NachmanSmithWaag { c0, tau, tau_tilde }
            }
            ModelConfig::Linear { c } => AttenuationModel::LinearNonAttenuating { c },
        };
        model.validate()?;
        Ok(model)
    }
}

/// Geometry block, e.g. {"R": 1.0, "eps": 0.2, "n_boundary": 1024, "h": 0.1}.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    pub eps: f64,
    pub n_boundary: usize,
    pub h: f64,
    #[serde(default)]
    pub center: [f64; 3],
}

impl GeometryConfig {
    pub fn build(&self) -> Result<BallGeometry> {
        BallGeometry::new(self.center, self.radius, self.eps)
    }
}

fn default_omega_band() -> f64 {
    64.0
}

fn default_kstar_threshold() -> f64 {
    1e-6
}

fn default_t_pad() -> f64 {
    1.25
}

fn default_diagonal() -> DiagonalRule {
    DiagonalRule::VoxelAverage
}

/// Frequency block: ω_cut for strong models (None applies the tail rule)
/// and the explicit band limit plus split options for weak models.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    /// Strong-model cut; None resolves it from κ₀ ω^β = 35/(2ε).
    #[serde(default)]
    pub omega_cut: Option<f64>,
    /// Weak-model band for the quadratic remainder.
    #[serde(default = "default_omega_band")]
    pub omega_band: f64,
    #[serde(default = "default_kstar_threshold")]
    pub kstar_threshold: f64,
    #[serde(default = "default_t_pad")]
    pub t_pad: f64,
    #[serde(default = "default_diagonal")]
    pub diagonal: DiagonalRule,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig {
            omega_cut: None,
            omega_band: default_omega_band(),
            kstar_threshold: default_kstar_threshold(),
            t_pad: default_t_pad(),
            diagonal: default_diagonal(),
        }
    }
}

impl FrequencyConfig {
    pub fn weak_options(&self) -> WeakGramOptions {
        WeakGramOptions {
            omega_band: self.omega_band,
            kstar_threshold: self.kstar_threshold,
            t_pad: self.t_pad,
            diagonal: self.diagonal,
        }
    }
}

fn default_synthesis() -> SynthesisGrid {
    SynthesisGrid { omega_cut: 128.0, n_t: 4096 }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default = "default_synthesis")]
    pub synthesis: SynthesisGrid,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("schema error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        self.geometry.build()?;
        self.synthesis.validate()?;
        if !(self.frequency.omega_band > 0.0) {
            return Err(Error::Config(format!(
                "omega_band must be positive, got {}",
                self.frequency.omega_band
            )));
        }
        if let Some(cut) = self.frequency.omega_cut {
            if !(cut > 0.0) {
                return Err(Error::Config(format!("omega_cut must be positive, got {cut}")));
            }
        }
        Ok(())
    }

    /// Fully-resolved configuration (defaults materialized) plus the
    /// library version, for run manifests.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "version": crate::VERSION,
            "config": self,
            "tolerances": {
                "hermitian_defect": crate::operator::HERMITIAN_DEFECT_TOL,
                "negative_eigenvalue": crate::spectra::NEGATIVE_EIGENVALUE_TOL,
                "fit_floor": crate::spectra::FIT_FLOOR,
                "range_flag": crate::attenuation::RANGE_FLAG_TOL,
            },
        })
    }
}

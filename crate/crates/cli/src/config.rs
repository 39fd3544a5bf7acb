//! Scenario configuration: a flat TOML file whose keys carry their units.
//!
//! Every key is optional; omitted keys take the values of the 76.5 GHz
//! operating point (`P = 10 dBm`, `σ̄ = 30 dBsm`, `α = 2`, `G_t = G_r = 10 dBi`,
//! `N_d = −174 dBm/Hz`, `W = 25 kHz`, `β = 10 dB`, `R = 15 m`).

use std::fmt;
use std::path::Path;

use plcp_radar::analytic::{
    InterferenceModel, LengthConvention, NetworkParams, Orientation, PathLossConvention, QuadratureSpec, RadarParamsDb,
};
use plcp_radar::geometry::SectorGeometry;
use plcp_radar::montecarlo::{McSpec, Windows};
use plcp_radar::optimizer::{Engine, Scenario, SweepAxis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("`{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineSelection {
    #[default]
    Analytic,
    Mc,
    Both,
}

impl EngineSelection {
    pub fn engines(self) -> Vec<Engine> {
        match self {
            EngineSelection::Analytic => vec![Engine::Analytic],
            EngineSelection::Mc => vec![Engine::MonteCarlo],
            EngineSelection::Both => vec![Engine::Analytic, Engine::MonteCarlo],
        }
    }
}

impl fmt::Display for EngineSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineSelection::Analytic => "analytic",
            EngineSelection::Mc => "mc",
            EngineSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionSelection {
    Paper,
    #[default]
    Campbell,
}

impl From<ConventionSelection> for LengthConvention {
    fn from(c: ConventionSelection) -> Self {
        match c {
            ConventionSelection::Paper => LengthConvention::PaperLiteral,
            ConventionSelection::Campbell => LengthConvention::Campbell,
        }
    }
}

/// All recognised keys. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub p_dbm: f64,
    pub sigma_dbsm: f64,
    pub alpha: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub fc_ghz: f64,
    pub nd_dbm_per_hz: f64,
    pub w_khz: f64,
    pub beta_db: f64,

    pub lambda_l_per_m2: f64,
    pub lambda_p_per_m: f64,
    pub omega_b_deg: f64,
    pub r_m: f64,

    pub engine: EngineSelection,
    pub convention: ConventionSelection,

    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_half_window_m: Option<f64>,

    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    pub orientation: Orientation,
    pub same_street: bool,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep_values: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub omega_grid_deg: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let db = RadarParamsDb::default();
        let q = QuadratureSpec::default();
        let mc = McSpec::default();
        Self {
            p_dbm: db.p_dbm,
            sigma_dbsm: db.sigma_dbsm,
            alpha: db.alpha,
            gt_dbi: db.gt_dbi,
            gr_dbi: db.gr_dbi,
            fc_ghz: db.fc_ghz,
            nd_dbm_per_hz: db.nd_dbm_per_hz,
            w_khz: db.w_khz,
            beta_db: db.beta_db,
            lambda_l_per_m2: 0.005,
            lambda_p_per_m: 0.01,
            omega_b_deg: 10.0,
            r_m: 15.0,
            engine: EngineSelection::default(),
            convention: ConventionSelection::default(),
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            r_max_m: None,
            line_half_window_m: None,
            trials: mc.trials,
            seed: mc.seed,
            confidence: mc.confidence,
            orientation: Orientation::default(),
            same_street: false,
            sweep_axis: None,
            sweep_values: Vec::new(),
            omega_grid_deg: Vec::new(),
        }
    }
}

fn finite(name: &'static str, v: f64, unit: &str) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("expected a finite value in {unit}, got {v}")))
    }
}

fn positive(name: &'static str, v: f64, unit: &str) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("expected a positive value in {unit}, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64, unit: &str) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("expected a non-negative value in {unit}, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved configuration, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        finite("p_dbm", self.p_dbm, "dBm")?;
        finite("sigma_dbsm", self.sigma_dbsm, "dBsm")?;
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(field(
                "alpha",
                format!("path-loss exponent must be ≥ 1, got {}", self.alpha),
            ));
        }
        finite("gt_dbi", self.gt_dbi, "dBi")?;
        finite("gr_dbi", self.gr_dbi, "dBi")?;
        positive("fc_ghz", self.fc_ghz, "GHz")?;
        if !(self.nd_dbm_per_hz.is_finite() || self.nd_dbm_per_hz == f64::NEG_INFINITY) {
            return Err(field(
                "nd_dbm_per_hz",
                format!("expected a value in dBm/Hz, got {}", self.nd_dbm_per_hz),
            ));
        }
        non_negative("w_khz", self.w_khz, "kHz")?;
        finite("beta_db", self.beta_db, "dB")?;
        non_negative("lambda_l_per_m2", self.lambda_l_per_m2, "1/m^2")?;
        non_negative("lambda_p_per_m", self.lambda_p_per_m, "1/m")?;
        if !(self.omega_b_deg > 0.0 && self.omega_b_deg < 45.0) {
            return Err(field(
                "omega_b_deg",
                format!("half beamwidth must lie in (0, 45) deg, got {}", self.omega_b_deg),
            ));
        }
        positive("r_m", self.r_m, "m")?;
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(field(
                "rel_tol",
                format!("expected a value in (0, 1), got {}", self.rel_tol),
            ));
        }
        positive("abs_tol", self.abs_tol, "units of the integrand")?;
        if self.max_subdivisions == 0 {
            return Err(field("max_subdivisions", "expected at least 1"));
        }
        if let Some(r) = self.r_max_m {
            if !(r.is_finite() && r > self.r_m) {
                return Err(field(
                    "r_max_m",
                    format!("expected a radius in m above r_m = {} m, got {r}", self.r_m),
                ));
            }
        }
        if let Some(w) = self.line_half_window_m {
            positive("line_half_window_m", w, "m")?;
        }
        if self.trials == 0 {
            return Err(field("trials", "expected at least 1 trial"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(field(
                "confidence",
                format!("expected a level in (0, 1), got {}", self.confidence),
            ));
        }
        if let Some(a) = &self.sweep_axis {
            a.parse::<SweepAxis>().map_err(|_| {
                field(
                    "sweep_axis",
                    format!("unknown axis `{a}`; expected one of omega_b_deg, lambda_p, lambda_l, r_m, beta_db"),
                )
            })?;
        }
        Ok(())
    }

    pub fn sweep_axis(&self) -> Option<SweepAxis> {
        self.sweep_axis.as_deref().and_then(|a| a.parse().ok())
    }

    pub fn radar_db(&self) -> RadarParamsDb {
        RadarParamsDb {
            p_dbm: self.p_dbm,
            alpha: self.alpha,
            sigma_dbsm: self.sigma_dbsm,
            gt_dbi: self.gt_dbi,
            gr_dbi: self.gr_dbi,
            fc_ghz: self.fc_ghz,
            nd_dbm_per_hz: self.nd_dbm_per_hz,
            w_khz: self.w_khz,
            beta_db: self.beta_db,
        }
    }

    /// Builds the engine scenario. Both engines share the same truncation
    /// windows.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        self.validate()?;
        let radar = self.radar_db().to_linear().map_err(|e| field("radar", e.to_string()))?;
        let net = NetworkParams::new(self.lambda_l_per_m2, self.lambda_p_per_m)
            .map_err(|e| field("lambda_l_per_m2", e.to_string()))?;
        let sector = SectorGeometry::from_degrees(self.omega_b_deg, self.r_m)
            .map_err(|e| field("omega_b_deg", e.to_string()))?;
        let quadrature = QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            r_max: self.r_max_m,
            line_half_window: self.line_half_window_m,
            max_subdivisions: self.max_subdivisions,
        };
        let model = InterferenceModel {
            orientation: self.orientation,
            same_street: self.same_street,
            path_loss: PathLossConvention::TwoWay,
        };
        let windows = match (self.r_max_m, self.line_half_window_m) {
            (None, None) => None,
            (r, w) => {
                let r_sim = r.unwrap_or(10.0 * self.r_m);
                Some(Windows {
                    r_sim,
                    line_half_window: w.unwrap_or(2.0 * r_sim),
                })
            }
        };
        Ok(Scenario {
            radar,
            net,
            sector,
            quadrature,
            model,
            convention: self.convention.into(),
            mc: McSpec {
                trials: self.trials,
                seed: self.seed,
                windows,
                model,
                confidence: self.confidence,
            },
        })
    }
}

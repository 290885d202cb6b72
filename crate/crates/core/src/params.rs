//! The model parameter set shared by the analytical pipeline and the
//! simulator, plus its flat TOML representation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest LoS Nakagami order accepted. Keeps the partial-fraction
/// coefficients and factorial tables well inside `f64` range.
pub const MAX_NAKAGAMI_ORDER: u32 = 20;

/// Every scalar of the network model.
///
/// Lengths are in meters, the density in base stations per square meter and
/// the SIR threshold is linear. NLoS links always use Rayleigh fading
/// (Nakagami order 1), so there is no field for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Environment constant `B` of the elevation-angle LoS model.
    pub env_b: f64,
    /// Environment constant `C` of the elevation-angle LoS model.
    pub env_c: f64,
    /// Radius of the malfunction disc.
    pub radius_rc: f64,
    /// UAV altitude above the disc centre.
    pub uav_height: f64,
    /// Density of ground base stations.
    pub bs_density: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Nakagami order of LoS air-to-ground links.
    pub m_los: u32,
    /// Cooperation parameter in `[0, 1]`.
    pub delta: f64,
    /// SIR threshold, linear scale.
    pub sir_threshold: f64,
    /// Node count of the angular quadrature in the interference exponent.
    pub quad_n: usize,
    /// Outer radius of the simulated ground-BS annulus.
    pub sim_radius: f64,
    /// Number of independent network drops per Monte Carlo estimate.
    pub sim_drops: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            env_b: 0.136,
            env_c: 11.95,
            radius_rc: 500.0,
            uav_height: 300.0,
            bs_density: 2e-5,
            alpha_los: 2.5,
            alpha_nlos: 3.0,
            m_los: 4,
            delta: 0.2,
            sir_threshold: 0.5,
            quad_n: 32,
            sim_radius: 40_000.0,
            sim_drops: 20_000,
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

/// All invariant violations found in a parameter set. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    fn push(&mut self, field: &'static str, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

impl SystemParams {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let finite = [
            ("env_b", self.env_b),
            ("env_c", self.env_c),
            ("radius_rc", self.radius_rc),
            ("uav_height", self.uav_height),
            ("bs_density", self.bs_density),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
            ("delta", self.delta),
            ("sir_threshold", self.sir_threshold),
            ("sim_radius", self.sim_radius),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                report.push(field, format!("must be finite, got {value}"));
            }
        }

        if !(self.radius_rc > 0.0) {
            report.push("radius_rc", format!("must be > 0, got {}", self.radius_rc));
        }
        if !(self.uav_height >= 0.0) {
            report.push("uav_height", format!("must be >= 0, got {}", self.uav_height));
        }
        if !(self.bs_density > 0.0) {
            report.push("bs_density", format!("must be > 0, got {}", self.bs_density));
        }
        if !(self.sim_radius > self.radius_rc) {
            report.push(
                "sim_radius",
                format!(
                    "must exceed radius_rc ({}), got {}",
                    self.radius_rc, self.sim_radius
                ),
            );
        }
        if !(0.0..=1.0).contains(&self.delta) {
            report.push("delta", format!("must lie in [0, 1], got {}", self.delta));
        }
        if !(self.alpha_nlos > 2.0) {
            report.push(
                "alpha_nlos",
                format!(
                    "must be > 2 for the interference integrals to converge, got {}",
                    self.alpha_nlos
                ),
            );
        }
        if !(self.alpha_los > 2.0) {
            report.push("alpha_los", format!("must be > 2, got {}", self.alpha_los));
        }
        if self.m_los < 1 || self.m_los > MAX_NAKAGAMI_ORDER {
            report.push(
                "m_los",
                format!("must lie in [1, {MAX_NAKAGAMI_ORDER}], got {}", self.m_los),
            );
        }
        if !(self.sir_threshold > 0.0) {
            report.push(
                "sir_threshold",
                format!("must be > 0 (linear), got {}", self.sir_threshold),
            );
        }
        if self.quad_n < 1 {
            report.push("quad_n", "must be >= 1");
        }
        if self.sim_drops < 1 {
            report.push("sim_drops", "must be >= 1");
        }
        report
    }

    /// Returns `self` if valid, otherwise the full report as an error.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(report))
        }
    }

    /// Parses a flat TOML document. Missing keys take their default value;
    /// unknown keys are rejected. The result is not validated.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat struct of scalars always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Overrides one field from its textual value, using the config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
        };
        let int = || {
            value
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as an integer")))
        };
        match key {
            "env_b" => self.env_b = float()?,
            "env_c" => self.env_c = float()?,
            "radius_rc" => self.radius_rc = float()?,
            "uav_height" => self.uav_height = float()?,
            "bs_density" => self.bs_density = float()?,
            "alpha_los" => self.alpha_los = float()?,
            "alpha_nlos" => self.alpha_nlos = float()?,
            "m_los" => {
                self.m_los = u32::try_from(int()?)
                    .map_err(|_| Error::Config(format!("m_los: '{value}' out of range")))?
            }
            "delta" => self.delta = float()?,
            "sir_threshold" => self.sir_threshold = float()?,
            "quad_n" => {
                self.quad_n = usize::try_from(int()?)
                    .map_err(|_| Error::Config(format!("quad_n: '{value}' out of range")))?
            }
            "sim_radius" => self.sim_radius = float()?,
            "sim_drops" => self.sim_drops = int()?,
            _ => return Err(Error::Config(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    /// Reads one field by its config key, as a float.
    pub fn get(&self, key: &str) -> Result<f64> {
        Ok(match key {
            "env_b" => self.env_b,
            "env_c" => self.env_c,
            "radius_rc" => self.radius_rc,
            "uav_height" => self.uav_height,
            "bs_density" => self.bs_density,
            "alpha_los" => self.alpha_los,
            "alpha_nlos" => self.alpha_nlos,
            "m_los" => self.m_los as f64,
            "delta" => self.delta,
            "sir_threshold" => self.sir_threshold,
            "quad_n" => self.quad_n as f64,
            "sim_radius" => self.sim_radius,
            "sim_drops" => self.sim_drops as f64,
            _ => return Err(Error::Config(format!("unknown parameter '{key}'"))),
        })
    }
}

/// Converts a threshold in dB to the linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

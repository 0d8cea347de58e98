//! Run configuration: JSON file layer, then command-line overrides.

use std::path::Path;

use qforge::model::NoiseEnvironment;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Raised for unreadable or invalid configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub threads: Option<usize>,
    pub strict_envelope: bool,
    pub noise: NoiseConfig,
    pub circuit: CircuitConfig,
    pub sweep: SweepConfig,
    pub compare: CompareConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            threads: None,
            strict_envelope: false,
            noise: NoiseConfig::default(),
            circuit: CircuitConfig::default(),
            sweep: SweepConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

/// Noise parameters; units as in [`NoiseEnvironment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub a_phi: f64,
    pub q_diel: f64,
    pub temperature: f64,
    pub omega_ir: f64,
    pub nu: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let e = NoiseEnvironment::first_unimon();
        Self {
            a_phi: e.a_phi,
            q_diel: e.q_diel,
            temperature: e.temperature,
            omega_ir: e.omega_ir,
            nu: e.nu,
        }
    }
}

impl NoiseConfig {
    pub fn env(&self) -> NoiseEnvironment {
        NoiseEnvironment {
            a_phi: self.a_phi,
            q_diel: self.q_diel,
            temperature: self.temperature,
            omega_ir: self.omega_ir,
            nu: self.nu,
        }
    }
}

/// Energies in GHz, bias phase in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub e_j: f64,
    pub e_l: f64,
    pub e_c: f64,
    pub phi_diff: f64,
    pub levels: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            e_j: 19.0,
            e_l: 25.2,
            e_c: 0.297,
            phi_diff: std::f64::consts::PI,
            levels: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMetric {
    Infidelity,
    CoherenceRatio,
    /// T1 against qubit frequency at fixed `(ratio, z)`.
    T1Frequency,
    /// T1 over flux-noise amplitude and quality factor at one design.
    T1Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub metric: SweepMetric,
    /// GHz.
    pub f01: f64,
    pub n_ratio: usize,
    pub n_z: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// ohm.
    pub z_min: f64,
    /// ohm.
    pub z_max: f64,
    /// Fixed design ratio for the T1 recipes.
    pub ratio: f64,
    /// Fixed design impedance for the T1 recipes, ohm.
    pub z: f64,
    /// GHz.
    pub f01_min: f64,
    /// GHz.
    pub f01_max: f64,
    pub n_f01: usize,
    pub a_phi_values: Vec<f64>,
    pub q_diel_values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            metric: SweepMetric::Infidelity,
            f01: 4.5,
            n_ratio: 41,
            n_z: 41,
            ratio_min: 0.0,
            ratio_max: 1.0,
            z_min: qforge::design::Z_MIN,
            z_max: qforge::design::Z_MAX,
            ratio: 0.754,
            z: 315.0,
            f01_min: 0.1,
            f01_max: 10.0,
            n_f01: 41,
            a_phi_values: qforge::numeric::logspace(1e-6, 1e-4, 21),
            q_diel_values: qforge::numeric::logspace(1e5, 1e8, 31),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Panel {
    /// Flux profiles: frequency, anharmonicity, gate speed limit.
    Abc,
    /// T1 against frequency via flux tuning.
    D,
    /// T1 against dielectric quality factor.
    E,
    /// Dephasing against flux offset.
    F,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub panel: Panel,
    /// Built-in qubit names; empty means all five.
    pub qubits: Vec<String>,
    /// Offset charge override for the transmon.
    pub n_g: Option<f64>,
    pub flux_points: usize,
    pub q_diel_values: Vec<f64>,
    /// flux quanta.
    pub offsets: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            panel: Panel::Abc,
            qubits: Vec::new(),
            n_g: None,
            flux_points: 101,
            q_diel_values: qforge::numeric::logspace(1e5, 1e8, 31),
            offsets: qforge::numeric::linspace(0.0, 0.05, 26),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    pub fn check_schema(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.threads == Some(0) {
            return Err(ConfigError("threads must be at least 1".to_string()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_fill_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"schema_version": 1, "sweep": {"f01": 0.5}}"#).unwrap();
        assert_eq!(cfg.sweep.f01, 0.5);
        assert_eq!(cfg.sweep.n_z, 41);
        assert_eq!(cfg.circuit, CircuitConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sweeep": {}}"#).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let cfg = RunConfig {
            schema_version: 2,
            ..RunConfig::default()
        };
        assert!(cfg.check_schema().is_err());
        assert!(RunConfig::default().check_schema().is_ok());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}

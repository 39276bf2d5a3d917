//! Run configuration: one JSON document carrying every knob a run needs,
//! rejected whole on any unknown key or invariant breach so a run either
//! reproduces exactly or refuses to start.

use lyapguard::controller::{Gains, ModelEstimates, RobustBounds, VBoundTemplate};
use lyapguard::dynamics::PlantParams;
use lyapguard::lyapunov::LyapunovCert;
use lyapguard::monitor::{Envelope, MonitorConfig, DEBOUNCE_DEFAULT, E_FLOOR_DEFAULT};
use lyapguard::sim::Scenario;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantParams,
    pub gains: Gains,
    pub bounds: RobustBounds,
    pub v_bound_template: VBoundTemplate,
    pub scenario: Scenario,
    pub monitor: MonitorSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Monitor knobs. The envelope is deliberately not defaulted: it is a
/// mission commitment, not a tuning detail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    #[serde(default = "default_debounce")]
    pub debounce_n: usize,
    #[serde(default = "default_e_floor")]
    pub e_floor: f64,
    pub envelope: Envelope,
}

fn default_debounce() -> usize {
    DEBOUNCE_DEFAULT
}

fn default_e_floor() -> f64 {
    E_FLOOR_DEFAULT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Trajectory log destination for `simulate`.
    pub csv: PathBuf,
    /// Monitor transition log (NDJSON) destination for `monitor`.
    pub transitions: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            csv: PathBuf::from("run.csv"),
            transitions: PathBuf::from("transitions.ndjson"),
        }
    }
}

/// A validated config with the derived objects every command shares.
pub struct Loaded {
    pub config: RunConfig,
    pub cert: LyapunovCert,
    pub est: ModelEstimates,
}

impl Loaded {
    pub fn monitor_config(&self) -> Result<MonitorConfig, lyapguard::error::Error> {
        MonitorConfig::new(
            self.config.bounds,
            self.cert.clone(),
            self.config.monitor.debounce_n,
            self.config.monitor.e_floor,
            self.config.monitor.envelope,
        )
    }
}

/// Read, parse, and cross-validate a config file. The per-type invariants
/// fire during deserialization; on top of those the reference acceleration
/// is checked against the certified budget and the certificate is solved
/// once so later commands cannot diverge on it.
pub fn load(path: &Path) -> Result<Loaded, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| format!("config {}: {e}", path.display()))?;
    config
        .scenario
        .validate_against(&config.bounds)
        .map_err(|e| format!("config {}: {e}", path.display()))?;
    let cert = LyapunovCert::new(config.gains)
        .map_err(|e| format!("config {}: {e}", path.display()))?;
    let est = ModelEstimates::new(config.plant, config.scenario.mismatch, config.scenario.d_hat)
        .map_err(|e| format!("config {}: {e}", path.display()))?;
    Ok(Loaded { config, cert, est })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_text() -> String {
        std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../configs/nominal.json"
        ))
        .unwrap()
    }

    #[test]
    fn nominal_config_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, nominal_text()).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.config.monitor.debounce_n, DEBOUNCE_DEFAULT);
        assert!(loaded.cert.residual() < 1e-9);
    }

    #[test]
    fn round_trip_is_value_identical() {
        let config: RunConfig = serde_json::from_str(&nominal_text()).unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&nominal_text()).unwrap();
        v["autopilot"] = serde_json::json!(true);
        let err = serde_json::from_value::<RunConfig>(v).unwrap_err();
        assert!(err.to_string().contains("autopilot"), "{err}");
    }

    #[test]
    fn unsatisfiable_disturbance_budget_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(&nominal_text()).unwrap();
        // Total headroom at or below the estimate-error cap leaves no room
        // for any actual disturbance.
        v["bounds"]["d_total_max"] = serde_json::json!(0.001);
        v["bounds"]["delta_d_max"] = serde_json::json!(0.002);
        let err = serde_json::from_value::<RunConfig>(v).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("d_total_max must exceed delta_d_max"), "{msg}");
    }

    #[test]
    fn over_budget_reference_is_refused_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&nominal_text()).unwrap();
        v["scenario"]["reference"]["roll"] = serde_json::json!({
            "sinusoid": {"amplitude": 2.0, "frequency_hz": 1.0}
        });
        let path = dir.path().join("c.json");
        std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        let err = load(&path).err().expect("over-budget reference must be refused");
        assert!(err.contains("reference acceleration bound violated"), "{err}");
    }
}

use serde::Serialize;

use isac_sim::link_metrics::watts_to_dbm;
use isac_sim::ScenarioConfig;

use crate::config_file::config_hash;
use crate::error::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub strategies: Vec<String>,
    pub slots: usize,
    pub replications: usize,
    pub carrier_hz: f64,
    pub bs_p_max_w: f64,
    pub bs_p_max_dbm: f64,
    pub bs_p_init_dbm: f64,
    pub outputs: Vec<String>,
    /// Elapsed run time; the one field that differs between repeated runs.
    pub wall_clock_s: f64,
}

impl RunManifest {
    pub fn new(cfg: &ScenarioConfig, strategies: Vec<String>, outputs: Vec<String>, wall_clock_s: f64) -> Result<Self, CliError> {
        Ok(Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            config_hash: config_hash(cfg)?,
            seed: cfg.seed,
            strategies,
            slots: cfg.slots,
            replications: cfg.replications,
            carrier_hz: cfg.radio.carrier_hz,
            bs_p_max_w: cfg.bs.p_max_w,
            bs_p_max_dbm: round_to(watts_to_dbm(cfg.bs.p_max_w), 2),
            bs_p_init_dbm: round_to(watts_to_dbm(cfg.bs.p_init_w), 2),
            outputs,
            wall_clock_s,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))
    }
}

fn round_to(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

//! Simulation config files.

use dswlab_core::StepData;
use dswlab_pde::SimConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub ql: f64,
    pub qr: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub ramp_w: f64,
    pub snapshots: Vec<f64>,
    #[serde(default = "default_true")]
    pub dealias: bool,
    pub out_prefix: String,
    #[serde(default)]
    pub ramp_w_return: Option<f64>,
    #[serde(default)]
    pub x_step2: Option<f64>,
    #[serde(default)]
    pub q_max: Option<f64>,
}

impl SimulateFile {
    pub fn step(&self) -> Result<StepData, CliError> {
        StepData::new(self.ql, self.qr).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            l: self.l,
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            ramp_w: self.ramp_w,
            ramp_w_return: self.ramp_w_return,
            x_step2: self.x_step2,
            dealias: self.dealias,
            snapshots: self.snapshots.clone(),
            q_max: self.q_max,
        }
    }
}

/// Parses and validates a simulation config.
pub fn parse_simulate_config(bytes: &[u8]) -> Result<SimulateFile, CliError> {
    let f: SimulateFile = serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("config: {e}")))?;
    f.step()?;
    if f.out_prefix.is_empty() {
        return Err(CliError::Input("config: out_prefix is empty".into()));
    }
    if f.snapshots.is_empty() {
        return Err(CliError::Input("config: no snapshot times".into()));
    }
    f.sim_config().validate_double_step().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(f)
}

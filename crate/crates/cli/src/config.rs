//! JSON configuration file and its merge with command-line flags.
//!
//! Every field is optional. A flag overrides the file, the file overrides the
//! defaults (`m = 1`, `v = 10`, `wL = 2π`). For the barrier height and width
//! the physical value (`V0`, `L`) takes precedence over the dimensionless one
//! (`v`, `wL`) given at the same level.

use std::f64::consts::TAU;
use std::path::Path;

use kleinbarrier::{BarrierSetup, IncidentMode};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_M: f64 = 1.0;
pub const DEFAULT_V: f64 = 10.0;
pub const DEFAULT_WL: f64 = TAU;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub m: Option<f64>,
    #[serde(rename = "V0")]
    pub v0: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub v: Option<f64>,
    #[serde(rename = "wL")]
    pub wl: Option<f64>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    pub n2: Option<f64>,
    pub k0: Option<f64>,
    pub sigma_k: Option<f64>,
    pub sigma_frac: Option<f64>,
    pub support_halfwidth: Option<f64>,
    pub time_samples: Option<usize>,
    pub n2_min: Option<f64>,
    pub n2_max: Option<f64>,
    pub count: Option<usize>,
    pub outputs: Option<Vec<String>>,
    pub workers: Option<usize>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(CliConfig::default()), CliConfig::load)
    }
}

/// Energy coordinate of the incident mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyInput {
    Energy(f64),
    N2(f64),
}

/// `flags` first, then `file`.
pub struct Layers<'a> {
    pub flags: &'a CliConfig,
    pub file: &'a CliConfig,
}

impl Layers<'_> {
    fn pick<T: Copy>(&self, f: impl Fn(&CliConfig) -> Option<T>) -> Option<T> {
        f(self.flags).or_else(|| f(self.file))
    }

    pub fn m(&self) -> f64 {
        self.pick(|c| c.m).unwrap_or(DEFAULT_M)
    }

    pub fn v(&self) -> f64 {
        self.pick(|c| c.v).unwrap_or(DEFAULT_V)
    }

    pub fn wl(&self) -> f64 {
        self.pick(|c| c.wl).unwrap_or(DEFAULT_WL)
    }

    pub fn get<T: Copy>(&self, f: impl Fn(&CliConfig) -> Option<T>) -> Option<T> {
        self.pick(f)
    }

    pub fn outputs(&self) -> Option<Vec<String>> {
        self.flags
            .outputs
            .clone()
            .or_else(|| self.file.outputs.clone())
    }

    /// Barrier from the highest layer that mentions each of height and width.
    pub fn setup(&self) -> Result<BarrierSetup, CliError> {
        let m = self.m();
        let height = [self.flags, self.file]
            .into_iter()
            .find_map(|c| c.v0.or(c.v.map(|v| v * m)))
            .unwrap_or(DEFAULT_V * m);
        let w = (2.0 * m * height).sqrt();
        let width = [self.flags, self.file]
            .into_iter()
            .find_map(|c| c.l.or(c.wl.map(|wl| wl / w)))
            .unwrap_or(DEFAULT_WL / w);
        BarrierSetup::new(m, height, width).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// `E` or `n²` from the highest layer that gives one; both at once is a
    /// usage error.
    pub fn energy(&self) -> Result<Option<EnergyInput>, CliError> {
        for c in [self.flags, self.file] {
            match (c.energy, c.n2) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("give either E or n2, not both".to_string()))
                }
                (Some(e), None) => return Ok(Some(EnergyInput::Energy(e))),
                (None, Some(n2)) => return Ok(Some(EnergyInput::N2(n2))),
                (None, None) => {}
            }
        }
        Ok(None)
    }

    pub fn require_energy(&self) -> Result<EnergyInput, CliError> {
        self.energy()?
            .ok_or_else(|| CliError::Usage("an energy is required: pass --E or --n2".to_string()))
    }
}

pub fn mode_for(setup: &BarrierSetup, input: EnergyInput) -> Result<IncidentMode, CliError> {
    let mode = match input {
        EnergyInput::Energy(e) => kleinbarrier::mode_from_energy(setup, e),
        EnergyInput::N2(n2) => kleinbarrier::mode_from_n2(setup, n2),
    };
    mode.map_err(CliError::Compute)
}

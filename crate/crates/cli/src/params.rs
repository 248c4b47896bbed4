//! Parameter file and scenario config, both TOML.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use voltrack::model::{HistoricalParams, RiskNeutralParams};

use crate::error::CliError;

/// Written by `calibrate`, read by everything else. Diagnostics tables are
/// ignored on read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub mu: f64,
    pub theta: f64,
    pub sigma: f64,
    pub mu_tilde: f64,
    pub theta_tilde: f64,
    /// Continuously compounded rate used by the strategies.
    #[serde(default)]
    pub r: f64,
}

impl ParamsFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let p: Self = toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        p.hist()?;
        p.rn()?;
        if !p.r.is_finite() {
            return Err(CliError::data(format!("{}: r must be finite", path.display())));
        }
        Ok(p)
    }

    pub fn hist(&self) -> Result<HistoricalParams, CliError> {
        Ok(HistoricalParams::new(self.mu, self.theta, self.sigma)?)
    }

    pub fn rn(&self) -> Result<RiskNeutralParams, CliError> {
        Ok(RiskNeutralParams::new(self.mu_tilde, self.theta_tilde)?)
    }
}

/// Optional overrides for `simulate`. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Initial index levels, one scenario each.
    pub s0: Option<Vec<f64>>,
    pub cycles: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub contracts: Option<[usize; 2]>,
    pub r: Option<f64>,
    pub days_per_month: Option<usize>,
    /// Overrides the volatility of the simulated index; may be zero.
    pub sigma: Option<f64>,
}

impl ScenarioConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }
}

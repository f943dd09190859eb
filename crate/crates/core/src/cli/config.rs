use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::PotentialSpec;
use crate::mp::{Param, Precision};
use crate::rpm::{Parity, SearchConfig};
use crate::scattering::BWParams;

/// Environment variable that replaces the built-in default precision.
pub const PRECISION_ENV: &str = "RESONANCE_PRECISION_DIGITS";

pub const DEFAULT_PRECISION_DIGITS: u32 = 64;

/// Smallest working precision accepted for Riccati-Padé commands.
pub const MIN_RPM_DIGITS: u32 = 30;

/// One run of any subcommand, as read from a JSON document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub label: Option<String>,
    pub potential: Option<PotentialSpec>,
    /// Replaces `v0` of a gaussian `potential`, one run per value.
    pub v0_values: Vec<Param>,
    pub precision_digits: Option<u32>,
    pub search: SearchConfig,
    pub transmission: TransmissionConfig,
    /// Known resonance `(eps_R, |eps_I|)`: Breit-Wigner overlay and `Gamma_RPM` for `sa`.
    pub resonance: Option<BWParams>,
    pub sa: SaConfig,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmissionConfig {
    pub range: Option<(f64, f64)>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub parity: Parity,
    /// Transmission energy; found from `resonance` or `bracket` when absent.
    pub epsilon_t: Option<f64>,
    pub bracket: Option<(f64, f64)>,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        Self {
            range: None,
            points: 400,
        }
    }
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            parity: Parity::Even,
            epsilon_t: None,
            bracket: None,
        }
    }
}

const PRESETS: [(&str, &str); 4] = [
    ("weak-barrier", include_str!("../../presets/weak-barrier.json")),
    ("barrier-sweep", include_str!("../../presets/barrier-sweep.json")),
    ("well-barrier", include_str!("../../presets/well-barrier.json")),
    ("overlap", include_str!("../../presets/overlap.json")),
];

impl RunConfig {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(name, _)| *name)
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?;
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Config value, then the environment, then the built-in default.
    pub fn precision(&self) -> Result<Precision, CliError> {
        let digits = match self.precision_digits {
            Some(d) => d,
            None => match std::env::var(PRECISION_ENV) {
                Ok(text) => text
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{PRECISION_ENV}={text:?} is not a digit count")))?,
                Err(_) => DEFAULT_PRECISION_DIGITS,
            },
        };
        if digits < MIN_RPM_DIGITS {
            return Err(CliError::Config(format!(
                "precision_digits = {digits} is below the minimum of {MIN_RPM_DIGITS}"
            )));
        }
        Ok(Precision::new(digits))
    }

    /// Labelled potentials this run covers.
    pub fn potentials(&self) -> Result<Vec<(String, PotentialSpec)>, CliError> {
        let base = self
            .potential
            .clone()
            .ok_or_else(|| CliError::Config("no potential given".into()))?;
        base.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.v0_values.is_empty() {
            let label = self.label.clone().unwrap_or_else(|| describe(&base));
            return Ok(vec![(label, base)]);
        }
        let PotentialSpec::GaussianDoubleBarrier { lambda, .. } = &base else {
            return Err(CliError::Config("v0_values needs a gaussian potential".into()));
        };
        self.v0_values
            .iter()
            .map(|v0| {
                let p = PotentialSpec::gaussian(v0.clone(), lambda.clone());
                p.validate().map_err(|e| CliError::Config(e.to_string()))?;
                Ok((format!("v0={v0}"), p))
            })
            .collect()
    }

    /// The one potential of a single-potential command.
    pub fn single_potential(&self) -> Result<(String, PotentialSpec), CliError> {
        let mut all = self.potentials()?;
        if all.len() != 1 {
            return Err(CliError::Config(format!(
                "this command takes one potential, config has {}",
                all.len()
            )));
        }
        Ok(all.remove(0))
    }

    /// Fails early when the output file cannot be created.
    pub fn check_output(&self) -> Result<(), CliError> {
        if let Some(path) = &self.output {
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn describe(p: &PotentialSpec) -> String {
    match p {
        PotentialSpec::GaussianDoubleBarrier { v0, lambda } => format!("gaussian v0={v0} lambda={lambda}"),
        PotentialSpec::KgWellBarrier { j, lambda } => format!("kg J={j} lambda={lambda}"),
        PotentialSpec::CustomSeries { coefficients, .. } => format!("series of {} terms", coefficients.len()),
    }
}

//! Run configuration files (TOML).
//!
//! ```toml
//! trials = 100000
//! seed = 7
//! protocol = "3-setting"            # or "4-setting"
//! pair_probabilities = [0.5, 0.25, 0.25]   # optional, protocol pair order
//! right_clock_jitter = 0            # optional
//!
//! [angles]                          # degrees, used at both stations
//! a = 0
//! b = 120
//! c = 180
//!
//! [source]
//! lambda = "uniform"                # or a fixed angle in degrees
//! aux_dimension = 0
//! partner = "identical"             # or "opposite"
//!
//! [model]
//! kind = "static"                   # static | dynamic | timetag | singlet
//! periodicity = 1
//! drift_rate = 0.01                 # dynamic only, radians per tick
//! delay_scale = 1.0                 # timetag only
//! delay_exponent = 4.0              # timetag only
//! ```
//!
//! Unknown keys, and keys that do not apply to the chosen model kind, are
//! rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use eprb_core::models::{LambdaDistribution, Partner, Periodicity, SourceConfig, StationConfig};
use eprb_core::runner::{ModelConfig, Protocol, RunConfig};
use eprb_core::{ProtocolMode, SettingLabel, SettingsTable};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Named(String),
    FixedDegrees(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub lambda: Option<LambdaSpec>,
    pub aux_dimension: Option<usize>,
    pub partner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    pub periodicity: Option<u32>,
    pub drift_rate: Option<f64>,
    pub delay_scale: Option<f64>,
    pub delay_exponent: Option<f64>,
}

/// The config file as written, and (after [`ConfigFile::resolve`]) with
/// every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub trials: u64,
    pub seed: Option<u64>,
    pub protocol: String,
    pub pair_probabilities: Option<Vec<f64>>,
    pub right_clock_jitter: Option<u64>,
    pub angles: BTreeMap<String, f64>,
    #[serde(default)]
    pub source: SourceSection,
    pub model: ModelSection,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Applies `key=value` overrides (dotted keys address tables) to a parsed
/// TOML document. Values are read as TOML and fall back to strings.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[String]) -> Result<(), CliError> {
    for ov in overrides {
        let (key, raw) = ov
            .split_once('=')
            .ok_or_else(|| config_err(format!("override `{ov}` is not of the form key=value")))?;
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let path: Vec<&str> = key.trim().split('.').collect();
        let (last, parents) = path.split_last().expect("split yields one item");
        let mut table = &mut *doc;
        for part in parents {
            table = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| config_err(format!("override `{key}`: `{part}` is not a table")))?;
        }
        table.insert(last.to_string(), value);
    }
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: toml::Table =
            toml::from_str(text).map_err(|e| config_err(format!("config: {}", e.message())))?;
        apply_overrides(&mut doc, overrides)?;
        ConfigFile::deserialize(doc).map_err(|e| config_err(format!("config: {}", e.message())))
    }

    /// Fills defaults and checks every constraint, so that the result maps
    /// onto a valid [`RunConfig`].
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self, CliError> {
        if let Some(s) = seed_override {
            self.seed = Some(s);
        }
        self.seed.get_or_insert(0);
        self.right_clock_jitter.get_or_insert(0);
        let mode: ProtocolMode = self.protocol.parse().map_err(|e| config_err(format!("{e}")))?;
        self.protocol = mode.as_str().to_string();
        if self.pair_probabilities.is_none() {
            let k = mode.pairs().len();
            self.pair_probabilities = Some(vec![1.0 / k as f64; k]);
        }

        let src = &mut self.source;
        src.lambda.get_or_insert(LambdaSpec::Named("uniform".into()));
        src.aux_dimension.get_or_insert(0);
        src.partner.get_or_insert_with(|| "identical".into());

        let m = &mut self.model;
        let periodicity = *m.periodicity.get_or_insert(1);
        let forbid = |name: &str, present: bool, kind: &str| {
            if present {
                Err(config_err(format!("model.{name} is not used by kind `{kind}`")))
            } else {
                Ok(())
            }
        };
        match m.kind.as_str() {
            "static" | "singlet" => {
                forbid("drift_rate", m.drift_rate.is_some(), &m.kind)?;
                forbid("delay_scale", m.delay_scale.is_some(), &m.kind)?;
                forbid("delay_exponent", m.delay_exponent.is_some(), &m.kind)?;
            }
            "dynamic" => {
                m.drift_rate.get_or_insert(0.0);
                forbid("delay_scale", m.delay_scale.is_some(), "dynamic")?;
                forbid("delay_exponent", m.delay_exponent.is_some(), "dynamic")?;
            }
            "timetag" => {
                forbid("drift_rate", m.drift_rate.is_some(), "timetag")?;
                m.delay_scale.get_or_insert(1.0);
                m.delay_exponent.get_or_insert(4.0);
            }
            other => {
                return Err(config_err(format!(
                    "model.kind `{other}` is not one of static, dynamic, timetag, singlet"
                )))
            }
        }
        Periodicity::try_from(periodicity).map_err(|e| config_err(format!("model.periodicity: {e}")))?;
        // full semantic check
        self.to_run_config()?;
        Ok(self)
    }

    /// Converts a resolved config into the runner's configuration.
    pub fn to_run_config(&self) -> Result<RunConfig, CliError> {
        let mode: ProtocolMode = self.protocol.parse().map_err(|e| config_err(format!("{e}")))?;
        let protocol = match &self.pair_probabilities {
            Some(p) => Protocol::with_probabilities(mode, p.clone())
                .map_err(|e| config_err(format!("pair_probabilities: {e}")))?,
            None => Protocol::uniform(mode),
        };

        let mut angles = Vec::new();
        for (label, deg) in &self.angles {
            let l: SettingLabel = label
                .parse()
                .map_err(|e| config_err(format!("angles.{label}: {e}")))?;
            if !deg.is_finite() {
                return Err(config_err(format!("angles.{label} must be finite")));
            }
            angles.push((l, *deg));
        }
        let settings =
            SettingsTable::from_degrees(angles).map_err(|e| config_err(format!("angles: {e}")))?;

        let lambda = match self.source.lambda.as_ref() {
            None => LambdaDistribution::Uniform,
            Some(LambdaSpec::Named(s)) if s == "uniform" => LambdaDistribution::Uniform,
            Some(LambdaSpec::Named(s)) => {
                return Err(config_err(format!(
                    "source.lambda `{s}` must be \"uniform\" or a fixed angle in degrees"
                )))
            }
            Some(LambdaSpec::FixedDegrees(d)) => {
                if !d.is_finite() {
                    return Err(config_err("source.lambda must be finite"));
                }
                LambdaDistribution::Fixed(eprb_core::types::normalize_angle(d.to_radians()))
            }
        };
        let partner = match self.source.partner.as_deref().unwrap_or("identical") {
            "identical" => Partner::Identical,
            "opposite" => Partner::Opposite,
            other => {
                return Err(config_err(format!(
                    "source.partner `{other}` must be \"identical\" or \"opposite\""
                )))
            }
        };
        let source = SourceConfig {
            lambda,
            aux_dimension: self.source.aux_dimension.unwrap_or(0),
            partner,
        };

        let m = &self.model;
        let periodicity = Periodicity::try_from(m.periodicity.unwrap_or(1))
            .map_err(|e| config_err(format!("model.periodicity: {e}")))?;
        let model = match m.kind.as_str() {
            "static" => ModelConfig::Station(StationConfig::Static { periodicity }),
            "dynamic" => ModelConfig::Station(StationConfig::Dynamic {
                periodicity,
                drift_rate: m.drift_rate.unwrap_or(0.0),
            }),
            "timetag" => ModelConfig::Station(StationConfig::TimeTag {
                periodicity,
                delay_scale: m.delay_scale.unwrap_or(1.0),
                delay_exponent: m.delay_exponent.unwrap_or(4.0),
            }),
            "singlet" => ModelConfig::SingletReference { periodicity },
            other => return Err(config_err(format!("model.kind `{other}` is unknown"))),
        };

        let cfg = RunConfig {
            protocol,
            trials: self.trials,
            source,
            model,
            seed: self.seed.unwrap_or(0),
            settings,
            right_clock_jitter: self.right_clock_jitter.unwrap_or(0),
        };
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    /// SHA-256 over the canonical JSON form of the config.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

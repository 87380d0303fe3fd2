//! Statistics computed from event logs.

mod coincidence;
mod correlation;
mod eq3;
mod marginals;

use serde::Serialize;
use thiserror::Error;

use crate::types::{EventLog, ProtocolMode, SettingPair, Side};

pub use coincidence::{coincidence_filter, CoincidenceWindow, FilteredLog};
pub use correlation::{
    bell_statistic, chsh_statistic, correlation, pair_product_sum, BellReport, ChshReport,
};
pub use eq3::{eq3_expression, eq3_scan, Eq3Summary};
pub use marginals::{marginals, no_signaling_check, MarginalCell};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no trials with setting pair ({0})")]
    EmptyPair(SettingPair),
    #[error("statistic needs a {expected} log, got {found}")]
    ProtocolMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("trial indices {0}, {1}, {2} are not all different")]
    IndicesNotDistinct(u64, u64, u64),
    #[error("trial {0} does not exist")]
    NoSuchTrial(u64),
    #[error("trial {index} has setting pair ({found}) but ({expected}) is required")]
    PairMismatch {
        index: u64,
        expected: SettingPair,
        found: SettingPair,
    },
    #[error("trial {trial} has no {side} delay")]
    MissingDelay { trial: u64, side: Side },
    #[error("coincidence window must be non-negative, got {0}")]
    BadWindow(f64),
}

pub(crate) fn require_protocol(log: &EventLog, mode: ProtocolMode) -> Result<(), AnalysisError> {
    if log.protocol == mode {
        Ok(())
    } else {
        Err(AnalysisError::ProtocolMismatch {
            expected: mode.as_str(),
            found: log.protocol.as_str(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub pair: SettingPair,
    pub count: u64,
    /// `None` when no trial used the pair.
    pub value: Option<f64>,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistics {
    pub correlations: Vec<PairCorrelation>,
    pub bell: Option<BellReport>,
    pub chsh: Option<ChshReport>,
}

impl Statistics {
    pub fn of(log: &EventLog) -> Self {
        let correlations = log
            .protocol
            .pairs()
            .iter()
            .map(|&pair| match correlation(log, pair) {
                Ok(e) => PairCorrelation {
                    pair,
                    count: e.count,
                    value: Some(e.value),
                    std_error: Some(e.std_error),
                },
                Err(_) => PairCorrelation {
                    pair,
                    count: 0,
                    value: None,
                    std_error: None,
                },
            })
            .collect();
        Self {
            correlations,
            bell: bell_statistic(log).ok(),
            chsh: chsh_statistic(log).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceSummary {
    /// `None` stands for an infinite window.
    pub window: Option<f64>,
    pub retained: u64,
    pub retained_fraction: f64,
    pub filtered: Statistics,
    pub filtered_marginals: Vec<MarginalCell>,
    pub filtered_no_signaling_gap: f64,
}

/// Everything `analyze` reports about one log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub model_id: String,
    pub seed: u64,
    pub protocol: ProtocolMode,
    pub trials: u64,
    #[serde(flatten)]
    pub statistics: Statistics,
    pub marginals: Vec<MarginalCell>,
    pub no_signaling_gap: f64,
    pub eq3: Option<Eq3Summary>,
    pub coincidence: Option<CoincidenceSummary>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalysisOptions {
    pub window: Option<CoincidenceWindow>,
    pub eq3_scan: bool,
}

pub fn analyze(log: &EventLog, options: &AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    let coincidence = match options.window {
        Some(w) => {
            let filtered = coincidence_filter(log, w)?;
            Some(CoincidenceSummary {
                window: w.finite(),
                retained: filtered.log.len() as u64,
                retained_fraction: filtered.retained_fraction,
                filtered: Statistics::of(&filtered.log),
                filtered_marginals: marginals(&filtered.log),
                filtered_no_signaling_gap: no_signaling_check(&filtered.log),
            })
        }
        None => None,
    };
    let eq3 = (options.eq3_scan && log.protocol == ProtocolMode::ThreeSetting).then(|| eq3_scan(log));
    Ok(AnalysisReport {
        model_id: log.model_id.clone(),
        seed: log.seed,
        protocol: log.protocol,
        trials: log.len() as u64,
        statistics: Statistics::of(log),
        marginals: marginals(log),
        no_signaling_gap: no_signaling_check(log),
        eq3,
        coincidence,
    })
}

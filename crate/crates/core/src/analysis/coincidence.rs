use super::AnalysisError;
use crate::types::{tally_pairs, EventLog, Side, Trial};

/// Maximum allowed difference between the two detection delays of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceWindow(f64);

impl CoincidenceWindow {
    pub fn new(width: f64) -> Result<Self, AnalysisError> {
        if width.is_nan() || width < 0.0 {
            return Err(AnalysisError::BadWindow(width));
        }
        Ok(Self(width))
    }

    pub fn infinite() -> Self {
        Self(f64::INFINITY)
    }

    pub fn width(&self) -> f64 {
        self.0
    }

    /// The width, or `None` for an infinite window.
    pub fn finite(&self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredLog {
    pub log: EventLog,
    pub retained_fraction: f64,
}

/// Keeps trials whose delays differ by at most the window and renumbers them
/// `1..`. Ticks are kept as recorded.
pub fn coincidence_filter(
    log: &EventLog,
    window: CoincidenceWindow,
) -> Result<FilteredLog, AnalysisError> {
    let mut kept: Vec<Trial> = Vec::new();
    for t in &log.trials {
        let delay = |side| {
            t.station(side)
                .delay
                .ok_or(AnalysisError::MissingDelay { trial: t.n, side })
        };
        let (l, r) = (delay(Side::Left)?, delay(Side::Right)?);
        if (l - r).abs() <= window.width() {
            let mut t = *t;
            t.n = kept.len() as u64 + 1;
            kept.push(t);
        }
    }
    let retained_fraction = if log.trials.is_empty() {
        1.0
    } else {
        kept.len() as f64 / log.trials.len() as f64
    };
    let pair_counts = tally_pairs(&kept);
    Ok(FilteredLog {
        log: EventLog {
            trials: kept,
            pair_counts,
            ..log.clone_metadata()
        },
        retained_fraction,
    })
}

impl EventLog {
    fn clone_metadata(&self) -> EventLog {
        EventLog {
            trials: Vec::new(),
            settings: self.settings.clone(),
            protocol: self.protocol,
            model_id: self.model_id.clone(),
            seed: self.seed,
            pair_counts: Default::default(),
        }
    }
}

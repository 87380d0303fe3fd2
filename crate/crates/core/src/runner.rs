//! Experiment orchestration: setting schedule, station clocks, model calls
//! and log assembly.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::models::{
    draw_pair_state_from, particle_state, singlet_reference_sample, ModelError, Periodicity,
    SourceConfig, StationConfig,
};
use crate::rng::{Purpose, Streams};
use crate::types::{
    EventLog, ProtocolMode, Setting, SettingLabel, SettingPair, SettingsTable, Side,
    StationRecord, Trial,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error("settings table has no {side} angle for label `{label}` used by the protocol")]
    MissingSetting { side: Side, label: SettingLabel },
    #[error("protocol {mode} has {expected} setting pairs but {found} probabilities were given")]
    ProbabilityCount {
        mode: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("pair probabilities must be finite and non-negative, got {0}")]
    BadProbability(f64),
    #[error("pair probabilities must sum to 1 (within 1e-12), got {0}")]
    ProbabilitySum(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("worker pool: {0}")]
    Workers(String),
}

/// Which setting pairs are drawn, and how often.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    mode: ProtocolMode,
    probabilities: Vec<f64>,
}

impl Protocol {
    /// Every admissible pair with equal probability.
    pub fn uniform(mode: ProtocolMode) -> Self {
        let k = mode.pairs().len();
        Self {
            mode,
            probabilities: vec![1.0 / k as f64; k],
        }
    }

    /// Probabilities are given in the order of [`ProtocolMode::pairs`].
    pub fn with_probabilities(mode: ProtocolMode, probabilities: Vec<f64>) -> Result<Self, RunError> {
        let expected = mode.pairs().len();
        if probabilities.len() != expected {
            return Err(RunError::ProbabilityCount {
                mode: mode.as_str(),
                expected,
                found: probabilities.len(),
            });
        }
        if let Some(&bad) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(RunError::BadProbability(bad));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(RunError::ProbabilitySum(sum));
        }
        Ok(Self {
            mode,
            probabilities,
        })
    }

    pub fn mode(&self) -> ProtocolMode {
        self.mode
    }

    pub fn pairs(&self) -> &'static [SettingPair] {
        self.mode.pairs()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn pick(&self, u: f64) -> SettingPair {
        let pairs = self.pairs();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                last = i;
                acc += p;
                if u < acc {
                    return pairs[i];
                }
            }
        }
        // rounding left u just above the accumulated total
        pairs[last]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelConfig {
    Station(StationConfig),
    /// Non-local singlet sampler used as a quantum reference.
    SingletReference { periodicity: Periodicity },
}

impl ModelConfig {
    pub fn model_id(&self) -> String {
        match self {
            ModelConfig::Station(s) => s.to_string(),
            ModelConfig::SingletReference { periodicity } => {
                format!("singlet(p={})", u32::from(*periodicity))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub trials: u64,
    pub source: SourceConfig,
    pub model: ModelConfig,
    pub seed: u64,
    pub settings: SettingsTable,
    /// Maximum extra ticks on the right clock; 0 keeps both clocks at `n`.
    pub right_clock_jitter: u64,
}

impl RunConfig {
    pub fn new(
        protocol: Protocol,
        trials: u64,
        model: ModelConfig,
        settings: SettingsTable,
        seed: u64,
    ) -> Self {
        Self {
            protocol,
            trials,
            source: SourceConfig::default(),
            model,
            seed,
            settings,
            right_clock_jitter: 0,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.trials == 0 {
            return Err(RunError::NoTrials);
        }
        for pair in self.protocol.pairs() {
            for (side, label) in [(Side::Left, pair.left), (Side::Right, pair.right)] {
                if !self.settings.side(side).contains_key(&label) {
                    return Err(RunError::MissingSetting { side, label });
                }
            }
        }
        self.source.validate()?;
        if let ModelConfig::Station(s) = &self.model {
            s.validate()?;
        }
        Ok(())
    }
}

fn schedule_pair(protocol: &Protocol, streams: &Streams, n: u64) -> SettingPair {
    let u: f64 = streams.trial(Purpose::Schedule, n).gen();
    protocol.pick(u)
}

/// Draws the setting pair of trials `1..=trials`, independently per trial.
pub fn schedule_settings(protocol: &Protocol, trials: u64, seed: u64) -> Vec<SettingPair> {
    let streams = Streams::new(seed);
    (1..=trials)
        .map(|n| schedule_pair(protocol, &streams, n))
        .collect()
}

/// Settings resolved once per run, indexed by label.
struct Resolved {
    left: [Option<Setting>; 4],
    right: [Option<Setting>; 4],
}

impl Resolved {
    fn new(table: &SettingsTable) -> Self {
        let side = |s: Side| SettingLabel::ALL.map(|l| table.setting(s, l));
        Self {
            left: side(Side::Left),
            right: side(Side::Right),
        }
    }

    fn get(&self, side: Side, label: SettingLabel) -> &Setting {
        let slot = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        slot[label as usize]
            .as_ref()
            .expect("settings are checked by RunConfig::validate")
    }
}

fn right_tick(cfg: &RunConfig, streams: &Streams, n: u64) -> u64 {
    if cfg.right_clock_jitter == 0 {
        return n;
    }
    let j = cfg.right_clock_jitter;
    let offset = streams.trial(Purpose::RightClock, n).gen_range(0..=j);
    n.saturating_mul(j + 1).saturating_add(offset)
}

fn generate_trial(cfg: &RunConfig, streams: &Streams, resolved: &Resolved, n: u64) -> Trial {
    let pair = schedule_pair(&cfg.protocol, streams, n);
    let left_setting = resolved.get(Side::Left, pair.left);
    let right_setting = resolved.get(Side::Right, pair.right);
    let left_tick = n;
    let right_tick = right_tick(cfg, streams, n);

    let (left, right) = match &cfg.model {
        ModelConfig::Station(station) => {
            let state = draw_pair_state_from(&cfg.source, n, streams);
            let p = station.periodicity();
            let right_state = particle_state(&state, Side::Right, cfg.source.partner, p);
            let mut left_rng = streams.trial(Purpose::LeftStation, n);
            let mut right_rng = streams.trial(Purpose::RightStation, n);
            let l = station.evaluate(left_setting, &state, left_tick, &mut left_rng);
            let r = station.evaluate(right_setting, &right_state, right_tick, &mut right_rng);
            (l, r)
        }
        ModelConfig::SingletReference { periodicity } => {
            let mut rng = streams.trial(Purpose::Joint, n);
            let (a, b) = singlet_reference_sample(left_setting, right_setting, *periodicity, &mut rng);
            ((a, None), (b, None))
        }
    };

    Trial {
        n,
        left: StationRecord {
            setting: pair.left,
            tick: left_tick,
            outcome: left.0,
            delay: left.1,
        },
        right: StationRecord {
            setting: pair.right,
            tick: right_tick,
            outcome: right.0,
            delay: right.1,
        },
    }
}

pub fn run_experiment(cfg: &RunConfig) -> Result<EventLog, RunError> {
    run_experiment_with_workers(cfg, 1)
}

/// Runs the experiment on `workers` threads. The log does not depend on
/// `workers`.
pub fn run_experiment_with_workers(cfg: &RunConfig, workers: usize) -> Result<EventLog, RunError> {
    cfg.validate()?;
    let streams = Streams::new(cfg.seed);
    let resolved = Resolved::new(&cfg.settings);
    let gen = |n| generate_trial(cfg, &streams, &resolved, n);

    let trials: Vec<Trial> = if workers <= 1 {
        (1..=cfg.trials).map(gen).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| RunError::Workers(e.to_string()))?
            .install(|| (1..=cfg.trials).into_par_iter().map(gen).collect())
    };

    Ok(EventLog::new(
        trials,
        cfg.settings.clone(),
        cfg.protocol.mode(),
        cfg.model.model_id(),
        cfg.seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_log;
    use crate::types::Outcome;
    use SettingLabel::*;

    fn static_cfg(trials: u64, seed: u64) -> RunConfig {
        RunConfig::new(
            Protocol::uniform(ProtocolMode::ThreeSetting),
            trials,
            ModelConfig::Station(StationConfig::Static {
                periodicity: Periodicity::One,
            }),
            SettingsTable::from_degrees([(A, 0.0), (B, 120.0), (C, 180.0)]).unwrap(),
            seed,
        )
    }

    #[test]
    fn single_aligned_trial() {
        let cfg = RunConfig {
            protocol: Protocol::with_probabilities(ProtocolMode::ThreeSetting, vec![1.0, 0.0, 0.0])
                .unwrap(),
            source: SourceConfig::fixed(0.0),
            settings: SettingsTable::from_degrees([(A, 0.0), (B, 0.0), (C, 0.0)]).unwrap(),
            ..static_cfg(1, 3)
        };
        let log = run_experiment(&cfg).unwrap();
        assert_eq!(log.trials.len(), 1);
        let t = log.trials[0];
        assert_eq!(t.pair(), SettingPair::new(A, B));
        assert_eq!((t.left.outcome, t.right.outcome), (Outcome::Plus, Outcome::Plus));
        assert_eq!((t.left.tick, t.right.tick), (1, 1));
    }

    #[test]
    fn degenerate_schedule() {
        let p = Protocol::with_probabilities(ProtocolMode::ThreeSetting, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(schedule_settings(&p, 3, 77), vec![SettingPair::new(A, B); 3]);
    }

    #[test]
    fn schedule_is_deterministic_and_balanced() {
        let p = Protocol::uniform(ProtocolMode::ThreeSetting);
        let m = 30_000;
        let s = schedule_settings(&p, m, 5);
        assert_eq!(s, schedule_settings(&p, m, 5));
        for pair in p.pairs() {
            let f = s.iter().filter(|x| *x == pair).count() as f64 / m as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.02, "{pair}: {f}");
        }
    }

    #[test]
    fn pair_counts_concentrate() {
        let m = 10_000u64;
        let log = run_experiment(&static_cfg(m, 8)).unwrap();
        let tol = 3.0 * (m as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        let mut total = 0;
        for pair in ProtocolMode::ThreeSetting.pairs() {
            let c = log.count(*pair);
            total += c;
            assert!((c as f64 - m as f64 / 3.0).abs() <= tol, "{pair}: {c}");
        }
        assert_eq!(total, m);
    }

    #[test]
    fn same_seed_same_log() {
        let cfg = static_cfg(2_000, 41);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        let other = run_experiment(&static_cfg(2_000, 42)).unwrap();
        assert_ne!(run_experiment(&cfg).unwrap().trials, other.trials);
    }

    #[test]
    fn workers_do_not_change_the_log() {
        let mut cfg = static_cfg(5_000, 12);
        cfg.model = ModelConfig::Station(StationConfig::TimeTag {
            periodicity: Periodicity::Two,
            delay_scale: 1.0,
            delay_exponent: 4.0,
        });
        cfg.right_clock_jitter = 3;
        let one = run_experiment_with_workers(&cfg, 1).unwrap();
        for k in [2, 3, 8] {
            assert_eq!(run_experiment_with_workers(&cfg, k).unwrap(), one);
        }
    }

    #[test]
    fn jittered_right_clock_stays_valid() {
        let mut cfg = static_cfg(3_000, 1);
        cfg.right_clock_jitter = 5;
        let log = run_experiment(&cfg).unwrap();
        assert!(validate_log(&log).is_empty());
        assert!(log.trials.iter().any(|t| t.right.tick != t.left.tick));
    }

    #[test]
    fn rejects_missing_labels_and_bad_probabilities() {
        let mut cfg = static_cfg(10, 1);
        cfg.settings = SettingsTable::from_degrees([(A, 0.0), (B, 10.0)]).unwrap();
        assert_eq!(
            run_experiment(&cfg),
            Err(RunError::MissingSetting {
                side: Side::Right,
                label: C
            })
        );
        assert_eq!(run_experiment(&static_cfg(0, 1)), Err(RunError::NoTrials));
        assert!(Protocol::with_probabilities(ProtocolMode::ThreeSetting, vec![0.5, 0.5]).is_err());
        assert!(Protocol::with_probabilities(ProtocolMode::ThreeSetting, vec![0.5, 0.6, -0.1]).is_err());
        assert!(Protocol::with_probabilities(ProtocolMode::ThreeSetting, vec![0.5, 0.3, 0.3]).is_err());
    }
}

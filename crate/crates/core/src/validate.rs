//! Structural checks on an [`EventLog`]. Violations are returned as data so
//! that callers can report all of them at once.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::types::{normalize_angle, tally_pairs, EventLog, SettingLabel, SettingPair, Side};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// Trial indices must run 1..M without gaps.
    NonConsecutiveIndex { expected: u64, found: u64 },
    /// A tick at one station was already used with a different setting.
    SettingTimeConflict {
        side: Side,
        tick: u64,
        first_trial: u64,
        first_setting: SettingLabel,
        setting: SettingLabel,
    },
    /// A tick at one station repeats with the same setting.
    RepeatedTick { side: Side, tick: u64, first_trial: u64 },
    /// A tick is smaller than an earlier tick at the same station.
    TickOutOfOrder { side: Side, tick: u64, previous: u64 },
    InvalidDelay { side: Side, delay: f64 },
    /// The label has no angle in the settings table for that side.
    UnknownSetting { side: Side, setting: SettingLabel },
    /// The setting pair is not part of the log's protocol.
    PairOutsideProtocol { pair: SettingPair },
    InvalidAngle { side: Side, setting: SettingLabel, angle: f64 },
    PairCountMismatch { pair: SettingPair, recorded: u64, actual: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Trial index the violation was found at, if it is tied to a trial.
    pub trial: Option<u64>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.trial {
            write!(f, "trial {n}: ")?;
        }
        match &self.kind {
            ViolationKind::NonConsecutiveIndex { expected, found } => {
                write!(f, "trial index {found} where {expected} was expected")
            }
            ViolationKind::SettingTimeConflict {
                side,
                tick,
                first_trial,
                first_setting,
                setting,
            } => write!(
                f,
                "only one setting per time: {side} tick {tick} has setting {setting} \
                 but trial {first_trial} already used it with setting {first_setting}"
            ),
            ViolationKind::RepeatedTick {
                side,
                tick,
                first_trial,
            } => write!(f, "{side} tick {tick} repeats tick of trial {first_trial}"),
            ViolationKind::TickOutOfOrder {
                side,
                tick,
                previous,
            } => write!(f, "{side} tick {tick} not after previous tick {previous}"),
            ViolationKind::InvalidDelay { side, delay } => {
                write!(f, "{side} delay {delay} is not a finite non-negative number")
            }
            ViolationKind::UnknownSetting { side, setting } => {
                write!(f, "{side} setting {setting} missing from settings table")
            }
            ViolationKind::PairOutsideProtocol { pair } => {
                write!(f, "setting pair ({pair}) is not part of the protocol")
            }
            ViolationKind::InvalidAngle {
                side,
                setting,
                angle,
            } => write!(f, "{side} angle for {setting} is {angle}, outside [0, 2pi)"),
            ViolationKind::PairCountMismatch {
                pair,
                recorded,
                actual,
            } => write!(f, "pair count for ({pair}) is {recorded} but {actual} trials use it"),
        }
    }
}

/// Checks every [`EventLog`] invariant; an empty result means the log is valid.
pub fn validate_log(log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();

    for side in [Side::Left, Side::Right] {
        for (&label, &angle) in log.settings.side(side) {
            if !angle.is_finite() || normalize_angle(angle) != angle {
                out.push(Violation {
                    trial: None,
                    kind: ViolationKind::InvalidAngle {
                        side,
                        setting: label,
                        angle,
                    },
                });
            }
        }
    }

    let allowed = log.protocol.pairs();
    // tick -> (setting, first trial) per station
    let mut seen: [HashMap<u64, (SettingLabel, u64)>; 2] = [HashMap::new(), HashMap::new()];
    let mut last_tick: [Option<u64>; 2] = [None, None];

    for (i, trial) in log.trials.iter().enumerate() {
        let expected = i as u64 + 1;
        let at = Some(trial.n);
        if trial.n != expected {
            out.push(Violation {
                trial: at,
                kind: ViolationKind::NonConsecutiveIndex {
                    expected,
                    found: trial.n,
                },
            });
        }
        let pair = trial.pair();
        if !allowed.contains(&pair) {
            out.push(Violation {
                trial: at,
                kind: ViolationKind::PairOutsideProtocol { pair },
            });
        }
        for (slot, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let rec = trial.station(side);
            if !log.settings.side(side).contains_key(&rec.setting) {
                out.push(Violation {
                    trial: at,
                    kind: ViolationKind::UnknownSetting {
                        side,
                        setting: rec.setting,
                    },
                });
            }
            if let Some(delay) = rec.delay {
                if !delay.is_finite() || delay < 0.0 {
                    out.push(Violation {
                        trial: at,
                        kind: ViolationKind::InvalidDelay { side, delay },
                    });
                }
            }
            match seen[slot].get(&rec.tick) {
                Some(&(first_setting, first_trial)) if first_setting != rec.setting => {
                    out.push(Violation {
                        trial: at,
                        kind: ViolationKind::SettingTimeConflict {
                            side,
                            tick: rec.tick,
                            first_trial,
                            first_setting,
                            setting: rec.setting,
                        },
                    });
                }
                Some(&(_, first_trial)) => out.push(Violation {
                    trial: at,
                    kind: ViolationKind::RepeatedTick {
                        side,
                        tick: rec.tick,
                        first_trial,
                    },
                }),
                None => {
                    if let Some(prev) = last_tick[slot] {
                        if rec.tick < prev {
                            out.push(Violation {
                                trial: at,
                                kind: ViolationKind::TickOutOfOrder {
                                    side,
                                    tick: rec.tick,
                                    previous: prev,
                                },
                            });
                        }
                    }
                    seen[slot].insert(rec.tick, (rec.setting, trial.n));
                }
            }
            last_tick[slot] = Some(last_tick[slot].map_or(rec.tick, |p| p.max(rec.tick)));
        }
    }

    let actual = tally_pairs(&log.trials);
    let mut pairs: Vec<SettingPair> = actual.keys().chain(log.pair_counts.keys()).copied().collect();
    pairs.sort();
    pairs.dedup();
    for pair in pairs {
        let recorded = log.pair_counts.get(&pair).copied().unwrap_or(0);
        let real = actual.get(&pair).copied().unwrap_or(0);
        if recorded != real {
            out.push(Violation {
                trial: None,
                kind: ViolationKind::PairCountMismatch {
                    pair,
                    recorded,
                    actual: real,
                },
            });
        }
    }

    out
}

//! Domain values shared by every stage of the pipeline: settings, per-pair
//! source states, trial records and the event log itself.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("unknown setting label `{0}` (expected one of a, b, c, d)")]
    UnknownLabel(String),
    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("outcome `{0}` is not -1 or +1")]
    BadOutcome(String),
    #[error("unknown protocol `{0}` (expected 3-setting or 4-setting)")]
    UnknownProtocol(String),
    #[error("malformed setting pair `{0}` (expected `x,y`)")]
    BadPair(String),
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingLabel {
    A,
    B,
    C,
    D,
}

impl SettingLabel {
    pub const ALL: [SettingLabel; 4] = [Self::A, Self::B, Self::C, Self::D];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
        }
    }
}

impl fmt::Display for SettingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingLabel {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "a" | "A" => Ok(Self::A),
            "b" | "B" => Ok(Self::B),
            "c" | "C" => Ok(Self::C),
            "d" | "D" => Ok(Self::D),
            other => Err(TypeError::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// An analyzer orientation at one station. The angle is a planar
/// orientation in radians, always stored normalized into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    label: SettingLabel,
    angle: f64,
    side: Side,
}

impl Setting {
    pub fn new(label: SettingLabel, angle: f64, side: Side) -> Result<Self, TypeError> {
        if !angle.is_finite() {
            return Err(TypeError::NonFiniteAngle(angle));
        }
        Ok(Self {
            label,
            angle: normalize_angle(angle),
            side,
        })
    }

    pub fn label(&self) -> SettingLabel {
        self.label
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

/// A dichotomic measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// `+1` for non-negative inputs, `-1` otherwise (so `sign(0) = +1`).
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        }
    }
}

impl FromStr for Outcome {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+1" | "1" => Ok(Outcome::Plus),
            "-1" => Ok(Outcome::Minus),
            other => Err(TypeError::BadOutcome(other.to_string())),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hidden state emitted by the source for one pair: the elementary random
/// draw behind one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub lambda: f64,
    /// Auxiliary source properties, uniform on `[0, 1)`.
    pub aux: Vec<f64>,
    pub emission_tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationRecord {
    pub setting: SettingLabel,
    pub tick: u64,
    pub outcome: Outcome,
    /// Detection delay, only present for time-tag models.
    pub delay: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub n: u64,
    pub left: StationRecord,
    pub right: StationRecord,
}

impl Trial {
    pub fn pair(&self) -> SettingPair {
        SettingPair::new(self.left.setting, self.right.setting)
    }

    pub fn station(&self, side: Side) -> &StationRecord {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Left outcome times right outcome.
    pub fn product(&self) -> i64 {
        self.left.outcome.value() * self.right.outcome.value()
    }
}

/// A (left label, right label) combination chosen for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingPair {
    pub left: SettingLabel,
    pub right: SettingLabel,
}

impl SettingPair {
    pub const fn new(left: SettingLabel, right: SettingLabel) -> Self {
        Self { left, right }
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.left, self.right)
    }
}

impl FromStr for SettingPair {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, r) = s
            .split_once(',')
            .ok_or_else(|| TypeError::BadPair(s.to_string()))?;
        Ok(Self::new(l.parse()?, r.parse()?))
    }
}

impl Serialize for SettingPair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SettingPair {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolMode {
    #[serde(rename = "3-setting")]
    ThreeSetting,
    #[serde(rename = "4-setting")]
    FourSetting,
}

impl ProtocolMode {
    /// The admissible setting pairs, in canonical order.
    pub fn pairs(self) -> &'static [SettingPair] {
        use SettingLabel::*;
        const THREE: [SettingPair; 3] = [
            SettingPair::new(A, B),
            SettingPair::new(A, C),
            SettingPair::new(B, C),
        ];
        const FOUR: [SettingPair; 4] = [
            SettingPair::new(A, B),
            SettingPair::new(A, D),
            SettingPair::new(C, B),
            SettingPair::new(C, D),
        ];
        match self {
            ProtocolMode::ThreeSetting => &THREE,
            ProtocolMode::FourSetting => &FOUR,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolMode::ThreeSetting => "3-setting",
            ProtocolMode::FourSetting => "4-setting",
        }
    }
}

impl FromStr for ProtocolMode {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "3-setting" | "three-setting" | "three_setting" => Ok(Self::ThreeSetting),
            "4-setting" | "four-setting" | "four_setting" => Ok(Self::FourSetting),
            other => Err(TypeError::UnknownProtocol(other.to_string())),
        }
    }
}

/// Label → angle (radians) for each station.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingsTable {
    pub left: BTreeMap<SettingLabel, f64>,
    pub right: BTreeMap<SettingLabel, f64>,
}

impl SettingsTable {
    /// Uses the same label → angle map at both stations.
    pub fn symmetric<I>(angles: I) -> Result<Self, TypeError>
    where
        I: IntoIterator<Item = (SettingLabel, f64)>,
    {
        let mut map = BTreeMap::new();
        for (label, angle) in angles {
            if !angle.is_finite() {
                return Err(TypeError::NonFiniteAngle(angle));
            }
            map.insert(label, normalize_angle(angle));
        }
        Ok(Self {
            left: map.clone(),
            right: map,
        })
    }

    pub fn from_degrees<I>(angles: I) -> Result<Self, TypeError>
    where
        I: IntoIterator<Item = (SettingLabel, f64)>,
    {
        Self::symmetric(angles.into_iter().map(|(l, deg)| (l, deg.to_radians())))
    }

    pub fn side(&self, side: Side) -> &BTreeMap<SettingLabel, f64> {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn setting(&self, side: Side, label: SettingLabel) -> Option<Setting> {
        let angle = *self.side(side).get(&label)?;
        Setting::new(label, angle, side).ok()
    }
}

/// An ordered record of trials plus the metadata needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub trials: Vec<Trial>,
    pub settings: SettingsTable,
    pub protocol: ProtocolMode,
    pub model_id: String,
    pub seed: u64,
    pub pair_counts: BTreeMap<SettingPair, u64>,
}

impl EventLog {
    /// Builds a log and tallies its pair counts from the trials.
    pub fn new(
        trials: Vec<Trial>,
        settings: SettingsTable,
        protocol: ProtocolMode,
        model_id: impl Into<String>,
        seed: u64,
    ) -> Self {
        let pair_counts = tally_pairs(&trials);
        Self {
            trials,
            settings,
            protocol,
            model_id: model_id.into(),
            seed,
            pair_counts,
        }
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn count(&self, pair: SettingPair) -> u64 {
        self.pair_counts.get(&pair).copied().unwrap_or(0)
    }
}

pub fn tally_pairs(trials: &[Trial]) -> BTreeMap<SettingPair, u64> {
    let mut counts = BTreeMap::new();
    for t in trials {
        *counts.entry(t.pair()).or_insert(0) += 1;
    }
    counts
}

/// An estimated pair correlation with its sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub count: u64,
    pub std_error: f64,
}

impl CorrelationEstimate {
    /// Builds the estimate from an exact product sum over `count > 0` trials.
    pub fn from_sum(sum: i64, count: u64) -> Self {
        debug_assert!(count > 0);
        let value = sum as f64 / count as f64;
        let std_error = ((1.0 - value * value).max(0.0) / count as f64).sqrt();
        Self {
            value,
            count,
            std_error,
        }
    }
}

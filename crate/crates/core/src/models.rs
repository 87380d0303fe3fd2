//! Source and station models.
//!
//! Station functions only ever see their own setting, the pair state that
//! reached them, their own clock tick and their own random stream. None of
//! them can be handed the remote setting. The singlet reference sampler is
//! the one exception: it is a non-local oracle generator and reads both
//! settings.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{Purpose, Streams};
use crate::types::{normalize_angle, Outcome, PairState, Setting, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("periodicity must be 1 or 2, got {0}")]
    BadPeriodicity(u32),
    #[error("{name} must be a positive finite number, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
}

/// Angular periodicity of a station response: 1 for spin-1/2 style analyzers,
/// 2 for polarizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Periodicity {
    One,
    Two,
}

impl Periodicity {
    pub fn value(self) -> f64 {
        match self {
            Periodicity::One => 1.0,
            Periodicity::Two => 2.0,
        }
    }
}

impl TryFrom<u32> for Periodicity {
    type Error = ModelError;

    fn try_from(p: u32) -> Result<Self, Self::Error> {
        match p {
            1 => Ok(Periodicity::One),
            2 => Ok(Periodicity::Two),
            other => Err(ModelError::BadPeriodicity(other)),
        }
    }
}

impl From<Periodicity> for u32 {
    fn from(p: Periodicity) -> u32 {
        match p {
            Periodicity::One => 1,
            Periodicity::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaDistribution {
    Uniform,
    Fixed(f64),
}

/// How the right-hand particle's hidden angle relates to the emitted `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Partner {
    /// Both particles carry `lambda`.
    #[default]
    Identical,
    /// The right particle carries `lambda + π/p` (opposite spin for p = 1,
    /// orthogonal polarization for p = 2).
    Opposite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub lambda: LambdaDistribution,
    pub aux_dimension: usize,
    pub partner: Partner,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            lambda: LambdaDistribution::Uniform,
            aux_dimension: 0,
            partner: Partner::Identical,
        }
    }
}

impl SourceConfig {
    pub fn fixed(lambda: f64) -> Self {
        Self {
            lambda: LambdaDistribution::Fixed(normalize_angle(lambda)),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let LambdaDistribution::Fixed(v) = self.lambda {
            if !v.is_finite() {
                return Err(ModelError::NotFinite {
                    name: "fixed lambda",
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// Station response model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationConfig {
    /// Outcome depends on setting and `lambda` only.
    Static { periodicity: Periodicity },
    /// Right station response rotates by `drift_rate` radians per tick.
    Dynamic {
        periodicity: Periodicity,
        drift_rate: f64,
    },
    /// Static outcome plus a setting-dependent detection delay.
    TimeTag {
        periodicity: Periodicity,
        delay_scale: f64,
        delay_exponent: f64,
    },
}

impl StationConfig {
    pub fn periodicity(&self) -> Periodicity {
        match *self {
            StationConfig::Static { periodicity }
            | StationConfig::Dynamic { periodicity, .. }
            | StationConfig::TimeTag { periodicity, .. } => periodicity,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            StationConfig::Static { .. } => Ok(()),
            StationConfig::Dynamic { drift_rate, .. } => {
                if drift_rate.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::NotFinite {
                        name: "drift_rate",
                        value: drift_rate,
                    })
                }
            }
            StationConfig::TimeTag {
                delay_scale,
                delay_exponent,
                ..
            } => {
                for (name, value) in [("delay_scale", delay_scale), ("delay_exponent", delay_exponent)] {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(ModelError::NotPositive { name, value });
                    }
                }
                Ok(())
            }
        }
    }

    /// Evaluates one station for one trial. `rng` is that station's own
    /// per-trial stream; it is only consumed by the time-tag model.
    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        setting: &Setting,
        state: &PairState,
        tick: u64,
        rng: &mut R,
    ) -> (Outcome, Option<f64>) {
        match *self {
            StationConfig::Static { periodicity } => {
                (static_station(setting, state, periodicity), None)
            }
            StationConfig::Dynamic {
                periodicity,
                drift_rate,
            } => (
                dynamic_station(setting, state, tick, periodicity, drift_rate),
                None,
            ),
            StationConfig::TimeTag {
                periodicity,
                delay_scale,
                delay_exponent,
            } => {
                let (o, d) =
                    timetag_station(setting, state, periodicity, delay_scale, delay_exponent, rng);
                (o, Some(d))
            }
        }
    }
}

impl fmt::Display for StationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StationConfig::Static { periodicity } => {
                write!(f, "static(p={})", u32::from(periodicity))
            }
            StationConfig::Dynamic {
                periodicity,
                drift_rate,
            } => write!(f, "dynamic(p={},drift={drift_rate})", u32::from(periodicity)),
            StationConfig::TimeTag {
                periodicity,
                delay_scale,
                delay_exponent,
            } => write!(
                f,
                "timetag(p={},T0={delay_scale},d={delay_exponent})",
                u32::from(periodicity)
            ),
        }
    }
}

/// Draws the source state for trial `trial_index` of the run keyed by `seed`.
pub fn draw_pair_state(cfg: &SourceConfig, trial_index: u64, seed: u64) -> PairState {
    draw_pair_state_from(cfg, trial_index, &Streams::new(seed))
}

pub fn draw_pair_state_from(cfg: &SourceConfig, trial_index: u64, streams: &Streams) -> PairState {
    let mut rng = streams.trial(Purpose::Source, trial_index);
    let lambda = match cfg.lambda {
        LambdaDistribution::Uniform => normalize_angle(rng.gen::<f64>() * TAU),
        LambdaDistribution::Fixed(v) => normalize_angle(v),
    };
    let aux = (0..cfg.aux_dimension).map(|_| rng.gen::<f64>()).collect();
    PairState {
        lambda,
        aux,
        emission_tick: trial_index,
    }
}

/// The state seen by the particle travelling to `side`.
pub fn particle_state(state: &PairState, side: Side, partner: Partner, p: Periodicity) -> PairState {
    match (side, partner) {
        (Side::Right, Partner::Opposite) => PairState {
            lambda: normalize_angle(state.lambda + PI / p.value()),
            aux: state.aux.clone(),
            emission_tick: state.emission_tick,
        },
        _ => state.clone(),
    }
}

/// `sign(cos(p·(angle − λ)))` with `sign(0) = +1`.
pub fn static_station(setting: &Setting, state: &PairState, p: Periodicity) -> Outcome {
    Outcome::from_sign((p.value() * (setting.angle() - state.lambda)).cos())
}

/// Like [`static_station`], but the right station's response is rotated by
/// `drift_rate · tick`. The left station never drifts.
pub fn dynamic_station(
    setting: &Setting,
    state: &PairState,
    tick: u64,
    p: Periodicity,
    drift_rate: f64,
) -> Outcome {
    let drift = match setting.side() {
        Side::Left => 0.0,
        Side::Right => drift_rate * tick as f64,
    };
    Outcome::from_sign((p.value() * (setting.angle() - state.lambda + drift)).cos())
}

/// Static outcome plus detection delay `T0 · r · |sin(p·(angle − λ))|^d`,
/// `r` uniform on `[0, 1)` from the station's own stream.
pub fn timetag_station<R: Rng + ?Sized>(
    setting: &Setting,
    state: &PairState,
    p: Periodicity,
    delay_scale: f64,
    delay_exponent: f64,
    rng: &mut R,
) -> (Outcome, f64) {
    let phase = p.value() * (setting.angle() - state.lambda);
    let outcome = Outcome::from_sign(phase.cos());
    let r: f64 = rng.gen();
    (outcome, delay_law(delay_scale, delay_exponent, r, phase))
}

#[inline]
pub(crate) fn delay_law(delay_scale: f64, delay_exponent: f64, r: f64, phase: f64) -> f64 {
    delay_scale * r * phase.sin().abs().powf(delay_exponent)
}

/// Samples the singlet joint distribution directly: uniform marginals and
/// `P(equal) = (1 + E)/2` with `E = −cos(p·(θ_left − θ_right))`.
///
/// Reads both settings, so it is not a local model.
pub fn singlet_reference_sample<R: Rng + ?Sized>(
    left: &Setting,
    right: &Setting,
    p: Periodicity,
    rng: &mut R,
) -> (Outcome, Outcome) {
    let e = -(p.value() * (left.angle() - right.angle())).cos();
    let a = if rng.gen::<bool>() {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let equal = rng.gen::<f64>() < (1.0 + e) / 2.0;
    let b = if equal { a } else { a.flipped() };
    (a, b)
}

//! Mass that the product of a station's setting marginal and tick marginal
//! puts on (setting, tick) combinations that never occurred.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::OracleError;
use crate::types::{EventLog, SettingLabel, Side};

/// An exact fraction with its floating-point value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationMass {
    pub numerator: u128,
    pub denominator: u128,
}

impl StationMass {
    fn reduced(numerator: u128, denominator: u128) -> Self {
        let g = gcd(numerator, denominator).max(1);
        Self {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl Serialize for StationMass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("StationMass", 3)?;
        st.serialize_field("numerator", &self.numerator)?;
        st.serialize_field("denominator", &self.denominator)?;
        st.serialize_field("value", &self.value())?;
        st.end()
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImpossibleMass {
    pub left: StationMass,
    pub right: StationMass,
}

impl ImpossibleMass {
    pub fn side(&self, side: Side) -> StationMass {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }
}

fn station_mass(log: &EventLog, side: Side) -> StationMass {
    let m = log.trials.len() as u128;
    let mut settings: BTreeMap<SettingLabel, u128> = BTreeMap::new();
    let mut ticks: BTreeMap<u64, u128> = BTreeMap::new();
    let mut realized: BTreeSet<(SettingLabel, u64)> = BTreeSet::new();
    for t in &log.trials {
        let r = t.station(side);
        *settings.entry(r.setting).or_default() += 1;
        *ticks.entry(r.tick).or_default() += 1;
        realized.insert((r.setting, r.tick));
    }
    // P(j)·P(t) summed over realized (j, t), in units of 1/M²
    let possible: u128 = realized.iter().map(|(j, t)| settings[j] * ticks[t]).sum();
    StationMass::reduced(m * m - possible, m * m)
}

/// For each station: `1 − Σ_{(j,t) realized} P(j)·P(t)` with the empirical
/// setting and tick marginals of the log.
pub fn product_space_impossible_mass(log: &EventLog) -> Result<ImpossibleMass, OracleError> {
    if log.trials.is_empty() {
        return Err(OracleError::EmptyLog);
    }
    Ok(ImpossibleMass {
        left: station_mass(log, Side::Left),
        right: station_mass(log, Side::Right),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::testutil::log_from;
    use crate::types::{ProtocolMode, SettingPair};
    use proptest::prelude::*;
    use SettingLabel::*;

    #[test]
    fn single_setting_has_no_impossible_mass() {
        let log = log_from(ProtocolMode::ThreeSetting, &[(SettingPair::new(A, B), 1, 1); 6]);
        let r = product_space_impossible_mass(&log).unwrap();
        assert_eq!(r.left.numerator, 0);
        assert_eq!(r.right.numerator, 0);
    }

    #[test]
    fn worked_example_four_ninths() {
        let ab = SettingPair::new(A, B);
        let bc = SettingPair::new(B, C);
        let log = log_from(ProtocolMode::ThreeSetting, &[(ab, 1, 1), (ab, 1, 1), (bc, 1, 1)]);
        let r = product_space_impossible_mass(&log).unwrap();
        assert_eq!((r.left.numerator, r.left.denominator), (4, 9));
        // right settings (b, b, c) give the same mass
        assert_eq!(r.right, r.left);
    }

    #[test]
    fn empty_log_is_rejected() {
        let log = log_from(ProtocolMode::ThreeSetting, &[]);
        assert_eq!(product_space_impossible_mass(&log), Err(OracleError::EmptyLog));
    }

    proptest! {
        #[test]
        fn zero_iff_single_setting(choices in prop::collection::vec(0usize..3, 1..60)) {
            let pairs = ProtocolMode::ThreeSetting.pairs();
            let rows: Vec<_> = choices.iter().map(|&i| (pairs[i], 1, 1)).collect();
            let log = log_from(ProtocolMode::ThreeSetting, &rows);
            let r = product_space_impossible_mass(&log).unwrap();
            for side in [Side::Left, Side::Right] {
                let distinct: BTreeSet<_> = log.trials.iter().map(|t| t.station(side).setting).collect();
                prop_assert_eq!(r.side(side).numerator == 0, distinct.len() == 1);
                // unique ticks: mass = 1 − Σ P(j)²
                let m = log.len() as f64;
                let sq: f64 = distinct
                    .iter()
                    .map(|j| {
                        let c = log.trials.iter().filter(|t| t.station(side).setting == *j).count() as f64;
                        (c / m).powi(2)
                    })
                    .sum();
                prop_assert!((r.side(side).value() - (1.0 - sq)).abs() < 1e-12);
            }
        }
    }
}

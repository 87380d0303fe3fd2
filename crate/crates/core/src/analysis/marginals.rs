use std::collections::BTreeMap;

use serde::Serialize;

use crate::types::{EventLog, Outcome, SettingLabel, Side};

/// Outcome frequency at one station for one local setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCell {
    pub side: Side,
    pub setting: SettingLabel,
    pub count: u64,
    pub plus_frequency: f64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    count: u64,
    plus: u64,
}

impl Tally {
    fn add(&mut self, o: Outcome) {
        self.count += 1;
        self.plus += (o == Outcome::Plus) as u64;
    }

    fn frequency(&self) -> f64 {
        self.plus as f64 / self.count as f64
    }
}

pub fn marginals(log: &EventLog) -> Vec<MarginalCell> {
    let mut cells: BTreeMap<(Side, SettingLabel), Tally> = BTreeMap::new();
    for t in &log.trials {
        for side in [Side::Left, Side::Right] {
            let r = t.station(side);
            cells.entry((side, r.setting)).or_default().add(r.outcome);
        }
    }
    cells
        .into_iter()
        .map(|((side, setting), tally)| MarginalCell {
            side,
            setting,
            count: tally.count,
            plus_frequency: tally.frequency(),
        })
        .collect()
}

/// Largest change of a station's `P(+1)` for a fixed local setting when only
/// the remote setting changes. Zero when no local setting was combined with
/// two different remote settings.
pub fn no_signaling_check(log: &EventLog) -> f64 {
    let mut cells: BTreeMap<(Side, SettingLabel), BTreeMap<SettingLabel, Tally>> = BTreeMap::new();
    for t in &log.trials {
        for side in [Side::Left, Side::Right] {
            let local = t.station(side);
            let remote = t.station(side.other()).setting;
            cells
                .entry((side, local.setting))
                .or_default()
                .entry(remote)
                .or_default()
                .add(local.outcome);
        }
    }
    let mut gap: f64 = 0.0;
    for by_remote in cells.values() {
        let freqs: Vec<f64> = by_remote.values().map(Tally::frequency).collect();
        for (i, x) in freqs.iter().enumerate() {
            for y in &freqs[i + 1..] {
                gap = gap.max((x - y).abs());
            }
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::testutil::log_from;
    use crate::types::{ProtocolMode, SettingPair};
    use SettingLabel::*;

    const AB: SettingPair = SettingPair::new(A, B);
    const AC: SettingPair = SettingPair::new(A, C);
    const BC: SettingPair = SettingPair::new(B, C);

    #[test]
    fn all_plus_gives_unit_frequencies() {
        let log = log_from(ProtocolMode::ThreeSetting, &[(AB, 1, 1), (AC, 1, 1), (BC, 1, 1)]);
        let m = marginals(&log);
        assert_eq!(m.len(), 4); // left a, left b, right b, right c
        assert!(m.iter().all(|c| c.plus_frequency == 1.0));
        assert_eq!(no_signaling_check(&log), 0.0);
    }

    #[test]
    fn single_remote_setting_has_zero_gap() {
        let log = log_from(ProtocolMode::ThreeSetting, &[(AB, 1, -1), (AB, -1, 1), (AB, 1, 1)]);
        assert_eq!(no_signaling_check(&log), 0.0);
    }

    #[test]
    fn gap_detects_remote_dependence() {
        // left a reads +1 whenever the right uses b and -1 when it uses c
        let log = log_from(
            ProtocolMode::ThreeSetting,
            &[(AB, 1, 1), (AB, 1, -1), (AC, -1, 1), (AC, -1, -1)],
        );
        assert_eq!(no_signaling_check(&log), 1.0);
    }
}

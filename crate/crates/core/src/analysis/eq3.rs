//! The time-indexed Bell combination evaluated on three distinct trials:
//! `A_a^{t_n} A_b^{t'_n} + A_a^{t_k} A_c^{t'_k} − A_b^{t_m} A_c^{t'_m}`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::types::{EventLog, SettingLabel, SettingPair, Trial};

const AB: SettingPair = SettingPair::new(SettingLabel::A, SettingLabel::B);
const AC: SettingPair = SettingPair::new(SettingLabel::A, SettingLabel::C);
const BC: SettingPair = SettingPair::new(SettingLabel::B, SettingLabel::C);

fn trial_at(log: &EventLog, index: u64) -> Result<&Trial, AnalysisError> {
    let direct = index
        .checked_sub(1)
        .and_then(|i| log.trials.get(i as usize))
        .filter(|t| t.n == index);
    direct
        .or_else(|| log.trials.iter().find(|t| t.n == index))
        .ok_or(AnalysisError::NoSuchTrial(index))
}

fn expect_pair(log: &EventLog, index: u64, expected: SettingPair) -> Result<i64, AnalysisError> {
    let t = trial_at(log, index)?;
    if t.pair() != expected {
        return Err(AnalysisError::PairMismatch {
            index,
            expected,
            found: t.pair(),
        });
    }
    Ok(t.product())
}

/// Evaluates the expression on trials `n` (pair a,b), `k` (a,c) and `m` (b,c).
/// The result is one of −3, −1, 1, 3.
pub fn eq3_expression(log: &EventLog, n: u64, k: u64, m: u64) -> Result<i64, AnalysisError> {
    if n == k || k == m || n == m {
        return Err(AnalysisError::IndicesNotDistinct(n, k, m));
    }
    let ab = expect_pair(log, n, AB)?;
    let ac = expect_pair(log, k, AC)?;
    let bc = expect_pair(log, m, BC)?;
    Ok(ab + ac - bc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq3Summary {
    pub triples: u64,
    pub max: Option<i64>,
    /// Counts for each of the values −3, −1, 1, 3.
    pub histogram: BTreeMap<i64, u64>,
}

/// Evaluates the expression over disjoint triples formed greedily in trial
/// order: the i-th triple uses the i-th trial of each pair type.
pub fn eq3_scan(log: &EventLog) -> Eq3Summary {
    let by_pair = |p: SettingPair| log.trials.iter().filter(move |t| t.pair() == p);
    let mut histogram: BTreeMap<i64, u64> = [-3, -1, 1, 3].into_iter().map(|v| (v, 0)).collect();
    let mut triples = 0;
    let mut max = None;
    for ((n, k), m) in by_pair(AB).zip(by_pair(AC)).zip(by_pair(BC)) {
        let v = n.product() + k.product() - m.product();
        *histogram.entry(v).or_insert(0) += 1;
        triples += 1;
        max = Some(max.map_or(v, |x: i64| x.max(v)));
    }
    Eq3Summary {
        triples,
        max,
        histogram,
    }
}

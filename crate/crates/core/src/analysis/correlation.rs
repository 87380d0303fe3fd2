use serde::Serialize;

use super::{require_protocol, AnalysisError};
use crate::types::{CorrelationEstimate, EventLog, ProtocolMode, SettingLabel, SettingPair};

/// Sum of left·right products over the trials that used `pair`.
pub fn pair_product_sum(log: &EventLog, pair: SettingPair) -> i64 {
    log.trials
        .iter()
        .filter(|t| t.pair() == pair)
        .map(|t| t.product())
        .sum()
}

/// Mean product over the trials that used `pair`.
pub fn correlation(log: &EventLog, pair: SettingPair) -> Result<CorrelationEstimate, AnalysisError> {
    let (sum, count) = log
        .trials
        .iter()
        .filter(|t| t.pair() == pair)
        .fold((0i64, 0u64), |(s, c), t| (s + t.product(), c + 1));
    if count == 0 {
        return Err(AnalysisError::EmptyPair(pair));
    }
    Ok(CorrelationEstimate::from_sum(sum, count))
}

/// `E(a,b) + E(a,c) − E(b,c)` with the `≤ 1` bound flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellReport {
    pub ab: CorrelationEstimate,
    pub ac: CorrelationEstimate,
    pub bc: CorrelationEstimate,
    pub statistic: f64,
    pub std_error: f64,
    pub bound_satisfied: bool,
}

/// `E(a,b) − E(a,d) + E(c,b) + E(c,d)` with the `|S| ≤ 2` bound flag. The
/// bound is two-sided: local models also satisfy `S ≥ −2`, and the singlet
/// reaches `−2√2` at a=0°, c=90°, b=45°, d=135°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReport {
    pub ab: CorrelationEstimate,
    pub ad: CorrelationEstimate,
    pub cb: CorrelationEstimate,
    pub cd: CorrelationEstimate,
    pub statistic: f64,
    pub std_error: f64,
    pub bound_satisfied: bool,
}

fn combined_error(parts: &[CorrelationEstimate]) -> f64 {
    parts
        .iter()
        .map(|e| e.std_error * e.std_error)
        .sum::<f64>()
        .sqrt()
}

pub fn bell_statistic(log: &EventLog) -> Result<BellReport, AnalysisError> {
    use SettingLabel::*;
    require_protocol(log, ProtocolMode::ThreeSetting)?;
    let ab = correlation(log, SettingPair::new(A, B))?;
    let ac = correlation(log, SettingPair::new(A, C))?;
    let bc = correlation(log, SettingPair::new(B, C))?;
    let statistic = ab.value + ac.value - bc.value;
    Ok(BellReport {
        ab,
        ac,
        bc,
        statistic,
        std_error: combined_error(&[ab, ac, bc]),
        bound_satisfied: statistic <= 1.0,
    })
}

pub fn chsh_statistic(log: &EventLog) -> Result<ChshReport, AnalysisError> {
    use SettingLabel::*;
    require_protocol(log, ProtocolMode::FourSetting)?;
    let ab = correlation(log, SettingPair::new(A, B))?;
    let ad = correlation(log, SettingPair::new(A, D))?;
    let cb = correlation(log, SettingPair::new(C, B))?;
    let cd = correlation(log, SettingPair::new(C, D))?;
    let statistic = ab.value - ad.value + cb.value + cd.value;
    Ok(ChshReport {
        ab,
        ad,
        cb,
        cd,
        statistic,
        std_error: combined_error(&[ab, ad, cb, cd]),
        bound_satisfied: statistic.abs() <= 2.0,
    })
}

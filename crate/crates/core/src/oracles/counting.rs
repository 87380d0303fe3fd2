//! How many distinct vectors of pair-product sums a data set can show.
//!
//! *Independent pairs*: every trial only carries the product of the pair
//! it measured, and each product is a free ±1.
//!
//! *Counterfactual*: every trial carries one value for every setting
//! variable, and every pair product of that trial contributes to its pair
//! sum. This is the reading in which three (or four) variables describe all
//! trials at once.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::{signs, OracleError};

/// Largest per-pair trial count accepted by the exhaustive independent count.
pub const INDEPENDENT_CAP: u64 = 8;
/// Largest trial count accepted by the 3-setting counterfactual enumeration.
pub const COUNTERFACTUAL_CAP_THREE: u64 = 6;
/// Largest trial count accepted by the 4-setting counterfactual enumeration.
pub const COUNTERFACTUAL_CAP_FOUR: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountModel {
    IndependentPairs,
    CounterfactualTriples,
    CounterfactualQuadruples,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub model: CountModel,
    pub exact_count: u64,
    /// Closed-form count, when one is known for the model.
    pub formula_value: Option<u64>,
    /// Whether `exact_count` came from enumeration rather than the formula.
    pub exhaustive: bool,
}

/// Distinct sum vectors when pair `i` has `counts[i]` trials, each with a
/// free ±1 product.
pub(crate) fn independent_reachable(counts: &[u64]) -> HashSet<Vec<i64>> {
    let total: u64 = counts.iter().sum();
    assert!(total <= 32, "enumeration too large");
    let mut out = HashSet::new();
    for bits in 0..1u64 << total {
        let mut products = signs(bits, total as usize);
        let sums: Vec<i64> = counts
            .iter()
            .map(|&n| products.by_ref().take(n as usize).sum())
            .collect();
        out.insert(sums);
    }
    out
}

/// Distinct `(S_ab, S_ac, S_bc)` when every trial product is a free ±1.
///
/// With `exhaustive` the count is enumerated over all `2^(N_ab+N_ac+N_bc)`
/// product assignments (each `N` at most [`INDEPENDENT_CAP`]); otherwise it
/// is the product `(N_ab+1)(N_ac+1)(N_bc+1)`.
pub fn count_reachable_independent(
    n_ab: u64,
    n_ac: u64,
    n_bc: u64,
    exhaustive: bool,
) -> Result<CountReport, OracleError> {
    let formula = (n_ab + 1) * (n_ac + 1) * (n_bc + 1);
    let exact_count = if exhaustive {
        for n in [n_ab, n_ac, n_bc] {
            if n > INDEPENDENT_CAP {
                return Err(OracleError::CapExceeded {
                    what: "pair trial count",
                    value: n,
                    cap: INDEPENDENT_CAP,
                });
            }
        }
        independent_reachable(&[n_ab, n_ac, n_bc]).len() as u64
    } else {
        formula
    };
    Ok(CountReport {
        model: CountModel::IndependentPairs,
        exact_count,
        formula_value: Some(formula),
        exhaustive,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterfactualReport {
    pub trials: u64,
    pub four_setting: bool,
    pub count: CountReport,
    /// Independent-pair count with every pair seen in all `trials` trials.
    pub independent_count: u64,
    /// Counterfactual set ⊂ independent set, strictly.
    pub strict_subset: bool,
    /// Every reachable vector satisfies every sum-level Bell/CHSH bound.
    pub sum_bounds_hold: bool,
    /// Reachable sum vectors, ordered `(S_ab, S_ac, S_bc)` or
    /// `(S_ab, S_ad, S_cb, S_cd)`.
    pub reachable: Vec<Vec<i64>>,
}

/// Pair products of one counterfactual trial.
fn trial_products(values: &[i64], four_setting: bool) -> Vec<i64> {
    if four_setting {
        // values = (A_a, A_b, A_c, A_d); pairs (a,b), (a,d), (c,b), (c,d)
        vec![
            values[0] * values[1],
            values[0] * values[3],
            values[2] * values[1],
            values[2] * values[3],
        ]
    } else {
        // values = (A_a, A_b, A_c); pairs (a,b), (a,c), (b,c)
        vec![
            values[0] * values[1],
            values[0] * values[2],
            values[1] * values[2],
        ]
    }
}

/// Sum-level bounds implied by one shared assignment per trial.
///
/// Three settings: `M + σ·S ≥ 0` for the four sign vectors σ with an even
/// number of minus signs, which includes `S_ab + S_ac − S_bc ≤ M`.
/// Four settings: `|S_ab − S_ad + S_cb + S_cd| ≤ 2M` for every placement of
/// the single minus sign.
pub(crate) fn sum_bounds_hold(sums: &[i64], trials: u64, four_setting: bool) -> bool {
    let m = trials as i64;
    if four_setting {
        (0..4).all(|minus| {
            let s: i64 = sums
                .iter()
                .enumerate()
                .map(|(i, &x)| if i == minus { -x } else { x })
                .sum();
            s.abs() <= 2 * m
        })
    } else {
        const EVEN: [[i64; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];
        EVEN.iter()
            .all(|sigma| m + sigma.iter().zip(sums).map(|(s, x)| s * x).sum::<i64>() >= 0)
    }
}

/// Counts multisets of size `m` drawn from `k` kinds: C(m + k − 1, k − 1).
fn multisets(m: u64, k: u64) -> u64 {
    let (n, r) = (m + k - 1, k - 1);
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Enumerates all `2^(kM)` joint assignments (k = 3 or 4 setting variables
/// per trial) and collects the distinct sum vectors.
pub fn count_reachable_counterfactual(
    trials: u64,
    four_setting: bool,
) -> Result<CounterfactualReport, OracleError> {
    let (vars, cap, model) = if four_setting {
        (4usize, COUNTERFACTUAL_CAP_FOUR, CountModel::CounterfactualQuadruples)
    } else {
        (3usize, COUNTERFACTUAL_CAP_THREE, CountModel::CounterfactualTriples)
    };
    if trials > cap {
        return Err(OracleError::CapExceeded {
            what: "trial count",
            value: trials,
            cap,
        });
    }
    let pairs = if four_setting { 4 } else { 3 };
    let m = trials as usize;
    let mut reachable = BTreeSet::new();
    for bits in 0..1u64 << (vars * m) {
        let values: Vec<i64> = signs(bits, vars * m).collect();
        let mut sums = vec![0i64; pairs];
        for chunk in values.chunks(vars) {
            for (s, p) in sums.iter_mut().zip(trial_products(chunk, four_setting)) {
                *s += p;
            }
        }
        reachable.insert(sums);
    }

    let independent = independent_reachable(&vec![trials; pairs]);
    let subset = reachable.iter().all(|v| independent.contains(v));
    let strict_subset = subset && reachable.len() < independent.len();
    let sum_bounds_hold = reachable
        .iter()
        .all(|v| sum_bounds_hold(v, trials, four_setting));

    Ok(CounterfactualReport {
        trials,
        four_setting,
        count: CountReport {
            model,
            exact_count: reachable.len() as u64,
            // three settings: the 4 per-trial product triples are affinely
            // independent, so sums separate multisets of size M
            formula_value: (!four_setting).then(|| multisets(trials, 4)),
            exhaustive: true,
        },
        independent_count: independent.len() as u64,
        strict_subset,
        sum_bounds_hold,
        reachable: reachable.into_iter().collect(),
    })
}

//! Exact, exhaustive checks of the combinatorial statements behind Bell-type
//! bounds: pointwise bounds, reachable correlation counts, joint
//! feasibility of pairwise correlations, and product-space mass.

mod bounds;
mod counting;
mod feasibility;
mod prob_space;

use thiserror::Error;

pub use bounds::{enumerate_bell_bound, enumerate_eq3_bound, BoundReport};
pub use counting::{
    count_reachable_counterfactual, count_reachable_independent, CountModel, CountReport,
    CounterfactualReport, COUNTERFACTUAL_CAP_FOUR, COUNTERFACTUAL_CAP_THREE, INDEPENDENT_CAP,
};
pub use feasibility::{
    boole_closed_form, boole_feasibility, witness_residual, FeasibilityReport, ATOMS,
    FEASIBILITY_TOLERANCE,
};
pub use prob_space::{product_space_impossible_mass, ImpossibleMass, StationMass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the exhaustive enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },
    #[error("correlation {name} = {value} is outside [-1, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("log has no trials")]
    EmptyLog,
}

/// Maps the low `k` bits of `bits` to ±1 values (bit set → −1).
pub(crate) fn signs(bits: u64, k: usize) -> impl Iterator<Item = i64> {
    (0..k).map(move |i| if bits >> i & 1 == 1 { -1 } else { 1 })
}

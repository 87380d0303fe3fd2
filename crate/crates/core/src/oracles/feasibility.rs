//! Does a joint distribution over `(A_a, A_b, A_c) ∈ {−1,+1}³` exist whose
//! pairwise product expectations are the given correlations?
//!
//! The search works on the 8 atom weights directly. The feasible set is a
//! polytope `{w ≥ 0 : Mw = e}` with 4 equality rows, so it is non-empty iff
//! it has a vertex, and every vertex is supported on at most 4 atoms. We
//! solve the 4×4 system for each of the 70 column subsets and keep the first
//! non-negative solution.

use serde::Serialize;

use super::OracleError;

/// Slack allowed on non-negativity and on the equality residual.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// The 8 deterministic assignments `(A_a, A_b, A_c)`; atom `i` has bit `j`
/// set when variable `j` is −1.
pub const ATOMS: [[i64; 3]; 8] = {
    let mut out = [[0i64; 3]; 8];
    let mut i = 0;
    while i < 8 {
        let mut j = 0;
        while j < 3 {
            out[i][j] = if (i >> j) & 1 == 1 { -1 } else { 1 };
            j += 1;
        }
        i += 1;
    }
    out
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub correlations: [f64; 3],
    pub feasible: bool,
    /// Atom weights indexed like [`ATOMS`].
    pub witness: Option<[f64; 8]>,
    /// `1 + σ·E` for σ = (+,+,+), (+,−,−), (−,+,−), (−,−,+).
    pub closed_form_margins: [f64; 4],
    pub closed_form_feasible: bool,
}

fn atom_column(atom: &[i64; 3]) -> [f64; 4] {
    [
        1.0,
        (atom[0] * atom[1]) as f64,
        (atom[0] * atom[2]) as f64,
        (atom[1] * atom[2]) as f64,
    ]
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (i, r) in rest.iter_mut().enumerate() {
            let f = r[col] / pivot_row[col];
            for (x, p) in r[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + i] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Largest deviation of `weights` from being a distribution with the given
/// pairwise correlations (negative weights count as deviations).
pub fn witness_residual(weights: &[f64; 8], correlations: [f64; 3]) -> f64 {
    let mut moments = [0.0; 4];
    for (w, atom) in weights.iter().zip(&ATOMS) {
        for (m, c) in moments.iter_mut().zip(atom_column(atom)) {
            *m += w * c;
        }
    }
    let target = [1.0, correlations[0], correlations[1], correlations[2]];
    let eq = moments
        .iter()
        .zip(target)
        .map(|(m, t)| (m - t).abs())
        .fold(0.0, f64::max);
    let neg = weights.iter().map(|w| (-w).max(0.0)).fold(0.0, f64::max);
    eq.max(neg)
}

/// The four closed-form margins `1 ± E_ab ± E_ac ± E_bc` with an even number
/// of minus signs.
pub fn boole_closed_form(e_ab: f64, e_ac: f64, e_bc: f64) -> [f64; 4] {
    [
        1.0 + e_ab + e_ac + e_bc,
        1.0 + e_ab - e_ac - e_bc,
        1.0 - e_ab + e_ac - e_bc,
        1.0 - e_ab - e_ac + e_bc,
    ]
}

fn vertex_search(e: [f64; 3]) -> Option<[f64; 8]> {
    let b = [1.0, e[0], e[1], e[2]];
    for mask in 0u32..256 {
        if mask.count_ones() != 4 {
            continue;
        }
        let cols: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
        let mut a = [[0.0; 4]; 4];
        for (j, &c) in cols.iter().enumerate() {
            for (row, v) in atom_column(&ATOMS[c]).into_iter().enumerate() {
                a[row][j] = v;
            }
        }
        let Some(x) = solve4(a, b) else { continue };
        if x.iter().any(|&w| w < -FEASIBILITY_TOLERANCE) {
            continue;
        }
        let mut weights = [0.0; 8];
        for (&c, w) in cols.iter().zip(x) {
            weights[c] = w.max(0.0);
        }
        if witness_residual(&weights, e) <= FEASIBILITY_TOLERANCE {
            return Some(weights);
        }
    }
    None
}

pub fn boole_feasibility(e_ab: f64, e_ac: f64, e_bc: f64) -> Result<FeasibilityReport, OracleError> {
    for (name, value) in [("E_ab", e_ab), ("E_ac", e_ac), ("E_bc", e_bc)] {
        if !(-1.0..=1.0).contains(&value) {
            return Err(OracleError::OutOfRange { name, value });
        }
    }
    let correlations = [e_ab, e_ac, e_bc];
    let witness = vertex_search(correlations);
    let closed_form_margins = boole_closed_form(e_ab, e_ac, e_bc);
    Ok(FeasibilityReport {
        correlations,
        feasible: witness.is_some(),
        witness,
        closed_form_feasible: closed_form_margins
            .iter()
            .all(|&m| m >= -FEASIBILITY_TOLERANCE),
        closed_form_margins,
    })
}

use serde::Serialize;

use super::signs;

/// Extremes of an expression over every ±1 assignment of its variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub variables: Vec<&'static str>,
    pub assignments_checked: u64,
    pub max_value: i64,
    pub min_value: i64,
    pub max_assignments: Vec<Vec<i64>>,
    pub min_assignments: Vec<Vec<i64>>,
}

fn enumerate(variables: Vec<&'static str>, f: impl Fn(&[i64]) -> i64) -> BoundReport {
    let k = variables.len();
    let values: Vec<(Vec<i64>, i64)> = (0..1u64 << k)
        .map(|bits| {
            let a: Vec<i64> = signs(bits, k).collect();
            let v = f(&a);
            (a, v)
        })
        .collect();
    let max_value = values.iter().map(|(_, v)| *v).max().expect("k >= 1");
    let min_value = values.iter().map(|(_, v)| *v).min().expect("k >= 1");
    let pick = |target: i64| {
        values
            .iter()
            .filter(|(_, v)| *v == target)
            .map(|(a, _)| a.clone())
            .collect()
    };
    BoundReport {
        assignments_checked: values.len() as u64,
        max_assignments: pick(max_value),
        min_assignments: pick(min_value),
        max_value,
        min_value,
        variables,
    }
}

/// `A_a A_b + A_a A_c − A_b A_c` over all 8 assignments of `(A_a, A_b, A_c)`.
pub fn enumerate_bell_bound() -> BoundReport {
    enumerate(vec!["A_a", "A_b", "A_c"], |a| a[0] * a[1] + a[0] * a[2] - a[1] * a[2])
}

/// The same combination with each product taken from its own trial, so all
/// six factors are independent: 64 assignments.
pub fn enumerate_eq3_bound() -> BoundReport {
    enumerate(
        vec!["A_a(t_n)", "A_b(t'_n)", "A_a(t_k)", "A_c(t'_k)", "A_b(t_m)", "A_c(t'_m)"],
        |a| a[0] * a[1] + a[2] * a[3] - a[4] * a[5],
    )
}

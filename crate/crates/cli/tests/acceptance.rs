//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails. Run with
//! `cargo test -p eprb-cli --test acceptance -- --nocapture`.

mod common;

use std::f64::consts::SQRT_2;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use tempfile::TempDir;

use eprb_core::analysis::{
    bell_statistic, chsh_statistic, coincidence_filter, marginals, no_signaling_check, CoincidenceWindow,
};
use eprb_core::io::write_log_csv;
use eprb_core::models::{Partner, Periodicity, SourceConfig, StationConfig};
use eprb_core::oracles::{
    boole_closed_form, boole_feasibility, count_reachable_counterfactual, count_reachable_independent,
    enumerate_bell_bound, enumerate_eq3_bound, product_space_impossible_mass, witness_residual,
    FEASIBILITY_TOLERANCE,
};
use eprb_core::runner::{run_experiment, run_experiment_with_workers, ModelConfig, Protocol, RunConfig};
use eprb_core::{EventLog, ProtocolMode, SettingLabel, SettingsTable};

use common::{eprb, stdout_json};
use SettingLabel::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, title: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let pass = out.pass && in_time;
    let budget = match limit {
        Some(l) => format!(" (limit {:?}{})", l, if in_time { "" } else { ", EXCEEDED" }),
        None => String::new(),
    };
    println!(
        "criterion {id:>2} {} {title}: {} [{:.3?}{budget}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed
    );
    pass
}

fn table(degrees: &[(SettingLabel, f64)]) -> SettingsTable {
    SettingsTable::from_degrees(degrees.iter().copied()).unwrap()
}

fn run(mode: ProtocolMode, model: ModelConfig, angles: &[(SettingLabel, f64)], trials: u64, seed: u64) -> EventLog {
    run_experiment(&RunConfig::new(Protocol::uniform(mode), trials, model, table(angles), seed)).unwrap()
}

const STATIC1: ModelConfig = ModelConfig::Station(StationConfig::Static {
    periodicity: Periodicity::One,
});
const SINGLET1: ModelConfig = ModelConfig::SingletReference {
    periodicity: Periodicity::One,
};

/// Times the in-process call over many repetitions and reports the mean.
fn mean_time<T>(reps: u32, f: impl Fn() -> T) -> (T, Duration) {
    let start = Instant::now();
    for _ in 1..reps {
        std::hint::black_box(f());
    }
    let last = f();
    (last, start.elapsed() / reps)
}

fn criterion_1() -> bool {
    check(1, "pointwise three-setting bound", None, || {
        let (r, per_call) = mean_time(1000, enumerate_bell_bound);
        let cli = stdout_json(&eprb(std::env::temp_dir().as_path(), &["oracle", "bell-bound"]));
        let pass = r.max_value == 1
            && r.assignments_checked == 8
            && per_call < Duration::from_millis(1)
            && cli["max_value"] == 1
            && cli["min_value"] == -3;
        Outcome {
            pass,
            detail: format!(
                "max {} min {} over {} assignments, {:.2?} per call (< 1 ms); CLI max {} min {}",
                r.max_value, r.min_value, r.assignments_checked, per_call, cli["max_value"], cli["min_value"]
            ),
        }
    })
}

fn criterion_2() -> bool {
    check(2, "six-variable triple bound", None, || {
        let (r, per_call) = mean_time(1000, enumerate_eq3_bound);
        let cli = stdout_json(&eprb(std::env::temp_dir().as_path(), &["oracle", "eq3-bound"]));
        let pass = r.max_value == 3
            && r.assignments_checked == 64
            && per_call < Duration::from_millis(1)
            && cli["max_value"] == 3;
        Outcome {
            pass,
            detail: format!(
                "max {} min {} over {} assignments, {:.2?} per call (< 1 ms); CLI max {}",
                r.max_value, r.min_value, r.assignments_checked, per_call, cli["max_value"]
            ),
        }
    })
}

fn criterion_3() -> bool {
    check(3, "static model respects B <= 1", Some(Duration::from_secs(120)), || {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let seeds: Vec<u64> = (0..50).map(|_| rng.gen()).collect();
        let triples: Vec<[f64; 3]> = (0..20)
            .map(|_| [0; 3].map(|_| rng.gen_range(0.0..360.0)))
            .collect();
        let mut worst = (f64::NEG_INFINITY, 0, [0.0; 3]);
        for &seed in &seeds {
            for t in &triples {
                let log = run(ProtocolMode::ThreeSetting, STATIC1, &[(A, t[0]), (B, t[1]), (C, t[2])], 300_000, seed);
                let b = bell_statistic(&log).unwrap().statistic;
                if b > worst.0 {
                    worst = (b, seed, *t);
                }
            }
        }
        Outcome {
            pass: worst.0 <= 1.02,
            detail: format!(
                "1000 runs of M=3e5, max B = {:.4} (seed {}, angles {:.1?}) <= 1.02",
                worst.0, worst.1, worst.2
            ),
        }
    })
}

fn criterion_4() -> bool {
    check(4, "singlet reference violates B <= 1", Some(Duration::from_secs(60)), || {
        let log = run(ProtocolMode::ThreeSetting, SINGLET1, &[(A, 0.0), (B, 120.0), (C, 180.0)], 3_000_000, 4);
        let b = bell_statistic(&log).unwrap();
        Outcome {
            pass: (b.statistic - 2.0).abs() <= 0.02,
            detail: format!(
                "B = {:.4} ± {:.4} (E_ab {:.4}, E_ac {:.4}, E_bc {:.4}), target 2.00 ± 0.02",
                b.statistic, b.std_error, b.ab.value, b.ac.value, b.bc.value
            ),
        }
    })
}

fn criterion_5() -> bool {
    check(5, "CHSH", None, || {
        let tsirelson = [(A, 0.0), (C, 90.0), (B, 45.0), (D, 135.0)];
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let mut geometries = vec![tsirelson];
        for _ in 0..9 {
            geometries.push([A, B, C, D].map(|l| (l, rng.gen_range(0.0..360.0))));
        }
        let static_max = geometries
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let log = run(ProtocolMode::FourSetting, STATIC1, g, 400_000, 50 + i as u64);
                chsh_statistic(&log).unwrap().statistic.abs()
            })
            .fold(0.0, f64::max);
        let log = run(ProtocolMode::FourSetting, SINGLET1, &tsirelson, 4_000_000, 55);
        let s = chsh_statistic(&log).unwrap();
        Outcome {
            pass: static_max <= 2.02 && (s.statistic.abs() - 2.0 * SQRT_2).abs() <= 0.02,
            detail: format!(
                "static max |S| = {static_max:.4} over 10 geometries at M=4e5 (<= 2.02); \
                 singlet S = {:.4} ± {:.4} at M=4e6, |S| vs 2√2 = {:.4} (± 0.02)",
                s.statistic,
                s.std_error,
                2.0 * SQRT_2
            ),
        }
    })
}

fn criterion_6() -> bool {
    check(6, "coincidence selection in the time-tag model", Some(Duration::from_secs(120)), || {
        let model = ModelConfig::Station(StationConfig::TimeTag {
            periodicity: Periodicity::Two,
            delay_scale: 1.0,
            delay_exponent: 4.0,
        });
        let mut cfg = RunConfig::new(
            Protocol::uniform(ProtocolMode::ThreeSetting),
            1_000_000,
            model,
            table(&[(A, 0.0), (B, 30.0), (C, 150.0)]),
            6,
        );
        cfg.source.partner = Partner::Identical;
        let log = run_experiment(&cfg).unwrap();
        let raw = bell_statistic(&log).unwrap();
        let filtered = coincidence_filter(&log, CoincidenceWindow::new(0.1).unwrap()).unwrap();
        let b = bell_statistic(&filtered.log).unwrap();
        let worst_marginal = marginals(&log)
            .iter()
            .map(|c| (c.plus_frequency - 0.5).abs())
            .fold(0.0, f64::max);
        let gap = no_signaling_check(&log);
        Outcome {
            pass: b.statistic > 1.0 && worst_marginal <= 0.01 && gap <= 0.02,
            detail: format!(
                "filtered B = {:.4} ± {:.4} (> 1; target >= 1.5 {}), unfiltered B = {:.4}, \
                 retained {:.3}, max |marginal − 0.5| = {worst_marginal:.4}, no-signaling gap = {gap:.4}",
                b.statistic,
                b.std_error,
                if b.statistic >= 1.5 { "met" } else { "not met" },
                raw.statistic,
                filtered.retained_fraction
            ),
        }
    })
}

fn criterion_7() -> bool {
    check(7, "reachable sum vectors", Some(Duration::from_secs(10)), || {
        let mut sweep_ok = true;
        for a in 0..=4 {
            for b in 0..=4 {
                for c in 0..=4 {
                    let r = count_reachable_independent(a, b, c, true).unwrap();
                    sweep_ok &= r.exhaustive && r.exact_count == (a + 1) * (b + 1) * (c + 1);
                }
            }
        }
        let mut cf_ok = true;
        let mut counts = Vec::new();
        for m in 1..=6 {
            let r = count_reachable_counterfactual(m, false).unwrap();
            cf_ok &= r.strict_subset && r.sum_bounds_hold;
            counts.push(format!("{}/{}", r.count.exact_count, r.independent_count));
        }
        for m in 1..=4 {
            let r = count_reachable_counterfactual(m, true).unwrap();
            cf_ok &= r.strict_subset && r.sum_bounds_hold;
        }
        Outcome {
            pass: sweep_ok && cf_ok,
            detail: format!(
                "125 exhaustive counts match (N+1)^3 products: {sweep_ok}; counterfactual/independent \
                 for M=1..6: {}; strict subset and sum bounds (also 4 settings, M<=4): {cf_ok}",
                counts.join(" ")
            ),
        }
    })
}

fn criterion_8() -> bool {
    check(8, "feasibility demarcation on the 0.1 grid", Some(Duration::from_secs(5)), || {
        let v = |i: i32| i as f64 / 10.0;
        let (mut points, mut feasible, mut bad) = (0, 0, Vec::new());
        for i in -10..=10 {
            for j in -10..=10 {
                for k in -10..=10 {
                    let e = [v(i), v(j), v(k)];
                    let r = boole_feasibility(e[0], e[1], e[2]).unwrap();
                    points += 1;
                    let violates = e[0] + e[1] - e[2] > 1.0 + FEASIBILITY_TOLERANCE;
                    let closed = boole_closed_form(e[0], e[1], e[2])
                        .iter()
                        .all(|&m| m >= -FEASIBILITY_TOLERANCE);
                    let witnessed = r
                        .witness
                        .is_some_and(|w| witness_residual(&w, e) <= FEASIBILITY_TOLERANCE);
                    feasible += r.feasible as u32;
                    if (violates && r.feasible) || (closed && !witnessed) || (r.feasible != closed) {
                        bad.push(e);
                    }
                }
            }
        }
        Outcome {
            pass: bad.is_empty(),
            detail: format!(
                "{points} points, {feasible} feasible with verified witnesses, {} disagreements {:?}",
                bad.len(),
                bad.iter().take(3).collect::<Vec<_>>()
            ),
        }
    })
}

fn criterion_9() -> bool {
    check(9, "product-space impossible mass", None, || {
        let dir = TempDir::new().unwrap();
        let csv = "n,t_left,setting_left,outcome_left,delay_left,t_right,setting_right,outcome_right,delay_right\n\
                   1,1,a,+1,,1,b,+1,\n\
                   2,2,a,+1,,2,c,-1,\n\
                   3,3,b,-1,,3,c,+1,\n";
        fs::write(dir.path().join("example.csv"), csv).unwrap();
        let sidecar = r#"{"model_id": "example", "seed": 0, "protocol": "3-setting",
            "settings": {"left": {"a": 0.0, "b": 1.0}, "right": {"b": 1.0, "c": 2.0}}}"#;
        fs::write(dir.path().join("example.json"), sidecar).unwrap();
        let r = stdout_json(&eprb(dir.path(), &["oracle", "prob-space", "example.csv"]));
        let exact = (r["left"]["numerator"].as_u64(), r["left"]["denominator"].as_u64());

        let angles = [(A, 0.0), (B, 45.0), (C, 90.0), (D, 135.0)];
        let masses: Vec<f64> = (0..10)
            .flat_map(|seed| {
                let m = product_space_impossible_mass(&run(ProtocolMode::FourSetting, STATIC1, &angles, 10_000, seed))
                    .unwrap();
                [m.left.value(), m.right.value()]
            })
            .collect();
        let worst = masses.iter().map(|m| (m - 0.5).abs()).fold(0.0, f64::max);
        Outcome {
            pass: exact == (Some(4), Some(9)) && worst <= 0.02,
            detail: format!(
                "worked example = {}/{}; two-setting logs at M=1e4 (10 seeds, both sides): \
                 max |mass − 0.5| = {worst:.5} (<= 0.02)",
                r["left"]["numerator"], r["left"]["denominator"]
            ),
        }
    })
}

fn random_config(rng: &mut Xoshiro256PlusPlus) -> RunConfig {
    let p = if rng.gen() { Periodicity::One } else { Periodicity::Two };
    let model = match rng.gen_range(0..4) {
        0 => ModelConfig::Station(StationConfig::Static { periodicity: p }),
        1 => ModelConfig::Station(StationConfig::Dynamic {
            periodicity: p,
            drift_rate: rng.gen_range(-0.01..0.01),
        }),
        2 => ModelConfig::Station(StationConfig::TimeTag {
            periodicity: p,
            delay_scale: rng.gen_range(0.5..2.0),
            delay_exponent: rng.gen_range(1.0..6.0),
        }),
        _ => ModelConfig::SingletReference { periodicity: p },
    };
    let mode = if rng.gen() { ProtocolMode::ThreeSetting } else { ProtocolMode::FourSetting };
    let angles = [A, B, C, D].map(|l| (l, rng.gen_range(0.0..360.0)));
    let mut cfg = RunConfig::new(Protocol::uniform(mode), rng.gen_range(10_000..50_000), model, table(&angles), rng.gen());
    cfg.right_clock_jitter = rng.gen_range(0..3);
    cfg.source = SourceConfig {
        aux_dimension: rng.gen_range(0..3),
        partner: if rng.gen() { Partner::Opposite } else { Partner::Identical },
        ..SourceConfig::default()
    };
    cfg
}

fn criterion_10() -> bool {
    check(10, "worker count does not change logs", None, || {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(10);
        let csv = |log: &EventLog| {
            let mut buf = Vec::new();
            write_log_csv(log, &mut buf).unwrap();
            buf
        };
        let mut identical = 0;
        for _ in 0..10 {
            let cfg = random_config(&mut rng);
            let one = csv(&run_experiment_with_workers(&cfg, 1).unwrap());
            let eight = csv(&run_experiment_with_workers(&cfg, 8).unwrap());
            identical += (one == eight) as u32;
        }
        Outcome {
            pass: identical == 10,
            detail: format!("{identical}/10 random configs byte-identical for 1 vs 8 workers"),
        }
    })
}

#[test]
fn acceptance_criteria() {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(i, _)| i + 1)
        .collect();
    println!("{}/10 criteria passed", 10 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

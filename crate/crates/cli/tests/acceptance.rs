//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines always reach the test log; exits non-zero if any criterion fails.
//!
//! `cargo test -p mps-cli --test acceptance` runs everything; pass criterion
//! numbers (e.g. `-- 1 2 9`) to run a subset.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mps_core::stats::mean_relative_deviation;
use mps_core::stats::sample_relative_deviations;
use mps_core::*;
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHA: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("m{i}")).collect()
}

/// Three binomial standard errors around `p` for `trials` draws.
fn band(p: f64, trials: usize) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

fn c1_statistic_fixture() -> Outcome {
    let m =
        DistanceMatrix::from_columns(ids(2), &[vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
    let t = t_statistics(&m, &CandidateSet::all(&m), &MpsConfig::default()).unwrap();
    let want = 2.0 / 3f64.sqrt();
    let err = (t.values[0] + want).abs().max((t.values[1] - want).abs());
    outcome(
        err <= 1e-9,
        format!(
            "t = [{:.12}, {:.12}], max error {err:.1e} (tol 1e-9)",
            t.values[0], t.values[1]
        ),
    )
}

fn c2_exhaustive_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let instances = 24;
    let mut worst = 0.0f64;
    let mut p_range = (1.0f64, 0.0f64);
    for k in 0..instances {
        let width = rng.random_range(2..=3usize);
        let n = rng.random_range(2..=7usize);
        // One column is shifted down by a random amount so p spans (0, 1].
        let shift = rng.random_range(0.0..0.4);
        let cols: Vec<Vec<f64>> = (0..width)
            .map(|j| {
                (0..n)
                    .map(|_| {
                        let v: f64 = rng.random_range(0.3..1.0);
                        let v = if j == 0 { v - shift } else { v };
                        (v * 100.0).round() / 100.0
                    })
                    .collect()
            })
            .collect();
        let m = DistanceMatrix::from_columns(ids(width), &cols).unwrap();
        let c = CandidateSet::all(&m);
        let cfg = MpsConfig::default().with_permutations(10_000).with_seed(k);
        let exact = exhaustive_p_value(&m, &c, &cfg).unwrap();
        let stats = t_statistics(&m, &c, &cfg).unwrap();
        let null = null_distribution(&m, &c, &cfg, 0).unwrap();
        let sampled = p_value(t_min(&stats).value, &null, cfg.p_value_mode);
        worst = worst.max((exact - sampled).abs());
        p_range = (p_range.0.min(exact), p_range.1.max(exact));
    }
    outcome(
        worst <= 0.03,
        format!(
            "{instances} instances, exhaustive p in [{:.3}, {:.3}], max |sampled - exact| = {worst:.4} (tol 0.03)",
            p_range.0, p_range.1
        ),
    )
}

fn null_scenario(models: usize, prompts: usize, seed: u64) -> SyntheticScenario {
    SyntheticScenario::with_lineage(models, prompts, 0, DistanceModel::TruncatedGaussian)
        .with_seed(seed)
}

fn c3_null_calibration() -> Outcome {
    let trials = 2000;
    let cfg = MpsConfig::default()
        .with_permutations(300)
        .with_alpha(ALPHA);
    let r = monte_carlo(&null_scenario(10, 500, 3), trials, &cfg).unwrap();
    let rate = r.records.iter().filter(|t| t.ni_score <= ALPHA).count() as f64 / trials as f64;
    outcome(
        (0.02..=0.08).contains(&rate),
        format!("Pr(p <= 0.05) = {rate:.4} over {trials} trials (want [0.02, 0.08])"),
    )
}

fn c4_coverage() -> Outcome {
    let trials = 500;
    let floor = 1.0 - ALPHA - 3.0 * (ALPHA * 0.95 / trials as f64).sqrt();
    let cfg = MpsConfig::default()
        .with_permutations(500)
        .with_alpha(ALPHA);
    let mut pass = true;
    let mut parts = Vec::new();
    for tam in [1usize, 2] {
        for m in [10usize, 50] {
            let spec =
                SyntheticScenario::with_lineage(m, 1000, tam, DistanceModel::TruncatedGaussian)
                    .with_gap(0.3)
                    .with_seed(400 + 10 * tam as u64 + m as u64);
            let r = monte_carlo(&spec, trials, &cfg).unwrap();
            let ok = r.coverage_rate >= floor && r.mean_set_size <= tam as f64 + 0.6;
            pass &= ok;
            parts.push(format!(
                "TAM={tam} M={m}: coverage {:.3}, size {:.3}",
                r.coverage_rate, r.mean_set_size
            ));
        }
    }
    outcome(
        pass,
        format!(
            "{} (coverage >= {floor:.4}, size <= TAM + 0.6)",
            parts.join("; ")
        ),
    )
}

fn c5_efficiency_trend() -> Outcome {
    let trials = 1000;
    let params = ScenarioParams {
        unrelated_mean: 0.5,
        hop_means: [0.3, 0.3, 0.3],
        spread: 0.0,
    };
    let cfg = MpsConfig::default()
        .with_permutations(500)
        .with_alpha(ALPHA);
    let rates: Vec<f64> = [50usize, 200, 1000]
        .iter()
        .map(|&n| {
            let spec = SyntheticScenario::with_lineage(10, n, 1, DistanceModel::Bernoulli)
                .with_params(params)
                .with_seed(500 + n as u64);
            monte_carlo(&spec, trials, &cfg)
                .unwrap()
                .exact_recovery_rate
        })
        .collect();
    let monotone = rates.windows(2).all(|w| w[0] <= w[1]);
    outcome(
        monotone && rates[2] >= 0.9,
        format!(
            "exact recovery N=50: {:.3}, N=200: {:.3}, N=1000: {:.3} (non-decreasing, last >= 0.9)",
            rates[0], rates[1], rates[2]
        ),
    )
}

fn c6_risk_calibration() -> Outcome {
    let trials = 500;
    let b = band(ALPHA, trials);
    let cfg = MpsConfig::default()
        .with_permutations(500)
        .with_alpha(ALPHA);
    let null = monte_carlo(&null_scenario(10, 1000, 6), trials, &cfg).unwrap();
    let planted = SyntheticScenario::with_lineage(10, 1000, 1, DistanceModel::TruncatedGaussian)
        .with_gap(0.3)
        .with_seed(61);
    let hit = monte_carlo(&planted, trials, &cfg).unwrap();
    outcome(
        null.risky_rate <= ALPHA + b && hit.risky_rate >= 0.95 - b,
        format!(
            "TAM=0 risky {:.3} (<= {:.3}), TAM=1 risky {:.3} (>= {:.3})",
            null.risky_rate,
            ALPHA + b,
            hit.risky_rate,
            0.95 - b
        ),
    )
}

fn c7_ni_separation() -> Outcome {
    let cfg = MpsConfig::default().with_permutations(500);
    let mut worst_planted = 0.0f64;
    let fixtures = 40;
    for k in 0..fixtures {
        let model = if k % 2 == 0 {
            DistanceModel::TruncatedGaussian
        } else {
            DistanceModel::Bernoulli
        };
        let spec = SyntheticScenario::with_lineage(10, 500, 1 + (k as usize % 2), model)
            .with_seed(700 + k);
        let g = generate_scenario(&spec).unwrap();
        let score = ni_score(&g.matrix, &CandidateSet::all(&g.matrix), &cfg.with_seed(k)).unwrap();
        worst_planted = worst_planted.max(score);
    }
    let trials = 2000;
    let null = monte_carlo(
        &null_scenario(10, 200, 7),
        trials,
        &cfg.with_permutations(300),
    )
    .unwrap();
    outcome(
        worst_planted < 0.05 && (0.45..=0.55).contains(&null.mean_ni_score),
        format!(
            "max planted NI {worst_planted:.4} over {fixtures} fixtures (< 0.05), null mean NI {:.4} over {trials} (want [0.45, 0.55])",
            null.mean_ni_score
        ),
    )
}

fn strip_timings(report: &[u8]) -> String {
    let s = String::from_utf8(report.to_vec()).unwrap();
    let cut = s.find("\"timings\"").expect("report has timings");
    s[..cut].to_string()
}

fn c8_cli_determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let spec =
        SyntheticScenario::with_lineage(8, 150, 2, DistanceModel::TruncatedGaussian).with_seed(8);
    let g = generate_scenario(&spec).unwrap();
    let matrix = dir.path().join("m.csv");
    let prompts: Vec<String> = (0..150).map(|t| format!("q{t}")).collect();
    mps_cli::matrix_io::write_csv(std::fs::File::create(&matrix).unwrap(), &g.matrix, &prompts)
        .unwrap();
    let m = matrix.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["run", "--matrix", m, "--permutations", "400", "--seed", "9"],
        vec![
            "ni-score",
            "--matrix",
            m,
            "--permutations",
            "400",
            "--seed",
            "9",
        ],
        vec![
            "pairwise",
            "--matrix",
            m,
            "--suspect",
            "model_0",
            "--controls",
            "model_2,model_3,model_4,model_5",
            "--permutations",
            "400",
            "--seed",
            "9",
        ],
        vec![
            "simulate",
            "--trials",
            "12",
            "--prompts",
            "200",
            "--tam",
            "2",
            "--permutations",
            "200",
            "--seed",
            "9",
        ],
    ];
    let bin = Path::new(env!("CARGO_BIN_EXE_mps"));
    let mut mismatches = Vec::new();
    for args in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "8", "1", "8"] {
            let o = Command::new(bin)
                .args(args)
                .args(["--threads", threads])
                .output()
                .unwrap();
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            outputs.push(strip_timings(&o.stdout));
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            mismatches.push(args[0]);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{} commands x threads {{1, 8}} x 2 runs; differing: {:?}",
            commands.len(),
            mismatches
        ),
    )
}

fn matrix_strategy() -> impl Strategy<Value = DistanceMatrix> {
    (2usize..8, 2usize..40).prop_flat_map(|(m, n)| {
        prop::collection::vec(0.0f64..=0.8, m * n)
            .prop_map(move |v| DistanceMatrix::from_row_major(n, ids(m), v).unwrap())
    })
}

fn check(cond: bool, what: &str) -> std::result::Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

fn c9_property_suites() -> Outcome {
    const CASES: u32 = 128;
    let runner = || {
        TestRunner::new(PtConfig {
            failure_persistence: None,
            ..PtConfig::with_cases(CASES)
        })
    };
    let mut results: Vec<(&str, std::result::Result<(), String>)> = Vec::new();

    results.push((
        "translation invariance",
        runner()
            .run(&(matrix_strategy(), 0.0f64..=0.2), |(m, c)| {
                let values = m.as_row_major().iter().map(|v| v + c).collect();
                let s = DistanceMatrix::from_row_major(
                    m.prompt_count(),
                    m.model_ids().to_vec(),
                    values,
                )
                .unwrap();
                let a = sample_relative_deviations(&m, &CandidateSet::all(&m)).unwrap();
                let b = sample_relative_deviations(&s, &CandidateSet::all(&s)).unwrap();
                let same = a
                    .as_row_major()
                    .iter()
                    .zip(b.as_row_major())
                    .all(|(x, y)| (x - y).abs() < 1e-9);
                check(same, "deviations changed under a constant shift")
            })
            .map_err(|e| e.to_string()),
    ));

    results.push((
        "zero-sum of mean deviations",
        runner()
            .run(&matrix_strategy(), |m| {
                let d = sample_relative_deviations(&m, &CandidateSet::all(&m)).unwrap();
                check(
                    mean_relative_deviation(&d).iter().sum::<f64>().abs() < 1e-9,
                    "sum is not zero",
                )
            })
            .map_err(|e| e.to_string()),
    ));

    results.push((
        "permutation multiset preservation",
        runner()
            .run(&(matrix_strategy(), any::<u64>()), |(m, seed)| {
                let p = permute_once(
                    &m,
                    &CandidateSet::all(&m),
                    &mut mps_core::rng::round_rng(seed, 0, 0),
                )
                .unwrap();
                for t in 0..m.prompt_count() {
                    let mut a = m.row(t).to_vec();
                    let mut b = p.row(t).to_vec();
                    a.sort_by(f64::total_cmp);
                    b.sort_by(f64::total_cmp);
                    check(a == b, "row multiset changed")?;
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    ));

    results.push((
        "p-value monotonicity",
        runner()
            .run(
                &(
                    prop::collection::vec(-5.0f64..5.0, 1..200),
                    -6.0f64..6.0,
                    -6.0f64..6.0,
                ),
                |(s, a, b)| {
                    let null = NullDistribution::new(s, 0, 0).unwrap();
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    for mode in [PValueMode::Raw, PValueMode::AddOneSmoothing] {
                        check(
                            p_value(lo, &null, mode) <= p_value(hi, &null, mode),
                            "p decreased",
                        )?;
                    }
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    ));

    results.push((
        "token distance symmetry/range",
        runner()
            .run(&prop::collection::vec((0u64..4, 0u64..4), 1..60), |pairs| {
                let (x, y): (Vec<u64>, Vec<u64>) = pairs.into_iter().unzip();
                let (a, b) = (ModelTrace::tokens("a", x), ModelTrace::tokens("b", y));
                let ab = next_token_distance(&a, &b).unwrap();
                check(ab == next_token_distance(&b, &a).unwrap(), "asymmetric")?;
                check(ab.iter().all(|&v| v == 0.0 || v == 1.0), "not binary")
            })
            .map_err(|e| e.to_string()),
    ));

    results.push((
        "semantic distance symmetry/range/scale",
        runner()
            .run(
                &(
                    prop::collection::vec(
                        (0.1f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.1f64..3.0),
                        1..40,
                    ),
                    0.01f64..100.0,
                ),
                |(rows, scale)| {
                    let u: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1]).collect();
                    let v: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.2, r.3]).collect();
                    let su: Vec<Vec<f64>> = u
                        .iter()
                        .map(|x| x.iter().map(|c| c * scale).collect())
                        .collect();
                    let a = ModelTrace::embeddings("a", u).unwrap();
                    let b = ModelTrace::embeddings("b", v).unwrap();
                    let s = ModelTrace::embeddings("s", su).unwrap();
                    let ab = semantic_distance(&a, &b).unwrap();
                    check(ab == semantic_distance(&b, &a).unwrap(), "asymmetric")?;
                    check(ab.iter().all(|d| (0.0..=1.0).contains(d)), "out of range")?;
                    let sb = semantic_distance(&s, &b).unwrap();
                    check(
                        ab.iter().zip(&sb).all(|(x, y)| (x - y).abs() < 1e-9),
                        "scale dependent",
                    )
                },
            )
            .map_err(|e| e.to_string()),
    ));

    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    outcome(
        failed.is_empty(),
        format!(
            "{} suites x {CASES} cases; failures: {failed:?}",
            results.len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "statistic fixture", c1_statistic_fixture),
        (2, "exhaustive oracle equivalence", c2_exhaustive_oracle),
        (3, "null calibration", c3_null_calibration),
        (4, "coverage", c4_coverage),
        (5, "efficiency trend", c5_efficiency_trend),
        (6, "risk verdict calibration", c6_risk_calibration),
        (7, "NI score separation", c7_ni_separation),
        (8, "CLI determinism", c8_cli_determinism),
        (9, "property suites", c9_property_suites),
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance {id} [{verdict}] {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!o.pass);
    }
    if failures > 0 {
        println!("acceptance: {failures} criterion(s) failed");
        std::process::exit(1);
    }
}

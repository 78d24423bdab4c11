//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture` or `--show-output`).
//!
//! Independent brute-force oracles live in [`oracle`]; they share no code
//! with the implementation paths they check.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pood::records::{compute_reference, Polarity, SampleRecord, ScoreTable, ID_COHORT};
use pood::report::{build_ranked_report, build_severity_sweep, MethodRun, ReportMetric};
use pood::synth::{
    augment_with_noise, fit_dice_optimal, fit_toy_model, generate_world, run_benchmark,
    CorruptionKind, EntropyScorer, PerfMetric, WorldConfig,
};
use pood::thresholding::{fit_threshold, flag_scores, ThresholdPolicy};
use pood::{epd, ReferenceScore};

fn report_line(number: u32, label: &str, pass: bool) {
    println!(
        "[acceptance] criterion {number} ({label}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Brute-force references: linear threshold scans and pairwise counts.
mod oracle {
    /// Smallest observed id value whose <=-inclusive retention reaches `k`.
    fn tau_at_retention(id: &[f64], k: usize) -> f64 {
        let mut best: Option<f64> = None;
        for &candidate in id {
            let retained = id.iter().filter(|&&s| s <= candidate).count();
            if retained >= k {
                best = Some(match best {
                    Some(current) if current <= candidate => current,
                    _ => candidate,
                });
            }
        }
        best.expect("retention reachable: k <= n")
    }

    fn retention_floor(n_percent: f64, n: usize) -> usize {
        (((n_percent * n as f64) / 100.0).ceil() as usize).clamp(1, n)
    }

    pub fn tau(id: &[f64], n_percent: f64) -> f64 {
        tau_at_retention(id, retention_floor(n_percent, id.len()))
    }

    pub fn epd(id: &[f64], ood: &[(f64, f64)], s0: f64, n_percent: f64) -> f64 {
        let tau = tau(id, n_percent);
        let mut sum = 0.0;
        let mut retained = 0usize;
        for &(score, perf) in ood {
            if score <= tau {
                sum += s0 - perf;
                retained += 1;
            }
        }
        if retained == 0 {
            0.0
        } else {
            sum / ood.len() as f64
        }
    }

    pub fn fpr(id: &[f64], ood: &[f64], n_percent: f64) -> f64 {
        let tau = tau(id, n_percent);
        ood.iter().filter(|&&s| s <= tau).count() as f64 / ood.len() as f64
    }

    pub fn fpr_plus(id: &[f64], ood: &[f64], n_percent: f64) -> f64 {
        let n = id.len();
        let k0 = retention_floor(n_percent, n);
        let mut sum = 0.0;
        for k in k0..=n {
            let tau = tau_at_retention(id, k);
            sum += ood.iter().filter(|&&s| s <= tau).count() as f64 / ood.len() as f64;
        }
        sum / (n - k0 + 1) as f64
    }

    pub fn auroc(id: &[f64], ood: &[f64]) -> f64 {
        let mut sum = 0.0;
        for &o in ood {
            for &i in id {
                if o > i {
                    sum += 1.0;
                } else if o == i {
                    sum += 0.5;
                }
            }
        }
        sum / (id.len() as f64 * ood.len() as f64)
    }

    /// Average precision by exhaustive threshold sweep over distinct scores.
    pub fn aupr(id: &[f64], ood: &[f64]) -> f64 {
        let mut thresholds: Vec<f64> = id.iter().chain(ood).copied().collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        thresholds.reverse();
        let n_ood = ood.len() as f64;
        let mut ap = 0.0;
        let mut prev_recall = 0.0;
        for &t in &thresholds {
            let tp = ood.iter().filter(|&&s| s >= t).count() as f64;
            let fp = id.iter().filter(|&&s| s >= t).count() as f64;
            let precision = tp / (tp + fp);
            let recall = tp / n_ood;
            ap += (recall - prev_recall) * precision;
            prev_recall = recall;
        }
        ap
    }
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let n_percent = 95.0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n_id = rng.gen_range(1..=25);
        let n_ood = rng.gen_range(1..=25);
        // Quantized scores force heavy ties.
        let grid_score = |rng: &mut ChaCha8Rng| (rng.gen_range(0..=10) as f64) * 0.5 - 2.0;
        let id: Vec<f64> = (0..n_id).map(|_| grid_score(&mut rng)).collect();
        let ood: Vec<(f64, f64)> = (0..n_ood)
            .map(|_| (grid_score(&mut rng), rng.gen::<f64>()))
            .collect();
        let ood_scores: Vec<f64> = ood.iter().map(|&(s, _)| s).collect();
        let ood_perf: Vec<f64> = ood.iter().map(|&(_, p)| p).collect();
        let s0 = rng.gen::<f64>();

        let threshold =
            fit_threshold(&id, ThresholdPolicy::TprAtN { n_percent }).unwrap();
        let flags = flag_scores(&ood_scores, threshold);
        let reference = ReferenceScore::external(s0).unwrap();
        let checks = [
            (
                epd(&ood_perf, &flags, reference).unwrap().value,
                oracle::epd(&id, &ood, s0, n_percent),
            ),
            (
                pood::fpr_at_tpr(&id, &ood_scores, n_percent).unwrap(),
                oracle::fpr(&id, &ood_scores, n_percent),
            ),
            (
                pood::fpr_at_tpr_plus(&id, &ood_scores, n_percent).unwrap(),
                oracle::fpr_plus(&id, &ood_scores, n_percent),
            ),
            (
                pood::auroc(&id, &ood_scores).unwrap(),
                oracle::auroc(&id, &ood_scores),
            ),
            (
                pood::aupr(&id, &ood_scores).unwrap(),
                oracle::aupr(&id, &ood_scores),
            ),
        ];
        for (implementation, reference_value) in checks {
            worst = worst.max((implementation - reference_value).abs());
        }
        assert_eq!(threshold.tau, oracle::tau(&id, n_percent), "tau route mismatch");
    }
    let elapsed = started.elapsed();
    let pass = worst <= 1e-12 && elapsed.as_secs_f64() < 10.0;
    report_line(1, "oracle equivalence", pass);
    assert!(
        pass,
        "worst deviation {worst:e}, elapsed {:.2}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_2_trivial_detector() {
    let constant = 3.7;
    let id = vec![constant; 20];
    let perf: Vec<f64> = (0..15).map(|i| 0.1 + 0.05 * i as f64).collect();
    let ood_scores = vec![constant; perf.len()];
    let s0 = 0.91;

    let threshold = fit_threshold(&id, ThresholdPolicy::default()).unwrap();
    let flags = flag_scores(&ood_scores, threshold);
    let all_retained = flags.iter().all(|&f| f);
    let result = epd(&perf, &flags, ReferenceScore::external(s0).unwrap()).unwrap();

    let mut expected = 0.0;
    for &p in &perf {
        expected += s0 - p;
    }
    expected /= perf.len() as f64;

    let pass = all_retained && result.n_retained == result.n_total && result.value == expected;
    report_line(2, "trivial detector forced to retain everything", pass);
    assert!(pass, "flags {flags:?}, value {} vs {expected}", result.value);
}

#[test]
fn criterion_3_tpr_guarantee() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x79A6);
    let levels = [80.0, 90.0, 95.0, 99.0];
    let mut violations = 0usize;
    for trial in 0..10_000 {
        let n = rng.gen_range(1..=100);
        let scores: Vec<f64> = if trial % 10 == 0 {
            vec![(rng.gen_range(0..=6) as f64) * 0.25; n]
        } else {
            (0..n)
                .map(|_| (rng.gen_range(0..=8) as f64) * 0.25 - 1.0)
                .collect()
        };
        let n_percent = levels[trial % levels.len()];
        let threshold =
            fit_threshold(&scores, ThresholdPolicy::TprAtN { n_percent }).unwrap();
        let retained = flag_scores(&scores, threshold)
            .into_iter()
            .filter(|&f| f)
            .count();
        let floor = (((n_percent * n as f64) / 100.0).ceil() as usize).min(n);
        if retained < floor {
            violations += 1;
        }
    }
    let pass = violations == 0;
    report_line(3, "TPR retention floor, 10k trials", pass);
    assert!(pass, "{violations} violations");
}

#[test]
fn criterion_4_severity_sweep_shape() {
    let started = Instant::now();
    let config =
        WorldConfig::new(5, 20, 100, 100).with_kinds(vec![CorruptionKind::GaussianNoise]);
    let world = generate_world(&config).unwrap();
    let model = fit_toy_model(&world.train).unwrap();
    let scorer = EntropyScorer::new(model);
    let table = run_benchmark(&world, &model, &scorer, PerfMetric::Dsc).unwrap();
    let reference = compute_reference(&table).unwrap();

    let mut all_pass = true;
    for policy in [ThresholdPolicy::default(), ThresholdPolicy::NoOod] {
        let run = MethodRun {
            method_name: "entropy".to_string(),
            table: table.clone(),
            policy,
            reference,
        };
        let sweep = build_severity_sweep(&run).unwrap();
        assert_eq!(sweep.rows.len(), 6, "one row per severity");
        assert!(sweep.rows.iter().all(|r| r.n_samples >= 100));
        let epd_curve: Vec<f64> = sweep.rows.iter().map(|r| r.epd).collect();
        let roc_curve: Vec<f64> = sweep.rows.iter().map(|r| r.one_minus_auroc).collect();

        let a = epd_curve[0].abs() <= 0.02;
        let epd_drops: Vec<f64> = epd_curve
            .windows(2)
            .filter(|p| p[1] < p[0])
            .map(|p| p[0] - p[1])
            .collect();
        let b = epd_drops.len() <= 1 && epd_drops.iter().all(|&d| d <= 0.01);
        let roc_rises: Vec<f64> = roc_curve
            .windows(2)
            .filter(|p| p[1] > p[0])
            .map(|p| p[1] - p[0])
            .collect();
        let c = roc_rises.len() <= 1 && roc_rises.iter().all(|&d| d <= 0.01);
        let auroc_at_zero = 1.0 - roc_curve[0];
        let d = (0.4..=0.6).contains(&auroc_at_zero);
        if !(a && b && c && d) {
            eprintln!(
                "policy {policy:?}: a={a} b={b} c={c} d={d}; epd={epd_curve:?} roc={roc_curve:?}"
            );
            all_pass = false;
        }
    }
    let elapsed = started.elapsed();
    let pass = all_pass && elapsed.as_secs_f64() < 60.0;
    report_line(4, "severity sweep qualitative shape", pass);
    assert!(pass, "elapsed {:.2}s", elapsed.as_secs_f64());
}

#[test]
fn criterion_5_negative_epd_representable() {
    // Retained OOD samples outperform the reference.
    let mut records: Vec<SampleRecord> = (0..20)
        .map(|i| SampleRecord {
            sample_id: format!("id-{i}"),
            cohort: ID_COHORT.to_string(),
            ood_score: (i + 1) as f64,
            perf_score: 0.6,
            severity: None,
        })
        .collect();
    for (i, perf) in [0.95, 0.9].into_iter().enumerate() {
        records.push(SampleRecord {
            sample_id: format!("o-{i}"),
            cohort: "better-than-id".to_string(),
            ood_score: 2.0 + i as f64,
            perf_score: perf,
            severity: None,
        });
    }
    let table = ScoreTable::from_records(records, Polarity::HigherIsAnomalous).unwrap();
    let reference = compute_reference(&table).unwrap();
    let run = MethodRun {
        method_name: "gain".to_string(),
        table,
        policy: ThresholdPolicy::default(),
        reference,
    };
    let report = build_ranked_report(&[run], ReportMetric::EpdDsc, 95.0).unwrap();
    let cell = report.cells[0][0];
    let json = report.to_json();
    let markdown = report.to_markdown(None);

    let pass = cell < 0.0
        && json.contains(&format!("{cell}"))
        && markdown.contains(&format!("{cell:.4}"));
    report_line(5, "negative EPD rendered unclamped", pass);
    assert!(pass, "cell {cell}, markdown: {markdown}");
}

#[test]
fn criterion_6_reference_swap_protocol() {
    let mut wins = 0u32;
    let seeds = 10u64;
    for seed in 0..seeds {
        let config = WorldConfig::new(1000 + seed, 16, 40, 40)
            .with_kinds(vec![CorruptionKind::GaussianNoise]);
        let world = generate_world(&config).unwrap();

        let baseline = fit_toy_model(&world.train).unwrap();
        let augmented_train =
            augment_with_noise(&world.train, &[2, 3, 4, 5], 9000 + seed).unwrap();
        let robust = fit_dice_optimal(&augmented_train).unwrap();

        let baseline_table = run_benchmark(
            &world,
            &baseline,
            &EntropyScorer::new(baseline),
            PerfMetric::Dsc,
        )
        .unwrap();
        // The robust model is scored against the *baseline* model's id-test
        // performance.
        let s0 = compute_reference(&baseline_table).unwrap().s0;
        let robust_table = run_benchmark(
            &world,
            &robust,
            &EntropyScorer::new(robust),
            PerfMetric::Dsc,
        )
        .unwrap();

        let no_ood_epd = |table: ScoreTable| {
            let run = MethodRun {
                method_name: "no-ood".to_string(),
                table,
                policy: ThresholdPolicy::NoOod,
                reference: ReferenceScore::external(s0).unwrap(),
            };
            build_ranked_report(&[run], ReportMetric::EpdDsc, 95.0).unwrap().cells[0][0]
        };
        if no_ood_epd(robust_table) < no_ood_epd(baseline_table) {
            wins += 1;
        }
    }
    let pass = wins >= 8;
    report_line(6, "robust training lowers no-ood EPD", pass);
    assert!(pass, "pattern held in {wins}/{seeds} seeds");
}

#[test]
fn criterion_7_spearman_gating() {
    // Monotone pairs pin the gated correlation to +/-1.
    let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let y_up: Vec<f64> = x.iter().map(|v| v * 2.0 + 1.0).collect();
    let y_down: Vec<f64> = x.iter().map(|v| 100.0 - v * v).collect();
    let up = pood::spearman(&x, &y_up).unwrap();
    let down = pood::spearman(&x, &y_down).unwrap();
    let monotone_ok = up.gated_rho == 1.0 && down.gated_rho == -1.0;

    // Independent pairs must be gated to zero almost always.
    let mut gated_zero = 0u32;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EA0 + seed);
        let a: Vec<f64> = (0..30).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.gen::<f64>()).collect();
        if pood::spearman(&a, &b).unwrap().gated_rho == 0.0 {
            gated_zero += 1;
        }
    }
    let pass = monotone_ok && gated_zero >= 99;
    report_line(7, "correlation gate at 1e-4", pass);
    assert!(
        pass,
        "monotone {monotone_ok}, independent gated zero {gated_zero}/100"
    );
}

fn pood_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pood"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Reads a file with any line carrying the labeled timestamp removed.
fn read_without_timestamp(path: &Path) -> Vec<u8> {
    let raw = fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    let text = String::from_utf8_lossy(&raw);
    text.lines()
        .filter(|line| !line.contains("generated_at_unix"))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

#[test]
fn criterion_8_cli_determinism() {
    let root = std::env::temp_dir().join(format!("pood-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&root);
    fs::create_dir_all(&root).unwrap();
    let world = root.join("world");
    let scores = root.join("scores.csv");
    let report = root.join("report");
    let sweep = root.join("sweep.csv");

    // The same commands, flags and seeds run twice over the same paths.
    let run_pipeline = || {
        for args in [
            vec![
                "synth", "gen", "--seed", "21", "--n-train", "18", "--n-id-test", "30",
                "--n-ood-per-config", "12", "--kinds", "gaussian-noise,occlusion",
                "--out", world.to_str().unwrap(),
            ],
            vec![
                "synth", "run", "--world", world.to_str().unwrap(), "--scorer", "entropy",
                "--metric", "dsc", "--model", "augmented", "--seed", "3",
                "--out", scores.to_str().unwrap(),
            ],
            vec![
                "eval", "--id", scores.to_str().unwrap(), "--metric", "epd-dsc",
                "--tpr", "95", "--bootstrap", "150", "--level", "0.9", "--seed", "9",
                "--out", report.to_str().unwrap(),
            ],
            vec![
                "sweep", "--table", scores.to_str().unwrap(),
                "--out", sweep.to_str().unwrap(),
            ],
        ] {
            let output = pood_bin(&args);
            assert!(
                output.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
    };

    let files = [
        "world/manifest.json",
        "world/images/train-00000.img",
        "world/images/ood-00011.img",
        "scores.csv",
        "scores.meta.json",
        "report/report-epd-dsc.json",
        "report/report-epd-dsc.md",
        "report/report-epd-dsc.csv",
        "report/correlations.json",
        "report/correlations.csv",
        "report/run-config.json",
        "sweep.csv",
        "sweep.meta.json",
    ];

    run_pipeline();
    let snapshot: Vec<Vec<u8>> = files
        .iter()
        .map(|name| read_without_timestamp(&root.join(name)))
        .collect();
    run_pipeline();

    let mut pass = true;
    for (name, before) in files.iter().zip(&snapshot) {
        let after = read_without_timestamp(&root.join(name));
        if &after != before {
            eprintln!("{name} differs between reruns");
            pass = false;
        }
    }
    // The timestamp filter must be the only difference: raw JSON reports
    // still carry the labeled field.
    let raw = fs::read_to_string(root.join("report/report-epd-dsc.json")).unwrap();
    pass &= raw.contains("generated_at_unix");
    report_line(8, "byte-identical reruns modulo timestamp", pass);
    assert!(pass);
}

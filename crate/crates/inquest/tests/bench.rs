use std::process::Command;

use inquest::bench::{render_table, run_benchmark, summarize, BenchOptions, Engine};
use inquest::dataset::synthetic_file;
use inquest::{Config, Dataset};
use inquest_core::{ClusterStore, Mode, QuestionTree};
use proptest::prelude::*;

fn run(d: &mut Dataset, tree: &mut QuestionTree, clusters: &mut ClusterStore, engine: &Engine, opts: &BenchOptions) -> inquest::BenchmarkReport {
    run_benchmark(d, tree, clusters, engine, opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn aggregates_match_the_records(n in 3u32..40, shuffle in proptest::option::of(any::<u64>()), t in 2u32..12) {
        let width = 32 - (n - 1).leading_zeros() as usize;
        let mut d = Dataset::synthetic("p", n, width);
        let engine = Engine::oracle(&d);
        let mut tree = QuestionTree::new("p");
        let mut clusters = ClusterStore::default();
        let mut opts = BenchOptions::new(Config { t, ..Config::default() }, Mode::Closed);
        opts.shuffle_seed = shuffle;
        let r = run(&mut d, &mut tree, &mut clusters, &engine, &opts);

        let wins: Vec<f64> = r.samples.iter().filter(|s| s.success).map(|s| s.turns as f64).collect();
        prop_assert_eq!(r.n_samples, n as usize);
        prop_assert!((r.sr - 100.0 * wins.len() as f64 / n as f64).abs() < 1e-12);
        prop_assert!((0.0..=100.0).contains(&r.sr));
        match r.msc {
            Some(m) => prop_assert!((m - wins.iter().sum::<f64>() / wins.len() as f64).abs() < 1e-12),
            None => prop_assert!(wins.is_empty()),
        }
        let per_sample: u64 = r.samples.iter().map(|s| s.qgc).sum();
        prop_assert_eq!(per_sample, r.total_qgc);
        prop_assert!((r.mean_qgc - r.total_qgc as f64 / n as f64).abs() < 1e-12);
        for s in &r.samples {
            prop_assert!(s.turns <= t);
            prop_assert!(s.max_turn_qgc <= 10);
            prop_assert!(s.target_always_in_set);
        }
        let again = summarize(r.dataset_id.clone(), Mode::Closed, r.samples.clone(), r.total_qgc, r.other_calls);
        prop_assert_eq!(again, r);
    }
}

#[test]
fn shuffle_changes_order_but_not_membership() {
    let mut d = Dataset::synthetic("s", 16, 4);
    let engine = Engine::oracle(&d);
    let mut opts = BenchOptions::new(Config::default(), Mode::Closed);
    opts.shuffle_seed = Some(3);
    let r = run(&mut d, &mut QuestionTree::new("s"), &mut ClusterStore::default(), &engine, &opts);
    let mut ids: Vec<String> = r.samples.iter().map(|s| s.id.clone()).collect();
    let file_order: Vec<String> = (0..16).map(|i| i.to_string()).collect();
    assert_ne!(ids, file_order);
    ids.sort_by_key(|s| s.parse::<u32>().unwrap());
    assert_eq!(ids, file_order);
}

#[test]
fn modes_other_than_closed_need_a_provider() {
    let mut d = Dataset::synthetic("s", 4, 2);
    let engine = Engine::oracle(&d);
    let opts = BenchOptions::new(Config::default(), Mode::Open);
    let err = run_benchmark(&mut d, &mut QuestionTree::new("s"), &mut ClusterStore::default(), &engine, &opts).unwrap_err();
    assert!(err.to_string().contains("open"));
}

#[test]
fn table_is_aligned() {
    let mut d = Dataset::synthetic("s", 8, 3);
    let engine = Engine::oracle(&d);
    let r = run(&mut d, &mut QuestionTree::new("s"), &mut ClusterStore::default(), &engine, &BenchOptions::new(Config::default(), Mode::Closed));
    let table = render_table(&r);
    // value column starts where the padding after the label ends
    let cols: Vec<usize> = table
        .lines()
        .map(|l| {
            let gap = l.find("  ").unwrap();
            l.len() - l[gap..].trim_start().len()
        })
        .collect();
    assert!(cols.windows(2).all(|w| w[0] == w[1]), "{table}");
}

#[test]
fn cli_runs_bounds_and_benchmarks() {
    let exe = env!("CARGO_BIN_EXE_bench");
    let out = Command::new(exe).args(["qgc-bounds", "--m", "3", "--ds", "3", "--k", "10"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exhaustive_first       259"));
    assert!(text.contains("exhaustive_subsequent  216"));
    assert!(text.contains("mcts_max_per_turn      30"));

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("syn.json");
    std::fs::write(&data, serde_json::to_string(&synthetic_file("syn", 16, 4)).unwrap()).unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "K = 10\nT = 20\n").unwrap();
    let snap = dir.path().join("tree.json");
    let report = dir.path().join("report.json");
    let bench = |extra: &[&str]| {
        let mut args = vec!["run", "--dataset", data.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--snapshot", snap.to_str().unwrap()];
        args.extend_from_slice(extra);
        Command::new(exe).args(&args).output().unwrap()
    };
    let first = bench(&["--report", report.to_str().unwrap()]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(String::from_utf8(first.stdout).unwrap().contains("100.00"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["n_samples"], 16);
    assert!(doc["total_qgc"].as_u64().unwrap() > 0);
    assert!(dir.path().join("tree.clusters.json").exists());

    let second = bench(&[]);
    let table = String::from_utf8(second.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("total QGC") && l.trim_end().ends_with(" 0")), "{table}");

    let bad = Command::new(exe).args(["run", "--dataset", "/nonexistent.json"]).output().unwrap();
    assert!(!bad.status.success());
    let llm = Command::new(exe).args(["run", "--dataset", data.to_str().unwrap(), "--generator", "llm"]).env_remove("INQUEST_LLM_ENDPOINT").output().unwrap();
    assert!(!llm.status.success());
}

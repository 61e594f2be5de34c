//! End-to-end command tests: exit codes, error reporting, flag behavior
//! and ingest idempotence, all through the real binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blobaudit::synth::{self, FixtureKind};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_blobaudit")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().expect("spawn")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

struct FixtureDirs {
    root: PathBuf,
    dataset: PathBuf,
}

fn ingest_fixture(tmp: &Path, kind: FixtureKind) -> FixtureDirs {
    let fixture = synth::generate(kind, kind.default_seed());
    fixture.write_to(tmp).unwrap();
    let dataset = tmp.join("dataset");
    let output = run(&[
        "ingest",
        "--blocks",
        tmp.join("blocks.csv").to_str().unwrap(),
        "--txs",
        tmp.join("txs.csv").to_str().unwrap(),
        "--mempool",
        tmp.join("mempool.csv").to_str().unwrap(),
        "--labels-builders",
        tmp.join("labels_builders.csv").to_str().unwrap(),
        "--labels-rollups",
        tmp.join("labels_rollups.csv").to_str().unwrap(),
        "--labels-blobscriptions",
        tmp.join("labels_blobscriptions.csv").to_str().unwrap(),
        "--out",
        dataset.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    FixtureDirs {
        root: tmp.to_path_buf(),
        dataset,
    }
}

#[test]
fn usage_errors_exit_2() {
    let output = run(&["audit-builders", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn corrupt_line_exits_3_with_line_number_in_report() {
    let tmp = tempfile::tempdir().unwrap();
    let fixture = synth::generate(FixtureKind::Efficiency, synth::EFFICIENCY_SEED);
    fixture.write_to(tmp.path()).unwrap();
    // Corrupt one record in the blocks file.
    let blocks_path = tmp.path().join("blocks.csv");
    let mut body = std::fs::read_to_string(&blocks_path).unwrap();
    let third_line_start = body
        .char_indices()
        .filter(|&(_, c)| c == '\n')
        .nth(2)
        .map(|(i, _)| i + 1)
        .unwrap();
    body.insert_str(third_line_start, "garbage,record\n");
    std::fs::write(&blocks_path, body).unwrap();

    let out = tmp.path().join("dataset");
    let output = run(&[
        "ingest",
        "--blocks",
        blocks_path.to_str().unwrap(),
        "--txs",
        tmp.path().join("txs.csv").to_str().unwrap(),
        "--mempool",
        tmp.path().join("mempool.csv").to_str().unwrap(),
        "--labels-builders",
        tmp.path().join("labels_builders.csv").to_str().unwrap(),
        "--labels-rollups",
        tmp.path().join("labels_rollups.csv").to_str().unwrap(),
        "--labels-blobscriptions",
        tmp.path()
            .join("labels_blobscriptions.csv")
            .to_str()
            .unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_of(&output).contains("line 4"));

    // The ingest report carries the reject with its line number.
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ingest_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["clean"], false);
    let rejects = report["files"][0]["rejected"].as_array().unwrap();
    assert_eq!(rejects[0]["line"], 4);
}

#[test]
fn ingest_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = ingest_fixture(tmp.path(), FixtureKind::Detectors);
    let first = std::fs::read(dirs.dataset.join("dataset.json")).unwrap();
    let first_manifest = std::fs::read(dirs.dataset.join("manifest.json")).unwrap();

    // Re-run into a different directory; bytes must match.
    let again = tmp.path().join("dataset2");
    let output = run(&[
        "ingest",
        "--blocks",
        dirs.root.join("blocks.csv").to_str().unwrap(),
        "--txs",
        dirs.root.join("txs.csv").to_str().unwrap(),
        "--mempool",
        dirs.root.join("mempool.csv").to_str().unwrap(),
        "--labels-builders",
        dirs.root.join("labels_builders.csv").to_str().unwrap(),
        "--labels-rollups",
        dirs.root.join("labels_rollups.csv").to_str().unwrap(),
        "--labels-blobscriptions",
        dirs.root
            .join("labels_blobscriptions.csv")
            .to_str()
            .unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(first, std::fs::read(again.join("dataset.json")).unwrap());
    assert_eq!(
        first_manifest,
        std::fs::read(again.join("manifest.json")).unwrap()
    );
}

#[test]
fn bucket_flag_changes_only_aggregation_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = ingest_fixture(tmp.path(), FixtureKind::Efficiency);
    let monthly_dir = tmp.path().join("monthly");
    let weekly_dir = tmp.path().join("weekly");
    for (bucket, dir) in [("monthly", &monthly_dir), ("weekly", &weekly_dir)] {
        let output = run(&[
            "audit-builders",
            "--dataset",
            dirs.dataset.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--bucket",
            bucket,
        ]);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    let monthly: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(monthly_dir.join("builders_report.json")).unwrap(),
    )
    .unwrap();
    let weekly: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(weekly_dir.join("builders_report.json")).unwrap(),
    )
    .unwrap();
    // Same verdicts, same builder table; only the period keys change.
    assert_eq!(monthly["overall"], weekly["overall"]);
    assert_eq!(monthly["by_builder"], weekly["by_builder"]);
    assert_ne!(monthly["by_period"], weekly["by_period"]);
    let total = |doc: &serde_json::Value| -> u64 {
        doc["by_period"]
            .as_object()
            .unwrap()
            .values()
            .map(|row| row["total_blocks"].as_u64().unwrap())
            .sum()
    };
    assert_eq!(total(&monthly), total(&weekly));
}

#[test]
fn delay_filter_flag_defaults_to_100_seconds() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = ingest_fixture(tmp.path(), FixtureKind::Efficiency);
    let default_dir = tmp.path().join("default");
    let explicit_dir = tmp.path().join("explicit");
    let loose_dir = tmp.path().join("loose");
    for (dir, extra) in [
        (&default_dir, None),
        (&explicit_dir, Some("100")),
        (&loose_dir, Some("1000")),
    ] {
        let mut args = vec![
            "audit-builders",
            "--dataset",
            dirs.dataset.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ];
        if let Some(filter) = extra {
            args.extend(["--delay-filter", filter]);
        }
        let output = run(&args);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    let read = |dir: &Path| std::fs::read(dir.join("builders_monthly.csv")).unwrap();
    assert_eq!(read(&default_dir), read(&explicit_dir));
    // Loosening the filter admits the slow poison transactions, so floors
    // rise and the planted counts break.
    assert_ne!(read(&default_dir), read(&loose_dir));
}

#[test]
fn simulate_two_bidder_sweep_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let output = run(&[
        "simulate",
        "--bidders",
        "2",
        "--r-max",
        "1.0",
        "--grid",
        "201",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = std::fs::read_to_string(out.join("simulate.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let revenue: f64 = fields[0].parse().unwrap();
        if fields[1].is_empty() {
            continue; // degenerate point at zero revenue
        }
        let bid: f64 = fields[1].parse().unwrap();
        assert!(
            (bid - revenue / 2.0).abs() <= 1e-9,
            "bid {bid} at revenue {revenue}"
        );
    }
}

#[test]
fn bundle_advisor_bundles_the_spec_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let output = run(&[
        "bundle-advisor",
        "--revenues",
        "0.4,0.6",
        "--discount",
        "geometric:0.95",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("bundle_decision.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["decision"], "bundle-all");
}

#[test]
fn non_decreasing_discount_table_exits_4_naming_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let output = run(&[
        "simulate",
        "--discount",
        "table:1.0,1.1",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr_of(&output).contains("strictly decreasing"));
}

#[test]
fn invalid_bidder_count_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let output = run(&[
        "simulate",
        "--bidders",
        "0",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(stderr_of(&output).contains("bidder count"));
}

#[test]
fn empty_dataset_audit_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // A dataset whose blocks carry no blob transactions.
    std::fs::create_dir_all(tmp.path().join("dataset")).unwrap();
    let files = [
        ("blocks.csv", "#blobaudit blocks v1\n1,12000,0x,0,\n"),
        ("txs.csv", "#blobaudit txs v1\n"),
        ("mempool.csv", "#blobaudit mempool v1\n"),
        ("labels_builders.csv", "#blobaudit labels-builders v1\n"),
        ("labels_rollups.csv", "#blobaudit labels-rollups v1\n"),
        (
            "labels_blobscriptions.csv",
            "#blobaudit labels-blobscriptions v1\n",
        ),
    ];
    for (name, contents) in files {
        std::fs::write(tmp.path().join(name), contents).unwrap();
    }
    let dataset = tmp.path().join("dataset");
    let output = run(&[
        "ingest",
        "--blocks",
        tmp.path().join("blocks.csv").to_str().unwrap(),
        "--txs",
        tmp.path().join("txs.csv").to_str().unwrap(),
        "--mempool",
        tmp.path().join("mempool.csv").to_str().unwrap(),
        "--labels-builders",
        tmp.path().join("labels_builders.csv").to_str().unwrap(),
        "--labels-rollups",
        tmp.path().join("labels_rollups.csv").to_str().unwrap(),
        "--labels-blobscriptions",
        tmp.path()
            .join("labels_blobscriptions.csv")
            .to_str()
            .unwrap(),
        "--out",
        dataset.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let output = run(&[
        "audit-builders",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        tmp.path().join("audit").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_of(&output).contains("no blob-carrying blocks"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("auction.conf");
    std::fs::write(
        &config_path,
        "# sweep setup\nbidders=3\nr-max=2.0\ndiscount=geometric:0.9\n",
    )
    .unwrap();
    let out = tmp.path().join("sim");
    let output = run(&[
        "simulate",
        "--config",
        config_path.to_str().unwrap(),
        "--bidders",
        "4",
        "--grid",
        "101",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("simulate_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["config"]["bidders"], 4); // flag wins
    assert_eq!(doc["config"]["distribution"]["uniform"]["r_max"], 2.0);
}

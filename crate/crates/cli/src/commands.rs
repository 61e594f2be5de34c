//! The five commands as library functions. `main.rs` adds flag parsing and
//! exit-code mapping; tests call these directly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use blobaudit_core::auction::{
    best_response_fixed_point, builder_optimal_price, bundle_vs_split, equilibrium_bid,
    inclusion_probability, AuctionConfig, Bid, BundleDecision, SeriesStart,
};
use blobaudit_core::builder::{aggregate, audit_blocks, AuditOptions, EfficiencyReport};
use blobaudit_core::dataset::Dataset;
use blobaudit_core::model::TimestampMs;
use blobaudit_core::rollup::{
    blob_landscape, detect_continuous_sending, detect_double_sending, delay_impact, economic_loss,
    DelayImpact, RollupAuditError,
};
use blobaudit_core::time::Bucket;
use serde::Serialize;

use crate::error::AppError;
use crate::ingest::{self, ParseReport};
use crate::manifest::RunManifest;
use crate::report::{self, write_json};

pub struct IngestPaths<'a> {
    pub blocks: &'a Path,
    pub txs: &'a Path,
    pub mempool: &'a Path,
    pub labels_builders: &'a Path,
    pub labels_rollups: &'a Path,
    pub labels_blobscriptions: &'a Path,
}

#[derive(Serialize)]
struct IngestReportDoc<'a> {
    schema_version: u32,
    files: &'a [ParseReport],
    clean: bool,
}

/// Parse, assemble, validate and write the canonical dataset.
///
/// Any rejected line or dataset violation is fatal: the ingest report
/// (with line numbers) is still written, then the command errors.
pub fn cmd_ingest(paths: &IngestPaths<'_>, out_dir: &Path) -> Result<Dataset, AppError> {
    fs::create_dir_all(out_dir)?;
    let (blocks, blocks_report) = ingest::parse_blocks(paths.blocks)?;
    let (txs, txs_report) = ingest::parse_txs(paths.txs)?;
    let (mempool, mempool_report) = ingest::parse_mempool(paths.mempool)?;
    let (labels, label_reports) = ingest::parse_labels(
        paths.labels_builders,
        paths.labels_rollups,
        paths.labels_blobscriptions,
    )?;

    let mut file_reports = vec![blocks_report, txs_report, mempool_report];
    file_reports.extend(label_reports);
    let clean = file_reports.iter().all(ParseReport::is_clean);
    write_json(
        &out_dir.join("ingest_report.json"),
        &IngestReportDoc {
            schema_version: report::SCHEMA_VERSION,
            files: &file_reports,
            clean,
        },
    )?;
    if !clean {
        let total: usize = file_reports.iter().map(|r| r.rejected.len()).sum();
        let first = file_reports
            .iter()
            .find(|r| !r.is_clean())
            .expect("at least one dirty file");
        return Err(AppError::Data(format!(
            "{total} rejected line(s); first: {} line {}: {}",
            first.file, first.rejected[0].line, first.rejected[0].reason
        )));
    }

    let dataset = Dataset::assemble(blocks, txs, mempool, labels)?;
    let dataset_path = out_dir.join("dataset.json");
    let mut body = serde_json::to_string(&dataset)?;
    body.push('\n');
    fs::write(&dataset_path, body)?;

    let mut manifest = RunManifest::new("ingest", BTreeMap::new());
    for input in [
        paths.blocks,
        paths.txs,
        paths.mempool,
        paths.labels_builders,
        paths.labels_rollups,
        paths.labels_blobscriptions,
    ] {
        manifest.add_input(input)?;
    }
    manifest.add_output(&dataset_path)?;
    manifest.add_output(&out_dir.join("ingest_report.json"))?;
    manifest.write(out_dir)?;
    Ok(dataset)
}

pub fn load_dataset(dataset_dir: &Path) -> Result<Dataset, AppError> {
    let path = dataset_dir.join("dataset.json");
    let body = fs::read_to_string(&path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&body)?)
}

fn audit_parameters(options: &AuditOptions) -> BTreeMap<String, String> {
    BTreeMap::from([
        (
            "delay_filter_secs".into(),
            format!("{}", options.delay_filter_secs),
        ),
        ("pool_mode".into(), format!("{:?}", options.pool_mode).to_lowercase()),
        ("floor_mode".into(), format!("{:?}", options.floor_mode).to_lowercase()),
        ("bucket".into(), format!("{:?}", options.bucket).to_lowercase()),
    ])
}

/// Classify every blob-carrying block and write the efficiency reports.
pub fn cmd_audit_builders(
    dataset_dir: &Path,
    options: &AuditOptions,
    out_dir: &Path,
) -> Result<EfficiencyReport, AppError> {
    let dataset = load_dataset(dataset_dir)?;
    fs::create_dir_all(out_dir)?;
    let verdicts = audit_blocks(&dataset, options).map_err(AppError::data)?;
    if verdicts.is_empty() {
        return Err(AppError::Data(
            "dataset contains no blob-carrying blocks to audit".into(),
        ));
    }
    let report = aggregate(&dataset, &verdicts, options.bucket).map_err(AppError::data)?;
    let outputs = report::write_efficiency_reports(out_dir, &report)?;

    let mut manifest = RunManifest::new("audit-builders", audit_parameters(options));
    manifest.add_input(&dataset_dir.join("dataset.json"))?;
    for output in &outputs {
        manifest.add_output(output)?;
    }
    manifest.write(out_dir)?;
    Ok(report)
}

pub struct RollupAuditOptions {
    pub bucket: Bucket,
    /// Delay-impact window; the dataset's time range when absent.
    pub window: Option<(i64, i64)>,
    pub min_blobscription_blobs: u32,
}

impl Default for RollupAuditOptions {
    fn default() -> Self {
        RollupAuditOptions {
            bucket: Bucket::Monthly,
            window: None,
            min_blobscription_blobs: 1,
        }
    }
}

pub struct RollupAuditOutcome {
    pub continuous: Vec<blobaudit_core::rollup::PatternFinding>,
    pub double: Vec<blobaudit_core::rollup::PatternFinding>,
    pub loss: blobaudit_core::rollup::LossReport,
    pub delay: Option<DelayImpact>,
    pub landscape: blobaudit_core::rollup::Landscape,
}

/// Run both detectors, the loss accounting, the delay impact and the
/// landscape, and write the rollup reports.
pub fn cmd_audit_rollups(
    dataset_dir: &Path,
    options: &RollupAuditOptions,
    out_dir: &Path,
) -> Result<RollupAuditOutcome, AppError> {
    let dataset = load_dataset(dataset_dir)?;
    fs::create_dir_all(out_dir)?;
    let landscape = blob_landscape(&dataset);
    if landscape.total_txs() == 0 {
        return Err(AppError::Data(
            "dataset contains no blob transactions to audit".into(),
        ));
    }
    let continuous = detect_continuous_sending(&dataset).map_err(AppError::data)?;
    let double = detect_double_sending(&dataset).map_err(AppError::data)?;
    let loss =
        economic_loss(&dataset, &continuous, &double, options.bucket).map_err(AppError::data)?;
    let window = options
        .window
        .map(|(a, b)| (TimestampMs::new(a), TimestampMs::new(b)))
        .unwrap_or((
            dataset.time_range.0,
            TimestampMs::new(dataset.time_range.1.as_ms() + 1),
        ));
    let delay = match delay_impact(&dataset, window, options.min_blobscription_blobs) {
        Ok(impact) => Some(impact),
        Err(RollupAuditError::EmptyWindow) => None,
        Err(e) => return Err(AppError::data(e)),
    };

    let outputs = report::write_rollup_reports(
        out_dir,
        &continuous,
        &double,
        &loss,
        delay.as_ref(),
        &landscape,
    )?;

    let mut parameters = BTreeMap::from([
        ("bucket".into(), format!("{:?}", options.bucket).to_lowercase()),
        (
            "min_blobscription_blobs".into(),
            options.min_blobscription_blobs.to_string(),
        ),
    ]);
    parameters.insert(
        "window_ms".into(),
        format!("{}..{}", window.0.as_ms(), window.1.as_ms()),
    );
    let mut manifest = RunManifest::new("audit-rollups", parameters);
    manifest.add_input(&dataset_dir.join("dataset.json"))?;
    for output in &outputs {
        manifest.add_output(output)?;
    }
    manifest.write(out_dir)?;

    Ok(RollupAuditOutcome {
        continuous,
        double,
        loss,
        delay,
        landscape,
    })
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    schema_version: u32,
    config: &'a AuctionConfig,
    grid_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    builder_optimal_price: Option<OptimalPriceDoc>,
}

#[derive(Serialize)]
struct OptimalPriceDoc {
    price: f64,
    binding: String,
}

/// Sweep the revenue grid: equilibrium bid, inclusion probability and
/// expected utility per point, optionally alongside the best-response
/// fixed point.
pub fn cmd_simulate(
    config: &AuctionConfig,
    grid_size: usize,
    revenues: Option<&[f64]>,
    with_fixed_point: bool,
    out_dir: &Path,
) -> Result<(), AppError> {
    fs::create_dir_all(out_dir)?;
    let fixed_point = if with_fixed_point {
        Some(best_response_fixed_point(config, grid_size)?)
    } else {
        None
    };

    let r_max = config.distribution.support_max();
    let step = r_max / (grid_size - 1) as f64;
    let mut rows = String::from(
        "revenue,bid,inclusion_probability,expected_utility,fixed_point_bid\n",
    );
    for i in 0..grid_size {
        let revenue = i as f64 * step;
        let pi = inclusion_probability(revenue, config);
        let (bid_field, utility_field) = match equilibrium_bid(revenue, config) {
            Ok(Bid::Price(p)) => (format!("{p}"), format!("{}", pi * (revenue - p))),
            Ok(Bid::Abstain) => (String::new(), "0".to_string()),
            Err(_) => (String::new(), String::new()),
        };
        let fp_field = fixed_point
            .as_ref()
            .and_then(|fp| fp.bids[i])
            .map(|b| format!("{b}"))
            .unwrap_or_default();
        rows.push_str(&format!(
            "{revenue},{bid_field},{pi},{utility_field},{fp_field}\n"
        ));
    }
    let csv_path = out_dir.join("simulate.csv");
    fs::write(&csv_path, rows)?;

    let optimal = match revenues {
        Some(revs) => {
            let p = builder_optimal_price(config, revs)?;
            Some(OptimalPriceDoc {
                price: p.price,
                binding: format!("{:?}", p.binding).to_lowercase(),
            })
        }
        None => None,
    };
    let summary_path = out_dir.join("simulate_summary.json");
    write_json(
        &summary_path,
        &SimulateSummary {
            schema_version: report::SCHEMA_VERSION,
            config,
            grid_size,
            builder_optimal_price: optimal,
        },
    )?;

    let mut parameters = BTreeMap::from([
        ("grid".into(), grid_size.to_string()),
        ("with_fixed_point".into(), with_fixed_point.to_string()),
    ]);
    if let Some(revs) = revenues {
        parameters.insert(
            "revenues".into(),
            revs.iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let mut manifest = RunManifest::new("simulate", parameters);
    manifest.add_output(&csv_path)?;
    manifest.add_output(&summary_path)?;
    manifest.write(out_dir)?;
    Ok(())
}

#[derive(Serialize)]
struct BundleDecisionDoc<'a> {
    schema_version: u32,
    config: &'a AuctionConfig,
    revenues: &'a [f64],
    series_start: &'a str,
    decision: &'a str,
    best_partition: &'a [Vec<usize>],
    best_utility: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bundle_all_utility: Option<f64>,
    candidates: Vec<CandidateDoc>,
}

#[derive(Serialize)]
struct CandidateDoc {
    parts: Vec<Vec<usize>>,
    utility: f64,
}

/// Decide bundle vs split for a batch of blob revenues and write the
/// decision record.
pub fn cmd_bundle_advisor(
    config: &AuctionConfig,
    revenues: &[f64],
    start: SeriesStart,
    out_dir: &Path,
) -> Result<BundleDecision, AppError> {
    fs::create_dir_all(out_dir)?;
    let decision = bundle_vs_split(revenues, config, start)?;
    let doc = BundleDecisionDoc {
        schema_version: report::SCHEMA_VERSION,
        config,
        revenues,
        series_start: match start {
            SeriesStart::CurrentSlot => "current-slot",
            SeriesStart::NextSlot => "next-slot",
        },
        decision: if decision.is_bundle_all() {
            "bundle-all"
        } else {
            "split"
        },
        best_partition: &decision.best.parts,
        best_utility: decision.best.utility,
        bundle_all_utility: decision.bundle_all_utility,
        candidates: decision
            .candidates
            .iter()
            .map(|c| CandidateDoc {
                parts: c.parts.clone(),
                utility: c.utility,
            })
            .collect(),
    };
    let json_path = out_dir.join("bundle_decision.json");
    write_json(&json_path, &doc)?;

    let mut csv = String::from("rank,partition,utility\n");
    for (rank, c) in decision.candidates.iter().enumerate() {
        let parts: Vec<String> = c
            .parts
            .iter()
            .map(|p| {
                p.iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        csv.push_str(&format!("{},{},{}\n", rank + 1, parts.join("|"), c.utility));
    }
    let csv_path = out_dir.join("bundle_candidates.csv");
    fs::write(&csv_path, csv)?;

    let parameters = BTreeMap::from([
        (
            "revenues".into(),
            revenues
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("series_start".into(), doc.series_start.to_string()),
    ]);
    let mut manifest = RunManifest::new("bundle-advisor", parameters);
    manifest.add_output(&json_path)?;
    manifest.add_output(&csv_path)?;
    manifest.write(out_dir)?;
    Ok(decision)
}

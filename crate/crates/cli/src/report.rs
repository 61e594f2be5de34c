//! Report serialization: JSON documents with a schema version and stable
//! key order, plus flat CSV tables. Formatting is fixed so reruns are
//! byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use blobaudit_core::builder::EfficiencyReport;
use blobaudit_core::model::Money;
use blobaudit_core::rollup::{DelayImpact, Landscape, LossReport, PatternFinding, PatternKind};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

fn proportion(inefficient: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        inefficient as f64 / total as f64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsDoc {
    pub inefficient_blocks: u64,
    pub total_blocks: u64,
    pub inefficient_proportion: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuilderDoc {
    pub efficient_blocks: u64,
    pub inefficient_blocks: u64,
    pub total_blocks: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfitDoc {
    pub type3_profit_wei: u128,
    pub mempool_potential_wei: u128,
    pub difference_wei: i128,
}

/// The builder-efficiency report document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EfficiencyDoc {
    pub schema_version: u32,
    pub overall: CountsDoc,
    pub by_period: BTreeMap<String, CountsDoc>,
    pub by_builder: BTreeMap<String, BuilderDoc>,
    pub profit_series: BTreeMap<String, ProfitDoc>,
}

impl EfficiencyDoc {
    pub fn from_report(report: &EfficiencyReport) -> Self {
        EfficiencyDoc {
            schema_version: SCHEMA_VERSION,
            overall: CountsDoc {
                inefficient_blocks: report.overall.inefficient,
                total_blocks: report.overall.total,
                inefficient_proportion: proportion(
                    report.overall.inefficient,
                    report.overall.total,
                ),
            },
            by_period: report
                .by_period
                .iter()
                .map(|(k, c)| {
                    (
                        k.clone(),
                        CountsDoc {
                            inefficient_blocks: c.inefficient,
                            total_blocks: c.total,
                            inefficient_proportion: proportion(c.inefficient, c.total),
                        },
                    )
                })
                .collect(),
            by_builder: report
                .by_builder
                .iter()
                .map(|(k, c)| {
                    (
                        k.clone(),
                        BuilderDoc {
                            efficient_blocks: c.efficient,
                            inefficient_blocks: c.inefficient,
                            total_blocks: c.total(),
                        },
                    )
                })
                .collect(),
            profit_series: report
                .profit_series
                .iter()
                .map(|(k, row)| {
                    (
                        k.clone(),
                        ProfitDoc {
                            type3_profit_wei: row.type3_profit.as_wei(),
                            mempool_potential_wei: row.mempool_potential.as_wei(),
                            difference_wei: row.difference_wei,
                        },
                    )
                })
                .collect(),
        }
    }
}

/// `builders_monthly.csv`, `builders_by_builder.csv`,
/// `builders_profit_series.csv` and `builders_report.json`.
pub fn write_efficiency_reports(
    out_dir: &Path,
    report: &EfficiencyReport,
) -> Result<Vec<PathBuf>, AppError> {
    let doc = EfficiencyDoc::from_report(report);
    let json_path = out_dir.join("builders_report.json");
    write_json(&json_path, &doc)?;

    let monthly_path = out_dir.join("builders_monthly.csv");
    let mut monthly = String::from("period,inefficient_blocks,total_blocks,inefficient_proportion\n");
    for (period, c) in &doc.by_period {
        monthly.push_str(&format!(
            "{period},{},{},{:.4}\n",
            c.inefficient_blocks, c.total_blocks, c.inefficient_proportion
        ));
    }
    monthly.push_str(&format!(
        "overall,{},{},{:.4}\n",
        doc.overall.inefficient_blocks, doc.overall.total_blocks,
        doc.overall.inefficient_proportion
    ));
    fs::write(&monthly_path, monthly)?;

    let builder_path = out_dir.join("builders_by_builder.csv");
    let mut builders = String::from("builder,efficient_blocks,inefficient_blocks,total_blocks\n");
    for (name, c) in &doc.by_builder {
        builders.push_str(&format!(
            "{},{},{},{}\n",
            csv_quote(name),
            c.efficient_blocks,
            c.inefficient_blocks,
            c.total_blocks
        ));
    }
    fs::write(&builder_path, builders)?;

    let profit_path = out_dir.join("builders_profit_series.csv");
    let mut profit = String::from("period,type3_profit_wei,mempool_potential_wei,difference_wei\n");
    for (period, row) in &doc.profit_series {
        profit.push_str(&format!(
            "{period},{},{},{}\n",
            row.type3_profit_wei, row.mempool_potential_wei, row.difference_wei
        ));
    }
    fs::write(&profit_path, profit)?;

    Ok(vec![json_path, monthly_path, builder_path, profit_path])
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn kind_name(kind: PatternKind) -> &'static str {
    match kind {
        PatternKind::ContinuousSending => "continuous-sending",
        PatternKind::DoubleSending => "double-sending",
        PatternKind::Blobscription => "blobscription",
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DelayImpactDoc {
    pub affected_mean_s: Option<f64>,
    pub affected_count: u64,
    pub unaffected_mean_s: Option<f64>,
    pub unaffected_count: u64,
    pub delta_s: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LossDoc {
    pub total_wei: u128,
    pub per_kind_wei: BTreeMap<String, u128>,
    pub per_rollup_wei: BTreeMap<String, u128>,
    pub per_period_wei: BTreeMap<String, u128>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandscapeDoc {
    pub total_txs: u64,
    pub one_blob_share: f64,
    /// Histogram over 1..=6 blobs, network wide.
    pub network_histogram: [u64; 6],
    pub per_rollup_histogram: BTreeMap<String, [u64; 6]>,
}

/// The rollup-audit report document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RollupDoc {
    pub schema_version: u32,
    pub continuous_sending_findings: u64,
    pub double_sending_findings: u64,
    pub loss: LossDoc,
    /// Absent when no rollup transaction in the window had a measurable
    /// delay.
    pub delay_impact: Option<DelayImpactDoc>,
    pub landscape: LandscapeDoc,
}

/// `findings.jsonl`, `findings_summary.csv`, `loss_series.csv`,
/// `blob_histogram.csv`, `daily_landscape.csv` and `rollups_report.json`.
#[allow(clippy::too_many_arguments)]
pub fn write_rollup_reports(
    out_dir: &Path,
    continuous: &[PatternFinding],
    double: &[PatternFinding],
    loss: &LossReport,
    delay: Option<&DelayImpact>,
    landscape: &Landscape,
) -> Result<Vec<PathBuf>, AppError> {
    let doc = RollupDoc {
        schema_version: SCHEMA_VERSION,
        continuous_sending_findings: continuous.len() as u64,
        double_sending_findings: double.len() as u64,
        loss: LossDoc {
            total_wei: loss.total.as_wei(),
            per_kind_wei: loss
                .per_kind
                .iter()
                .map(|(k, v)| (kind_name(*k).to_string(), v.as_wei()))
                .collect(),
            per_rollup_wei: loss
                .per_rollup
                .iter()
                .map(|(k, v)| (k.clone(), v.as_wei()))
                .collect(),
            per_period_wei: loss
                .per_period
                .iter()
                .map(|(k, v)| (k.clone(), v.as_wei()))
                .collect(),
        },
        delay_impact: delay.map(|d| DelayImpactDoc {
            affected_mean_s: d.affected_mean_s,
            affected_count: d.affected_count,
            unaffected_mean_s: d.unaffected_mean_s,
            unaffected_count: d.unaffected_count,
            delta_s: d.delta_s,
        }),
        landscape: LandscapeDoc {
            total_txs: landscape.total_txs(),
            one_blob_share: landscape.one_blob_share(),
            network_histogram: landscape.network,
            per_rollup_histogram: landscape.per_rollup.clone(),
        },
    };
    let json_path = out_dir.join("rollups_report.json");
    write_json(&json_path, &doc)?;

    // One finding per line, continuous sending first, in detector order.
    let findings_path = out_dir.join("findings.jsonl");
    let mut lines = String::new();
    for finding in continuous.iter().chain(double) {
        lines.push_str(&serde_json::to_string(finding)?);
        lines.push('\n');
    }
    fs::write(&findings_path, lines)?;

    let summary_path = out_dir.join("findings_summary.csv");
    let mut summary = String::from("kind,findings,loss_wei\n");
    let loss_of = |kind: PatternKind| {
        loss.per_kind
            .get(&kind)
            .copied()
            .unwrap_or(Money::ZERO)
            .as_wei()
    };
    summary.push_str(&format!(
        "continuous-sending,{},{}\n",
        continuous.len(),
        loss_of(PatternKind::ContinuousSending)
    ));
    summary.push_str(&format!(
        "double-sending,{},{}\n",
        double.len(),
        loss_of(PatternKind::DoubleSending)
    ));
    fs::write(&summary_path, summary)?;

    let series_path = out_dir.join("loss_series.csv");
    let mut series = String::from("period,new_loss_wei,cumulative_loss_wei\n");
    for (period, cumulative) in loss.cumulative() {
        let new = loss.per_period[&period].as_wei();
        series.push_str(&format!("{period},{new},{}\n", cumulative.as_wei()));
    }
    fs::write(&series_path, series)?;

    let histogram_path = out_dir.join("blob_histogram.csv");
    let mut histogram = String::from("rollup,q,count\n");
    for (rollup, hist) in &landscape.per_rollup {
        for (i, count) in hist.iter().enumerate() {
            histogram.push_str(&format!("{},{},{count}\n", csv_quote(rollup), i + 1));
        }
    }
    fs::write(&histogram_path, histogram)?;

    let daily_path = out_dir.join("daily_landscape.csv");
    let mut daily = String::from("date,rollup,txs,share\n");
    for (date, per_rollup) in &landscape.daily {
        let day_total: u64 = per_rollup.values().sum();
        for (rollup, count) in per_rollup {
            daily.push_str(&format!(
                "{date},{},{count},{:.4}\n",
                csv_quote(rollup),
                *count as f64 / day_total as f64
            ));
        }
    }
    fs::write(&daily_path, daily)?;

    Ok(vec![
        json_path,
        findings_path,
        summary_path,
        series_path,
        histogram_path,
        daily_path,
    ])
}

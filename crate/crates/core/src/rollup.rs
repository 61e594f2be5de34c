//! Rollup-side auditing: redundant submission patterns, the fees they
//! burned, blobscription-driven inclusion delays, and the blob-count
//! landscape.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::{Dataset, Tx};
use crate::model::{BlobHash, Money, TimestampMs, TxHash, TypeThreeTx, UNLABELED};
use crate::time::Bucket;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum RollupAuditError {
    #[error("no rollup blob transactions with measurable delay in the window")]
    EmptyWindow,
    #[error("loss aggregation overflowed")]
    LossOverflow,
}

/// The redundant-submission patterns a finding can report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PatternKind {
    /// Same sender, several blob transactions landing in one block that a
    /// single bundled transaction could have replaced.
    ContinuousSending,
    /// A blob hash resubmitted after it was already included; the later
    /// transaction validates nothing.
    DoubleSending,
    /// Blob space spent on inscriptions rather than rollup data.
    Blobscription,
}

/// One detected instance of an inefficient submission pattern.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternFinding {
    pub kind: PatternKind,
    pub rollup: String,
    /// Block numbers touched, ascending.
    pub blocks: Vec<u64>,
    /// Every transaction involved; for double sending the redundant
    /// transaction first, then its prior inclusion.
    pub involved: Vec<TxHash>,
    /// The transactions whose fees count as loss.
    pub redundant: Vec<TxHash>,
    /// Execution-layer fees (base + priority) of the redundant
    /// transactions.
    pub loss: Money,
    /// Double sending only: whether the prior inclusion came from the same
    /// sender.
    pub same_sender: Option<bool>,
}

fn label_of(tx: &TypeThreeTx) -> String {
    tx.rollup_label
        .clone()
        .unwrap_or_else(|| UNLABELED.to_string())
}

/// Blob transactions of each block in block order, with their position.
fn type_threes_ordered<'a>(
    dataset: &'a Dataset,
) -> impl Iterator<Item = (u64, usize, &'a TypeThreeTx)> {
    dataset.blocks.iter().flat_map(move |block| {
        block
            .txs
            .iter()
            .filter_map(|h| dataset.txs.get(h).and_then(Tx::as_type_three))
            .enumerate()
            .map(move |(pos, tx)| (block.number, pos, tx))
    })
}

/// Find same-sender groups of blob transactions inside one block whose
/// combined blob count still fits a single transaction. The first
/// transaction in block order is the one kept; the rest are charged.
pub fn detect_continuous_sending(
    dataset: &Dataset,
) -> Result<Vec<PatternFinding>, RollupAuditError> {
    let mut findings = Vec::new();
    for block in &dataset.blocks {
        // Sender -> transactions in block order.
        let mut groups: BTreeMap<_, Vec<&TypeThreeTx>> = BTreeMap::new();
        for tx in dataset.type_threes_in(block) {
            groups.entry(tx.sender).or_default().push(tx);
        }
        for (_, group) in groups {
            if group.len() < 2 {
                continue;
            }
            let total_blobs: u32 = group.iter().map(|t| t.blob_count() as u32).sum();
            if total_blobs > crate::model::MAX_BLOBS_PER_BLOCK as u32 {
                // Could not have been one transaction; not a defect.
                continue;
            }
            let mut loss = Money::ZERO;
            let mut redundant = Vec::new();
            for tx in &group[1..] {
                loss = loss
                    .checked_add(tx.fee_paid().map_err(|_| RollupAuditError::LossOverflow)?)
                    .map_err(|_| RollupAuditError::LossOverflow)?;
                redundant.push(tx.hash);
            }
            findings.push(PatternFinding {
                kind: PatternKind::ContinuousSending,
                rollup: label_of(group[0]),
                blocks: alloc::vec![block.number],
                involved: group.iter().map(|t| t.hash).collect(),
                redundant,
                loss,
                same_sender: None,
            });
        }
    }
    Ok(findings)
}

/// Find blob hashes reappearing after their first inclusion. Matching is
/// global (validity does not care who resubmits); the finding records
/// whether the senders coincide.
pub fn detect_double_sending(dataset: &Dataset) -> Result<Vec<PatternFinding>, RollupAuditError> {
    let mut first_inclusion: BTreeMap<BlobHash, (u64, TxHash, crate::model::Address)> =
        BTreeMap::new();
    let mut findings = Vec::new();
    for (block_number, _, tx) in type_threes_ordered(dataset) {
        let mut priors: Vec<(u64, TxHash, bool)> = Vec::new();
        for blob in &tx.blob_hashes {
            match first_inclusion.get(blob) {
                Some(&(prior_block, prior_tx, prior_sender)) => {
                    if !priors.iter().any(|(_, t, _)| *t == prior_tx) {
                        priors.push((prior_block, prior_tx, prior_sender == tx.sender));
                    }
                }
                None => {
                    first_inclusion.insert(*blob, (block_number, tx.hash, tx.sender));
                }
            }
        }
        if priors.is_empty() {
            continue;
        }
        let mut blocks: Vec<u64> = priors.iter().map(|(b, _, _)| *b).collect();
        blocks.push(block_number);
        blocks.sort_unstable();
        blocks.dedup();
        let mut involved = alloc::vec![tx.hash];
        involved.extend(priors.iter().map(|(_, t, _)| *t));
        findings.push(PatternFinding {
            kind: PatternKind::DoubleSending,
            rollup: label_of(tx),
            blocks,
            involved,
            redundant: alloc::vec![tx.hash],
            loss: tx.fee_paid().map_err(|_| RollupAuditError::LossOverflow)?,
            same_sender: Some(priors.iter().all(|(_, _, same)| *same)),
        });
    }
    Ok(findings)
}

/// Loss accounting over both detectors, with double-sending taking
/// precedence when one transaction shows up in both finding kinds.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossReport {
    /// Newly burned fees per period key.
    pub per_period: BTreeMap<String, Money>,
    pub per_rollup: BTreeMap<String, Money>,
    pub per_kind: BTreeMap<PatternKind, Money>,
    pub total: Money,
}

impl LossReport {
    /// Period keys with running totals, in period order.
    pub fn cumulative(&self) -> Vec<(String, Money)> {
        let mut acc = Money::ZERO;
        self.per_period
            .iter()
            .map(|(k, v)| {
                acc = acc.checked_add(*v).expect("total already validated");
                (k.clone(), acc)
            })
            .collect()
    }
}

/// Sum redundant-transaction fees per period, rollup and kind. Each
/// transaction is charged once: a double-sending transaction that also
/// sits in a continuous-sending group counts as double sending.
pub fn economic_loss(
    dataset: &Dataset,
    continuous: &[PatternFinding],
    double: &[PatternFinding],
    bucket: Bucket,
) -> Result<LossReport, RollupAuditError> {
    let mut charged: BTreeMap<TxHash, (PatternKind, String)> = BTreeMap::new();
    for finding in double {
        for tx in &finding.redundant {
            charged.insert(*tx, (PatternKind::DoubleSending, finding.rollup.clone()));
        }
    }
    for finding in continuous {
        for tx in &finding.redundant {
            charged
                .entry(*tx)
                .or_insert((PatternKind::ContinuousSending, finding.rollup.clone()));
        }
    }

    let mut report = LossReport::default();
    for (hash, (kind, rollup)) in charged {
        let Some(tx) = dataset.txs.get(&hash).and_then(Tx::as_type_three) else {
            continue;
        };
        let fee = tx.fee_paid().map_err(|_| RollupAuditError::LossOverflow)?;
        let period = tx
            .included_block
            .and_then(|n| dataset.block_by_number(n))
            .map(|b| bucket.key(b.slot_timestamp))
            .unwrap_or_else(|| "unknown".to_string());
        let add = |slot: &mut Money| -> Result<(), RollupAuditError> {
            *slot = slot
                .checked_add(fee)
                .map_err(|_| RollupAuditError::LossOverflow)?;
            Ok(())
        };
        add(report.per_period.entry(period).or_default())?;
        add(report.per_rollup.entry(rollup).or_default())?;
        add(report.per_kind.entry(kind).or_default())?;
        add(&mut report.total)?;
    }
    Ok(report)
}

/// Mean inclusion delays split by blobscription interference.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DelayImpact {
    pub affected_mean_s: Option<f64>,
    pub affected_count: u64,
    pub unaffected_mean_s: Option<f64>,
    pub unaffected_count: u64,
    /// `affected_mean - unaffected_mean`, present when both sides exist.
    pub delta_s: Option<f64>,
}

/// Measure how blobscription bursts delayed rollup blob transactions first
/// seen inside `[window.0, window.1)`.
///
/// A rollup transaction is affected when at least one block produced in
/// `[first_seen, inclusion)` carries `min_blobscription_blobs` or more
/// blobscription blobs; a transaction included in the slot it appeared has
/// an empty interval and is never affected. Transactions without a
/// measurable delay (private or clock-skewed) are skipped.
pub fn delay_impact(
    dataset: &Dataset,
    window: (TimestampMs, TimestampMs),
    min_blobscription_blobs: u32,
) -> Result<DelayImpact, RollupAuditError> {
    // Slot timestamps of blocks carrying enough blobscription blobs.
    let mut burst_slots: Vec<i64> = dataset
        .blocks
        .iter()
        .filter(|block| {
            let blobs: u32 = dataset
                .type_threes_in(block)
                .filter(|t| t.is_blobscription)
                .map(|t| t.blob_count() as u32)
                .sum();
            blobs >= min_blobscription_blobs.max(1)
        })
        .map(|b| b.slot_timestamp.as_ms())
        .collect();
    burst_slots.sort_unstable();

    let mut affected = (0u64, 0.0f64);
    let mut unaffected = (0u64, 0.0f64);
    for (_, _, tx) in type_threes_ordered(dataset) {
        if tx.is_blobscription {
            continue;
        }
        let Some(seen) = tx.first_seen else { continue };
        if seen < window.0 || seen >= window.1 {
            continue;
        }
        let Some(inclusion_block) = tx
            .included_block
            .and_then(|n| dataset.block_by_number(n))
        else {
            continue;
        };
        let Ok(delay) = crate::model::inclusion_delay(Some(seen), inclusion_block.slot_timestamp)
        else {
            continue;
        };
        let inclusion_ms = inclusion_block.slot_timestamp.as_ms();
        let hit = burst_slots
            .partition_point(|&slot| slot < seen.as_ms())
            < burst_slots.partition_point(|&slot| slot < inclusion_ms);
        if hit {
            affected.0 += 1;
            affected.1 += delay;
        } else {
            unaffected.0 += 1;
            unaffected.1 += delay;
        }
    }
    if affected.0 + unaffected.0 == 0 {
        return Err(RollupAuditError::EmptyWindow);
    }
    let affected_mean_s = (affected.0 > 0).then(|| affected.1 / affected.0 as f64);
    let unaffected_mean_s = (unaffected.0 > 0).then(|| unaffected.1 / unaffected.0 as f64);
    let delta_s = match (affected_mean_s, unaffected_mean_s) {
        (Some(a), Some(u)) => Some(a - u),
        _ => None,
    };
    Ok(DelayImpact {
        affected_mean_s,
        affected_count: affected.0,
        unaffected_mean_s,
        unaffected_count: unaffected.0,
        delta_s,
    })
}

/// Blob-count histograms: per rollup, network-wide, and a daily share
/// series. Blobscriptions count as their own label.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Landscape {
    /// Rollup label -> histogram over blob counts 1..=6.
    pub per_rollup: BTreeMap<String, [u64; 6]>,
    pub network: [u64; 6],
    /// Day -> rollup label -> transaction count.
    pub daily: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Label under which blobscription traffic is reported in the landscape.
pub const BLOBSCRIPTION_LABEL: &str = "blobscription";

impl Landscape {
    pub fn total_txs(&self) -> u64 {
        self.network.iter().sum()
    }

    /// Share of blob transactions carrying exactly one blob.
    pub fn one_blob_share(&self) -> f64 {
        let total = self.total_txs();
        if total == 0 {
            0.0
        } else {
            self.network[0] as f64 / total as f64
        }
    }
}

pub fn blob_landscape(dataset: &Dataset) -> Landscape {
    let mut landscape = Landscape::default();
    for block in &dataset.blocks {
        let day = Bucket::Daily.key(block.slot_timestamp);
        for tx in dataset.type_threes_in(block) {
            let label = if tx.is_blobscription {
                BLOBSCRIPTION_LABEL.to_string()
            } else {
                label_of(tx)
            };
            let slot = (tx.blob_count() - 1) as usize;
            landscape.per_rollup.entry(label.clone()).or_default()[slot] += 1;
            landscape.network[slot] += 1;
            *landscape
                .daily
                .entry(day.clone())
                .or_default()
                .entry(label)
                .or_default() += 1;
        }
    }
    landscape
}

#[cfg(test)]
mod tests;

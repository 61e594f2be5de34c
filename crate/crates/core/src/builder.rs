//! Block efficiency auditing: did each blob transaction pay at least the
//! floor price of the space it displaced?
//!
//! A block is efficient when every blob transaction in it clears its floor
//! price; the floor is computed against the non-blob transactions pending
//! in the public mempool during the block's construction window.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::floor::{exact_floor_price, greedy_floor_price, FloorError, MempoolPool, PoolItem};
use crate::model::{Block, Money, TxHash, UNLABELED};
use crate::time::Bucket;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum BuilderAuditError {
    #[error("block {0} carries no blob transactions")]
    NotApplicable(u64),
    #[error("block {0} is unknown")]
    UnknownBlock(u64),
    #[error(transparent)]
    Floor(#[from] FloorError),
    #[error("profit aggregation overflowed")]
    ProfitOverflow,
}

/// Whether a block's floors deplete one shared pool or each see the full
/// pool independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PoolMode {
    #[default]
    Sequential,
    Independent,
}

/// Greedy floors reproduce the measurement procedure; exact floors give
/// the strict optimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FloorMode {
    #[default]
    Greedy,
    Exact,
}

/// Knobs for one audit run.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuditOptions {
    /// Mempool transactions whose eventual inclusion took longer than this
    /// are dropped from floor pools (stand-ins for likely-failing
    /// simulations). Never-included transactions are dropped too.
    pub delay_filter_secs: f64,
    pub pool_mode: PoolMode,
    pub floor_mode: FloorMode,
    pub bucket: Bucket,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            delay_filter_secs: 100.0,
            pool_mode: PoolMode::Sequential,
            floor_mode: FloorMode::Greedy,
            bucket: Bucket::Monthly,
        }
    }
}

/// Verdict for one blob transaction.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TxVerdict {
    pub tx: TxHash,
    pub price: Money,
    pub floor: Money,
    pub efficient: bool,
}

/// Verdict for one block: the conjunction of its per-transaction verdicts.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockVerdict {
    pub block: u64,
    pub txs: Vec<TxVerdict>,
    pub block_efficient: bool,
}

/// The non-blob transactions pending for a block's construction window:
/// first seen strictly before the slot timestamp, not included by an
/// earlier block, and eventually included within the delay filter.
pub fn eligible_mempool(dataset: &Dataset, block: &Block, delay_filter_secs: f64) -> MempoolPool {
    let mut items = Vec::new();
    for (hash, record) in &dataset.mempool {
        if record.tx_type != 2 {
            continue;
        }
        if record.first_seen >= block.slot_timestamp {
            continue;
        }
        // Only transactions we can watch all the way to inclusion count;
        // the rest are the likely-failing flow the filter removes.
        let Some(tx) = dataset.txs.get(hash).and_then(|t| t.as_type_two()) else {
            continue;
        };
        let Some(included) = tx.included_block else {
            continue;
        };
        if included < block.number {
            continue;
        }
        let Some(inclusion_block) = dataset.block_by_number(included) else {
            continue;
        };
        let delay_ms = inclusion_block.slot_timestamp.as_ms() - record.first_seen.as_ms();
        if delay_ms as f64 / 1000.0 > delay_filter_secs {
            continue;
        }
        items.push(PoolItem {
            hash: *hash,
            size: tx.size,
            profit: tx.builder_profit,
        });
    }
    MempoolPool::new(items).expect("on-chain sizes are validated positive")
}

/// Classify one block. Floors deplete the pool sequentially in block order
/// unless the options say otherwise; a transaction is efficient when its
/// price reaches its floor.
pub fn classify_block(
    dataset: &Dataset,
    block: &Block,
    options: &AuditOptions,
) -> Result<BlockVerdict, BuilderAuditError> {
    let mut pool = eligible_mempool(dataset, block, options.delay_filter_secs);
    let mut txs = Vec::new();
    for t3 in dataset.type_threes_in(block) {
        let floor = match options.pool_mode {
            PoolMode::Sequential => floor_of(&mut pool, t3.blob_count(), options.floor_mode)?,
            PoolMode::Independent => {
                floor_of(&mut pool.clone(), t3.blob_count(), options.floor_mode)?
            }
        };
        txs.push(TxVerdict {
            tx: t3.hash,
            price: t3.builder_profit,
            floor,
            efficient: t3.builder_profit >= floor,
        });
    }
    if txs.is_empty() {
        return Err(BuilderAuditError::NotApplicable(block.number));
    }
    let block_efficient = txs.iter().all(|t| t.efficient);
    Ok(BlockVerdict {
        block: block.number,
        txs,
        block_efficient,
    })
}

fn floor_of(pool: &mut MempoolPool, blobs: u8, mode: FloorMode) -> Result<Money, BuilderAuditError> {
    match mode {
        FloorMode::Greedy => Ok(greedy_floor_price(pool, blobs)?.total_profit),
        FloorMode::Exact => {
            // Strict mode still depletes: drop the greedy selection after
            // taking the exact optimum as the floor value.
            let value = exact_floor_price(pool, blobs)?;
            greedy_floor_price(pool, blobs)?;
            Ok(value)
        }
    }
}

/// Audit every block that carries blob transactions, in block order.
pub fn audit_blocks(
    dataset: &Dataset,
    options: &AuditOptions,
) -> Result<Vec<BlockVerdict>, BuilderAuditError> {
    let mut verdicts = Vec::new();
    for block in &dataset.blocks {
        match classify_block(dataset, block, options) {
            Ok(v) => verdicts.push(v),
            Err(BuilderAuditError::NotApplicable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(verdicts)
}

/// Inefficient/total counts for one aggregation key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counts {
    pub inefficient: u64,
    pub total: u64,
}

impl Counts {
    pub fn proportion(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.inefficient as f64 / self.total as f64
        }
    }
}

/// Efficient/inefficient block counts for one builder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BuilderCounts {
    pub efficient: u64,
    pub inefficient: u64,
}

impl BuilderCounts {
    pub fn total(&self) -> u64 {
        self.efficient + self.inefficient
    }
}

/// Blob-transaction profit vs. mempool potential for one period. The
/// difference is negative when the mempool would have paid more.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfitRow {
    pub type3_profit: Money,
    pub mempool_potential: Money,
    pub difference_wei: i128,
}

/// Aggregated efficiency report keyed by period and by builder.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EfficiencyReport {
    pub overall: Counts,
    pub by_period: BTreeMap<String, Counts>,
    pub by_builder: BTreeMap<String, BuilderCounts>,
    pub profit_series: BTreeMap<String, ProfitRow>,
}

/// Roll verdicts up by calendar bucket and by builder label.
pub fn aggregate(
    dataset: &Dataset,
    verdicts: &[BlockVerdict],
    bucket: Bucket,
) -> Result<EfficiencyReport, BuilderAuditError> {
    let mut report = EfficiencyReport::default();
    for verdict in verdicts {
        let block = dataset
            .block_by_number(verdict.block)
            .ok_or(BuilderAuditError::UnknownBlock(verdict.block))?;
        let key = bucket.key(block.slot_timestamp);
        let builder = block
            .builder_label
            .clone()
            .unwrap_or_else(|| UNLABELED.to_string());

        let counts = report.by_period.entry(key.clone()).or_default();
        counts.total += 1;
        report.overall.total += 1;
        if !verdict.block_efficient {
            counts.inefficient += 1;
            report.overall.inefficient += 1;
        }

        let by_builder = report.by_builder.entry(builder).or_default();
        if verdict.block_efficient {
            by_builder.efficient += 1;
        } else {
            by_builder.inefficient += 1;
        }

        let row = report.profit_series.entry(key).or_default();
        for tx in &verdict.txs {
            row.type3_profit = row
                .type3_profit
                .checked_add(tx.price)
                .map_err(|_| BuilderAuditError::ProfitOverflow)?;
            row.mempool_potential = row
                .mempool_potential
                .checked_add(tx.floor)
                .map_err(|_| BuilderAuditError::ProfitOverflow)?;
        }
    }
    for row in report.profit_series.values_mut() {
        row.difference_wei = row
            .type3_profit
            .signed_diff(row.mempool_potential)
            .ok_or(BuilderAuditError::ProfitOverflow)?;
    }
    Ok(report)
}

//! The floor price of blob space: the profit a builder could extract from
//! pending non-blob transactions occupying the same bytes.
//!
//! [`greedy_floor_price`] mirrors the measurement procedure used in the
//! audits (scan by profit/size ratio, take what fits, drop what was taken).
//! [`exact_floor_price`] solves the underlying 0/1 knapsack exactly and
//! serves as the oracle for the greedy estimate and as the strict audit
//! mode. Ratio comparisons are cross-multiplied integers, never floats, so
//! the scan order is exact at wei scale.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::model::{ByteSize, Money, TxHash, BLOB_BYTES, MAX_BLOBS_PER_BLOCK};

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum FloorError {
    #[error("pool items must have positive size")]
    ZeroSizeItem,
    #[error("blob count {0} outside 1..=6")]
    BlobCountOutOfRange(u8),
    #[error("size arithmetic overflowed")]
    SizeOverflow,
    #[error("profit arithmetic overflowed")]
    ProfitOverflow,
}

/// One candidate transaction in the public mempool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoolItem {
    pub hash: TxHash,
    pub size: ByteSize,
    pub profit: Money,
}

/// The set of pending non-blob transactions a floor price is computed
/// against. Items are kept in scan order (descending profit/size ratio,
/// ties broken by higher profit then lower hash).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MempoolPool {
    items: Vec<PoolItem>,
}

impl MempoolPool {
    pub fn new(mut items: Vec<PoolItem>) -> Result<Self, FloorError> {
        if items.iter().any(|it| it.size.as_bytes() == 0) {
            return Err(FloorError::ZeroSizeItem);
        }
        items.sort_by(scan_order);
        Ok(MempoolPool { items })
    }

    pub fn items(&self) -> &[PoolItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Total order used to scan the pool: strictly descending profit/size
/// ratio; equal ratios order by higher profit first, then by ascending
/// hash. Deterministic under any input permutation.
pub fn scan_order(a: &PoolItem, b: &PoolItem) -> Ordering {
    ratio_cmp(b, a)
        .then_with(|| b.profit.cmp(&a.profit))
        .then_with(|| a.hash.cmp(&b.hash))
}

/// Compare profit/size ratios via 256-bit cross multiplication.
fn ratio_cmp(a: &PoolItem, b: &PoolItem) -> Ordering {
    let lhs = wide_mul(a.profit.as_wei(), b.size.as_bytes() as u128);
    let rhs = wide_mul(b.profit.as_wei(), a.size.as_bytes() as u128);
    lhs.cmp(&rhs)
}

/// 128x128 -> 256-bit product as (high, low) limbs.
fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = (1u128 << 64) - 1;
    let (a_hi, a_lo) = (a >> 64, a & MASK);
    let (b_hi, b_lo) = (b >> 64, b & MASK);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & MASK) + (hl & MASK);
    let low = (mid & MASK) << 64 | (ll & MASK);
    let high = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (high, low)
}

/// Result of one greedy scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedySelection {
    pub total_profit: Money,
    /// Selected hashes in scan order.
    pub selected: Vec<TxHash>,
}

fn capacity_for(blob_count: u8) -> Result<u64, FloorError> {
    if blob_count == 0 || blob_count > MAX_BLOBS_PER_BLOCK {
        return Err(FloorError::BlobCountOutOfRange(blob_count));
    }
    Ok(blob_count as u64 * BLOB_BYTES)
}

/// Greedy floor price for `blob_count` blobs of space.
///
/// Scans the pool in [`scan_order`]; an item is taken iff the running size
/// stays within `blob_count * BLOB_BYTES`. Selected items are removed from
/// the pool, so consecutive calls deplete it. An empty pool yields zero.
pub fn greedy_floor_price(
    pool: &mut MempoolPool,
    blob_count: u8,
) -> Result<GreedySelection, FloorError> {
    let capacity = capacity_for(blob_count)?;
    let mut total_size: u64 = 0;
    let mut total_profit = Money::ZERO;
    let mut selected = Vec::new();
    let mut remaining = Vec::with_capacity(pool.items.len());
    for item in pool.items.drain(..) {
        let fits = total_size
            .checked_add(item.size.as_bytes())
            .is_some_and(|s| s <= capacity);
        if fits {
            total_size += item.size.as_bytes();
            total_profit = total_profit
                .checked_add(item.profit)
                .map_err(|_| FloorError::ProfitOverflow)?;
            selected.push(item.hash);
        } else {
            remaining.push(item);
        }
    }
    pool.items = remaining;
    Ok(GreedySelection {
        total_profit,
        selected,
    })
}

/// Exact 0/1-knapsack optimum over the pool for `blob_count` blobs.
///
/// Sparse dynamic programming over reachable sizes with Pareto-dominance
/// pruning: the state count is bounded by `min(2^n, capacity + 1)`, i.e. at
/// most 786,433 states for six blobs, so pools of any realistic length are
/// exact. The pool is not mutated.
pub fn exact_floor_price(pool: &MempoolPool, blob_count: u8) -> Result<Money, FloorError> {
    let capacity = capacity_for(blob_count)?;
    // Pareto frontier: states sorted by size ascending, profit strictly
    // increasing. Dominated states (bigger size, no more profit) are pruned.
    let mut states: Vec<(u64, u128)> = alloc::vec![(0, 0)];
    for item in &pool.items {
        let s = item.size.as_bytes();
        if s > capacity {
            continue;
        }
        let mut taken = Vec::with_capacity(states.len());
        for &(sz, pr) in &states {
            if sz + s <= capacity {
                let np = pr
                    .checked_add(item.profit.as_wei())
                    .ok_or(FloorError::ProfitOverflow)?;
                taken.push((sz + s, np));
            }
        }
        // Merge two size-sorted streams, keeping only frontier states
        // (profit must strictly increase with size).
        let mut merged: Vec<(u64, u128)> = Vec::with_capacity(states.len() + taken.len());
        let (mut i, mut j) = (0, 0);
        while i < states.len() || j < taken.len() {
            let from_keep = match (states.get(i), taken.get(j)) {
                (Some(&(ks, kp)), Some(&(ts, tp))) => ks < ts || (ks == ts && kp >= tp),
                (Some(_), None) => true,
                _ => false,
            };
            let (sz, pr) = if from_keep {
                i += 1;
                states[i - 1]
            } else {
                j += 1;
                taken[j - 1]
            };
            if merged.last().map_or(true, |&(_, lp)| pr > lp) {
                merged.push((sz, pr));
            }
        }
        states = merged;
    }
    Ok(Money::wei(states.last().map(|&(_, p)| p).unwrap_or(0)))
}

//! Bundle-vs-split advice: exhaustive search over set partitions of a
//! blob batch, scoring each candidate transaction by its multi-round
//! utility.

use alloc::vec::Vec;

use super::{bundle_utility, AuctionConfig, AuctionError, SeriesStart};
use crate::model::MAX_BLOBS_PER_BLOCK;

/// One candidate grouping of the blobs into transactions, with its total
/// utility and the utility of every transaction in it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionUtility {
    /// Blob indices grouped per transaction, ordered by first member.
    pub parts: Vec<Vec<usize>>,
    pub part_utilities: Vec<f64>,
    pub utility: f64,
}

/// The advisor's verdict over every feasible partition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BundleDecision {
    pub best: PartitionUtility,
    /// Utility of the single-transaction bundle, when it fits in a block.
    pub bundle_all_utility: Option<f64>,
    /// Every feasible candidate, best first.
    pub candidates: Vec<PartitionUtility>,
}

impl BundleDecision {
    /// True when bundling everything into one transaction is the argmax.
    pub fn is_bundle_all(&self) -> bool {
        self.best.parts.len() == 1
    }
}

/// Search every partition of the revenue multiset (exact for 2..=8 blobs)
/// and pick the utility-maximizing grouping. Parts larger than a block's
/// blob capacity are infeasible and skipped, not errors. Exact utility
/// ties resolve toward fewer transactions, then lexicographically.
pub fn bundle_vs_split(
    revenues: &[f64],
    config: &AuctionConfig,
    start: SeriesStart,
) -> Result<BundleDecision, AuctionError> {
    let m = revenues.len();
    if !(2..=8).contains(&m) {
        return Err(AuctionError::PartitionSizeOutOfRange(m));
    }
    if revenues.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(AuctionError::Domain(
            "blob revenues must be finite and non-negative",
        ));
    }

    let mut candidates = Vec::new();
    let mut bundle_all_utility = None;
    for assignment in partitions(m) {
        let parts = to_parts(&assignment);
        if parts.iter().any(|p| p.len() > MAX_BLOBS_PER_BLOCK as usize) {
            continue;
        }
        let mut part_utilities = Vec::with_capacity(parts.len());
        let mut total = 0.0;
        for part in &parts {
            let revenue: f64 = part.iter().map(|&i| revenues[i]).sum();
            let u = bundle_utility(revenue, config, start)?;
            part_utilities.push(u);
            total += u;
        }
        if parts.len() == 1 {
            bundle_all_utility = Some(total);
        }
        candidates.push(PartitionUtility {
            parts,
            part_utilities,
            utility: total,
        });
    }
    // Best first; exact ties prefer fewer transactions, then the
    // lexicographically smallest grouping.
    candidates.sort_by(|a, b| {
        b.utility
            .partial_cmp(&a.utility)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| a.parts.len().cmp(&b.parts.len()))
            .then_with(|| a.parts.cmp(&b.parts))
    });
    let best = candidates[0].clone();
    Ok(BundleDecision {
        best,
        bundle_all_utility,
        candidates,
    })
}

/// All set partitions of `0..m` as restricted-growth strings.
fn partitions(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = alloc::vec![0usize; m];
    grow(&mut current, 1, &mut out);
    out
}

fn grow(current: &mut Vec<usize>, index: usize, out: &mut Vec<Vec<usize>>) {
    if index == current.len() {
        out.push(current.clone());
        return;
    }
    let max_used = current[..index].iter().copied().max().unwrap_or(0);
    for group in 0..=max_used + 1 {
        current[index] = group;
        grow(current, index + 1, out);
    }
}

fn to_parts(assignment: &[usize]) -> Vec<Vec<usize>> {
    let groups = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut parts = alloc::vec![Vec::new(); groups];
    for (i, &g) in assignment.iter().enumerate() {
        parts[g].push(i);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_follow_bell_numbers() {
        assert_eq!(partitions(2).len(), 2);
        assert_eq!(partitions(3).len(), 5);
        assert_eq!(partitions(4).len(), 15);
        assert_eq!(partitions(6).len(), 203);
        assert_eq!(partitions(8).len(), 4140);
    }

    #[test]
    fn parts_are_ordered_by_first_member() {
        let parts = to_parts(&[0, 1, 0, 2]);
        assert_eq!(parts, alloc::vec![
            alloc::vec![0, 2],
            alloc::vec![1],
            alloc::vec![3]
        ]);
    }

    #[test]
    fn beyond_capacity_the_biggest_feasible_bundle_wins() {
        // Seven and eight equal-revenue blobs cannot be one transaction;
        // with a superadditive utility the argmax concentrates mass in a
        // full six-blob bundle plus the remainder.
        use crate::auction::{AuctionConfig, DiscountFunction, RevenueDistribution};
        let config = AuctionConfig::new(
            2,
            RevenueDistribution::Uniform { r_max: 1.0 },
            DiscountFunction::Geometric { delta: 0.95 },
            0.0,
            0,
        )
        .unwrap();
        for m in [7usize, 8] {
            let revenues = alloc::vec![0.08; m];
            let decision =
                bundle_vs_split(&revenues, &config, SeriesStart::CurrentSlot).unwrap();
            assert_eq!(decision.bundle_all_utility, None);
            assert_eq!(decision.best.parts.len(), 2, "m={m}");
            let largest = decision.best.parts.iter().map(Vec::len).max().unwrap();
            assert_eq!(largest, 6, "m={m}");
        }
    }
}

//! Property tests for the floor-price selection and the auction model.
//!
//! The knapsack oracle here is deliberately independent of the library:
//! plain subset enumeration over indices.

use blobaudit_core::auction::{
    builder_optimal_price, equilibrium_bid, waiting_discount, AuctionConfig, Bid,
    DiscountFunction, RevenueDistribution, SeriesStart,
};
use blobaudit_core::floor::{
    exact_floor_price, greedy_floor_price, MempoolPool, PoolItem,
};
use blobaudit_core::model::{ByteSize, Money, TxHash, BLOB_BYTES};
use proptest::prelude::*;

fn tx_hash(i: usize) -> TxHash {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&(i as u64).to_be_bytes());
    TxHash::new(bytes)
}

/// Independent oracle: enumerate all 2^n subsets.
fn brute_force_knapsack(items: &[(u64, u128)], capacity: u64) -> u128 {
    let mut best = 0u128;
    for mask in 0u32..(1 << items.len()) {
        let mut size = 0u64;
        let mut profit = 0u128;
        for (i, &(s, p)) in items.iter().enumerate() {
            if mask & (1 << i) != 0 {
                size += s;
                profit += p;
            }
        }
        if size <= capacity && profit > best {
            best = profit;
        }
    }
    best
}

fn pool_from(items: &[(u64, u128)]) -> MempoolPool {
    MempoolPool::new(
        items
            .iter()
            .enumerate()
            .map(|(i, &(size, profit))| PoolItem {
                hash: tx_hash(i),
                size: ByteSize::bytes(size),
                profit: Money::wei(profit),
            })
            .collect(),
    )
    .expect("sizes are positive")
}

fn small_instance() -> impl Strategy<Value = (Vec<(u64, u128)>, u8)> {
    (
        prop::collection::vec((1u64..=160_000, 0u128..=1_000_000), 1..=12),
        1u8..=6,
    )
}

proptest! {
    #[test]
    fn exact_matches_brute_force_and_bounds_greedy((items, q) in small_instance()) {
        let capacity = q as u64 * BLOB_BYTES;
        let oracle = brute_force_knapsack(&items, capacity);
        let exact = exact_floor_price(&pool_from(&items), q).unwrap();
        prop_assert_eq!(exact.as_wei(), oracle);

        let mut pool = pool_from(&items);
        let greedy = greedy_floor_price(&mut pool, q).unwrap();
        prop_assert!(greedy.total_profit.as_wei() <= oracle);
    }

    #[test]
    fn all_fitting_means_full_sum((mut items, q) in small_instance()) {
        // Shrink sizes so everything fits.
        let budget = q as u64 * BLOB_BYTES / items.len() as u64;
        for item in &mut items {
            item.0 = item.0.clamp(1, budget.max(1));
        }
        let total: u128 = items.iter().map(|&(_, p)| p).sum();
        let mut pool = pool_from(&items);
        let greedy = greedy_floor_price(&mut pool, q).unwrap();
        prop_assert_eq!(greedy.total_profit.as_wei(), total);
        prop_assert!(pool.is_empty());
        let exact = exact_floor_price(&pool_from(&items), q).unwrap();
        prop_assert_eq!(exact.as_wei(), total);
    }

    #[test]
    fn selection_respects_capacity_and_is_permutation_stable(
        (items, q) in small_instance(),
        seed in 0u64..1000,
    ) {
        let capacity = q as u64 * BLOB_BYTES;
        let mut pool = pool_from(&items);
        let selection = greedy_floor_price(&mut pool, q).unwrap();
        let by_hash: std::collections::HashMap<_, _> = items
            .iter()
            .enumerate()
            .map(|(i, &(s, _))| (tx_hash(i), s))
            .collect();
        let picked: u64 = selection.selected.iter().map(|h| by_hash[h]).sum();
        prop_assert!(picked <= capacity);

        // Any permutation scans identically.
        let mut shuffled: Vec<(u64, u128)> = items.clone();
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        // Rebuild hashes against original indices so identity is preserved.
        let index_of = |size: u64, profit: u128, used: &mut Vec<bool>| {
            items
                .iter()
                .enumerate()
                .position(|(i, &(s, p))| s == size && p == profit && !used[i])
                .map(|i| {
                    used[i] = true;
                    i
                })
                .unwrap()
        };
        let mut used = vec![false; n];
        let shuffled_pool = MempoolPool::new(
            shuffled
                .iter()
                .map(|&(s, p)| PoolItem {
                    hash: tx_hash(index_of(s, p, &mut used)),
                    size: ByteSize::bytes(s),
                    profit: Money::wei(p),
                })
                .collect(),
        )
        .unwrap();
        let mut shuffled_pool = shuffled_pool;
        let reordered = greedy_floor_price(&mut shuffled_pool, q).unwrap();
        prop_assert_eq!(selection, reordered);
    }

    #[test]
    fn floors_are_monotone_in_blob_count((items, q) in small_instance()) {
        prop_assume!(q < 6);
        let mut pool_small = pool_from(&items);
        let mut pool_large = pool_from(&items);
        let small = greedy_floor_price(&mut pool_small, q).unwrap();
        let large = greedy_floor_price(&mut pool_large, q + 1).unwrap();
        prop_assert!(small.total_profit <= large.total_profit);

        let exact_small = exact_floor_price(&pool_from(&items), q).unwrap();
        let exact_large = exact_floor_price(&pool_from(&items), q + 1).unwrap();
        prop_assert!(exact_small <= exact_large);
    }

    #[test]
    fn exact_floor_is_monotone_in_pool_contents(
        (items, q) in small_instance(),
        drop_index in 0usize..12,
    ) {
        prop_assume!(items.len() > 1);
        let drop_index = drop_index % items.len();
        let full = exact_floor_price(&pool_from(&items), q).unwrap();
        let mut fewer = items.clone();
        fewer.remove(drop_index);
        let smaller = exact_floor_price(&pool_from(&fewer), q).unwrap();
        prop_assert!(smaller <= full);
    }
}

fn arb_config() -> impl Strategy<Value = AuctionConfig> {
    (
        2usize..=6,
        0.5f64..3.0,
        0.05f64..0.99,
        0.0f64..0.5,
    )
        .prop_map(|(k, r_max, delta, floor_frac)| {
            AuctionConfig::new(
                k,
                RevenueDistribution::Uniform { r_max },
                DiscountFunction::Geometric { delta },
                floor_frac * r_max,
                0,
            )
            .unwrap()
        })
}

proptest! {
    #[test]
    fn bids_never_exceed_revenue(cfg in arb_config(), frac in 0.0f64..1.0) {
        let r = frac * cfg.distribution.support_max();
        match equilibrium_bid(r, &cfg) {
            Ok(Bid::Price(p)) => {
                prop_assert!(p <= r + 1e-12, "bid {p} above revenue {r}");
                prop_assert!(p >= cfg.floor);
            }
            Ok(Bid::Abstain) => prop_assert!(r < cfg.floor),
            Err(_) => prop_assert!(r == 0.0 || cfg.bidders > 1),
        }
    }

    #[test]
    fn bids_are_monotone_in_revenue_and_competition(
        cfg in arb_config(),
        lo in 0.05f64..0.5,
        hi in 0.5f64..1.0,
    ) {
        let r_max = cfg.distribution.support_max();
        let (r_lo, r_hi) = (lo * r_max, hi * r_max);
        prop_assume!(r_lo >= cfg.floor);
        let bid_at = |cfg: &AuctionConfig, r: f64| match equilibrium_bid(r, cfg) {
            Ok(Bid::Price(p)) => p,
            other => panic!("expected a price, got {other:?}"),
        };
        prop_assert!(bid_at(&cfg, r_lo) <= bid_at(&cfg, r_hi) + 1e-12);

        let mut crowded = cfg.clone();
        crowded.bidders += 1;
        prop_assert!(bid_at(&cfg, r_hi) <= bid_at(&crowded, r_hi) + 1e-9);
    }

    #[test]
    fn optimal_price_is_monotone(cfg in arb_config(), bump in 0.01f64..1.0) {
        let r_max = cfg.distribution.support_max();
        let revenues: Vec<f64> = (0..cfg.bidders)
            .map(|i| r_max * (0.3 + 0.5 * i as f64 / cfg.bidders as f64))
            .collect();
        let base = builder_optimal_price(&cfg, &revenues).unwrap().price;

        // More competition never lowers the price.
        let mut crowded = cfg.clone();
        crowded.bidders += 1;
        let mut more = revenues.clone();
        more.push(revenues[0]);
        prop_assert!(builder_optimal_price(&crowded, &more).unwrap().price >= base - 1e-12);

        // A higher floor never lowers it.
        let mut floored = cfg.clone();
        floored.floor += bump;
        prop_assert!(builder_optimal_price(&floored, &revenues).unwrap().price >= base);

        // A higher top revenue never lowers it.
        let mut raised = revenues.clone();
        let top = raised
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        raised[0] = top + bump;
        prop_assert!(builder_optimal_price(&cfg, &raised).unwrap().price >= base - 1e-12);
    }

    #[test]
    fn waiting_discount_decreases_in_win_prob(
        delta in 0.05f64..0.95,
        pi_lo in 0.01f64..0.5,
        gap in 0.01f64..0.49,
    ) {
        let discount = DiscountFunction::Geometric { delta };
        let lo = waiting_discount(pi_lo, &discount, 1e-12, SeriesStart::NextSlot).unwrap();
        let hi = waiting_discount(pi_lo + gap, &discount, 1e-12, SeriesStart::NextSlot).unwrap();
        prop_assert!(hi < lo, "phi should fall as winning gets easier");

        // Series bound: phi <= rho(1) * (1 - pi) / pi.
        let bound = delta * (1.0 - pi_lo) / pi_lo;
        prop_assert!(lo <= bound * (1.0 + 1e-12));
    }
}

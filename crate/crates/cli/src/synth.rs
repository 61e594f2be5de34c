//! Deterministic synthetic fixtures with planted ground truth.
//!
//! Three generators: an efficiency fixture (planted efficient/inefficient
//! blocks with analytically known floors), a detectors fixture (planted
//! redundant-submission patterns among decoys, with fee losses summing to
//! an exact target), and a delay fixture (a blobscription burst with
//! planted affected/unaffected delay means).
//!
//! Planted truths are computed by generator-side arithmetic only — the
//! floors come from hand-derived selection patterns, never from the
//! library's own knapsack — so the fixtures can catch real defects.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use blobaudit_core::time::ms_at_midnight;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const EFFICIENCY_SEED: u64 = 0xB10B_0001;
pub const DETECTORS_SEED: u64 = 0xB10B_0002;
pub const DELAY_SEED: u64 = 0xB10B_0003;

const GWEI: u128 = 1_000_000_000;
const KB: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Efficiency,
    Detectors,
    Delay,
}

impl FixtureKind {
    pub fn default_seed(self) -> u64 {
        match self {
            FixtureKind::Efficiency => EFFICIENCY_SEED,
            FixtureKind::Detectors => DETECTORS_SEED,
            FixtureKind::Delay => DELAY_SEED,
        }
    }
}

/// Planted facts the acceptance suite asserts against.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Truth {
    pub kind: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<EfficiencyTruth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detectors: Option<DetectorsTruth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayTruth>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EfficiencyTruth {
    pub total_blocks: u64,
    pub inefficient_blocks: u64,
    /// Month key -> (inefficient, total).
    pub by_month: BTreeMap<String, (u64, u64)>,
    /// Builder label -> (efficient, inefficient).
    pub by_builder: BTreeMap<String, (u64, u64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DetectorsTruth {
    pub continuous_groups: u64,
    pub continuous_redundant_txs: u64,
    pub double_events: u64,
    pub decoy_txs: u64,
    pub loss_total_wei: u128,
    pub loss_continuous_wei: u128,
    pub loss_double_wei: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DelayTruth {
    pub affected_count: u64,
    pub unaffected_count: u64,
    pub affected_mean_s: f64,
    pub unaffected_mean_s: f64,
    pub delta_s: f64,
    pub window_start_ms: i64,
    pub window_end_ms: i64,
}

/// A complete fixture: the six dataset files plus the planted truth.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub blocks_csv: String,
    pub txs_csv: String,
    pub mempool_csv: String,
    pub labels_builders_csv: String,
    pub labels_rollups_csv: String,
    pub labels_blobscriptions_csv: String,
    pub truth: Truth,
}

impl Fixture {
    /// Write the fixture files (and `truth.json`) into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), AppError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("blocks.csv"), &self.blocks_csv)?;
        fs::write(dir.join("txs.csv"), &self.txs_csv)?;
        fs::write(dir.join("mempool.csv"), &self.mempool_csv)?;
        fs::write(dir.join("labels_builders.csv"), &self.labels_builders_csv)?;
        fs::write(dir.join("labels_rollups.csv"), &self.labels_rollups_csv)?;
        fs::write(
            dir.join("labels_blobscriptions.csv"),
            &self.labels_blobscriptions_csv,
        )?;
        let mut truth = serde_json::to_string_pretty(&self.truth)?;
        truth.push('\n');
        fs::write(dir.join("truth.json"), truth)?;
        Ok(())
    }
}

pub fn generate(kind: FixtureKind, seed: u64) -> Fixture {
    match kind {
        FixtureKind::Efficiency => efficiency_fixture(seed),
        FixtureKind::Detectors => detectors_fixture(seed),
        FixtureKind::Delay => delay_fixture(seed),
    }
}

// ---------------------------------------------------------------------
// shared row plumbing

struct Builder {
    rng: ChaCha8Rng,
    next_hash: u64,
    blocks: Vec<String>,
    txs: Vec<String>,
    mempool: Vec<String>,
    rollup_labels: Vec<(String, String)>,
    blobscriptions: Vec<String>,
}

fn hash_hex(tag: u8, n: u64) -> String {
    let mut bytes = [0u8; 32];
    bytes[0] = tag;
    bytes[8..16].copy_from_slice(&n.to_be_bytes());
    format!("0x{}", hex::encode(bytes))
}

fn addr_hex(tag: u8, n: u64) -> String {
    let mut bytes = [0u8; 20];
    bytes[0] = tag;
    bytes[12..20].copy_from_slice(&n.to_be_bytes());
    format!("0x{}", hex::encode(bytes))
}

impl Builder {
    fn new(seed: u64) -> Self {
        Builder {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_hash: 0,
            blocks: Vec::new(),
            txs: Vec::new(),
            mempool: Vec::new(),
            rollup_labels: Vec::new(),
            blobscriptions: Vec::new(),
        }
    }

    fn fresh_hash(&mut self, tag: u8) -> String {
        self.next_hash += 1;
        hash_hex(tag, self.next_hash)
    }

    /// A non-blob transaction row plus its mempool sighting.
    #[allow(clippy::too_many_arguments)]
    fn type2(
        &mut self,
        sender: &str,
        size: u64,
        mpf_wei: u128,
        block: u64,
        first_seen_ms: Option<i64>,
        in_mempool: bool,
    ) -> String {
        let hash = self.fresh_hash(0x22);
        self.txs.push(format!(
            "{hash},2,{sender},,{size},21000,21000,{mpf_wei},0,{},,{block}",
            mpf_wei * 21_000
        ));
        if in_mempool {
            let seen = first_seen_ms.expect("mempool rows need a sighting");
            self.mempool
                .push(format!("{hash},{seen},2,{size},{mpf_wei},21000"));
        }
        hash
    }

    /// A mempool-only sighting (a transaction that never landed on chain).
    fn mempool_only(&mut self, size: u64, mpf_wei: u128, first_seen_ms: i64) {
        let hash = self.fresh_hash(0x2F);
        self.mempool
            .push(format!("{hash},{first_seen_ms},2,{size},{mpf_wei},21000"));
    }

    /// A blob transaction row; fees are explicit.
    #[allow(clippy::too_many_arguments)]
    fn type3(
        &mut self,
        sender: &str,
        blob_hashes: &[String],
        mpf_wei: u128,
        base_fee_wei: u128,
        priority_fee_wei: u128,
        block: u64,
        first_seen_ms: Option<i64>,
    ) -> String {
        let hash = self.fresh_hash(0x33);
        let blobs = blob_hashes.join(";");
        self.txs.push(format!(
            "{hash},3,{sender},,{size},21000,21000,{mpf_wei},{base_fee_wei},{priority_fee_wei},{blobs},{block}",
            size = blob_hashes.len() as u64 * 131_072,
        ));
        if let Some(seen) = first_seen_ms {
            self.mempool.push(format!(
                "{hash},{seen},3,{},{mpf_wei},21000",
                blob_hashes.len() as u64 * 131_072
            ));
        }
        hash
    }

    fn fresh_blobs(&mut self, count: usize) -> Vec<String> {
        (0..count).map(|_| self.fresh_hash(0xB1)).collect()
    }

    fn block(&mut self, number: u64, ts_ms: i64, extra_data: &str, blobs: u64, txs: &[String]) {
        self.blocks.push(format!(
            "{number},{ts_ms},0x{},{blobs},{}",
            hex::encode(extra_data.as_bytes()),
            txs.join(";")
        ));
    }

    fn render(self, builder_labels: &[(&str, &str)], truth: Truth) -> Fixture {
        let mut blocks_csv = String::from("#blobaudit blocks v1\n");
        blocks_csv.push_str(&self.blocks.join("\n"));
        if !self.blocks.is_empty() {
            blocks_csv.push('\n');
        }
        let mut txs_csv = String::from("#blobaudit txs v1\n");
        txs_csv.push_str(&self.txs.join("\n"));
        if !self.txs.is_empty() {
            txs_csv.push('\n');
        }
        let mut mempool_csv = String::from("#blobaudit mempool v1\n");
        mempool_csv.push_str(&self.mempool.join("\n"));
        if !self.mempool.is_empty() {
            mempool_csv.push('\n');
        }
        let mut labels_builders_csv = String::from("#blobaudit labels-builders v1\n");
        for (pattern, builder) in builder_labels {
            labels_builders_csv.push_str(&format!("{pattern},{builder}\n"));
        }
        let mut labels_rollups_csv = String::from("#blobaudit labels-rollups v1\n");
        for (addr, name) in &self.rollup_labels {
            labels_rollups_csv.push_str(&format!("{addr},{name}\n"));
        }
        let mut labels_blobscriptions_csv = String::from("#blobaudit labels-blobscriptions v1\n");
        for hash in &self.blobscriptions {
            labels_blobscriptions_csv.push_str(&format!("{hash}\n"));
        }
        Fixture {
            blocks_csv,
            txs_csv,
            mempool_csv,
            labels_builders_csv,
            labels_rollups_csv,
            labels_blobscriptions_csv,
            truth,
        }
    }
}

// ---------------------------------------------------------------------
// efficiency fixture

const BUILDERS: [(&str, &str); 5] = [
    ("beaverbuild.org", "beaverbuild"),
    ("Titan (titanbuilder.xyz)", "titan"),
    ("rsync-builder.xyz", "rsync builder"),
    ("Illuminate Dmocratize Dstribute", "flashbots"),
    ("", "unlabeled"),
];

const BUILDER_PATTERNS: [(&str, &str); 4] = [
    ("beaverbuild", "beaverbuild"),
    ("titan", "titan"),
    ("rsync", "rsync builder"),
    ("illuminate", "flashbots"),
];

const ROLLUPS: [&str; 4] = ["taiko", "scroll", "base", "arbitrum"];

/// 1,000 blocks over six months with exactly 295 planted inefficient
/// blocks. Every block carries one single-blob transaction priced against
/// a three-item pool whose floor is known in closed form; slow, never-
/// included and private transactions are planted so that a broken filter
/// shifts the floors and trips the counts.
pub fn efficiency_fixture(seed: u64) -> Fixture {
    let plan: [(i64, u32, u64, u64); 6] = [
        (2024, 3, 100, 55),
        (2024, 4, 150, 74),
        (2024, 5, 200, 90),
        (2024, 6, 200, 45),
        (2024, 7, 200, 21),
        (2024, 8, 150, 10),
    ];
    let mut b = Builder::new(seed);
    for (i, rollup) in ROLLUPS.iter().enumerate() {
        b.rollup_labels
            .push((addr_hex(0xA0, i as u64 + 1), rollup.to_string()));
    }

    let mut truth = EfficiencyTruth {
        total_blocks: 0,
        inefficient_blocks: 0,
        by_month: BTreeMap::new(),
        by_builder: BTreeMap::new(),
    };
    let mut global = 0u64;
    for (year, month, total, inefficient) in plan {
        let month_key = format!("{year:04}-{month:02}");
        truth.by_month.insert(month_key, (inefficient, total));
        truth.total_blocks += total;
        truth.inefficient_blocks += inefficient;

        // Which positions in the month go inefficient: seeded shuffle.
        let mut flags: Vec<bool> = (0..total).map(|i| i < inefficient).collect();
        for i in (1..flags.len()).rev() {
            let j = b.rng.random_range(0..=i);
            flags.swap(i, j);
        }

        let month_start = ms_at_midnight(year, month, 1).as_ms();
        for (i, &goes_inefficient) in flags.iter().enumerate() {
            let ts = month_start + (i as i64 + 1) * 3_600_000;
            let number = 19_600_000 + global * 25;
            let (extra_data, builder_name) = BUILDERS[(global % 5) as usize];

            // Pool of three pending transactions. Pattern A: everything
            // fits one blob, floor = sum. Pattern B: 100 KB + 100 KB +
            // 28 KB with descending profit/size ratios, so the scan takes
            // the first and third: floor = first + third.
            let (sizes, mpf): ([u64; 3], [u128; 3]) = if global % 3 == 2 {
                let a = 40 + b.rng.random_range(0..=10) as u128;
                let b_ = a - 5;
                let c = (b_ / 5).max(1);
                ([100 * KB, 100 * KB, 28 * KB], [a, b_, c])
            } else {
                (
                    [30 * KB, 35 * KB, 40 * KB],
                    [
                        b.rng.random_range(1..=50) as u128,
                        b.rng.random_range(1..=50) as u128,
                        b.rng.random_range(1..=50) as u128,
                    ],
                )
            };
            let floor_mpf_wei: u128 = if global % 3 == 2 {
                (mpf[0] + mpf[2]) * GWEI
            } else {
                (mpf[0] + mpf[1] + mpf[2]) * GWEI
            };

            let mut tx_hashes = Vec::new();
            for (size, fee) in sizes.iter().zip(mpf) {
                tx_hashes.push(b.type2(
                    &addr_hex(0x70, global + 1),
                    *size,
                    fee * GWEI,
                    number,
                    Some(ts - 5_000),
                    true,
                ));
            }
            // Poison pills: a slow inclusion (150 s), a sighting that
            // never lands, and a private transaction. None may move the
            // floor.
            if global % 10 == 0 {
                tx_hashes.push(b.type2(
                    &addr_hex(0x71, global + 1),
                    10 * KB,
                    500 * GWEI,
                    number,
                    Some(ts - 150_000),
                    true,
                ));
            }
            if global % 13 == 0 {
                b.mempool_only(10 * KB, 400 * GWEI, ts - 5_000);
            }
            if global % 50 == 0 {
                tx_hashes.push(b.type2(
                    &addr_hex(0x72, global + 1),
                    5 * KB,
                    3 * GWEI,
                    number,
                    None,
                    false,
                ));
            }

            // Inefficient blocks alternate between a one-unit shortfall
            // (the boundary case) and a deep one (a fifth of the floor),
            // so the monthly profit difference starts negative and turns
            // positive as inefficiency thins out.
            let t3_mpf_wei = if goes_inefficient {
                if global % 2 == 1 {
                    floor_mpf_wei - 1
                } else {
                    floor_mpf_wei / 5
                }
            } else {
                floor_mpf_wei + 3 * (global % 3) as u128 * (global % 3) as u128 * GWEI
            };
            let sender = addr_hex(0xA0, (global % 4) + 1);
            let blobs = b.fresh_blobs(1);
            let profit = t3_mpf_wei * 21_000;
            let t3 = b.type3(
                &sender,
                &blobs,
                t3_mpf_wei,
                21_000 * 8 * GWEI,
                profit,
                number,
                Some(ts - 7_000),
            );
            tx_hashes.push(t3);
            b.block(number, ts, extra_data, 1, &tx_hashes);

            let by_builder = truth
                .by_builder
                .entry(builder_name.to_string())
                .or_insert((0, 0));
            if goes_inefficient {
                by_builder.1 += 1;
            } else {
                by_builder.0 += 1;
            }
            global += 1;
        }
    }

    b.render(
        &BUILDER_PATTERNS,
        Truth {
            kind: "efficiency".into(),
            seed,
            efficiency: Some(truth),
            detectors: None,
            delay: None,
        },
    )
}

// ---------------------------------------------------------------------
// detectors fixture

/// Exactly 50 continuous-sending groups, 50 double-sending events and 200
/// decoy transactions, with redundant fees summing to 186.92 ETH to the
/// wei.
pub fn detectors_fixture(seed: u64) -> Fixture {
    const LOSS_TARGET_WEI: u128 = 186_920_000_000_000_000_000; // 186.92 ETH
    let mut b = Builder::new(seed);
    let rollup_names = ["scroll", "linea", "zksync"];

    // Allocate the target loss over the 125 redundant transactions
    // (25 groups x 1 + 25 groups x 2 + 50 resubmissions).
    let weights: Vec<u128> = (0..125).map(|_| b.rng.random_range(1..=1000) as u128).collect();
    let weight_sum: u128 = weights.iter().sum();
    let mut fees: Vec<u128> = weights
        .iter()
        .map(|w| LOSS_TARGET_WEI / weight_sum * w)
        .collect();
    let remainder = LOSS_TARGET_WEI - fees.iter().sum::<u128>();
    fees[0] += remainder;
    let mut fee_iter = fees.into_iter();
    let mut loss_continuous = 0u128;
    let mut loss_double = 0u128;

    // Per-sender labeling: cycle three rollups and one unlabeled slot.
    let mut sender_counter = 0u64;
    let mut labeled_sender = |b: &mut Builder| {
        sender_counter += 1;
        let addr = addr_hex(0x51, sender_counter);
        if sender_counter % 4 != 0 {
            let name = rollup_names[(sender_counter % 4) as usize - 1];
            b.rollup_labels.push((addr.clone(), name.to_string()));
        }
        addr
    };

    // Build work units first; shuffle them onto the block timeline after.
    enum Unit {
        // sender, per-tx blob counts, redundant fees (wei)
        Continuous(String, Vec<usize>, Vec<u128>),
        // sender_first, sender_second, fee of the redundant second (wei)
        Double(String, String, u128),
        // independent senders, one tx each, in one block
        SameBlockDecoys(Vec<String>),
        // one sender, two txs in adjacent blocks
        AdjacentDecoy(String),
    }

    let mut units = Vec::new();
    for g in 0..50u64 {
        let sender = labeled_sender(&mut b);
        let blob_counts = if g % 2 == 0 {
            vec![1usize, 1]
        } else {
            vec![1, 2, 1]
        };
        let redundant_fees: Vec<u128> = blob_counts[1..]
            .iter()
            .map(|_| fee_iter.next().expect("allocated above"))
            .collect();
        loss_continuous += redundant_fees.iter().sum::<u128>();
        units.push(Unit::Continuous(sender, blob_counts, redundant_fees));
    }
    for p in 0..50u64 {
        let first = labeled_sender(&mut b);
        let second = if p % 2 == 0 {
            first.clone()
        } else {
            labeled_sender(&mut b)
        };
        let fee = fee_iter.next().expect("allocated above");
        loss_double += fee;
        units.push(Unit::Double(first, second, fee));
    }
    // 200 decoy transactions: 80 singles (packed 3 per block), 30
    // same-sender adjacent-block pairs, 20 same-block triples.
    let mut singles = Vec::new();
    for i in 0..80u64 {
        singles.push(labeled_sender(&mut b));
        if singles.len() == 3 || i == 79 {
            units.push(Unit::SameBlockDecoys(std::mem::take(&mut singles)));
        }
    }
    for _ in 0..30u64 {
        units.push(Unit::AdjacentDecoy(labeled_sender(&mut b)));
    }
    for _ in 0..20u64 {
        let trio = (0..3).map(|_| labeled_sender(&mut b)).collect();
        units.push(Unit::SameBlockDecoys(trio));
    }

    // Deterministic shuffle of the unit order.
    for i in (1..units.len()).rev() {
        let j = b.rng.random_range(0..=i);
        units.swap(i, j);
    }

    let start_ms = ms_at_midnight(2024, 4, 1).as_ms();
    let mut slot = 0u64;
    let next_block = |slot: &mut u64| {
        let number = 19_650_000 + *slot;
        let ts = start_ms + *slot as i64 * 8 * 3_600_000;
        *slot += 1;
        (number, ts)
    };
    let arbitrary_fee =
        |b: &mut Builder| (b.rng.random_range(1..=200) as u128) * GWEI * 21_000;

    for unit in units {
        match unit {
            Unit::Continuous(sender, blob_counts, redundant_fees) => {
                let (number, ts) = next_block(&mut slot);
                let mut tx_hashes = Vec::new();
                let mut total_blobs = 0u64;
                for (i, &q) in blob_counts.iter().enumerate() {
                    let fee = if i == 0 {
                        arbitrary_fee(&mut b)
                    } else {
                        redundant_fees[i - 1]
                    };
                    let blobs = b.fresh_blobs(q);
                    total_blobs += q as u64;
                    let (base, priority) = (fee / 3, fee - fee / 3);
                    tx_hashes.push(b.type3(
                        &sender, &blobs, 1, base, priority, number,
                        Some(ts - 6_000),
                    ));
                }
                b.block(number, ts, "beaverbuild.org", total_blobs, &tx_hashes);
            }
            Unit::Double(first_sender, second_sender, fee) => {
                let (n1, ts1) = next_block(&mut slot);
                let (n2, ts2) = next_block(&mut slot);
                let shared_blob = b.fresh_blobs(1);
                let first_fee = arbitrary_fee(&mut b);
                let (fb, fp) = (first_fee / 3, first_fee - first_fee / 3);
                let first = b.type3(
                    &first_sender, &shared_blob, 1, fb, fp, n1,
                    Some(ts1 - 6_000),
                );
                b.block(n1, ts1, "beaverbuild.org", 1, &[first]);
                let (sb, sp) = (fee / 3, fee - fee / 3);
                let second = b.type3(
                    &second_sender, &shared_blob, 1, sb, sp, n2,
                    Some(ts2 - 6_000),
                );
                b.block(n2, ts2, "beaverbuild.org", 1, &[second]);
            }
            Unit::SameBlockDecoys(senders) => {
                let (number, ts) = next_block(&mut slot);
                let mut tx_hashes = Vec::new();
                for sender in &senders {
                    let fee = arbitrary_fee(&mut b);
                    let blobs = b.fresh_blobs(1);
                    tx_hashes.push(b.type3(
                        sender, &blobs, 1, fee / 3, fee - fee / 3, number,
                        Some(ts - 6_000),
                    ));
                }
                b.block(number, ts, "beaverbuild.org", senders.len() as u64, &tx_hashes);
            }
            Unit::AdjacentDecoy(sender) => {
                let (n1, ts1) = next_block(&mut slot);
                let (n2, ts2) = next_block(&mut slot);
                for (n, ts) in [(n1, ts1), (n2, ts2)] {
                    let fee = arbitrary_fee(&mut b);
                    let blobs = b.fresh_blobs(1);
                    let tx = b.type3(
                        &sender, &blobs, 1, fee / 3, fee - fee / 3, n,
                        Some(ts - 6_000),
                    );
                    b.block(n, ts, "beaverbuild.org", 1, &[tx]);
                }
            }
        }
    }

    let truth = DetectorsTruth {
        continuous_groups: 50,
        continuous_redundant_txs: 75,
        double_events: 50,
        decoy_txs: 200,
        loss_total_wei: LOSS_TARGET_WEI,
        loss_continuous_wei: loss_continuous,
        loss_double_wei: loss_double,
    };
    debug_assert_eq!(loss_continuous + loss_double, LOSS_TARGET_WEI);

    b.render(
        &BUILDER_PATTERNS[..1],
        Truth {
            kind: "detectors".into(),
            seed,
            efficiency: None,
            detectors: Some(truth),
            delay: None,
        },
    )
}

// ---------------------------------------------------------------------
// delay fixture

/// Six hundred 12-second slots with a blobscription burst in blocks
/// 100..=200. Twenty affected rollup transactions average exactly 43 s of
/// delay, thirty unaffected ones exactly 24 s.
pub fn delay_fixture(seed: u64) -> Fixture {
    let mut b = Builder::new(seed);
    let start_ms = ms_at_midnight(2024, 4, 1).as_ms();
    let slot_ts = |n: u64| start_ms + n as i64 * 12_000;
    let rollup_names = ["scroll", "taiko", "base"];
    for (i, name) in rollup_names.iter().enumerate() {
        b.rollup_labels
            .push((addr_hex(0xA5, i as u64 + 1), name.to_string()));
    }

    // Planted transactions keyed by their inclusion block.
    let mut planted: BTreeMap<u64, Vec<(String, i64)>> = BTreeMap::new();
    let affected_delays = [41_000i64, 42_000, 43_000, 44_000, 45_000];
    for i in 0..20u64 {
        let block = 105 + i * 4;
        let delay = affected_delays[(i % 5) as usize];
        let sender = addr_hex(0xA5, (i % 3) + 1);
        planted.entry(block).or_default().push((sender, delay));
    }
    let unaffected_delays = [22_000i64, 23_000, 24_000, 25_000, 26_000];
    for i in 0..30u64 {
        let block = 300 + i * 10;
        let delay = unaffected_delays[(i % 5) as usize];
        let sender = addr_hex(0xA5, (i % 3) + 1);
        planted.entry(block).or_default().push((sender, delay));
    }

    for n in 1..=600u64 {
        let number = 19_700_000 + n;
        let ts = slot_ts(n);
        let mut tx_hashes = Vec::new();
        let mut blobs_in_block = 0u64;
        if (100..=200).contains(&n) {
            // Five blobscription blobs per burst block.
            let fee = (b.rng.random_range(1..=20) as u128) * GWEI * 21_000;
            let blobs = b.fresh_blobs(5);
            let tx = b.type3(
                &addr_hex(0xEE, n),
                &blobs,
                1,
                fee / 3,
                fee - fee / 3,
                number,
                Some(ts - 2_000),
            );
            b.blobscriptions.push(tx.clone());
            tx_hashes.push(tx);
            blobs_in_block += 5;
        }
        for (sender, delay) in planted.remove(&n).unwrap_or_default() {
            let fee = (b.rng.random_range(1..=50) as u128) * GWEI * 21_000;
            let blobs = b.fresh_blobs(1);
            tx_hashes.push(b.type3(
                &sender,
                &blobs,
                1,
                fee / 3,
                fee - fee / 3,
                number,
                Some(ts - delay),
            ));
            blobs_in_block += 1;
        }
        b.block(number, ts, "beaverbuild.org", blobs_in_block, &tx_hashes);
    }

    let truth = DelayTruth {
        affected_count: 20,
        unaffected_count: 30,
        affected_mean_s: 43.0,
        unaffected_mean_s: 24.0,
        delta_s: 19.0,
        window_start_ms: start_ms,
        window_end_ms: slot_ts(601),
    };
    b.render(
        &BUILDER_PATTERNS[..1],
        Truth {
            kind: "delay".into(),
            seed,
            efficiency: None,
            detectors: None,
            delay: Some(truth),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        for kind in [
            FixtureKind::Efficiency,
            FixtureKind::Detectors,
            FixtureKind::Delay,
        ] {
            let a = generate(kind, kind.default_seed());
            let bxt = generate(kind, kind.default_seed());
            assert_eq!(a.blocks_csv, bxt.blocks_csv);
            assert_eq!(a.txs_csv, bxt.txs_csv);
            assert_eq!(a.mempool_csv, bxt.mempool_csv);
            assert_eq!(a.truth, bxt.truth);
        }
    }

    #[test]
    fn efficiency_truth_adds_up() {
        let fixture = efficiency_fixture(EFFICIENCY_SEED);
        let truth = fixture.truth.efficiency.unwrap();
        assert_eq!(truth.total_blocks, 1000);
        assert_eq!(truth.inefficient_blocks, 295);
        let monthly: u64 = truth.by_month.values().map(|(i, _)| i).sum();
        assert_eq!(monthly, 295);
        let by_builder: u64 = truth.by_builder.values().map(|(e, i)| e + i).sum();
        assert_eq!(by_builder, 1000);
    }

    #[test]
    fn detectors_loss_hits_target_exactly() {
        let fixture = detectors_fixture(DETECTORS_SEED);
        let truth = fixture.truth.detectors.unwrap();
        assert_eq!(
            truth.loss_continuous_wei + truth.loss_double_wei,
            186_920_000_000_000_000_000
        );
    }
}

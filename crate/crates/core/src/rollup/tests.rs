use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::dataset::Tx;
use crate::model::{Address, Block, ByteSize, LabelSet, MempoolRecord, TypeThreeTx};

fn hash(n: u16) -> TxHash {
    let mut bytes = [0u8; 32];
    bytes[0] = (n >> 8) as u8;
    bytes[1] = n as u8;
    TxHash::new(bytes)
}

fn blob(n: u16) -> BlobHash {
    let mut bytes = [0u8; 32];
    bytes[30] = (n >> 8) as u8;
    bytes[31] = n as u8;
    BlobHash::new(bytes)
}

fn addr(n: u8) -> Address {
    Address::new([n; 20])
}

struct Fixture {
    blocks: Vec<Block>,
    txs: Vec<Tx>,
    mempool: Vec<MempoolRecord>,
    labels: LabelSet,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            blocks: vec![],
            txs: vec![],
            mempool: vec![],
            labels: LabelSet::default(),
        }
    }

    fn label(&mut self, sender: u8, rollup: &str) {
        self.labels
            .rollup_addresses
            .insert(addr(sender), rollup.into());
    }

    fn t3(&mut self, n: u16, sender: u8, blobs: &[u16], fee: u128) -> TxHash {
        self.txs.push(Tx::Three(TypeThreeTx {
            hash: hash(n),
            sender: addr(sender),
            to: None,
            blob_hashes: blobs.iter().map(|&b| blob(b)).collect(),
            builder_profit: Money::wei(fee),
            base_fee_paid: Money::wei(fee / 2),
            priority_fee_paid: Money::wei(fee - fee / 2),
            first_seen: None,
            included_block: None,
            rollup_label: None,
            is_blobscription: false,
        }));
        hash(n)
    }

    fn seen(&mut self, n: u16, first_seen_ms: i64) {
        self.mempool.push(MempoolRecord {
            tx_hash: hash(n),
            first_seen: TimestampMs::new(first_seen_ms),
            tx_type: 3,
            size: ByteSize::bytes(131_072),
            builder_profit: Money::ZERO,
        });
    }

    fn blobscription(&mut self, n: u16) {
        self.labels.blobscription_txs.insert(hash(n));
    }

    fn block(&mut self, number: u64, ts_ms: i64, tx_hashes: &[TxHash]) {
        let total: u8 = tx_hashes
            .iter()
            .map(|h| {
                self.txs
                    .iter()
                    .find(|t| t.hash() == *h)
                    .and_then(|t| t.as_type_three())
                    .map(|t| t.blob_count())
                    .unwrap_or(0)
            })
            .sum();
        for h in tx_hashes {
            for tx in self.txs.iter_mut() {
                if tx.hash() == *h {
                    match tx {
                        Tx::Two(t) => t.included_block = Some(number),
                        Tx::Three(t) => t.included_block = Some(number),
                    }
                }
            }
        }
        self.blocks.push(Block {
            number,
            slot_timestamp: TimestampMs::new(ts_ms),
            extra_data: vec![],
            builder_label: None,
            txs: tx_hashes.to_vec(),
            total_blobs: total,
        });
    }

    fn build(self) -> Dataset {
        Dataset::assemble(self.blocks, self.txs, self.mempool, self.labels).unwrap()
    }
}

#[test]
fn one_tx_per_block_yields_no_continuous_findings() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 100);
    let b = f.t3(2, 1, &[2], 100);
    f.block(1, 12_000, &[a]);
    f.block(2, 24_000, &[b]);
    let ds = f.build();
    assert!(detect_continuous_sending(&ds).unwrap().is_empty());
}

#[test]
fn two_single_blob_txs_in_one_block_are_continuous_sending() {
    let mut f = Fixture::new();
    f.label(1, "scroll");
    let a = f.t3(1, 1, &[1], 100);
    let b = f.t3(2, 1, &[2], 61);
    f.block(1, 12_000, &[a, b]);
    let ds = f.build();
    let findings = detect_continuous_sending(&ds).unwrap();
    assert_eq!(findings.len(), 1);
    let finding = &findings[0];
    assert_eq!(finding.kind, PatternKind::ContinuousSending);
    assert_eq!(finding.rollup, "scroll");
    assert_eq!(finding.involved, vec![a, b]);
    assert_eq!(finding.redundant, vec![b]);
    // Loss is the second transaction's full execution fee.
    assert_eq!(finding.loss, Money::wei(61));
    assert_eq!(finding.blocks, vec![1]);
}

#[test]
fn overflowing_group_is_not_bundleable_and_not_flagged() {
    // Four 2-blob transactions from one sender in one "block": 8 blobs
    // cannot be one transaction, so no finding. Such a block cannot parse
    // from disk (the cap is 6); build the dataset by hand to exercise the
    // detector's capacity rule.
    let mut f = Fixture::new();
    let txs: Vec<TxHash> = (0..4u16)
        .map(|i| f.t3(i + 1, 1, &[i * 2 + 10, i * 2 + 11], 50))
        .collect();
    f.block(1, 12_000, &txs);
    let ds = Dataset {
        blocks: f.blocks,
        txs: f.txs.into_iter().map(|t| (t.hash(), t)).collect(),
        ..Dataset::default()
    };
    assert!(detect_continuous_sending(&ds).unwrap().is_empty());
}

#[test]
fn unique_blobs_yield_no_double_findings() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 100);
    let b = f.t3(2, 2, &[2], 100);
    f.block(1, 12_000, &[a]);
    f.block(2, 24_000, &[b]);
    let ds = f.build();
    assert!(detect_double_sending(&ds).unwrap().is_empty());
}

#[test]
fn resubmitted_blob_is_double_sending() {
    let mut f = Fixture::new();
    f.label(1, "scroll");
    f.label(2, "linea");
    let a = f.t3(1, 1, &[77], 100);
    let b = f.t3(2, 2, &[77], 41);
    f.block(100, 12_000, &[a]);
    f.block(102, 36_000, &[b]);
    let ds = f.build();
    let findings = detect_double_sending(&ds).unwrap();
    assert_eq!(findings.len(), 1);
    let finding = &findings[0];
    assert_eq!(finding.kind, PatternKind::DoubleSending);
    assert_eq!(finding.rollup, "linea");
    assert_eq!(finding.involved, vec![b, a]);
    assert_eq!(finding.redundant, vec![b]);
    assert_eq!(finding.loss, Money::wei(41));
    assert_eq!(finding.blocks, vec![100, 102]);
    assert_eq!(finding.same_sender, Some(false));
}

#[test]
fn same_sender_double_sending_is_flagged() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[5], 10);
    let b = f.t3(2, 1, &[5], 10);
    f.block(1, 12_000, &[a]);
    f.block(2, 24_000, &[b]);
    let ds = f.build();
    let findings = detect_double_sending(&ds).unwrap();
    assert_eq!(findings[0].same_sender, Some(true));
}

#[test]
fn double_sending_within_one_block_counts() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[5], 10);
    let b = f.t3(2, 2, &[5], 30);
    f.block(1, 12_000, &[a, b]);
    let ds = f.build();
    let findings = detect_double_sending(&ds).unwrap();
    assert_eq!(findings.len(), 1);
    assert_eq!(findings[0].redundant, vec![b]);
    assert_eq!(findings[0].blocks, vec![1]);
}

#[test]
fn detectors_ignore_input_order() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 10);
    let b = f.t3(2, 1, &[2], 20);
    let c = f.t3(3, 2, &[1], 30);
    f.block(1, 12_000, &[a, b]);
    f.block(2, 24_000, &[c]);
    let ds1 = f.build();

    let mut g = Fixture::new();
    let c2 = g.t3(3, 2, &[1], 30);
    let b2 = g.t3(2, 1, &[2], 20);
    let a2 = g.t3(1, 1, &[1], 10);
    assert_eq!((a, b, c), (a2, b2, c2));
    g.block(2, 24_000, &[c2]);
    g.block(1, 12_000, &[a2, b2]);
    let ds2 = g.build();

    assert_eq!(
        detect_continuous_sending(&ds1).unwrap(),
        detect_continuous_sending(&ds2).unwrap()
    );
    assert_eq!(
        detect_double_sending(&ds1).unwrap(),
        detect_double_sending(&ds2).unwrap()
    );
}

#[test]
fn loss_prefers_double_sending_and_charges_once() {
    // One transaction is both the second of a same-block pair and a blob
    // resubmission; its fee must be charged once, as double sending.
    let mut f = Fixture::new();
    f.label(1, "scroll");
    let a = f.t3(1, 1, &[1], 100);
    let b = f.t3(2, 1, &[1], 60); // same sender, same block, duplicate blob
    f.block(1, 12_000, &[a, b]);
    let ds = f.build();
    let cs = detect_continuous_sending(&ds).unwrap();
    let dbl = detect_double_sending(&ds).unwrap();
    assert_eq!(cs.len(), 1);
    assert_eq!(dbl.len(), 1);
    let report = economic_loss(&ds, &cs, &dbl, Bucket::Monthly).unwrap();
    assert_eq!(report.total, Money::wei(60));
    assert_eq!(report.per_kind[&PatternKind::DoubleSending], Money::wei(60));
    assert!(!report.per_kind.contains_key(&PatternKind::ContinuousSending));
    assert_eq!(report.per_rollup["scroll"], Money::wei(60));
}

#[test]
fn cumulative_losses_prefix_sum() {
    let mut f = Fixture::new();
    // Two months with losses 10 and 25.
    let jan = 86_400_000i64;
    let feb = 32 * 86_400_000i64;
    let a = f.t3(1, 1, &[1], 100);
    let b = f.t3(2, 1, &[2], 10);
    let c = f.t3(3, 1, &[3], 100);
    let d = f.t3(4, 1, &[4], 25);
    f.block(1, jan, &[a, b]);
    f.block(2, feb, &[c, d]);
    let ds = f.build();
    let cs = detect_continuous_sending(&ds).unwrap();
    let report = economic_loss(&ds, &cs, &[], Bucket::Monthly).unwrap();
    let cumulative = report.cumulative();
    assert_eq!(
        cumulative,
        vec![
            ("1970-01".to_string(), Money::wei(10)),
            ("1970-02".to_string(), Money::wei(35)),
        ]
    );
    assert_eq!(report.total, Money::wei(35));
}

#[test]
fn no_findings_means_zero_series() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 10);
    f.block(1, 12_000, &[a]);
    let ds = f.build();
    let report = economic_loss(&ds, &[], &[], Bucket::Monthly).unwrap();
    assert_eq!(report.total, Money::ZERO);
    assert!(report.per_period.is_empty());
    assert!(report.cumulative().is_empty());
}

/// Twelve-second slots: block n sits at n*12s.
fn slot_ms(n: u64) -> i64 {
    n as i64 * 12_000
}

#[test]
fn delay_impact_planted_means() {
    let mut f = Fixture::new();
    f.label(1, "scroll");
    let mut next_tx = 1u16;
    let mut blocks: Vec<(u64, Vec<TxHash>)> = (1..=60).map(|n| (n, vec![])).collect();

    // Blobscription burst: blocks 10..=20 carry 5 blobscription blobs.
    for b in 10..=20u64 {
        let tx = f.t3(next_tx, 200, &[next_tx * 10, next_tx * 10 + 1, next_tx * 10 + 2, next_tx * 10 + 3, next_tx * 10 + 4], 1);
        f.blobscription(next_tx);
        f.seen(next_tx, slot_ms(b) - 1000);
        blocks[(b - 1) as usize].1.push(tx);
        next_tx += 1;
    }
    // Affected rollup txs: one per burst block 14..=19, 43 s mean delay
    // (+-2 s symmetric); each interval covers at least three burst slots.
    let affected_delays = [41_000i64, 45_000, 42_000, 44_000, 43_000, 43_000];
    for (i, &delay) in affected_delays.iter().enumerate() {
        let b = 14 + i as u64;
        let tx = f.t3(next_tx, 1, &[2000 + next_tx], 1);
        f.seen(next_tx, slot_ms(b) - delay);
        blocks[(b - 1) as usize].1.push(tx);
        next_tx += 1;
    }
    // Unaffected rollup txs: far after the burst, 24 s mean delay (+-2 s).
    let unaffected_delays = [22_000i64, 26_000, 23_000, 25_000, 24_000, 24_000];
    for (i, &delay) in unaffected_delays.iter().enumerate() {
        let b = 40 + i as u64;
        let tx = f.t3(next_tx, 1, &[3000 + next_tx], 1);
        f.seen(next_tx, slot_ms(b) - delay);
        blocks[(b - 1) as usize].1.push(tx);
        next_tx += 1;
    }
    for (n, txs) in blocks {
        f.block(n, slot_ms(n), &txs);
    }
    let ds = f.build();
    let impact = delay_impact(
        &ds,
        (TimestampMs::new(0), TimestampMs::new(slot_ms(61))),
        1,
    )
    .unwrap();
    assert_eq!(impact.affected_count, 6);
    assert_eq!(impact.unaffected_count, 6);
    assert!((impact.affected_mean_s.unwrap() - 43.0).abs() < 1e-9);
    assert!((impact.unaffected_mean_s.unwrap() - 24.0).abs() < 1e-9);
    assert!((impact.delta_s.unwrap() - 19.0).abs() < 1e-9);
}

#[test]
fn included_in_the_slot_it_appeared_is_never_affected() {
    let mut f = Fixture::new();
    f.label(1, "scroll");
    // A burst block right before.
    let burst = f.t3(1, 200, &[10, 11, 12, 13, 14], 1);
    f.blobscription(1);
    // Included in the very slot it was first seen.
    let instant = f.t3(2, 1, &[20], 1);
    f.seen(2, slot_ms(2));
    f.block(1, slot_ms(1), &[burst]);
    f.block(2, slot_ms(2), &[instant]);
    let ds = f.build();
    let impact = delay_impact(
        &ds,
        (TimestampMs::new(0), TimestampMs::new(slot_ms(10))),
        1,
    )
    .unwrap();
    assert_eq!(impact.affected_count, 0);
    assert_eq!(impact.unaffected_count, 1);
    assert_eq!(impact.affected_mean_s, None);
    assert_eq!(impact.delta_s, None);
    assert_eq!(impact.unaffected_mean_s, Some(0.0));
}

#[test]
fn empty_window_is_an_error() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 10);
    f.seen(1, slot_ms(1) - 1000);
    f.block(1, slot_ms(1), &[a]);
    let ds = f.build();
    // Window entirely before any sighting.
    let err = delay_impact(
        &ds,
        (TimestampMs::new(-10_000), TimestampMs::new(-5_000)),
        1,
    )
    .unwrap_err();
    assert_eq!(err, RollupAuditError::EmptyWindow);
}

#[test]
fn landscape_single_rollup_all_single_blob() {
    let mut f = Fixture::new();
    f.label(1, "taiko");
    let a = f.t3(1, 1, &[1], 1);
    let b = f.t3(2, 1, &[2], 1);
    f.block(1, slot_ms(1), &[a]);
    f.block(2, slot_ms(2), &[b]);
    let ds = f.build();
    let landscape = blob_landscape(&ds);
    assert_eq!(landscape.one_blob_share(), 1.0);
    assert_eq!(landscape.per_rollup["taiko"][0], 2);
    assert_eq!(landscape.total_txs(), 2);
}

#[test]
fn landscape_heavy_bundler_masses_at_five_and_six() {
    let mut f = Fixture::new();
    f.label(1, "base");
    let a = f.t3(1, 1, &[1, 2, 3, 4, 5], 1);
    let b = f.t3(2, 1, &[6, 7, 8, 9, 10, 11], 1);
    f.block(1, slot_ms(1), &[a]);
    f.block(2, slot_ms(2), &[b]);
    let ds = f.build();
    let landscape = blob_landscape(&ds);
    let hist = landscape.per_rollup["base"];
    assert_eq!(hist, [0, 0, 0, 0, 1, 1]);
}

#[test]
fn landscape_separates_blobscriptions_and_unlabeled() {
    let mut f = Fixture::new();
    let a = f.t3(1, 1, &[1], 1);
    let b = f.t3(2, 2, &[2], 1);
    f.blobscription(2);
    f.block(1, slot_ms(1), &[a, b]);
    let ds = f.build();
    let landscape = blob_landscape(&ds);
    assert_eq!(landscape.per_rollup[UNLABELED][0], 1);
    assert_eq!(landscape.per_rollup[BLOBSCRIPTION_LABEL][0], 1);
    let day = landscape.daily.values().next().unwrap();
    assert_eq!(day[UNLABELED], 1);
    assert_eq!(day[BLOBSCRIPTION_LABEL], 1);
}

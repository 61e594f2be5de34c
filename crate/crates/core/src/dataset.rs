//! The immutable joined view the auditors consume: blocks in order, both
//! transaction indices, the mempool archive, and the label tables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{
    inclusion_delay, Block, LabelSet, MempoolRecord, ModelError, TimestampMs, TxHash, TypeThreeTx,
    TypeTwoTx,
};

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("duplicate block number {0}")]
    DuplicateBlock(u64),
    #[error("duplicate transaction hash {0}")]
    DuplicateTx(TxHash),
    #[error("dataset is empty")]
    Empty,
    #[error("dataset violates its invariants:\n{}", .0.join("\n"))]
    Violations(Vec<String>),
}

/// Either transaction kind, keyed by hash in [`Dataset::txs`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Tx {
    Two(TypeTwoTx),
    Three(TypeThreeTx),
}

impl Tx {
    pub fn hash(&self) -> TxHash {
        match self {
            Tx::Two(t) => t.hash,
            Tx::Three(t) => t.hash,
        }
    }

    pub fn included_block(&self) -> Option<u64> {
        match self {
            Tx::Two(t) => t.included_block,
            Tx::Three(t) => t.included_block,
        }
    }

    pub fn first_seen(&self) -> Option<TimestampMs> {
        match self {
            Tx::Two(t) => t.first_seen,
            Tx::Three(t) => t.first_seen,
        }
    }

    fn set_first_seen(&mut self, ts: TimestampMs) {
        match self {
            Tx::Two(t) => t.first_seen = Some(ts),
            Tx::Three(t) => t.first_seen = Some(ts),
        }
    }

    pub fn as_type_three(&self) -> Option<&TypeThreeTx> {
        match self {
            Tx::Three(t) => Some(t),
            Tx::Two(_) => None,
        }
    }

    pub fn as_type_two(&self) -> Option<&TypeTwoTx> {
        match self {
            Tx::Two(t) => Some(t),
            Tx::Three(_) => None,
        }
    }
}

/// An assembled, validated, label-joined dataset. Immutable once built.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    /// Blocks with strictly increasing numbers.
    pub blocks: Vec<Block>,
    pub txs: BTreeMap<TxHash, Tx>,
    pub mempool: BTreeMap<TxHash, MempoolRecord>,
    pub labels: LabelSet,
    pub time_range: (TimestampMs, TimestampMs),
}

impl Dataset {
    /// Sort, join, label and validate the parsed parts into a dataset.
    ///
    /// Joining sets `first_seen` from the mempool archive; labels fill in
    /// builder names, rollup names and blobscription flags. All invariant
    /// violations are collected and reported together.
    pub fn assemble(
        mut blocks: Vec<Block>,
        txs: Vec<Tx>,
        mempool: Vec<MempoolRecord>,
        labels: LabelSet,
    ) -> Result<Self, DatasetError> {
        blocks.sort_by_key(|b| b.number);
        for pair in blocks.windows(2) {
            if pair[0].number == pair[1].number {
                return Err(DatasetError::DuplicateBlock(pair[0].number));
            }
        }
        if blocks.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut tx_index = BTreeMap::new();
        for tx in txs {
            let hash = tx.hash();
            if tx_index.insert(hash, tx).is_some() {
                return Err(DatasetError::DuplicateTx(hash));
            }
        }
        let mut mempool_index = BTreeMap::new();
        for rec in mempool {
            let hash = rec.tx_hash;
            if mempool_index.insert(hash, rec).is_some() {
                return Err(DatasetError::DuplicateTx(hash));
            }
        }
        let time_range = (
            blocks.first().map(|b| b.slot_timestamp).unwrap_or_default(),
            blocks.last().map(|b| b.slot_timestamp).unwrap_or_default(),
        );
        let mut dataset = Dataset {
            blocks,
            txs: tx_index,
            mempool: mempool_index,
            labels,
            time_range,
        };
        dataset.join_mempool();
        dataset.apply_labels();
        let violations = dataset.validate();
        if !violations.is_empty() {
            return Err(DatasetError::Violations(violations));
        }
        Ok(dataset)
    }

    /// Copy first-seen timestamps from the mempool archive onto the
    /// on-chain transactions. On-chain transactions without an archive
    /// record are private flow; see [`Dataset::is_private`].
    pub fn join_mempool(&mut self) {
        for (hash, tx) in self.txs.iter_mut() {
            if let Some(rec) = self.mempool.get(hash) {
                tx.set_first_seen(rec.first_seen);
            }
        }
    }

    /// Decode builder labels and attach rollup / blobscription labels.
    pub fn apply_labels(&mut self) {
        for block in &mut self.blocks {
            block.builder_label = Some(self.labels.decode_extra_data(&block.extra_data));
        }
        for tx in self.txs.values_mut() {
            if let Tx::Three(t3) = tx {
                t3.rollup_label = self.labels.rollup_label(&t3.sender, t3.to.as_ref());
                t3.is_blobscription = self.labels.is_blobscription(&t3.hash);
            }
        }
    }

    /// Collect every invariant violation as a human-readable line.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for pair in self.blocks.windows(2) {
            if pair[1].number <= pair[0].number {
                out.push(format!(
                    "block numbers not strictly increasing at {}",
                    pair[1].number
                ));
            }
        }
        for block in &self.blocks {
            if let Err(e) = block.validate() {
                out.push(format!("block {}: {e}", block.number));
            }
            let mut blob_sum: u64 = 0;
            for hash in &block.txs {
                match self.txs.get(hash) {
                    None => out.push(format!(
                        "block {} references unknown transaction {hash}",
                        block.number
                    )),
                    Some(tx) => {
                        if tx.included_block() != Some(block.number) {
                            out.push(format!(
                                "transaction {hash} claims block {:?} but sits in block {}",
                                tx.included_block(),
                                block.number
                            ));
                        }
                        if let Tx::Three(t3) = tx {
                            blob_sum += t3.blob_count() as u64;
                        }
                    }
                }
            }
            if blob_sum != block.total_blobs as u64 {
                out.push(format!(
                    "block {} declares {} blobs but carries {blob_sum}",
                    block.number, block.total_blobs
                ));
            }
        }
        for (hash, tx) in &self.txs {
            let validation = match tx {
                Tx::Two(t) => t.validate(),
                Tx::Three(t) => t.validate(),
            };
            if let Err(e) = validation {
                out.push(format!("transaction {hash}: {e}"));
            }
            match tx.included_block() {
                None => out.push(format!("transaction {hash} has no inclusion block")),
                Some(n) => match self.block_by_number(n) {
                    None => out.push(format!(
                        "transaction {hash} references unknown block {n}"
                    )),
                    Some(block) => {
                        if let Some(seen) = tx.first_seen() {
                            if let Err(e @ ModelError::ClockSkew { .. }) =
                                inclusion_delay(Some(seen), block.slot_timestamp)
                            {
                                out.push(format!("transaction {hash}: {e}"));
                            }
                        }
                    }
                },
            }
        }
        out
    }

    pub fn block_by_number(&self, number: u64) -> Option<&Block> {
        self.blocks
            .binary_search_by_key(&number, |b| b.number)
            .ok()
            .map(|i| &self.blocks[i])
    }

    /// Type-3 transactions of a block, in block order.
    pub fn type_threes_in<'a>(&'a self, block: &'a Block) -> impl Iterator<Item = &'a TypeThreeTx> {
        block
            .txs
            .iter()
            .filter_map(|h| self.txs.get(h).and_then(Tx::as_type_three))
    }

    /// Seconds from first mempool sighting to inclusion.
    pub fn inclusion_delay_of(&self, hash: &TxHash) -> Result<f64, ModelError> {
        let tx = self.txs.get(hash).ok_or(ModelError::NotObserved)?;
        let block = tx
            .included_block()
            .and_then(|n| self.block_by_number(n))
            .ok_or(ModelError::NotObserved)?;
        inclusion_delay(tx.first_seen(), block.slot_timestamp)
    }

    /// An on-chain transaction that never appeared in the public mempool
    /// archive reached the builder through a private channel.
    pub fn is_private(&self, hash: &TxHash) -> bool {
        self.txs.contains_key(hash) && !self.mempool.contains_key(hash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Address, ByteSize, Money};
    use alloc::vec;

    pub(crate) fn hash(n: u16) -> TxHash {
        let mut bytes = [0u8; 32];
        bytes[0] = (n >> 8) as u8;
        bytes[1] = n as u8;
        TxHash::new(bytes)
    }

    fn addr(n: u8) -> Address {
        Address::new([n; 20])
    }

    fn t2(n: u16, block: u64) -> TypeTwoTx {
        TypeTwoTx {
            hash: hash(n),
            sender: addr(1),
            size: ByteSize::bytes(1000),
            builder_profit: Money::wei(10),
            gas_used: 21_000,
            first_seen: None,
            included_block: Some(block),
        }
    }

    fn block(number: u64, ts: i64, txs: Vec<TxHash>) -> Block {
        Block {
            number,
            slot_timestamp: TimestampMs::new(ts),
            extra_data: b"beaverbuild.org".to_vec(),
            builder_label: None,
            txs,
            total_blobs: 0,
        }
    }

    #[test]
    fn assemble_joins_and_flags_private() {
        let mut labels = LabelSet::default();
        labels
            .builder_patterns
            .insert("beaverbuild".into(), "beaverbuild".into());
        let blocks = vec![
            block(1, 1000, vec![hash(1)]),
            block(2, 13_000, vec![hash(2)]),
        ];
        let txs = vec![Tx::Two(t2(1, 1)), Tx::Two(t2(2, 2))];
        let mempool = vec![MempoolRecord {
            tx_hash: hash(1),
            first_seen: TimestampMs::new(500),
            tx_type: 2,
            size: ByteSize::bytes(1000),
            builder_profit: Money::wei(10),
        }];
        let ds = Dataset::assemble(blocks, txs, mempool, labels).unwrap();

        assert_eq!(ds.txs[&hash(1)].first_seen(), Some(TimestampMs::new(500)));
        assert!(!ds.is_private(&hash(1)));
        assert!(ds.is_private(&hash(2)));
        assert_eq!(ds.inclusion_delay_of(&hash(1)).unwrap(), 0.5);
        assert_eq!(
            ds.inclusion_delay_of(&hash(2)),
            Err(ModelError::NotObserved)
        );
        assert_eq!(
            ds.blocks[0].builder_label.as_deref(),
            Some("beaverbuild")
        );
        assert_eq!(ds.time_range, (TimestampMs::new(1000), TimestampMs::new(13_000)));
    }

    #[test]
    fn private_rate_of_a_mostly_private_sender() {
        // 840 transactions from one sender, 826 of them never seen in the
        // public mempool: private rate 98.3%.
        let mut blocks = Vec::new();
        let mut txs = Vec::new();
        let mut mempool = Vec::new();
        for i in 0..840u16 {
            let number = i as u64 + 1;
            blocks.push(block(number, number as i64 * 12_000, vec![hash(i)]));
            txs.push(Tx::Two(t2(i, number)));
            if i < 14 {
                mempool.push(MempoolRecord {
                    tx_hash: hash(i),
                    first_seen: TimestampMs::new(number as i64 * 12_000 - 1_000),
                    tx_type: 2,
                    size: ByteSize::bytes(1000),
                    builder_profit: Money::wei(10),
                });
            }
        }
        let ds = Dataset::assemble(blocks, txs, mempool, LabelSet::default()).unwrap();
        let private = (0..840u16).filter(|&i| ds.is_private(&hash(i))).count();
        assert_eq!(private, 826);
        assert!((private as f64 / 840.0 - 0.983).abs() < 5e-4);
    }

    #[test]
    fn duplicate_blocks_rejected() {
        let blocks = vec![block(1, 0, vec![]), block(1, 12, vec![])];
        assert_eq!(
            Dataset::assemble(blocks, vec![], vec![], LabelSet::default()),
            Err(DatasetError::DuplicateBlock(1))
        );
    }

    #[test]
    fn dangling_references_are_violations() {
        let blocks = vec![block(1, 0, vec![hash(9)])];
        let err = Dataset::assemble(blocks, vec![], vec![], LabelSet::default()).unwrap_err();
        match err {
            DatasetError::Violations(v) => {
                assert!(v.iter().any(|l| l.contains("unknown transaction")));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn clock_skew_is_a_violation() {
        let blocks = vec![block(1, 1000, vec![hash(1)])];
        let txs = vec![Tx::Two(t2(1, 1))];
        let mempool = vec![MempoolRecord {
            tx_hash: hash(1),
            first_seen: TimestampMs::new(5000),
            tx_type: 2,
            size: ByteSize::bytes(1000),
            builder_profit: Money::wei(10),
        }];
        let err = Dataset::assemble(blocks, txs, mempool, LabelSet::default()).unwrap_err();
        match err {
            DatasetError::Violations(v) => {
                assert!(v.iter().any(|l| l.contains("first seen")));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }
}

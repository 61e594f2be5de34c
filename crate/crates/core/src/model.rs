//! Domain types shared by every auditor: wei-exact money, byte sizes,
//! millisecond timestamps, transactions, blocks, and label tables.
//!
//! All types are immutable after construction and safe to share across
//! parallel workers. Arithmetic on [`Money`] is checked: overflow is an
//! error, never a silent wrap.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use alloc::collections::{BTreeMap, BTreeSet};

/// Size of one blob in bytes (128 KiB).
pub const BLOB_BYTES: u64 = 131_072;

/// Consensus cap on blobs per block.
pub const MAX_BLOBS_PER_BLOCK: u8 = 6;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("money arithmetic overflowed")]
    MoneyOverflow,
    #[error("blob count {0} outside 1..=6")]
    BlobCountOutOfRange(usize),
    #[error("duplicate blob hash within one transaction")]
    DuplicateBlobHash,
    #[error("block {block} declares {blobs} blobs, maximum is {MAX_BLOBS_PER_BLOCK}")]
    TooManyBlobs { block: u64, blobs: u64 },
    #[error("transaction size must be positive")]
    EmptySize,
    #[error("transaction was never observed in the public mempool")]
    NotObserved,
    #[error("first seen at {first_seen_ms} ms but block timestamp is {block_ms} ms")]
    ClockSkew { first_seen_ms: i64, block_ms: i64 },
}

/// A wei amount. Construction is free-form; all arithmetic is checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Money(u128);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn wei(amount: u128) -> Self {
        Money(amount)
    }

    pub const fn as_wei(self) -> u128 {
        self.0
    }

    pub fn checked_add(self, other: Money) -> Result<Money, ModelError> {
        self.0
            .checked_add(other.0)
            .map(Money)
            .ok_or(ModelError::MoneyOverflow)
    }

    pub fn checked_sub(self, other: Money) -> Option<Money> {
        self.0.checked_sub(other.0).map(Money)
    }

    /// Checked sum over an iterator. The result is independent of iteration
    /// order whenever it does not overflow.
    pub fn sum<I: IntoIterator<Item = Money>>(iter: I) -> Result<Money, ModelError> {
        let mut acc = Money::ZERO;
        for m in iter {
            acc = acc.checked_add(m)?;
        }
        Ok(acc)
    }

    /// Signed difference in wei, for profit-vs-potential series.
    pub fn signed_diff(self, other: Money) -> Option<i128> {
        let (hi, lo, neg) = if self.0 >= other.0 {
            (self.0, other.0, false)
        } else {
            (other.0, self.0, true)
        };
        let d = hi - lo;
        if d > i128::MAX as u128 {
            return None;
        }
        Some(if neg { -(d as i128) } else { d as i128 })
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A size in bytes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ByteSize(u64);

impl ByteSize {
    pub const fn bytes(n: u64) -> Self {
        ByteSize(n)
    }

    pub const fn as_bytes(self) -> u64 {
        self.0
    }

    /// Effective size of `blob_count` blobs.
    pub const fn of_blobs(blob_count: u8) -> Self {
        ByteSize(blob_count as u64 * BLOB_BYTES)
    }
}

/// UTC milliseconds since the Unix epoch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct TimestampMs(i64);

impl TimestampMs {
    pub const fn new(ms: i64) -> Self {
        TimestampMs(ms)
    }

    pub const fn as_ms(self) -> i64 {
        self.0
    }
}

macro_rules! fixed_bytes {
    ($name:ident, $len:expr, $doc:expr) => {
        #[doc = $doc]
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub const fn new(bytes: [u8; $len]) -> Self {
                $name(bytes)
            }

            pub fn from_slice(slice: &[u8]) -> Option<Self> {
                slice.try_into().ok().map($name)
            }

            pub const fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0x")?;
                for b in self.0.iter() {
                    write!(f, "{:02x}", b)?;
                }
                Ok(())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self)
            }
        }

        #[cfg(feature = "serde")]
        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        #[cfg(feature = "serde")]
        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                use serde::de::Error;
                let text = <alloc::borrow::Cow<'de, str>>::deserialize(d)?;
                let hex = text.strip_prefix("0x").unwrap_or(&text);
                if hex.len() != $len * 2 {
                    return Err(D::Error::custom("bad hex length"));
                }
                let mut out = [0u8; $len];
                for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
                    let s = core::str::from_utf8(chunk).map_err(D::Error::custom)?;
                    out[i] = u8::from_str_radix(s, 16).map_err(D::Error::custom)?;
                }
                Ok($name(out))
            }
        }
    };
}

fixed_bytes!(TxHash, 32, "A 32-byte transaction hash.");
fixed_bytes!(BlobHash, 32, "A 32-byte versioned blob hash.");
fixed_bytes!(Address, 20, "A 20-byte account address.");

/// An execution-layer transaction without blobs (the builder's alternative
/// to blob space). Legacy transaction types share this shape.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeTwoTx {
    pub hash: TxHash,
    pub sender: Address,
    pub size: ByteSize,
    /// Priority fee per gas times gas used (gas limit when no receipt).
    pub builder_profit: Money,
    pub gas_used: u64,
    pub first_seen: Option<TimestampMs>,
    pub included_block: Option<u64>,
}

impl TypeTwoTx {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.size.as_bytes() == 0 {
            return Err(ModelError::EmptySize);
        }
        Ok(())
    }
}

/// A blob-carrying transaction. Carries 1..=6 blobs; the effective block
/// space it occupies is `blob_count * BLOB_BYTES`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeThreeTx {
    pub hash: TxHash,
    pub sender: Address,
    /// Destination address; rollups often encode their identity here.
    pub to: Option<Address>,
    pub blob_hashes: Vec<BlobHash>,
    pub builder_profit: Money,
    pub base_fee_paid: Money,
    pub priority_fee_paid: Money,
    pub first_seen: Option<TimestampMs>,
    pub included_block: Option<u64>,
    pub rollup_label: Option<String>,
    pub is_blobscription: bool,
}

impl TypeThreeTx {
    pub fn validate(&self) -> Result<(), ModelError> {
        let q = self.blob_hashes.len();
        if q == 0 || q > MAX_BLOBS_PER_BLOCK as usize {
            return Err(ModelError::BlobCountOutOfRange(q));
        }
        let mut seen = BTreeSet::new();
        for h in &self.blob_hashes {
            if !seen.insert(h) {
                return Err(ModelError::DuplicateBlobHash);
            }
        }
        Ok(())
    }

    /// Number of blobs carried.
    pub fn blob_count(&self) -> u8 {
        self.blob_hashes.len() as u8
    }

    pub fn effective_size(&self) -> ByteSize {
        ByteSize::of_blobs(self.blob_count())
    }

    /// Execution-layer fee (base + priority), the loss unit for redundant
    /// submissions. Blob-gas fees are deliberately not part of this.
    pub fn fee_paid(&self) -> Result<Money, ModelError> {
        self.base_fee_paid.checked_add(self.priority_fee_paid)
    }
}

/// One block: ordered transaction references plus builder identity inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Block {
    pub number: u64,
    pub slot_timestamp: TimestampMs,
    pub extra_data: Vec<u8>,
    pub builder_label: Option<String>,
    /// Transaction hashes in execution order.
    pub txs: Vec<TxHash>,
    pub total_blobs: u8,
}

impl Block {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.total_blobs > MAX_BLOBS_PER_BLOCK {
            return Err(ModelError::TooManyBlobs {
                block: self.number,
                blobs: self.total_blobs as u64,
            });
        }
        Ok(())
    }
}

/// First-seen observation of a transaction in the public mempool archive.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MempoolRecord {
    pub tx_hash: TxHash,
    pub first_seen: TimestampMs,
    pub tx_type: u8,
    pub size: ByteSize,
    /// Priority fee per gas times gas limit (no receipt exists pre-inclusion).
    pub builder_profit: Money,
}

/// Curated label tables: builder extra-data patterns, rollup addresses, and
/// the blobscription transaction set. Lookups are total functions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelSet {
    /// Lower-cased substring pattern -> builder name.
    pub builder_patterns: BTreeMap<String, String>,
    /// Sender or `to` address -> rollup name.
    pub rollup_addresses: BTreeMap<Address, String>,
    /// Transaction hashes labeled as blobscriptions.
    pub blobscription_txs: BTreeSet<TxHash>,
}

/// Label returned when nothing matches.
pub const UNLABELED: &str = "unlabeled";

impl LabelSet {
    /// Decode a block's raw extra-data bytes into a builder label.
    ///
    /// Non-printable bytes are stripped, patterns match case-insensitively
    /// as substrings (longest pattern wins, ties to the lexicographically
    /// smallest), and an unmatched printable string is returned verbatim.
    pub fn decode_extra_data(&self, extra_data: &[u8]) -> String {
        let printable: String = extra_data
            .iter()
            .filter(|b| (0x20..=0x7e).contains(*b))
            .map(|&b| b as char)
            .collect();
        if printable.is_empty() {
            return String::from(UNLABELED);
        }
        let lowered = printable.to_lowercase();
        let mut best: Option<(&String, &String)> = None;
        for (pattern, builder) in &self.builder_patterns {
            if !pattern.is_empty() && lowered.contains(&pattern.to_lowercase()) {
                let better = match best {
                    None => true,
                    Some((bp, _)) => {
                        pattern.len() > bp.len() || (pattern.len() == bp.len() && pattern < bp)
                    }
                };
                if better {
                    best = Some((pattern, builder));
                }
            }
        }
        match best {
            Some((_, builder)) => builder.clone(),
            None => printable,
        }
    }

    /// Rollup label for a transaction, keyed on the sender first and the
    /// `to` address second.
    pub fn rollup_label(&self, sender: &Address, to: Option<&Address>) -> Option<String> {
        self.rollup_addresses
            .get(sender)
            .or_else(|| to.and_then(|a| self.rollup_addresses.get(a)))
            .cloned()
    }

    pub fn is_blobscription(&self, tx: &TxHash) -> bool {
        self.blobscription_txs.contains(tx)
    }
}

/// Seconds between a transaction's first mempool observation and the
/// timestamp of the block that included it.
pub fn inclusion_delay(
    first_seen: Option<TimestampMs>,
    block_timestamp: TimestampMs,
) -> Result<f64, ModelError> {
    let seen = first_seen.ok_or(ModelError::NotObserved)?;
    let delta_ms = block_timestamp.as_ms() - seen.as_ms();
    if delta_ms < 0 {
        return Err(ModelError::ClockSkew {
            first_seen_ms: seen.as_ms(),
            block_ms: block_timestamp.as_ms(),
        });
    }
    Ok(delta_ms as f64 / 1000.0)
}

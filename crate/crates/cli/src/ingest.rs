//! Line-delimited dataset files and their parsers.
//!
//! Every data file opens with a one-line schema header (`#blobaudit <kind>
//! v1`) followed by comma-separated records. Malformed records are never
//! dropped silently: each parser returns the rejects with their line
//! numbers, and `parsed + rejected` always equals the record count.
//!
//! Schemas (all integers base 10, all hashes 0x-prefixed lowercase hex):
//!
//! - blocks:  `number,timestamp_ms,extra_data_hex,total_blobs,tx_hashes`
//!   with `tx_hashes` a `;`-joined list.
//! - txs:     `hash,type,sender,to,size_bytes,gas_used,gas_limit,
//!   max_priority_fee_per_gas,base_fee_paid_wei,priority_fee_paid_wei,
//!   blob_hashes,included_block`; `to`, `gas_used` and `blob_hashes` may
//!   be empty. Builder profit is `max_priority_fee_per_gas * gas_used`,
//!   falling back to `gas_limit` when no receipt data is present.
//! - mempool: `hash,first_seen_ms,type,size_bytes,max_priority_fee_per_gas,
//!   gas_limit`; profit uses `gas_limit` (nothing has executed yet).
//! - labels-builders: `pattern,builder`; labels-rollups: `address,rollup`;
//!   labels-blobscriptions: one `tx_hash` per line.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use blobaudit_core::dataset::Tx;
use blobaudit_core::model::{
    Address, BlobHash, Block, ByteSize, LabelSet, MempoolRecord, Money, TimestampMs, TxHash,
    TypeThreeTx, TypeTwoTx, MAX_BLOBS_PER_BLOCK,
};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

/// File name (no directory) used in parse reports, so identical inputs in
/// different working directories produce identical reports.
fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One rejected record.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RejectedLine {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

/// Outcome of parsing one file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParseReport {
    pub file: String,
    pub records: u64,
    pub parsed: u64,
    pub rejected: Vec<RejectedLine>,
}

impl ParseReport {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }
}

struct SchemaFile {
    records: Vec<(u64, Vec<String>)>,
}

/// Read the header line, verify the schema tag, and split the remaining
/// records into fields.
fn read_schema_file(path: &Path, kind: &str) -> Result<SchemaFile, AppError> {
    let file = File::open(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let expected = format!("#blobaudit {kind} v1");
    if header.trim_end() != expected {
        return Err(AppError::Data(format!(
            "{}: expected schema header {expected:?}, found {:?}",
            path.display(),
            header.trim_end()
        )));
    }
    let mut body = String::new();
    reader.read_to_string(&mut body)?;
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(body.as_bytes());
    let mut records = Vec::new();
    for (offset, record) in csv_reader.records().enumerate() {
        let line = offset as u64 + 2;
        match record {
            Ok(rec) => records.push((line, rec.iter().map(str::to_string).collect())),
            Err(e) => {
                return Err(AppError::Data(format!(
                    "{}: line {line}: {e}",
                    path.display()
                )))
            }
        }
    }
    Ok(SchemaFile { records })
}

fn parse_hash<const N: usize>(field: &str) -> Result<[u8; N], String> {
    let hex_part = field
        .strip_prefix("0x")
        .ok_or_else(|| format!("{field:?} is not 0x-prefixed hex"))?;
    let bytes = hex::decode(hex_part).map_err(|e| format!("{field:?}: {e}"))?;
    bytes
        .try_into()
        .map_err(|_| format!("{field:?} has the wrong length, expected {N} bytes"))
}

fn parse_u64(field: &str, name: &str) -> Result<u64, String> {
    field
        .parse()
        .map_err(|_| format!("{name} {field:?} is not an unsigned integer"))
}

fn parse_u128(field: &str, name: &str) -> Result<u128, String> {
    field
        .parse()
        .map_err(|_| format!("{name} {field:?} is not an unsigned integer"))
}

fn parse_i64(field: &str, name: &str) -> Result<i64, String> {
    field
        .parse()
        .map_err(|_| format!("{name} {field:?} is not an integer"))
}

fn expect_fields<'a>(fields: &'a [String], n: usize) -> Result<&'a [String], String> {
    if fields.len() != n {
        return Err(format!("expected {n} fields, found {}", fields.len()));
    }
    Ok(fields)
}

/// Parse the blocks file. Duplicate block numbers and blob counts over the
/// consensus cap are schema violations reported against their line.
pub fn parse_blocks(path: &Path) -> Result<(Vec<Block>, ParseReport), AppError> {
    let schema = read_schema_file(path, "blocks")?;
    let mut blocks = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_numbers = std::collections::BTreeSet::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        match parse_block_record(&fields, &mut seen_numbers) {
            Ok(block) => blocks.push(block),
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    let report = ParseReport {
        file: file_label(path),
        records,
        parsed: blocks.len() as u64,
        rejected,
    };
    Ok((blocks, report))
}

fn parse_block_record(
    fields: &[String],
    seen: &mut std::collections::BTreeSet<u64>,
) -> Result<Block, String> {
    let f = expect_fields(fields, 5)?;
    let number = parse_u64(&f[0], "block number")?;
    if !seen.insert(number) {
        return Err(format!("duplicate block number {number}"));
    }
    let timestamp = parse_i64(&f[1], "timestamp_ms")?;
    let extra_hex = f[2].strip_prefix("0x").unwrap_or(&f[2]);
    let extra_data =
        hex::decode(extra_hex).map_err(|e| format!("extra_data {:?}: {e}", f[2]))?;
    let total_blobs = parse_u64(&f[3], "total_blobs")?;
    if total_blobs > MAX_BLOBS_PER_BLOCK as u64 {
        return Err(format!(
            "block {number}: total_blobs {total_blobs} exceeds {MAX_BLOBS_PER_BLOCK}"
        ));
    }
    let mut txs = Vec::new();
    if !f[4].is_empty() {
        for part in f[4].split(';') {
            txs.push(TxHash::new(parse_hash::<32>(part)?));
        }
    }
    Ok(Block {
        number,
        slot_timestamp: TimestampMs::new(timestamp),
        extra_data,
        builder_label: None,
        txs,
        total_blobs: total_blobs as u8,
    })
}

/// Parse the on-chain transactions file.
pub fn parse_txs(path: &Path) -> Result<(Vec<Tx>, ParseReport), AppError> {
    let schema = read_schema_file(path, "txs")?;
    let mut txs = Vec::new();
    let mut rejected = Vec::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        match parse_tx_record(&fields) {
            Ok(tx) => txs.push(tx),
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    let report = ParseReport {
        file: file_label(path),
        records,
        parsed: txs.len() as u64,
        rejected,
    };
    Ok((txs, report))
}

fn parse_tx_record(fields: &[String]) -> Result<Tx, String> {
    let f = expect_fields(fields, 12)?;
    let hash = TxHash::new(parse_hash::<32>(&f[0])?);
    let tx_type = parse_u64(&f[1], "type")?;
    let sender = Address::new(parse_hash::<20>(&f[2])?);
    let to = if f[3].is_empty() {
        None
    } else {
        Some(Address::new(parse_hash::<20>(&f[3])?))
    };
    let size = parse_u64(&f[4], "size_bytes")?;
    let gas_used = if f[5].is_empty() {
        None
    } else {
        Some(parse_u64(&f[5], "gas_used")?)
    };
    let gas_limit = parse_u64(&f[6], "gas_limit")?;
    let max_priority_fee = parse_u128(&f[7], "max_priority_fee_per_gas")?;
    let base_fee_paid = parse_u128(&f[8], "base_fee_paid_wei")?;
    let priority_fee_paid = parse_u128(&f[9], "priority_fee_paid_wei")?;
    let included_block = parse_u64(&f[11], "included_block")?;

    // The priority fee per gas is the profit signal; receipts give the
    // exact gas, pre-execution data only the limit.
    let gas_basis = gas_used.unwrap_or(gas_limit);
    let builder_profit = max_priority_fee
        .checked_mul(gas_basis as u128)
        .ok_or_else(|| "builder profit overflows".to_string())?;

    match tx_type {
        0 | 1 | 2 => {
            if !f[10].is_empty() {
                return Err(format!("type-{tx_type} transaction carries blob hashes"));
            }
            if size == 0 {
                return Err("size_bytes must be positive".to_string());
            }
            Ok(Tx::Two(TypeTwoTx {
                hash,
                sender,
                size: ByteSize::bytes(size),
                builder_profit: Money::wei(builder_profit),
                gas_used: gas_basis,
                first_seen: None,
                included_block: Some(included_block),
            }))
        }
        3 => {
            let mut blob_hashes = Vec::new();
            if !f[10].is_empty() {
                for part in f[10].split(';') {
                    blob_hashes.push(BlobHash::new(parse_hash::<32>(part)?));
                }
            }
            let tx = TypeThreeTx {
                hash,
                sender,
                to,
                blob_hashes,
                builder_profit: Money::wei(builder_profit),
                base_fee_paid: Money::wei(base_fee_paid),
                priority_fee_paid: Money::wei(priority_fee_paid),
                first_seen: None,
                included_block: Some(included_block),
                rollup_label: None,
                is_blobscription: false,
            };
            tx.validate().map_err(|e| e.to_string())?;
            Ok(Tx::Three(tx))
        }
        other => Err(format!("unknown transaction type {other}")),
    }
}

/// Parse the public mempool archive file.
pub fn parse_mempool(path: &Path) -> Result<(Vec<MempoolRecord>, ParseReport), AppError> {
    let schema = read_schema_file(path, "mempool")?;
    let mut records_out = Vec::new();
    let mut rejected = Vec::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        match parse_mempool_record(&fields) {
            Ok(rec) => records_out.push(rec),
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    let report = ParseReport {
        file: file_label(path),
        records,
        parsed: records_out.len() as u64,
        rejected,
    };
    Ok((records_out, report))
}

fn parse_mempool_record(fields: &[String]) -> Result<MempoolRecord, String> {
    let f = expect_fields(fields, 6)?;
    let tx_hash = TxHash::new(parse_hash::<32>(&f[0])?);
    let first_seen = parse_i64(&f[1], "first_seen_ms")?;
    let tx_type = parse_u64(&f[2], "type")?;
    if tx_type > 3 {
        return Err(format!("unknown transaction type {tx_type}"));
    }
    let size = parse_u64(&f[3], "size_bytes")?;
    let max_priority_fee = parse_u128(&f[4], "max_priority_fee_per_gas")?;
    let gas_limit = parse_u64(&f[5], "gas_limit")?;
    let builder_profit = max_priority_fee
        .checked_mul(gas_limit as u128)
        .ok_or_else(|| "builder profit overflows".to_string())?;
    Ok(MempoolRecord {
        tx_hash,
        first_seen: TimestampMs::new(first_seen),
        tx_type: tx_type as u8,
        size: ByteSize::bytes(size),
        builder_profit: Money::wei(builder_profit),
    })
}

/// Parse all three label tables into one [`LabelSet`].
pub fn parse_labels(
    builders: &Path,
    rollups: &Path,
    blobscriptions: &Path,
) -> Result<(LabelSet, Vec<ParseReport>), AppError> {
    let mut labels = LabelSet::default();
    let mut reports = Vec::new();

    let schema = read_schema_file(builders, "labels-builders")?;
    let mut rejected = Vec::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        match expect_fields(&fields, 2) {
            Ok(f) if !f[0].is_empty() => {
                labels
                    .builder_patterns
                    .insert(f[0].to_lowercase(), f[1].clone());
            }
            Ok(_) => rejected.push(RejectedLine {
                line,
                reason: "empty pattern".into(),
            }),
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    reports.push(ParseReport {
        file: file_label(builders),
        records,
        parsed: records - rejected.len() as u64,
        rejected,
    });

    let schema = read_schema_file(rollups, "labels-rollups")?;
    let mut rejected = Vec::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        let parsed = expect_fields(&fields, 2)
            .and_then(|f| Ok((Address::new(parse_hash::<20>(&f[0])?), f[1].clone())));
        match parsed {
            Ok((addr, name)) => {
                labels.rollup_addresses.insert(addr, name);
            }
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    reports.push(ParseReport {
        file: file_label(rollups),
        records,
        parsed: records - rejected.len() as u64,
        rejected,
    });

    let schema = read_schema_file(blobscriptions, "labels-blobscriptions")?;
    let mut rejected = Vec::new();
    let records = schema.records.len() as u64;
    for (line, fields) in schema.records {
        let parsed = expect_fields(&fields, 1).and_then(|f| parse_hash::<32>(&f[0]));
        match parsed {
            Ok(hash) => {
                labels.blobscription_txs.insert(TxHash::new(hash));
            }
            Err(reason) => rejected.push(RejectedLine { line, reason }),
        }
    }
    reports.push(ParseReport {
        file: file_label(blobscriptions),
        records,
        parsed: records - rejected.len() as u64,
        rejected,
    });

    Ok((labels, reports))
}

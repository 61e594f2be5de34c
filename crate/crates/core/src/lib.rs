//! Core model and algorithms for auditing the post-EIP-4844 blob market.
//!
//! The crate is split along the market's two sides plus the shared model:
//!
//! - [`model`]: wei-exact money, sizes, transactions, blocks, labels.
//! - [`dataset`]: the immutable joined view the auditors consume.
//! - [`floor`]: the blob-space floor price (greedy selection over the public
//!   mempool, plus an exact knapsack used for oracle tests and strict mode).
//! - [`builder`]: per-block efficiency verdicts and their aggregation.
//! - [`rollup`]: redundant-submission detectors, loss accounting, the
//!   blobscription delay impact, and the blob-count landscape.
//! - [`auction`]: the first-price blob inclusion auction — equilibrium bids,
//!   the builder's optimal acceptance price, multi-round waiting discounts,
//!   and the bundle-vs-split advisor.
//!
//! Everything here is pure computation over in-memory data; file formats,
//! report writers and the CLI live in the companion `blobaudit` crate. The
//! crate builds without `std` (allocation is required).

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod auction;
pub mod builder;
pub mod dataset;
pub mod floor;
pub mod model;
pub mod rollup;
pub mod time;

pub use dataset::Dataset;
pub use model::{Address, BlobHash, ByteSize, Money, TimestampMs, TxHash, BLOB_BYTES, MAX_BLOBS_PER_BLOCK};

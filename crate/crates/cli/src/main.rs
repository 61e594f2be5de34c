//! Command-line front end. Exit codes: 0 success, 2 usage error, 3 data
//! error, 4 model-invariant violation.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use blobaudit::commands::{self, IngestPaths, RollupAuditOptions};
use blobaudit::error::AppError;
use blobaudit::synth::{self, FixtureKind};
use blobaudit_core::auction::{
    AuctionConfig, DiscountFunction, RevenueDistribution, SeriesStart,
};
use blobaudit_core::builder::{AuditOptions, FloorMode, PoolMode};
use blobaudit_core::time::Bucket;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "blobaudit",
    version,
    about = "Audit blob-market behavior and simulate the blob inclusion auction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BucketArg {
    Monthly,
    Weekly,
    Daily,
}

impl From<BucketArg> for Bucket {
    fn from(arg: BucketArg) -> Bucket {
        match arg {
            BucketArg::Monthly => Bucket::Monthly,
            BucketArg::Weekly => Bucket::Weekly,
            BucketArg::Daily => Bucket::Daily,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolModeArg {
    Sequential,
    Independent,
}

#[derive(Clone, Copy, ValueEnum)]
enum FloorModeArg {
    Greedy,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesStartArg {
    CurrentSlot,
    NextSlot,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKindArg {
    Efficiency,
    Detectors,
    Delay,
}

#[derive(Subcommand)]
enum Command {
    /// Parse dataset files, validate them, and write the canonical dataset.
    Ingest {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        txs: PathBuf,
        #[arg(long)]
        mempool: PathBuf,
        #[arg(long)]
        labels_builders: PathBuf,
        #[arg(long)]
        labels_rollups: PathBuf,
        #[arg(long)]
        labels_blobscriptions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify blob-carrying blocks as efficient or inefficient.
    AuditBuilders {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Exclude mempool transactions whose eventual inclusion delay
        /// exceeded this many seconds.
        #[arg(long, default_value_t = 100.0)]
        delay_filter: f64,
        #[arg(long, value_enum, default_value = "sequential")]
        pool_mode: PoolModeArg,
        #[arg(long, value_enum, default_value = "greedy")]
        floor_mode: FloorModeArg,
        #[arg(long, value_enum, default_value = "monthly")]
        bucket: BucketArg,
    },
    /// Detect redundant rollup submissions and blobscription delay impact.
    AuditRollups {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "monthly")]
        bucket: BucketArg,
        /// Delay-impact window start (ms since epoch); dataset start when
        /// absent.
        #[arg(long)]
        window_start_ms: Option<i64>,
        /// Delay-impact window end (ms since epoch, exclusive).
        #[arg(long)]
        window_end_ms: Option<i64>,
        /// Blobscription blobs a block needs to count as interfering.
        #[arg(long, default_value_t = 1)]
        min_blobscription_blobs: u32,
    },
    /// Sweep equilibrium bids over a revenue grid.
    Simulate {
        #[command(flatten)]
        auction: AuctionArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        grid: usize,
        /// One initial revenue per bidder, for the optimal acceptance
        /// price.
        #[arg(long, value_delimiter = ',')]
        revenues: Option<Vec<f64>>,
        /// Also iterate the best-response fixed point and emit its bids.
        #[arg(long)]
        with_fixed_point: bool,
    },
    /// Decide whether to bundle a batch of blobs into one transaction.
    BundleAdvisor {
        #[command(flatten)]
        auction: AuctionArgs,
        #[arg(long)]
        out: PathBuf,
        /// Per-blob revenues of the batch.
        #[arg(long, value_delimiter = ',', required = true)]
        revenues: Vec<f64>,
        #[arg(long, value_enum, default_value = "current-slot")]
        series_start: SeriesStartArg,
    },
    /// Write a synthetic dataset with planted ground truth.
    GenFixture {
        #[arg(long, value_enum)]
        kind: FixtureKindArg,
        #[arg(long)]
        out: PathBuf,
        /// Generator seed; each kind has a documented default.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Auction parameters, shared by `simulate` and `bundle-advisor`. Values
/// may also come from a `key=value` config file; flags win.
#[derive(Args)]
struct AuctionArgs {
    /// Plain key=value file with any of: bidders, r-max, floor, discount,
    /// t0, tolerance.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of competing blob transactions in the slot.
    #[arg(long)]
    bidders: Option<usize>,
    /// Upper bound of the uniform revenue distribution.
    #[arg(long)]
    r_max: Option<f64>,
    /// Floor (reserve) price.
    #[arg(long)]
    floor: Option<f64>,
    /// Discount curve: `geometric:MULTIPLIER` or `table:1.0,0.9,...`.
    #[arg(long)]
    discount: Option<String>,
    /// Current slot offset.
    #[arg(long)]
    t0: Option<u32>,
    /// Series / quadrature tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for randomized sweeps (reserved; the solvers are closed-form).
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_discount(text: &str) -> Result<DiscountFunction, AppError> {
    if let Some(rest) = text.strip_prefix("geometric:") {
        let delta: f64 = rest
            .parse()
            .map_err(|_| AppError::Usage(format!("bad geometric multiplier {rest:?}")))?;
        return Ok(DiscountFunction::Geometric { delta });
    }
    if let Some(rest) = text.strip_prefix("table:") {
        let values: Result<Vec<f64>, _> = rest.split(',').map(str::parse).collect();
        let values =
            values.map_err(|_| AppError::Usage(format!("bad discount table {rest:?}")))?;
        return Ok(DiscountFunction::Table { values });
    }
    Err(AppError::Usage(format!(
        "discount must be geometric:<m> or table:<v0,v1,...>, got {text:?}"
    )))
}

fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, AppError> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(AppError::Data(format!(
                "{} line {}: expected key=value",
                path.display(),
                i + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl AuctionArgs {
    fn resolve(&self) -> Result<AuctionConfig, AppError> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let parse_num = |key: &str, text: &str| -> Result<f64, AppError> {
            text.parse()
                .map_err(|_| AppError::Usage(format!("bad {key} value {text:?}")))
        };
        let bidders = match (self.bidders, file.get("bidders")) {
            (Some(k), _) => k,
            (None, Some(text)) => parse_num("bidders", text)? as usize,
            (None, None) => 2,
        };
        let r_max = match (self.r_max, file.get("r-max")) {
            (Some(v), _) => v,
            (None, Some(text)) => parse_num("r-max", text)?,
            (None, None) => 1.0,
        };
        let floor = match (self.floor, file.get("floor")) {
            (Some(v), _) => v,
            (None, Some(text)) => parse_num("floor", text)?,
            (None, None) => 0.0,
        };
        let discount_text = self
            .discount
            .clone()
            .or_else(|| file.get("discount").cloned())
            .unwrap_or_else(|| "geometric:0.95".to_string());
        let discount = parse_discount(&discount_text)?;
        let t0 = match (self.t0, file.get("t0")) {
            (Some(v), _) => v,
            (None, Some(text)) => parse_num("t0", text)? as u32,
            (None, None) => 0,
        };
        let mut config = AuctionConfig::new(
            bidders,
            RevenueDistribution::Uniform { r_max },
            discount,
            floor,
            t0,
        )?;
        let tolerance = match (self.tolerance, file.get("tolerance")) {
            (Some(v), _) => Some(v),
            (None, Some(text)) => Some(parse_num("tolerance", text)?),
            (None, None) => None,
        };
        if let Some(tol) = tolerance {
            config = config.with_tolerance(tol)?;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Ingest {
            blocks,
            txs,
            mempool,
            labels_builders,
            labels_rollups,
            labels_blobscriptions,
            out,
        } => {
            let dataset = commands::cmd_ingest(
                &IngestPaths {
                    blocks: &blocks,
                    txs: &txs,
                    mempool: &mempool,
                    labels_builders: &labels_builders,
                    labels_rollups: &labels_rollups,
                    labels_blobscriptions: &labels_blobscriptions,
                },
                &out,
            )?;
            eprintln!(
                "ingested {} blocks, {} transactions, {} mempool records",
                dataset.blocks.len(),
                dataset.txs.len(),
                dataset.mempool.len()
            );
            Ok(())
        }
        Command::AuditBuilders {
            dataset,
            out,
            delay_filter,
            pool_mode,
            floor_mode,
            bucket,
        } => {
            let options = AuditOptions {
                delay_filter_secs: delay_filter,
                pool_mode: match pool_mode {
                    PoolModeArg::Sequential => PoolMode::Sequential,
                    PoolModeArg::Independent => PoolMode::Independent,
                },
                floor_mode: match floor_mode {
                    FloorModeArg::Greedy => FloorMode::Greedy,
                    FloorModeArg::Exact => FloorMode::Exact,
                },
                bucket: bucket.into(),
            };
            let report = commands::cmd_audit_builders(&dataset, &options, &out)?;
            eprintln!(
                "audited {} blocks: {} inefficient ({:.2}%)",
                report.overall.total,
                report.overall.inefficient,
                100.0 * report.overall.proportion()
            );
            Ok(())
        }
        Command::AuditRollups {
            dataset,
            out,
            bucket,
            window_start_ms,
            window_end_ms,
            min_blobscription_blobs,
        } => {
            let window = match (window_start_ms, window_end_ms) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(AppError::Usage(
                        "window flags must be given together".into(),
                    ))
                }
            };
            let options = RollupAuditOptions {
                bucket: bucket.into(),
                window,
                min_blobscription_blobs,
            };
            let outcome = commands::cmd_audit_rollups(&dataset, &options, &out)?;
            eprintln!(
                "findings: {} continuous-sending, {} double-sending; loss {} wei",
                outcome.continuous.len(),
                outcome.double.len(),
                outcome.loss.total
            );
            Ok(())
        }
        Command::Simulate {
            auction,
            out,
            grid,
            revenues,
            with_fixed_point,
        } => {
            let config = auction.resolve()?;
            if grid < 2 {
                return Err(AppError::Usage("grid must have at least 2 points".into()));
            }
            commands::cmd_simulate(&config, grid, revenues.as_deref(), with_fixed_point, &out)
        }
        Command::BundleAdvisor {
            auction,
            out,
            revenues,
            series_start,
        } => {
            let config = auction.resolve()?;
            let start = match series_start {
                SeriesStartArg::CurrentSlot => SeriesStart::CurrentSlot,
                SeriesStartArg::NextSlot => SeriesStart::NextSlot,
            };
            let decision = commands::cmd_bundle_advisor(&config, &revenues, start, &out)?;
            eprintln!(
                "decision: {}",
                if decision.is_bundle_all() {
                    "bundle-all"
                } else {
                    "split"
                }
            );
            Ok(())
        }
        Command::GenFixture { kind, out, seed } => {
            let kind = match kind {
                FixtureKindArg::Efficiency => FixtureKind::Efficiency,
                FixtureKindArg::Detectors => FixtureKind::Detectors,
                FixtureKindArg::Delay => FixtureKind::Delay,
            };
            let fixture = synth::generate(kind, seed.unwrap_or(kind.default_seed()));
            fixture.write_to(&out)?;
            eprintln!("fixture written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

//! The blob inclusion auction: a first-price sealed-bid game with a floor
//! (reserve) price, a per-slot revenue discount, and capacity-constrained
//! bundling.
//!
//! Revenue units here are abstract reals (the model side of the artifact),
//! not wei: configs come from flags or sweeps, not from chain data. All
//! float powers have integer exponents and are evaluated by square-and-
//! multiply, so results are identical across platforms and under `no_std`.

mod best_response;
mod bundling;
pub mod exact;

pub use best_response::{best_response_fixed_point, BestResponseOutcome};
pub use bundling::{bundle_vs_split, BundleDecision, PartitionUtility};

use alloc::vec::Vec;

use crate::model::ByteSize;

/// Default truncation / quadrature tolerance (relative).
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Hard cap on best-response sweeps before reporting non-convergence.
pub const MAX_FIXED_POINT_ITERATIONS: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuctionError {
    #[error("bidder count must be at least 1")]
    InvalidBidderCount,
    #[error("discount invariant violated: {0}")]
    InvalidDiscount(&'static str),
    #[error("distribution invariant violated: {0}")]
    InvalidDistribution(&'static str),
    #[error("floor price must be finite and non-negative")]
    InvalidFloor,
    #[error("tolerance must be finite and positive")]
    InvalidTolerance,
    #[error("{blob_count} blobs exceed the available space of {space_bytes} bytes")]
    CapacityExceeded { blob_count: u8, space_bytes: u64 },
    #[error("inclusion probability is zero at a revenue above the floor")]
    DegenerateSupport,
    #[error("waiting-discount series did not reach the tolerance")]
    DivergentSeries,
    #[error("argument outside the operation's domain: {0}")]
    Domain(&'static str),
    #[error("revenue list is empty")]
    EmptyRevenues,
    #[error("expected {expected} revenues (one per bidder), got {got}")]
    RevenueCountMismatch { expected: usize, got: usize },
    #[error("partition search supports 2..=8 blobs, got {0}")]
    PartitionSizeOutOfRange(usize),
    #[error("revenue grid must have at least 100 points, got {0}")]
    GridTooSmall(usize),
    #[error(
        "best-response iteration did not converge after {iterations} sweeps \
         (last sup-norm change {sup_change:e}); last two iterates attached"
    )]
    NoConvergence {
        iterations: u32,
        sup_change: f64,
        last: Vec<Option<f64>>,
        previous: Vec<Option<f64>>,
    },
}

/// Where the multi-round waiting series starts: whether the slot in which
/// the transaction first competes contributes its (undiscounted) term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SeriesStart {
    /// Include the current slot's term (index 0).
    #[default]
    CurrentSlot,
    /// Count only slots after the current one (index 1), i.e. every term
    /// carries at least one round of discounting.
    NextSlot,
}

impl SeriesStart {
    pub fn first_index(self) -> u32 {
        match self {
            SeriesStart::CurrentSlot => 0,
            SeriesStart::NextSlot => 1,
        }
    }
}

/// Per-slot revenue discount: rho(0) = 1, strictly decreasing, in (0, 1].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DiscountFunction {
    /// rho(t) = delta^t with 0 < delta < 1.
    Geometric { delta: f64 },
    /// Explicit grid rho(0)..rho(T). Beyond the last entry the table
    /// extends geometrically with the ratio of its final two entries, which
    /// keeps rho strictly decreasing and summable.
    Table { values: Vec<f64> },
}

impl DiscountFunction {
    pub fn validate(&self) -> Result<(), AuctionError> {
        match self {
            DiscountFunction::Geometric { delta } => {
                if !delta.is_finite() || *delta <= 0.0 || *delta >= 1.0 {
                    return Err(AuctionError::InvalidDiscount(
                        "geometric ratio must lie strictly between 0 and 1",
                    ));
                }
            }
            DiscountFunction::Table { values } => {
                if values.len() < 2 {
                    return Err(AuctionError::InvalidDiscount(
                        "table needs at least two entries",
                    ));
                }
                if values[0] != 1.0 {
                    return Err(AuctionError::InvalidDiscount("rho(0) must equal 1"));
                }
                for w in values.windows(2) {
                    if !w[1].is_finite() || w[1] <= 0.0 || w[1] >= w[0] {
                        return Err(AuctionError::InvalidDiscount(
                            "table must be strictly decreasing within (0, 1]",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// rho(t) for an integer slot offset.
    pub fn rho(&self, t: u32) -> f64 {
        match self {
            DiscountFunction::Geometric { delta } => powi(*delta, t as u64),
            DiscountFunction::Table { values } => {
                if (t as usize) < values.len() {
                    values[t as usize]
                } else {
                    let last = values[values.len() - 1];
                    let ratio = self.tail_ratio();
                    last * powi(ratio, (t as usize - (values.len() - 1)) as u64)
                }
            }
        }
    }

    /// The geometric ratio governing the far tail.
    fn tail_ratio(&self) -> f64 {
        match self {
            DiscountFunction::Geometric { delta } => *delta,
            DiscountFunction::Table { values } => {
                values[values.len() - 1] / values[values.len() - 2]
            }
        }
    }

    /// First index from which rho decays by exactly `tail_ratio` per step.
    fn tail_start(&self) -> u32 {
        match self {
            DiscountFunction::Geometric { .. } => 0,
            DiscountFunction::Table { values } => (values.len() - 1) as u32,
        }
    }
}

/// The revenue distribution bidders draw from. Only the uniform family
/// ships; anything with a CDF slots in as a new variant.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RevenueDistribution {
    Uniform { r_max: f64 },
}

impl RevenueDistribution {
    pub fn validate(&self) -> Result<(), AuctionError> {
        match self {
            RevenueDistribution::Uniform { r_max } => {
                if !r_max.is_finite() || *r_max <= 0.0 {
                    return Err(AuctionError::InvalidDistribution(
                        "uniform upper bound must be finite and positive",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            RevenueDistribution::Uniform { r_max } => (x / r_max).clamp(0.0, 1.0),
        }
    }

    /// Upper end of the support.
    pub fn support_max(&self) -> f64 {
        match self {
            RevenueDistribution::Uniform { r_max } => *r_max,
        }
    }
}

/// Everything a slot's auction needs: the number of competing blob
/// transactions, their revenue distribution, the discount curve, the floor
/// price, the current slot, and the space open to blobs.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuctionConfig {
    pub bidders: usize,
    pub distribution: RevenueDistribution,
    pub discount: DiscountFunction,
    pub floor: f64,
    pub t0: u32,
    pub space: ByteSize,
    pub tolerance: f64,
}

impl AuctionConfig {
    pub fn new(
        bidders: usize,
        distribution: RevenueDistribution,
        discount: DiscountFunction,
        floor: f64,
        t0: u32,
    ) -> Result<Self, AuctionError> {
        if bidders < 1 {
            return Err(AuctionError::InvalidBidderCount);
        }
        distribution.validate()?;
        discount.validate()?;
        if !floor.is_finite() || floor < 0.0 {
            return Err(AuctionError::InvalidFloor);
        }
        Ok(AuctionConfig {
            bidders,
            distribution,
            discount,
            floor,
            t0,
            space: ByteSize::of_blobs(crate::model::MAX_BLOBS_PER_BLOCK),
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_space(mut self, space: ByteSize) -> Self {
        self.space = space;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self, AuctionError> {
        if !tolerance.is_finite() || tolerance <= 0.0 {
            return Err(AuctionError::InvalidTolerance);
        }
        self.tolerance = tolerance;
        Ok(self)
    }
}

/// A batch of blobs a rollup wants on chain, with the revenue each blob
/// realizes if included now.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlobJob {
    pub initial_revenues: Vec<f64>,
    pub slot: u32,
}

impl BlobJob {
    pub fn validate(&self) -> Result<(), AuctionError> {
        if self.initial_revenues.is_empty() {
            return Err(AuctionError::EmptyRevenues);
        }
        if self
            .initial_revenues
            .iter()
            .any(|r| !r.is_finite() || *r <= 0.0)
        {
            return Err(AuctionError::Domain(
                "blob revenues must be finite and positive",
            ));
        }
        Ok(())
    }
}

/// Integer-exponent power by square-and-multiply.
pub(crate) fn powi(base: f64, mut exp: u64) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            result *= b;
        }
        b *= b;
        exp >>= 1;
    }
    result
}

/// Revenue of a blob transaction waiting `slot` slots: rho(slot) times the
/// initial revenue, provided its blobs fit the space open to them.
pub fn discounted_revenue(
    initial_revenue: f64,
    blob_count: u8,
    slot: u32,
    config: &AuctionConfig,
) -> Result<f64, AuctionError> {
    let needed = ByteSize::of_blobs(blob_count);
    if blob_count == 0 || needed > config.space {
        return Err(AuctionError::CapacityExceeded {
            blob_count,
            space_bytes: config.space.as_bytes(),
        });
    }
    if !initial_revenue.is_finite() || initial_revenue < 0.0 {
        return Err(AuctionError::Domain(
            "initial revenue must be finite and non-negative",
        ));
    }
    Ok(config.discount.rho(slot) * initial_revenue)
}

/// Probability that a bid backed by revenue `revenue` beats the other
/// `bidders - 1` independent draws: F(revenue)^(bidders-1). One for a
/// single bidder.
pub fn inclusion_probability(revenue: f64, config: &AuctionConfig) -> f64 {
    powi(
        config.distribution.cdf(revenue),
        (config.bidders - 1) as u64,
    )
}

/// A bidder's action.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Bid {
    /// Revenue below the floor: staying out dominates.
    Abstain,
    Price(f64),
}

/// Symmetric equilibrium bid for a transaction whose discounted revenue is
/// `revenue_now`.
///
/// Below the floor the bidder abstains; otherwise the bid is
/// `max(floor, R - I/pi(R))` where `I` integrates the inclusion probability
/// from the floor to `R`. The integral is adaptive-Simpson quadrature at
/// the config's relative tolerance; the uniform no-floor case short-cuts to
/// the closed form `(k-1)/k * R`.
pub fn equilibrium_bid(revenue_now: f64, config: &AuctionConfig) -> Result<Bid, AuctionError> {
    if !revenue_now.is_finite() || revenue_now < 0.0 {
        return Err(AuctionError::Domain(
            "revenue must be finite and non-negative",
        ));
    }
    if revenue_now < config.floor {
        return Ok(Bid::Abstain);
    }
    let pi = inclusion_probability(revenue_now, config);
    if pi == 0.0 {
        return Err(AuctionError::DegenerateSupport);
    }
    let k = config.bidders as f64;
    if config.floor == 0.0 && revenue_now <= config.distribution.support_max() {
        // Uniform draws, no reserve: the shading factor is exactly (k-1)/k.
        let RevenueDistribution::Uniform { .. } = config.distribution;
        return Ok(Bid::Price(revenue_now - revenue_now / k));
    }
    let integral = adaptive_simpson(
        |x| inclusion_probability(x, config),
        config.floor,
        revenue_now,
        config.tolerance,
    );
    let price = (revenue_now - integral / pi).max(config.floor);
    Ok(Bid::Price(price))
}

/// Which term of the optimal price binds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Binding {
    Floor,
    Equilibrium,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimalPrice {
    pub price: f64,
    pub binding: Binding,
}

/// The builder's optimal acceptance price for a slot with one initial
/// revenue per bidder: `max(floor, (k-1)/k * max_j rho(t0) * revenue_j)`.
/// Ties report the floor as binding.
pub fn builder_optimal_price(
    config: &AuctionConfig,
    initial_revenues: &[f64],
) -> Result<OptimalPrice, AuctionError> {
    if initial_revenues.is_empty() {
        return Err(AuctionError::EmptyRevenues);
    }
    if initial_revenues.len() != config.bidders {
        return Err(AuctionError::RevenueCountMismatch {
            expected: config.bidders,
            got: initial_revenues.len(),
        });
    }
    if initial_revenues.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(AuctionError::Domain(
            "initial revenues must be finite and positive",
        ));
    }
    let rho = config.discount.rho(config.t0);
    let max_rev = initial_revenues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, r| acc.max(rho * r));
    let k = config.bidders as f64;
    let equilibrium_term = max_rev - max_rev / k;
    if config.floor >= equilibrium_term {
        Ok(OptimalPrice {
            price: config.floor,
            binding: Binding::Floor,
        })
    } else {
        Ok(OptimalPrice {
            price: equilibrium_term,
            binding: Binding::Equilibrium,
        })
    }
}

/// Expected discount accumulated while waiting for the first auction win:
/// the series over slots `k` of `(1 - win_prob)^k * rho(k)`, truncated once
/// a rigorous tail bound drops below `tolerance`.
pub fn waiting_discount(
    win_prob: f64,
    discount: &DiscountFunction,
    tolerance: f64,
    start: SeriesStart,
) -> Result<f64, AuctionError> {
    if !(0.0..=1.0).contains(&win_prob) {
        return Err(AuctionError::Domain(
            "win probability must lie in [0, 1]",
        ));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(AuctionError::InvalidTolerance);
    }
    discount.validate()?;
    let q = 1.0 - win_prob;
    let ratio = discount.tail_ratio();
    let tail_start = discount.tail_start();

    let first = start.first_index();
    let mut sum = 0.0;
    let mut q_pow = powi(q, first as u64);
    let mut k = first;
    const MAX_TERMS: u32 = 10_000_000;
    loop {
        let rho_k = discount.rho(k);
        sum += q_pow * rho_k;
        // Tail after index k, bounded two ways: rho decreasing (needs
        // win_prob > 0), and the geometric tail once rho decays by `ratio`.
        let monotone_bound = if win_prob > 0.0 {
            rho_k * q_pow * q / win_prob
        } else {
            f64::INFINITY
        };
        let geometric_bound = if k >= tail_start && q * ratio < 1.0 {
            rho_k * q_pow * (q * ratio) / (1.0 - q * ratio)
        } else {
            f64::INFINITY
        };
        if monotone_bound.min(geometric_bound) < tolerance {
            return Ok(sum);
        }
        k += 1;
        q_pow *= q;
        if k - first > MAX_TERMS {
            return Err(AuctionError::DivergentSeries);
        }
    }
}

/// Multi-round expected utility of a single blob transaction with revenue
/// `revenue`: `pi(R)/n * R * waiting_discount(pi(R))`.
///
/// The series defaults to including the current slot's term; the
/// paper-literal next-slot-only variant is available through `start`.
pub fn bundle_utility(
    revenue: f64,
    config: &AuctionConfig,
    start: SeriesStart,
) -> Result<f64, AuctionError> {
    if !revenue.is_finite() || revenue < 0.0 {
        return Err(AuctionError::Domain(
            "revenue must be finite and non-negative",
        ));
    }
    let pi = inclusion_probability(revenue, config);
    if pi == 0.0 && revenue == 0.0 {
        // Zero revenue earns zero regardless of the series.
        return Ok(0.0);
    }
    let phi = waiting_discount(pi, &config.discount, config.tolerance, start)?;
    Ok(pi / config.bidders as f64 * revenue * phi)
}

/// Adaptive Simpson quadrature with a relative tolerance.
fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    let eps = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    recurse(&f, a, b, fa, fm, fb, whole, eps, 60)
}

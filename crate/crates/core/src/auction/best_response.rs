//! Numeric fixed point of the best-response map on a revenue grid, used as
//! an oracle for the closed-form equilibrium bid.
//!
//! Strategies live on a uniform revenue grid; the opponents' bid
//! distribution is the piecewise-linear (atomless) interpolation of the
//! current profile, so each sweep solves every bidder's best response
//! analytically per segment. Ties at bid atoms lose, and deviating just
//! above an atom is offered as an explicit candidate. With no floor the
//! sweep lands on the equilibrium within a couple of iterations; with a
//! positive floor the discrete map can settle on reserve-pooling profiles,
//! but the abstention region `[0, floor)` is exact either way.

use alloc::vec::Vec;

use super::{powi, AuctionConfig, AuctionError, MAX_FIXED_POINT_ITERATIONS};

/// The converged bid profile.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BestResponseOutcome {
    pub revenues: Vec<f64>,
    /// One bid per grid revenue; `None` marks abstention.
    pub bids: Vec<Option<f64>>,
    pub iterations: u32,
    pub sup_change: f64,
}

/// Iterate best responses over a `grid_size`-point revenue grid until the
/// sup-norm change drops below 1e-6, erroring out with the last two
/// iterates after ten thousand sweeps.
pub fn best_response_fixed_point(
    config: &AuctionConfig,
    grid_size: usize,
) -> Result<BestResponseOutcome, AuctionError> {
    if grid_size < 100 {
        return Err(AuctionError::GridTooSmall(grid_size));
    }
    const SUP_TOL: f64 = 1e-6;
    let r_max = config.distribution.support_max();
    let step = r_max / (grid_size - 1) as f64;
    let revenues: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
    // Truthful start; types below the floor can never profit and stay out.
    let mut bids: Vec<Option<f64>> = revenues
        .iter()
        .map(|&r| (r >= config.floor).then_some(r))
        .collect();

    for iteration in 1..=MAX_FIXED_POINT_ITERATIONS {
        let new_bids = sweep(config, &revenues, &bids);
        let sup_change = bids
            .iter()
            .zip(&new_bids)
            .filter_map(|(old, new)| match (old, new) {
                (Some(o), Some(n)) => Some((o - n).abs()),
                (None, None) => None,
                _ => Some(f64::INFINITY),
            })
            .fold(0.0f64, f64::max);
        let previous = core::mem::replace(&mut bids, new_bids);
        if sup_change < SUP_TOL {
            return Ok(BestResponseOutcome {
                revenues,
                bids,
                iterations: iteration,
                sup_change,
            });
        }
        if iteration == MAX_FIXED_POINT_ITERATIONS {
            return Err(AuctionError::NoConvergence {
                iterations: iteration,
                sup_change,
                last: bids,
                previous,
            });
        }
    }
    unreachable!("loop either converges or errors at the iteration cap");
}

/// One best-response sweep against the current profile.
fn sweep(config: &AuctionConfig, revenues: &[f64], bids: &[Option<f64>]) -> Vec<Option<f64>> {
    let exp = (config.bidders - 1) as u64;
    // Active (revenue, bid) pairs; bids are non-decreasing in revenue, so
    // their distribution's CDF is read off the revenue CDF.
    let active: Vec<(f64, f64)> = revenues
        .iter()
        .zip(bids)
        .filter_map(|(&r, b)| b.map(|b| (r, b)))
        .collect();

    // Candidate prices with the win mass of bidding there. `mass` is the
    // probability one opponent bids strictly below.
    #[derive(Clone, Copy)]
    enum Piece {
        Point { price: f64, mass: f64 },
        Segment { p0: f64, p1: f64, c0: f64, c1: f64 },
    }
    let mut pieces = Vec::with_capacity(active.len() + 3);
    if let Some(&(first_r, _)) = active.first() {
        // Everything below the lowest active bid beats only abstainers.
        pieces.push(Piece::Point {
            price: config.floor,
            mass: config.distribution.cdf(first_r),
        });
        for pair in active.windows(2) {
            let ((r0, b0), (r1, b1)) = (pair[0], pair[1]);
            let (c0, c1) = (config.distribution.cdf(r0), config.distribution.cdf(r1));
            if b1 > b0 {
                pieces.push(Piece::Segment {
                    p0: b0,
                    p1: b1,
                    c0,
                    c1,
                });
            } else {
                // Atom: ties lose, one ulp above clears it.
                pieces.push(Piece::Point { price: b0, mass: c0 });
                pieces.push(Piece::Point {
                    price: b0.next_up(),
                    mass: c1,
                });
            }
        }
        let &(last_r, last_b) = active.last().expect("non-empty");
        pieces.push(Piece::Point {
            price: last_b,
            mass: config.distribution.cdf(last_r),
        });
        pieces.push(Piece::Point {
            price: last_b.next_up(),
            mass: 1.0,
        });
    } else {
        pieces.push(Piece::Point {
            price: config.floor,
            mass: 1.0,
        });
    }

    revenues
        .iter()
        .map(|&r| {
            if r < config.floor {
                return None;
            }
            let mut best_price = config.floor;
            let mut best_utility = f64::NEG_INFINITY;
            let mut consider = |price: f64, mass: f64| {
                if price < config.floor {
                    return;
                }
                let u = powi(mass, exp) * (r - price);
                if u > best_utility || (u == best_utility && price < best_price) {
                    best_utility = u;
                    best_price = price;
                }
            };
            for piece in &pieces {
                match *piece {
                    Piece::Point { price, mass } => consider(price, mass),
                    Piece::Segment { p0, p1, c0, c1 } => {
                        consider(p0, c0);
                        consider(p1, c1);
                        // Interior stationary point of (a + c p)^(k-1) (r - p).
                        let slope = (c1 - c0) / (p1 - p0);
                        if config.bidders > 1 && slope > 0.0 {
                            let intercept = c0 - slope * p0;
                            let k = config.bidders as f64;
                            let p = ((k - 1.0) * slope * r - intercept) / (k * slope);
                            if p > p0 && p < p1 {
                                consider(p, intercept + slope * p);
                            }
                        }
                    }
                }
            }
            Some(best_price)
        })
        .collect()
}

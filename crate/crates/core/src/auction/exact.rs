//! Exact-rational evaluation of the builder's optimal price formula.
//!
//! Floating point cannot witness identities like "one minus the price gap
//! is exactly 1/k": `1 - fl((k-1)/k)` and `fl(1/k)` differ by an ulp for
//! most k. This mirror of [`super::builder_optimal_price`] evaluates the
//! same formula over rationals so such identities hold exactly.

use num_rational::Ratio;

use super::AuctionError;

pub type Rational = Ratio<i128>;

/// `max(floor, (k-1)/k * max_j rho_t0 * revenue_j)` over rationals.
pub fn optimal_price_ratio(
    floor: Rational,
    bidders: u64,
    rho_t0: Rational,
    initial_revenues: &[Rational],
) -> Result<Rational, AuctionError> {
    if bidders < 1 {
        return Err(AuctionError::InvalidBidderCount);
    }
    if initial_revenues.is_empty() {
        return Err(AuctionError::EmptyRevenues);
    }
    if initial_revenues.len() != bidders as usize {
        return Err(AuctionError::RevenueCountMismatch {
            expected: bidders as usize,
            got: initial_revenues.len(),
        });
    }
    let max_rev = initial_revenues
        .iter()
        .map(|r| rho_t0 * r)
        .max()
        .expect("non-empty");
    let k = Rational::from_integer(bidders as i128);
    let shading = (k - Rational::from_integer(1)) / k;
    Ok(floor.max(shading * max_rev))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn gap_to_revenue_is_exactly_one_over_k() {
        for k in [1u64, 2, 3, 7, 1000, 1_000_000] {
            let revs = alloc::vec![r(1, 1); k as usize];
            let p = optimal_price_ratio(r(0, 1), k, r(1, 1), &revs).unwrap();
            assert_eq!(r(1, 1) - p, r(1, k as i128));
        }
    }

    #[test]
    fn floor_binds() {
        let p = optimal_price_ratio(r(10, 1), 2, r(1, 1), &[r(1, 1), r(3, 5)]).unwrap();
        assert_eq!(p, r(10, 1));
    }

    #[test]
    fn bidder_count_must_match() {
        let err = optimal_price_ratio(r(0, 1), 3, r(1, 1), &[r(1, 1)]).unwrap_err();
        assert_eq!(
            err,
            AuctionError::RevenueCountMismatch {
                expected: 3,
                got: 1
            }
        );
    }
}

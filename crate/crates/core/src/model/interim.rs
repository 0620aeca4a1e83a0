//! Interim allocation, payment and utility, unconditional and conditioned on
//! the event that bidder `i` holds the highest value.

use serde::{Deserialize, Serialize};

use super::instance::AuctionInstance;
use super::strategy::BidStrategy;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Interim quantities of one bidder at one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterimQuantities<S> {
    pub win_prob: S,
    pub expected_payment: S,
    pub expected_utility: S,
    /// Whether the quantities are conditioned on `{v_j <= v_i for all j != i}`.
    pub conditional: bool,
}

/// `∏_{j≠i} B_j(b)`: probability that bid `b` is at least every other bid.
pub fn win_probability<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    bidder: usize,
    bid: S,
) -> S {
    instance
        .bidders
        .iter()
        .zip(strategies)
        .enumerate()
        .filter(|&(j, _)| j != bidder)
        .map(|(_, (d, s))| s.bid_cdf(d, bid))
        .fold(S::one(), |acc, p| acc * p)
}

/// `∏_{j≠i} min(B_j(b) / F_j(v_i), 1)`: win probability conditioned on every
/// opponent's value being at most `v_i`. This is also the CDF of the
/// threshold bid under the same conditioning.
pub fn conditional_win_probability<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    bidder: usize,
    value: S,
    bid: S,
) -> Result<S> {
    let mut p = S::one();
    for (j, (d, s)) in instance.bidders.iter().zip(strategies).enumerate() {
        if j == bidder {
            continue;
        }
        let mass = d.cdf(value);
        if !(mass > S::zero()) {
            return Err(Error::DegenerateConditioning {
                bidder: j,
                value: value.as_f64(),
            });
        }
        p = p * (s.bid_cdf(d, bid) / mass).min(S::one());
    }
    Ok(p)
}

/// Probability of `E_i(v_i) = {v_j <= v_i for all j != i}`.
pub fn highest_value_probability<S: Scalar>(
    instance: &AuctionInstance<S>,
    bidder: usize,
    value: S,
) -> S {
    instance
        .bidders
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != bidder)
        .map(|(_, d)| d.cdf(value))
        .fold(S::one(), |acc, p| acc * p)
}

/// Interim quantities of bidder `i` with value `v` bidding `b_i(v)`.
pub fn interim<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    bidder: usize,
    value: S,
    conditional: bool,
) -> Result<InterimQuantities<S>> {
    let bid = strategies[bidder].bid(value);
    let win_prob = if conditional {
        conditional_win_probability(instance, strategies, bidder, value, bid)?
    } else {
        win_probability(instance, strategies, bidder, bid)
    };
    Ok(InterimQuantities {
        win_prob,
        expected_payment: bid * win_prob,
        expected_utility: (value - bid) * win_prob,
        conditional,
    })
}

/// Bid at quantile `z` of bidder `i`'s threshold bid (the highest other bid)
/// conditioned on `E_i(v_i)`: the generalized inverse of
/// [`conditional_win_probability`] in the bid.
///
/// When `z` is at or below the probability mass of the lowest threshold,
/// returns the infimum of the threshold's support.
pub fn threshold_quantile<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    bidder: usize,
    value: S,
    z: S,
) -> Result<S> {
    if !(z > S::zero() && z <= S::one()) {
        return Err(Error::domain(
            "threshold_quantile",
            format!("z must lie in (0, 1], got {z}"),
        ));
    }
    let mut floor = S::neg_infinity();
    let mut ceiling = S::neg_infinity();
    for (j, (d, s)) in instance.bidders.iter().zip(strategies).enumerate() {
        if j == bidder {
            continue;
        }
        let (lo, hi) = d.support();
        floor = floor.max(s.bid(lo));
        ceiling = ceiling.max(s.bid(value.min(hi)));
    }
    let cdf = |b: S| conditional_win_probability(instance, strategies, bidder, value, b);
    if cdf(floor)? >= z {
        return Ok(floor);
    }
    // invariant: cdf(lo) < z <= cdf(hi)
    let (mut lo, mut hi) = (floor, ceiling);
    for _ in 0..200 {
        let mid = lo + (hi - lo) / S::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid)? >= z {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

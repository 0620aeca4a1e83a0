use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::AuctionInstance;
use super::strategy::BidStrategy;
use crate::scalar::Scalar;

/// One realized play of the auction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome<S> {
    pub values: Vec<S>,
    pub bids: Vec<S>,
    /// Highest bidder; ties go to the lowest index.
    pub winner: usize,
    /// `τ_i`: highest bid among the others.
    pub thresholds: Vec<S>,
    /// Winner's bid.
    pub payment: S,
}

impl<S: Scalar> SampleOutcome<S> {
    /// Bidder with the highest value (lowest index on ties).
    pub fn highest_value_bidder(&self) -> usize {
        argmax_first(&self.values)
    }

    pub fn winner_value(&self) -> S {
        self.values[self.winner]
    }
}

fn argmax_first<S: Scalar>(xs: &[S]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Resolves the auction at a fixed value profile.
pub fn outcome_from_values<S: Scalar>(
    strategies: &[BidStrategy<S>],
    values: Vec<S>,
) -> SampleOutcome<S> {
    let bids: Vec<S> = strategies
        .iter()
        .zip(&values)
        .map(|(s, &v)| s.bid(v))
        .collect();
    let winner = argmax_first(&bids);
    let n = bids.len();
    // top two bids give every threshold in one pass
    let mut second = S::neg_infinity();
    for (i, &b) in bids.iter().enumerate() {
        if i != winner && b > second {
            second = b;
        }
    }
    let thresholds = (0..n)
        .map(|i| if i == winner { second } else { bids[winner] })
        .collect();
    SampleOutcome {
        payment: bids[winner],
        values,
        bids,
        winner,
        thresholds,
    }
}

/// Draws values by inverse CDF from `rng` and resolves the auction.
pub fn draw_outcome<S: Scalar, R: Rng + ?Sized>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    rng: &mut R,
) -> SampleOutcome<S> {
    let values = instance.bidders.iter().map(|d| d.sample(rng)).collect();
    outcome_from_values(strategies, values)
}

/// One outcome, deterministic in `seed`.
pub fn sample_outcome<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    seed: u64,
) -> SampleOutcome<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_outcome(instance, strategies, &mut rng)
}

/// Generator for Monte Carlo shard `shard`: same key as `seed`, disjoint
/// stream per shard.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

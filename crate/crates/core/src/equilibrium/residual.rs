use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{win_probability, AuctionInstance, BidStrategy};
use crate::scalar::Scalar;

/// Grid sizes of the best-response verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualGrid {
    /// Values per bidder, uniform on the support.
    pub values: usize,
    /// Candidate deviation bids, uniform from the lowest bid to the highest value.
    pub bids: usize,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        Self {
            values: 257,
            bids: 4097,
        }
    }
}

/// Where the largest regret was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<S> {
    pub residual: S,
    pub bidder: usize,
    pub value: S,
    pub deviation: S,
}

/// `max_{i, v, b} [ũ_i(b) − ũ_i(b_i(v))]` over the grids, floored at zero.
pub fn best_response_residual<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    grid: ResidualGrid,
) -> Result<S> {
    best_response_report(instance, strategies, grid).map(|r| r.residual)
}

pub fn best_response_report<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    grid: ResidualGrid,
) -> Result<ResidualReport<S>> {
    if strategies.len() != instance.n() {
        return Err(Error::InvalidStrategy(format!(
            "{} strategies for {} bidders",
            strategies.len(),
            instance.n()
        )));
    }
    if grid.values < 2 || grid.bids < 2 {
        return Err(Error::domain(
            "best_response_residual",
            "grids need at least two points",
        ));
    }
    let bids = deviation_bids(instance, strategies, grid.bids);
    let mut best = ResidualReport {
        residual: S::zero(),
        bidder: 0,
        value: instance.bidder(0).support().0,
        deviation: S::zero(),
    };
    for i in 0..instance.n() {
        let wins: Vec<S> = bids
            .iter()
            .map(|&b| win_probability(instance, strategies, i, b))
            .collect();
        let (lo, hi) = instance.bidder(i).support();
        let last = S::from_usize_lossy(grid.values - 1);
        // Collected in index order so the reduction below is deterministic.
        let rows: Vec<(S, S, S)> = (0..grid.values)
            .into_par_iter()
            .map(|k| {
                let v = lo + (hi - lo) * S::from_usize_lossy(k) / last;
                let own = strategies[i].bid(v);
                let current = (v - own) * win_probability(instance, strategies, i, own);
                let mut top = (S::neg_infinity(), own);
                for (&b, &w) in bids.iter().zip(&wins) {
                    let u = (v - b) * w;
                    if u > top.0 {
                        top = (u, b);
                    }
                }
                (top.0 - current, v, top.1)
            })
            .collect();
        for (regret, v, b) in rows {
            if regret > best.residual {
                best = ResidualReport {
                    residual: regret,
                    bidder: i,
                    value: v,
                    deviation: b,
                };
            }
        }
    }
    Ok(best)
}

/// Uniform grid plus every strategy's extreme bids, where win probabilities jump.
fn deviation_bids<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    n: usize,
) -> Vec<S> {
    let lo = strategies
        .iter()
        .map(|s| s.min_bid())
        .fold(S::infinity(), S::min)
        .min(S::zero());
    let hi = instance.max_value();
    let last = S::from_usize_lossy(n - 1);
    let mut bids: Vec<S> = (0..n)
        .map(|k| lo + (hi - lo) * S::from_usize_lossy(k) / last)
        .collect();
    for s in strategies {
        bids.push(s.min_bid());
        bids.push(s.max_bid());
    }
    bids.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    bids.dedup();
    bids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DistributionSpec;

    fn uniform_pair() -> AuctionInstance<f64> {
        AuctionInstance::symmetric(DistributionSpec::uniform(0.0, 1.0).unwrap(), 2).unwrap()
    }

    fn linear(slope: f64) -> BidStrategy<f64> {
        BidStrategy::new(vec![(0.0, 0.0), (1.0, slope)]).unwrap()
    }

    #[test]
    fn half_bidding_is_an_equilibrium() {
        let inst = uniform_pair();
        let r = best_response_residual(&inst, &[linear(0.5), linear(0.5)], ResidualGrid::default())
            .unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn zero_bidding_against_half_is_detected() {
        let inst = uniform_pair();
        let zero = BidStrategy::new(vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let r = best_response_report(&inst, &[zero, linear(0.5)], ResidualGrid::default()).unwrap();
        // best reply to an opponent bidding v/2 earns v^2/2 at the top value
        assert_eq!(r.bidder, 0);
        assert!((r.residual - 0.5).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn truthful_bidding_is_not_an_equilibrium() {
        let inst = uniform_pair();
        let r = best_response_residual(&inst, &[linear(1.0), linear(1.0)], ResidualGrid::default())
            .unwrap();
        assert!(r > 0.2, "{r}");
    }

    #[test]
    fn profile_length_is_checked() {
        let inst = uniform_pair();
        assert!(best_response_residual(&inst, &[linear(0.5)], ResidualGrid::default()).is_err());
    }
}

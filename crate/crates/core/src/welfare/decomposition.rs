use serde::{Deserialize, Serialize};

use super::{run_shards, Paired};
use crate::error::{Error, Result};
use crate::model::{highest_value_probability, outcome_from_values, AuctionInstance, BidStrategy};
use crate::scalar::Scalar;
use rand::Rng;

/// Both sides of the per-bidder welfare decomposition, estimated from one
/// sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Plain Monte Carlo estimate of `E[v_{i*}]`.
    pub lhs: f64,
    /// `Σ_i ∫ f_i(v) P[E_i(v)] E[v_{i*} | E_i(v)] dv`, sampling `v_i` from
    /// `F_i` and the others from their distributions truncated below `v_i`.
    pub rhs: f64,
    pub discrepancy: f64,
    /// Standard error of `lhs − rhs`.
    pub std_err: f64,
    pub samples: usize,
}

/// Estimates both sides of the decomposition of expected welfare into, for each
/// bidder `i` holding the highest value, its own winning value plus the value
/// of whoever outbids it.
pub fn decomposition_check<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    seed: u64,
    samples: usize,
) -> Result<Decomposition> {
    instance.validate()?;
    instance.validate_profile(strategies)?;
    if samples < 2 {
        return Err(Error::domain(
            "decomposition_check",
            "need at least two samples",
        ));
    }
    let n = instance.n();
    let parts = run_shards(seed, samples, |rng, m| {
        let mut acc = Paired::default();
        let mut values = vec![S::zero(); n];
        for _ in 0..m {
            for (v, d) in values.iter_mut().zip(&instance.bidders) {
                *v = d.sample(rng);
            }
            let plain = outcome_from_values(strategies, values.clone()).winner_value();
            let mut stratified = S::zero();
            for i in 0..n {
                let vi = instance.bidder(i).sample(rng);
                for (j, d) in instance.bidders.iter().enumerate() {
                    values[j] = if j == i {
                        vi
                    } else {
                        d.quantile_truncated(S::lit(rng.gen::<f64>()), vi)
                    };
                }
                let weight = highest_value_probability(instance, i, vi);
                if weight > S::zero() {
                    stratified = stratified
                        + weight * outcome_from_values(strategies, values.clone()).winner_value();
                }
            }
            acc.push(plain.as_f64(), stratified.as_f64());
        }
        acc
    });
    let acc = parts.iter().fold(Paired::default(), |a, p| a.merge(p));
    let (lhs, rhs) = (acc.mean_x(), acc.mean_y());
    Ok(Decomposition {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
        std_err: acc.diff_std_err(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DistributionSpec;

    #[test]
    fn symmetric_sides_match_the_optimum() {
        let d = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let inst = AuctionInstance::symmetric(d, 2).unwrap();
        let s = BidStrategy::new(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        let r = decomposition_check(&inst, &[s.clone(), s], 11, 100_000).unwrap();
        assert!((r.lhs - 2.0 / 3.0).abs() < 0.01, "{r:?}");
        assert!((r.rhs - 2.0 / 3.0).abs() < 0.01, "{r:?}");
        assert!(r.discrepancy < 4.0 * r.std_err, "{r:?}");
    }

    #[test]
    fn seeded_rerun_is_identical() {
        let inst = AuctionInstance::new(vec![
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::uniform(0.0, 2.0).unwrap(),
        ])
        .unwrap();
        let s = vec![
            BidStrategy::new(vec![(0.0, 0.0), (1.0, 0.6)]).unwrap(),
            BidStrategy::new(vec![(0.0, 0.0), (2.0, 0.7)]).unwrap(),
        ];
        let a = decomposition_check(&inst, &s, 5, 20_000).unwrap();
        let b = decomposition_check(&inst, &s, 5, 20_000).unwrap();
        assert_eq!(a, b);
        assert!(a.discrepancy < 4.0 * a.std_err, "{a:?}");
    }
}

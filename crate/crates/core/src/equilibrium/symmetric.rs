use super::{
    best_response_residual, quantile_knots, tidy_knots, EquilibriumSolution, SolverMeta,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::model::{AuctionInstance, BidStrategy, DistributionSpec};
use crate::numerics::integrate_piecewise;
use crate::scalar::Scalar;

/// Symmetric equilibrium `b(v) = v − ∫_lo^v F(t)^{n−1} dt / F(v)^{n−1}`.
pub fn solve_symmetric<S: Scalar>(
    dist: &DistributionSpec<S>,
    n: usize,
    opts: &SolverOptions<S>,
) -> Result<EquilibriumSolution<S>> {
    if n < 2 {
        return Err(Error::InvalidInstance(format!(
            "need at least two bidders, got {n}"
        )));
    }
    // checked before validation, which would reject flat segments less specifically
    if !dist.has_positive_density() {
        return Err(Error::Unsupported(
            "the value distribution has a zero-density region".into(),
        ));
    }
    dist.validate()?;
    let (lo, _) = dist.support();
    let values = quantile_knots(dist, opts.knots);
    let breaks = dist.breakpoints();
    let power = |t: S| dist.cdf(t).powi(n as i32 - 1);

    let mut bids = Vec::with_capacity(values.len());
    bids.push(lo);
    let mut area = S::zero();
    for w in values.windows(2) {
        let mut pts = vec![w[0]];
        pts.extend(breaks.iter().copied().filter(|&x| x > w[0] && x < w[1]));
        pts.push(w[1]);
        area = area + integrate_piecewise(power, &pts, &opts.quadrature)?;
        bids.push(w[1] - area / power(w[1]));
    }
    let strategy = BidStrategy::new(tidy_knots(&values, &bids, lo))?;
    let strategies = vec![strategy; n];
    let instance = AuctionInstance::symmetric(dist.clone(), n)?;
    let residual = best_response_residual(&instance, &strategies, opts.grid)?;
    if !(residual <= opts.residual_tol) {
        return Err(Error::SolverNonConvergence(format!(
            "symmetric solution has best-response residual {residual}, above {}",
            opts.residual_tol
        )));
    }
    Ok(EquilibriumSolution {
        meta: SolverMeta {
            solver: "symmetric".into(),
            iterations: 0,
            bracket: None,
            b_bar: strategies[0].max_bid(),
            knots_per_bidder: values.len(),
            value_grid: opts.grid.values,
            bid_grid: opts.grid.bids,
        },
        strategies,
        residual,
    })
}

//! Bayes-Nash equilibria of the first-price auction: a closed-form symmetric
//! solver, a shooting solver for two asymmetric bidders, and a best-response
//! verifier that certifies any strategy profile.

mod asymmetric;
mod residual;
mod symmetric;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::model::BidStrategy;
use crate::numerics::ToleranceConfig;
use crate::scalar::Scalar;

pub use asymmetric::solve_asymmetric_two;
pub use residual::{best_response_report, best_response_residual, ResidualGrid, ResidualReport};
pub use symmetric::solve_symmetric;

/// Knobs shared by both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions<S> {
    /// Strategy knots per bidder, uniform in quantile space.
    pub knots: usize,
    /// A solution whose best-response residual exceeds this is rejected.
    pub residual_tol: S,
    pub grid: ResidualGrid,
    pub quadrature: ToleranceConfig<S>,
    /// RK4 steps of the backward integration (asymmetric solver only).
    pub ode_steps: usize,
    pub bisection_iters: usize,
    /// The backward integration stops at `lo + low_cutoff * (b_bar - lo)`.
    pub low_cutoff: S,
}

impl<S: Scalar> SolverOptions<S> {
    pub fn symmetric() -> Self {
        Self {
            knots: 1024,
            residual_tol: S::lit(1e-4),
            grid: ResidualGrid::default(),
            quadrature: ToleranceConfig {
                abs_tol: S::lit(1e-12),
                rel_tol: S::lit(1e-12),
                max_iter: 200_000,
            },
            ode_steps: 20_000,
            bisection_iters: 80,
            low_cutoff: S::lit(1e-7),
        }
    }

    pub fn asymmetric() -> Self {
        Self {
            residual_tol: S::lit(1e-3),
            ..Self::symmetric()
        }
    }
}

/// Diagnostics attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta<S> {
    pub solver: String,
    /// Bisection iterations (0 for the closed form).
    pub iterations: usize,
    /// Final shooting bracket on the common maximum bid.
    pub bracket: Option<(S, S)>,
    /// Highest bid placed by any bidder.
    pub b_bar: S,
    pub knots_per_bidder: usize,
    pub value_grid: usize,
    pub bid_grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution<S> {
    pub strategies: Vec<BidStrategy<S>>,
    /// Largest best-response regret found by the verifier.
    pub residual: S,
    pub meta: SolverMeta<S>,
}

impl<S: Scalar> EquilibriumSolution<S> {
    /// Summary written next to the per-bidder strategy CSV files.
    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "residual": self.residual.as_f64(),
            "b_bar": self.meta.b_bar.as_f64(),
            "knots_per_bidder": self.strategies.iter().map(|s| s.knots().len()).collect::<Vec<_>>(),
            "solver": self.meta.solver,
            "iterations": self.meta.iterations,
            "bracket": self.meta.bracket.map(|(a, b)| [a.as_f64(), b.as_f64()]),
            "value_grid": self.meta.value_grid,
            "bid_grid": self.meta.bid_grid,
        })
    }
}

/// Knot values uniform in quantile space, deduplicated.
pub(crate) fn quantile_knots<S: Scalar>(
    dist: &crate::model::DistributionSpec<S>,
    n: usize,
) -> Vec<S> {
    let n = n.max(2);
    let last = S::from_usize_lossy(n - 1);
    let mut out: Vec<S> = Vec::with_capacity(n);
    for k in 0..n {
        let v = dist.quantile(S::from_usize_lossy(k) / last);
        if out.last().is_none_or(|&p| v > p) {
            out.push(v);
        }
    }
    out
}

/// Clamps to `[lo, v]` and enforces monotonicity by a running maximum.
pub(crate) fn tidy_knots<S: Scalar>(values: &[S], bids: &[S], lo: S) -> Vec<(S, S)> {
    let mut run = S::neg_infinity();
    values
        .iter()
        .zip(bids)
        .map(|(&v, &b)| {
            let b = if b.is_finite() { b } else { lo };
            run = run.max(b.max(lo)).min(v);
            (v, run)
        })
        .collect()
}

/// Dispatches to the symmetric solver when all bidders share a distribution
/// and to the two-bidder shooting solver otherwise.
pub fn solve_instance<S: Scalar>(
    instance: &crate::model::AuctionInstance<S>,
    opts: Option<&SolverOptions<S>>,
) -> crate::Result<EquilibriumSolution<S>> {
    instance.validate()?;
    if instance.is_symmetric() {
        let own = SolverOptions::symmetric();
        return solve_symmetric(instance.bidder(0), instance.n(), opts.unwrap_or(&own));
    }
    if instance.n() != 2 {
        return Err(crate::Error::Unsupported(format!(
            "asymmetric instances need exactly two bidders, got {}",
            instance.n()
        )));
    }
    let own = SolverOptions::asymmetric();
    solve_asymmetric_two(instance.bidder(0), instance.bidder(1), opts.unwrap_or(&own))
}

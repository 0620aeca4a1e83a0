//! Equilibrium welfare against the highest-value benchmark, the per-bidder
//! welfare decomposition, and audits of the welfare lemmas on concrete
//! strategy profiles.

mod audit;
mod decomposition;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{draw_outcome, shard_rng, AuctionInstance, BidStrategy};
use crate::numerics::{integrate_piecewise, ToleranceConfig};
use crate::scalar::Scalar;

pub use audit::{audit_lemmas, AuditConfig, AuditReport, LemmaTally};
pub use decomposition::{decomposition_check, Decomposition};

/// Fixed shard count, so Monte Carlo output does not depend on the thread count.
pub const SHARDS: u64 = 64;

/// How an expectation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Method {
    Quadrature,
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareEstimate<S> {
    /// Expected value of the winner.
    pub welf: S,
    /// Expected highest value.
    pub opt: S,
    pub ratio: S,
    pub method: MethodKind,
    /// 95% half-width on `ratio`; zero for quadrature.
    pub ci_halfwidth: S,
    /// Standard error of `welf`; zero for quadrature.
    pub welf_std_err: S,
    pub samples: usize,
}

/// Number of draws handled by each shard.
pub(crate) fn shard_sizes(samples: usize) -> Vec<usize> {
    let k = SHARDS as usize;
    (0..k)
        .map(|s| samples / k + usize::from(s < samples % k))
        .collect()
}

/// Runs `f` once per shard in parallel; results come back in shard order.
pub(crate) fn run_shards<T, F>(seed: u64, samples: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(s, m)| f(&mut shard_rng(seed, s as u64), m))
        .collect()
}

/// Running sums of a paired sample `(x, y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Paired {
    pub n: f64,
    pub sx: f64,
    pub sy: f64,
    pub sxx: f64,
    pub syy: f64,
    pub sxy: f64,
}

impl Paired {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    pub fn merge(mut self, o: &Paired) -> Paired {
        self.n += o.n;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self.sxy += o.sxy;
        self
    }

    pub fn mean_x(&self) -> f64 {
        self.sx / self.n
    }

    pub fn mean_y(&self) -> f64 {
        self.sy / self.n
    }

    fn cov(&self, sab: f64, sa: f64, sb: f64) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (sab - sa * sb / self.n) / (self.n - 1.0)
    }

    pub fn var_x(&self) -> f64 {
        self.cov(self.sxx, self.sx, self.sx).max(0.0)
    }

    pub fn var_y(&self) -> f64 {
        self.cov(self.syy, self.sy, self.sy).max(0.0)
    }

    pub fn cov_xy(&self) -> f64 {
        self.cov(self.sxy, self.sx, self.sy)
    }

    /// Standard error of `mean(x) − mean(y)`.
    pub fn diff_std_err(&self) -> f64 {
        ((self.var_x() + self.var_y() - 2.0 * self.cov_xy()).max(0.0) / self.n).sqrt()
    }

    /// Delta-method standard error of `mean(x) / mean(y)`.
    pub fn ratio_std_err(&self) -> f64 {
        let (mx, my) = (self.mean_x(), self.mean_y());
        if my == 0.0 {
            return 0.0;
        }
        let r = mx / my;
        let v = self.var_x() - 2.0 * r * self.cov_xy() + r * r * self.var_y();
        (v.max(0.0) / self.n).sqrt() / my.abs()
    }
}

fn all_breakpoints<S: Scalar>(instance: &AuctionInstance<S>) -> Vec<S> {
    let mut pts = instance.breakpoints();
    pts.insert(0, S::zero());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

fn quadrature_tol<S: Scalar>() -> ToleranceConfig<S> {
    ToleranceConfig {
        abs_tol: S::lit(1e-11),
        rel_tol: S::lit(1e-11),
        max_iter: 400_000,
    }
}

/// `E[max_i v_i]`.
pub fn optimal_welfare<S: Scalar>(instance: &AuctionInstance<S>, method: Method) -> Result<S> {
    instance.validate()?;
    match method {
        Method::Quadrature => {
            let tail = |t: S| {
                S::one()
                    - instance
                        .bidders
                        .iter()
                        .fold(S::one(), |acc, d| acc * d.cdf(t))
            };
            integrate_piecewise(tail, &all_breakpoints(instance), &quadrature_tol())
        }
        Method::MonteCarlo { seed, samples } => {
            check_samples(samples)?;
            let sums: Vec<f64> = run_shards(seed, samples, |rng, m| {
                (0..m)
                    .map(|_| {
                        instance
                            .bidders
                            .iter()
                            .map(|d| d.sample(rng).as_f64())
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .sum()
            });
            Ok(S::lit(sums.iter().sum::<f64>() / samples as f64))
        }
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::domain(
            "welfare",
            "Monte Carlo needs at least one sample",
        ));
    }
    Ok(())
}

/// Probability that bidder `i` wins with value `v` under the lowest-index tie rule.
pub fn allocation<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    bidder: usize,
    value: S,
) -> S {
    let bid = strategies[bidder].bid(value);
    instance
        .bidders
        .iter()
        .zip(strategies)
        .enumerate()
        .filter(|&(j, _)| j != bidder)
        .map(|(j, (d, s))| {
            if j < bidder {
                s.bid_cdf_strict(d, bid)
            } else {
                s.bid_cdf(d, bid)
            }
        })
        .fold(S::one(), |acc, p| acc * p)
}

/// Expected welfare of the profile and its ratio to [`optimal_welfare`].
pub fn equilibrium_welfare<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    method: Method,
) -> Result<WelfareEstimate<S>> {
    instance.validate()?;
    instance.validate_profile(strategies)?;
    match method {
        Method::Quadrature => {
            let opt = optimal_welfare(instance, Method::Quadrature)?;
            let mut welf = S::zero();
            for i in 0..instance.n() {
                let d = instance.bidder(i);
                let breaks = quantile_breaks(instance, strategies, i);
                let f = |q: S| {
                    let v = d.quantile(q);
                    v * allocation(instance, strategies, i, v)
                };
                welf = welf + integrate_piecewise(f, &breaks, &quadrature_tol())?;
            }
            Ok(WelfareEstimate {
                welf,
                opt,
                ratio: welf / opt,
                method: MethodKind::Quadrature,
                ci_halfwidth: S::zero(),
                welf_std_err: S::zero(),
                samples: 0,
            })
        }
        Method::MonteCarlo { seed, samples } => {
            check_samples(samples)?;
            let parts = run_shards(seed, samples, |rng, m| {
                let mut acc = Paired::default();
                for _ in 0..m {
                    let o = draw_outcome(instance, strategies, rng);
                    let top = o.values[o.highest_value_bidder()];
                    acc.push(o.winner_value().as_f64(), top.as_f64());
                }
                acc
            });
            let acc = parts.iter().fold(Paired::default(), |a, p| a.merge(p));
            let (welf, opt) = (acc.mean_x(), acc.mean_y());
            Ok(WelfareEstimate {
                welf: S::lit(welf),
                opt: S::lit(opt),
                ratio: S::lit(welf / opt),
                method: MethodKind::MonteCarlo,
                ci_halfwidth: S::lit(1.96 * acc.ratio_std_err()),
                welf_std_err: S::lit((acc.var_x() / acc.n).sqrt()),
                samples,
            })
        }
    }
}

/// Quantiles of bidder `i` at which the welfare integrand may kink: its own
/// strategy knots, distribution breakpoints, and the values at which its bid
/// reaches an opponent's knot bid.
fn quantile_breaks<S: Scalar>(
    instance: &AuctionInstance<S>,
    strategies: &[BidStrategy<S>],
    i: usize,
) -> Vec<S> {
    let d = instance.bidder(i);
    let mut values: Vec<S> = strategies[i].knots().iter().map(|k| k.0).collect();
    values.extend(instance.breakpoints());
    for (j, s) in strategies.iter().enumerate() {
        if j == i {
            continue;
        }
        for &(_, bj) in s.knots() {
            if let Some(v) = strategies[i].value_at_least(bj) {
                values.push(v);
            }
        }
    }
    let mut qs: Vec<S> = values.into_iter().map(|v| d.cdf(v)).collect();
    qs.push(S::zero());
    qs.push(S::one());
    qs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    qs.dedup();
    qs
}

/// `γ_i(q) = v_i(q) ∏_{j≠i} F_j(v_i(q))`.
pub fn gamma<S: Scalar>(instance: &AuctionInstance<S>, bidder: usize, q: S) -> Result<S> {
    if !(q >= S::zero() && q <= S::one()) {
        return Err(Error::domain(
            "gamma",
            format!("q must lie in [0, 1], got {q}"),
        ));
    }
    if bidder >= instance.n() {
        return Err(Error::domain("gamma", format!("no bidder {bidder}")));
    }
    let v = instance.bidder(bidder).quantile(q);
    Ok(v * crate::model::highest_value_probability(instance, bidder, v))
}

/// `Σ_i ∫_0^1 γ_i(q) dq`, which equals the expected highest value.
pub fn gamma_total<S: Scalar>(instance: &AuctionInstance<S>) -> Result<S> {
    instance.validate()?;
    let mut total = S::zero();
    for i in 0..instance.n() {
        let d = instance.bidder(i);
        let mut qs: Vec<S> = instance
            .breakpoints()
            .into_iter()
            .map(|v| d.cdf(v))
            .collect();
        qs.push(S::zero());
        qs.push(S::one());
        qs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        qs.dedup();
        let f = |q: S| {
            let v = d.quantile(q);
            v * crate::model::highest_value_probability(instance, i, v)
        };
        total = total + integrate_piecewise(f, &qs, &quadrature_tol())?;
    }
    Ok(total)
}

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous piecewise-linear value-to-bid map.
///
/// Knots are `(value, bid)` pairs with strictly increasing values. A valid
/// strategy is nondecreasing and never bids above value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidStrategy<S> {
    knots: Vec<(S, S)>,
}

impl<S: Scalar> BidStrategy<S> {
    pub fn new(knots: Vec<(S, S)>) -> Result<Self> {
        let s = Self { knots };
        s.validate()?;
        Ok(s)
    }

    /// Skips the monotonicity and no-overbidding checks. Values must still be
    /// strictly increasing for evaluation to make sense. Intended for probing
    /// the audits with strategies that are known to be wrong.
    pub fn from_knots_unchecked(knots: Vec<(S, S)>) -> Self {
        Self { knots }
    }

    /// Knots at `n` points uniform in quantile space of `dist`, bid `f(v)`.
    pub fn from_fn(dist: &DistributionSpec<S>, n: usize, f: impl Fn(S) -> S) -> Result<Self> {
        let n = n.max(2);
        let last = S::from_usize_lossy(n - 1);
        let mut knots: Vec<(S, S)> = Vec::with_capacity(n);
        for k in 0..n {
            let v = dist.quantile(S::from_usize_lossy(k) / last);
            if let Some(&(prev, _)) = knots.last() {
                if v <= prev {
                    continue;
                }
            }
            knots.push((v, f(v)));
        }
        Self::new(knots)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStrategy(msg));
        if self.knots.len() < 2 {
            return bad("a strategy needs at least two knots".into());
        }
        for &(v, b) in &self.knots {
            if !v.is_finite() || !b.is_finite() {
                return bad(format!("non-finite knot ({v}, {b})"));
            }
            if b > v {
                return bad(format!("overbidding at value {v}: bid {b}"));
            }
        }
        for w in self.knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return bad(format!(
                    "knot values must strictly increase ({} then {})",
                    w[0].0, w[1].0
                ));
            }
            if w[1].1 < w[0].1 {
                return bad(format!(
                    "bids must be nondecreasing ({} then {})",
                    w[0].1, w[1].1
                ));
            }
        }
        Ok(())
    }

    /// Checks that the strategy's domain is the support of `dist`.
    pub fn validate_for(&self, dist: &DistributionSpec<S>) -> Result<()> {
        self.validate()?;
        let (lo, hi) = dist.support();
        let (a, b) = self.domain();
        let slack = S::lit(1e-9) * (S::one() + hi.abs());
        if (a - lo).abs() > slack || (b - hi).abs() > slack {
            return Err(Error::InvalidStrategy(format!(
                "strategy domain [{a}, {b}] does not match support [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn knots(&self) -> &[(S, S)] {
        &self.knots
    }

    pub fn domain(&self) -> (S, S) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn min_bid(&self) -> S {
        self.knots[0].1
    }

    pub fn max_bid(&self) -> S {
        self.knots[self.knots.len() - 1].1
    }

    /// `b(v)`, linear between knots and clamped outside the domain.
    pub fn bid(&self, v: S) -> S {
        let n = self.knots.len();
        if v <= self.knots[0].0 {
            return self.knots[0].1;
        }
        if v >= self.knots[n - 1].0 {
            return self.knots[n - 1].1;
        }
        let k = self.knots.partition_point(|&(x, _)| x <= v) - 1;
        let (v0, b0) = self.knots[k];
        let (v1, b1) = self.knots[k + 1];
        b0 + (b1 - b0) * (v - v0) / (v1 - v0)
    }

    /// `sup{v : b(v) <= bid}` clamped to the domain; `None` when every bid
    /// exceeds `bid`.
    pub fn value_at_most(&self, bid: S) -> Option<S> {
        let n = self.knots.len();
        let k = self.knots.partition_point(|&(_, b)| b <= bid);
        if k == 0 {
            return None;
        }
        if k == n {
            return Some(self.knots[n - 1].0);
        }
        let (v0, b0) = self.knots[k - 1];
        let (v1, b1) = self.knots[k];
        Some(v0 + (v1 - v0) * (bid - b0) / (b1 - b0))
    }

    /// `inf{v : b(v) >= bid}`; `None` when every bid is below `bid`.
    pub fn value_at_least(&self, bid: S) -> Option<S> {
        let n = self.knots.len();
        let k = self.knots.partition_point(|&(_, b)| b < bid);
        if k == n {
            return None;
        }
        if k == 0 {
            return Some(self.knots[0].0);
        }
        let (v0, b0) = self.knots[k - 1];
        let (v1, b1) = self.knots[k];
        Some(v0 + (v1 - v0) * (bid - b0) / (b1 - b0))
    }

    /// Right-continuous bid CDF `B(b) = P[b(V) <= b]` for `V ~ dist`.
    pub fn bid_cdf(&self, dist: &DistributionSpec<S>, bid: S) -> S {
        match self.value_at_most(bid) {
            None => S::zero(),
            Some(v) if v >= self.domain().1 => S::one(),
            Some(v) => dist.cdf(v),
        }
    }

    /// Left limit `P[b(V) < b]`.
    pub fn bid_cdf_strict(&self, dist: &DistributionSpec<S>, bid: S) -> S {
        match self.value_at_least(bid) {
            None => S::one(),
            Some(v) if v <= self.domain().0 => S::zero(),
            Some(v) => dist.cdf(v),
        }
    }

    /// Same map with every bid shifted by `delta`, skipping validation.
    pub fn shifted_unchecked(&self, delta: S) -> Self {
        Self::from_knots_unchecked(self.knots.iter().map(|&(v, b)| (v, b + delta)).collect())
    }

    /// Reads the `value,bid` CSV dump.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "bid" {
            return Err(Error::Parse(format!(
                "strategy CSV header must be `value,bid`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut knots = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<S> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .map(S::lit)
                    .ok_or_else(|| {
                        Error::Parse(format!("bad number in strategy CSV row {}", row + 2))
                    })
            };
            knots.push((parse(0)?, parse(1)?));
        }
        Self::new(knots)
    }

    /// Writes the `value,bid` CSV dump, numbers at 12 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["value", "bid"])?;
        for &(v, b) in &self.knots {
            wtr.write_record([
                crate::report::format_sig(v.as_f64()),
                crate::report::format_sig(b.as_f64()),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

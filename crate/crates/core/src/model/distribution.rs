use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A bounded-support, atomless value distribution.
///
/// JSON form: `{"kind":"uniform","lo":0.0,"hi":1.0}`,
/// `{"kind":"power","a":2.0,"h":1.0}` (CDF `(v/h)^a` on `[0,h]`), or
/// `{"kind":"piecewise","knots":[[v,F],...]}` (piecewise-linear CDF).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec<S> {
    Uniform { lo: S, hi: S },
    Power { a: S, h: S },
    Piecewise { knots: Vec<(S, S)> },
}

impl<S: Scalar> DistributionSpec<S> {
    pub fn uniform(lo: S, hi: S) -> Result<Self> {
        let d = DistributionSpec::Uniform { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn power(a: S, h: S) -> Result<Self> {
        let d = DistributionSpec::Power { a, h };
        d.validate()?;
        Ok(d)
    }

    pub fn piecewise(knots: Vec<(S, S)>) -> Result<Self> {
        let d = DistributionSpec::Piecewise { knots };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= S::zero() && lo < hi) {
                    return bad(format!(
                        "uniform needs 0 <= lo < hi < inf, got [{lo}, {hi}]"
                    ));
                }
            }
            DistributionSpec::Power { a, h } => {
                if !(a.is_finite() && *a > S::zero()) {
                    return bad(format!("power exponent must be positive, got {a}"));
                }
                if !(h.is_finite() && *h > S::zero()) {
                    return bad(format!("power upper bound must be positive, got {h}"));
                }
            }
            DistributionSpec::Piecewise { knots } => {
                if knots.len() < 2 {
                    return bad("piecewise CDF needs at least two knots".into());
                }
                let (v0, f0) = knots[0];
                let (vn, fn_) = knots[knots.len() - 1];
                if f0 != S::zero() || fn_ != S::one() {
                    return bad(format!(
                        "piecewise CDF must run from 0 to 1, got {f0}..{fn_}"
                    ));
                }
                if !(v0 >= S::zero()) || !vn.is_finite() {
                    return bad("piecewise support must lie in [0, inf)".into());
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1) {
                        return bad(format!(
                            "piecewise knots must be strictly increasing, got ({}, {}) then ({}, {})",
                            w[0].0, w[0].1, w[1].0, w[1].1
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `[lo, hi]`.
    pub fn support(&self) -> (S, S) {
        match self {
            DistributionSpec::Uniform { lo, hi } => (*lo, *hi),
            DistributionSpec::Power { h, .. } => (S::zero(), *h),
            DistributionSpec::Piecewise { knots } => (knots[0].0, knots[knots.len() - 1].0),
        }
    }

    pub fn cdf(&self, v: S) -> S {
        let (lo, hi) = self.support();
        if v <= lo {
            return S::zero();
        }
        if v >= hi {
            return S::one();
        }
        match self {
            DistributionSpec::Uniform { lo, hi } => (v - *lo) / (*hi - *lo),
            DistributionSpec::Power { a, h } => (v / *h).powf(*a),
            DistributionSpec::Piecewise { knots } => {
                let k = segment(knots, v);
                let (v0, f0) = knots[k];
                let (v1, f1) = knots[k + 1];
                f0 + (f1 - f0) * (v - v0) / (v1 - v0)
            }
        }
    }

    /// Density; right-continuous at piecewise knots, zero outside the support.
    pub fn pdf(&self, v: S) -> S {
        let (lo, hi) = self.support();
        if v < lo || v > hi {
            return S::zero();
        }
        match self {
            DistributionSpec::Uniform { lo, hi } => S::one() / (*hi - *lo),
            DistributionSpec::Power { a, h } => *a / *h * (v / *h).powf(*a - S::one()),
            DistributionSpec::Piecewise { knots } => {
                let k = segment(knots, v);
                let (v0, f0) = knots[k];
                let (v1, f1) = knots[k + 1];
                (f1 - f0) / (v1 - v0)
            }
        }
    }

    /// `F(v)/f(v)`, with the closed form where one exists so the ratio stays
    /// finite at the bottom of the support.
    pub fn cdf_over_pdf(&self, v: S) -> S {
        match self {
            DistributionSpec::Uniform { lo, .. } => (v - *lo).max(S::zero()),
            DistributionSpec::Power { a, h } => v.max(S::zero()).min(*h) / *a,
            DistributionSpec::Piecewise { .. } => {
                let f = self.pdf(v);
                if f > S::zero() {
                    self.cdf(v) / f
                } else {
                    S::zero()
                }
            }
        }
    }

    /// Inverse CDF; `q` is clamped to `[0, 1]`.
    pub fn quantile(&self, q: S) -> S {
        let q = q.max(S::zero()).min(S::one());
        match self {
            DistributionSpec::Uniform { lo, hi } => *lo + q * (*hi - *lo),
            DistributionSpec::Power { a, h } => *h * q.powf(S::one() / *a),
            DistributionSpec::Piecewise { knots } => {
                let n = knots.len();
                let k = knots.partition_point(|&(_, f)| f <= q).clamp(1, n - 1) - 1;
                let (v0, f0) = knots[k];
                let (v1, f1) = knots[k + 1];
                v0 + (v1 - v0) * (q - f0) / (f1 - f0)
            }
        }
    }

    /// Inverse-CDF draw from the distribution truncated to `[lo, upper]`.
    pub fn quantile_truncated(&self, u: S, upper: S) -> S {
        self.quantile(u * self.cdf(upper)).min(upper)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> S {
        self.quantile(S::lit(rng.gen::<f64>()))
    }

    /// Points where the CDF may have a kink, including both support endpoints.
    pub fn breakpoints(&self) -> Vec<S> {
        match self {
            DistributionSpec::Piecewise { knots } => knots.iter().map(|k| k.0).collect(),
            _ => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
        }
    }

    /// True when the density is strictly positive on the open support.
    pub fn has_positive_density(&self) -> bool {
        match self {
            DistributionSpec::Uniform { .. } => true,
            DistributionSpec::Power { a, .. } => a.is_finite() && *a > S::zero(),
            DistributionSpec::Piecewise { knots } => knots.windows(2).all(|w| w[1].1 > w[0].1),
        }
    }

    /// Convert to another scalar type.
    pub fn cast<T: Scalar>(&self) -> DistributionSpec<T> {
        let c = |x: S| T::lit(x.as_f64());
        match self {
            DistributionSpec::Uniform { lo, hi } => DistributionSpec::Uniform {
                lo: c(*lo),
                hi: c(*hi),
            },
            DistributionSpec::Power { a, h } => DistributionSpec::Power { a: c(*a), h: c(*h) },
            DistributionSpec::Piecewise { knots } => DistributionSpec::Piecewise {
                knots: knots.iter().map(|&(v, f)| (c(v), c(f))).collect(),
            },
        }
    }
}

/// Index `k` of the segment `[v_k, v_{k+1})` containing `v` (last segment at the top).
fn segment<S: Scalar>(knots: &[(S, S)], v: S) -> usize {
    let n = knots.len();
    knots.partition_point(|&(x, _)| x <= v).clamp(1, n - 1) - 1
}

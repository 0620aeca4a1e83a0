//! Closed-form welfare bounds and the nested pipeline that certifies the
//! welfare constant.
//!
//! The pipeline has three levels:
//!
//! 1. `inner_objective(r, q)` is the per-type welfare fraction when a bidder
//!    at quantile `q` earns conditional utility `r·v` and bids zero;
//! 2. `ell(q)` minimizes it over `r ∈ [0, 1]`;
//! 3. `phi = min_x (1/(1-x)) ∫ₓ¹ ell(t) dt` over `x ∈ [0, 1)`.
//!
//! At `q = 0` the inner objective collapses to `1 + r ln r`, whose minimum
//! `1 - 1/e` is the classical guarantee returned by [`old_constant`].

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_open, minimize_scalar, Minimum, ToleranceConfig};
use crate::scalar::Scalar;

/// Points in the coarse grid `ell` uses to guard against a second local minimum.
const ELL_GUARD_GRID: usize = 1000;

/// Outer minimization stops short of `x = 1`, where the ratio is `0/0`.
pub const OUTER_X_MARGIN: f64 = 1e-6;

fn unit_interval<S: Scalar>(x: S) -> bool {
    x >= S::zero() && x <= S::one()
}

/// `1 - r(1-q) ln(1 + (1-r)/((1-q) r))`.
///
/// Extended by continuity to `r = 0` and `q = 1`, where it equals 1.
pub fn inner_objective<S: Scalar>(r: S, q: S) -> Result<S> {
    if !unit_interval(r) || !unit_interval(q) {
        return Err(Error::domain(
            "inner_objective",
            format!("need r, q in [0, 1], got r = {r}, q = {q}"),
        ));
    }
    let weight = (S::one() - q) * r;
    if weight == S::zero() {
        return Ok(S::one());
    }
    Ok(S::one() - weight * ((S::one() - r) / weight).ln_1p())
}

/// Minimum of [`inner_objective`] over `r` at one quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllPoint<S> {
    pub value: S,
    pub argmin_r: S,
}

/// `ell(q) = min_{r ∈ [0,1]} inner_objective(r, q)` with default tolerances.
pub fn ell<S: Scalar>(q: S) -> Result<EllPoint<S>> {
    ell_with(q, &ToleranceConfig::minimization())
}

/// [`ell`] with explicit minimization tolerances.
///
/// Golden-section output is cross-checked against a 1000-point grid; if the
/// grid finds a lower value the search is repeated around that grid point.
pub fn ell_with<S: Scalar>(q: S, tol: &ToleranceConfig<S>) -> Result<EllPoint<S>> {
    if !unit_interval(q) {
        return Err(Error::domain(
            "ell",
            format!("q must lie in [0, 1], got {q}"),
        ));
    }
    if q == S::one() {
        return Ok(EllPoint {
            value: S::one(),
            argmin_r: S::one(),
        });
    }
    let objective = |r: S| inner_objective(r, q).unwrap_or(S::infinity());
    let golden = minimize_scalar(objective, S::zero(), S::one(), tol)?;
    let mut best = (golden.argmin, golden.min);

    let step = S::one() / S::from_usize_lossy(ELL_GUARD_GRID);
    let mut grid_best = (S::one(), S::one());
    let mut grid_idx = ELL_GUARD_GRID;
    for k in 1..=ELL_GUARD_GRID {
        let r = S::from_usize_lossy(k) * step;
        let val = objective(r);
        if val < grid_best.1 {
            grid_best = (r, val);
            grid_idx = k;
        }
    }
    if grid_best.1 < best.1 {
        let lo = S::from_usize_lossy(grid_idx - 1) * step;
        let hi = (S::from_usize_lossy(grid_idx + 1) * step).min(S::one());
        let local = minimize_scalar(objective, lo, hi, tol)?;
        best = if local.min < grid_best.1 {
            (local.argmin, local.min)
        } else {
            grid_best
        };
    }
    Ok(EllPoint {
        value: best.1,
        argmin_r: best.0,
    })
}

/// Thread-safe memo of `ell` keyed by the bit pattern of `q`.
pub struct EllCache<S> {
    tol: ToleranceConfig<S>,
    memo: Mutex<HashMap<u64, EllPoint<S>>>,
}

impl<S: Scalar> EllCache<S> {
    pub fn new(tol: ToleranceConfig<S>) -> Self {
        Self {
            tol,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, q: S) -> Result<EllPoint<S>> {
        let key = q.as_f64().to_bits();
        if let Some(p) = self.memo.lock().expect("ell memo poisoned").get(&key) {
            return Ok(*p);
        }
        let p = ell_with(q, &self.tol)?;
        self.memo.lock().expect("ell memo poisoned").insert(key, p);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.memo.lock().expect("ell memo poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Settings for [`phi_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig<S> {
    /// Quadrature of `ell` over `[x, 1]`.
    pub quadrature: ToleranceConfig<S>,
    /// Both the inner (`r`) and the outer (`x`) minimization.
    pub minimization: ToleranceConfig<S>,
    /// Uniform `q` points in the reported ell table.
    pub grid_points: usize,
}

impl<S: Scalar> Default for PhiConfig<S> {
    fn default() -> Self {
        Self {
            quadrature: ToleranceConfig::quadrature(),
            minimization: ToleranceConfig::minimization(),
            grid_points: 1001,
        }
    }
}

/// One row of the ell table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllRow<S> {
    pub q: S,
    pub ell: S,
    pub argmin_r: S,
}

/// Output of [`phi_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<S> {
    pub ell_table: Vec<EllRow<S>>,
    /// Certified welfare fraction.
    pub phi: S,
    pub outer_argmin_x: S,
    pub tolerances: PhiConfig<S>,
}

impl<S: Scalar> BoundReport<S> {
    /// CSV with header `q,ell,argmin_r`.
    pub fn ell_csv(&self) -> String {
        use crate::report::format_sig;
        let mut out = String::from("q,ell,argmin_r\n");
        for row in &self.ell_table {
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig(row.q.as_f64()),
                format_sig(row.ell.as_f64()),
                format_sig(row.argmin_r.as_f64())
            ));
        }
        out
    }
}

/// Uniform ell table on `points` q-values covering `[0, 1]`.
pub fn ell_table<S: Scalar>(points: usize, tol: &ToleranceConfig<S>) -> Result<Vec<EllRow<S>>> {
    let points = points.max(2);
    let last = S::from_usize_lossy(points - 1);
    (0..points)
        .map(|k| {
            let q = S::from_usize_lossy(k) / last;
            let p = ell_with(q, tol)?;
            Ok(EllRow {
                q,
                ell: p.value,
                argmin_r: p.argmin_r,
            })
        })
        .collect()
}

/// `(1/(1-x)) ∫ₓ¹ ell(t) dt` using a shared memo.
pub fn tail_average<S: Scalar>(cache: &EllCache<S>, x: S, tol: &ToleranceConfig<S>) -> Result<S> {
    if !(x >= S::zero() && x < S::one()) {
        return Err(Error::domain(
            "tail_average",
            format!("x must lie in [0, 1), got {x}"),
        ));
    }
    // integrand failures surface through the error slot below
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let integral = integrate_open(
        |t| match cache.get(t) {
            Ok(p) => p.value,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                S::nan()
            }
        },
        x,
        S::one(),
        tol,
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(integral? / (S::one() - x))
}

/// Computes the certified constant `phi` together with the ell table.
pub fn phi_constant<S: Scalar>(cfg: &PhiConfig<S>) -> Result<BoundReport<S>> {
    cfg.quadrature.validate()?;
    cfg.minimization.validate()?;
    let cache = EllCache::new(cfg.minimization);
    let upper = S::one() - S::lit(OUTER_X_MARGIN);

    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let outer = minimize_scalar(
        |x| match tail_average(&cache, x, &cfg.quadrature) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                S::infinity()
            }
        },
        S::zero(),
        upper,
        &cfg.minimization,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    let ell_table = ell_table(cfg.grid_points, &cfg.minimization)?;
    Ok(BoundReport {
        ell_table,
        phi: outer.min,
        outer_argmin_x: outer.argmin,
        tolerances: *cfg,
    })
}

/// `v̲(v_i, q_i, b_i, b_j)`: lower bound on the value of a bidder `j` that
/// outbids bidder `i` (value `v_i`, quantile `q_i`) in equilibrium.
///
/// Fails with a domain error when the denominator
/// `1 - q_i - b_i/v_i + q_i b_j/v_i` is not positive; callers then fall back
/// to the payment bound `b_j` (see [`vbar_or_payment`]).
pub fn vbar<S: Scalar>(v_i: S, q_i: S, b_i: S, b_j: S) -> Result<S> {
    if !(v_i > S::zero()) || !unit_interval(q_i) {
        return Err(Error::domain(
            "vbar",
            format!("need v_i > 0 and q_i in [0, 1], got {v_i}, {q_i}"),
        ));
    }
    if !(b_i >= S::zero() && b_i < v_i && b_j >= b_i) {
        return Err(Error::domain(
            "vbar",
            format!(
                "need 0 <= b_i < v_i and b_j >= b_i, got b_i = {b_i}, b_j = {b_j}, v_i = {v_i}"
            ),
        ));
    }
    let alpha = b_i / v_i;
    let beta = b_j / v_i;
    let one = S::one();
    let denom = one - q_i - alpha + beta * q_i;
    if !(denom > S::zero()) {
        return Err(Error::domain(
            "vbar",
            format!("nonpositive denominator {denom}"),
        ));
    }
    let numer = beta - (one - q_i) * beta * alpha - q_i * alpha;
    Ok(v_i * numer / denom)
}

/// [`vbar`], or `b_j` wherever `vbar` is undefined.
pub fn vbar_or_payment<S: Scalar>(v_i: S, q_i: S, b_i: S, b_j: S) -> S {
    vbar(v_i, q_i, b_i, b_j).unwrap_or(b_j)
}

/// `∂v̲/∂b_j = (1-q)(1-b_i/v)² / denominator²`.
pub fn vbar_slope<S: Scalar>(v_i: S, q_i: S, b_i: S, b_j: S) -> S {
    let one = S::one();
    let alpha = b_i / v_i;
    let denom = one - q_i - alpha + b_j / v_i * q_i;
    (one - q_i) * (one - alpha).powi(2) / denom.powi(2)
}

/// `v_i - u/z`: lower bound on the threshold bid at conditional quantile `z`
/// for a bidder with conditional utility `u`. May be negative.
pub fn tau_lower_bound<S: Scalar>(v_i: S, u_cond: S, z: S) -> Result<S> {
    if !(z > S::zero() && z <= S::one()) {
        return Err(Error::domain(
            "tau_lower_bound",
            format!("z must lie in (0, 1], got {z}"),
        ));
    }
    if !(u_cond >= S::zero()) {
        return Err(Error::domain(
            "tau_lower_bound",
            format!("u_cond must be nonnegative, got {u_cond}"),
        ));
    }
    Ok(v_i - u_cond / z)
}

fn feasibility_slack<S: Scalar>(scale: S) -> S {
    S::lit(1e-12) * (S::one() + scale.abs())
}

/// Payment-based lower bound on the misallocated winner's contribution:
/// `v(1-x) + u ln(u/v)`, equal to `v(1-x)` at `u = 0`.
pub fn misalloc_lb_old<S: Scalar>(v_i: S, x_cond: S, u_cond: S) -> Result<S> {
    if !(v_i > S::zero()) || !unit_interval(x_cond) || !(u_cond >= S::zero()) {
        return Err(Error::domain(
            "misalloc_lb_old",
            format!("need v > 0, x in [0, 1], u >= 0; got v = {v_i}, x = {x_cond}, u = {u_cond}"),
        ));
    }
    if u_cond > v_i * x_cond + feasibility_slack(v_i) {
        return Err(Error::domain(
            "misalloc_lb_old",
            format!("infeasible: u = {u_cond} exceeds v·x = {}", v_i * x_cond),
        ));
    }
    let log_term = if u_cond > S::zero() {
        u_cond * (u_cond / v_i).ln()
    } else {
        S::zero()
    };
    Ok(v_i * (S::one() - x_cond) + log_term)
}

/// Sharper lower bound on the misallocated winner's contribution:
/// `v(1 - u/(v-b)) - (1-q) u ln(1 + (v-b-u)/((1-q) u))`.
///
/// At `u = 0` this is `v`; at `q = 1` the log term vanishes.
pub fn misalloc_lb_new<S: Scalar>(v_i: S, q_i: S, b_i: S, u_cond: S) -> Result<S> {
    if !(v_i > S::zero()) || !unit_interval(q_i) {
        return Err(Error::domain(
            "misalloc_lb_new",
            format!("need v > 0 and q in [0, 1]; got v = {v_i}, q = {q_i}"),
        ));
    }
    if !(b_i >= S::zero() && b_i < v_i) {
        return Err(Error::domain(
            "misalloc_lb_new",
            format!("need 0 <= b < v, got b = {b_i}, v = {v_i}"),
        ));
    }
    let margin = v_i - b_i;
    if !(u_cond >= S::zero()) || u_cond > margin + feasibility_slack(v_i) {
        return Err(Error::domain(
            "misalloc_lb_new",
            format!("need 0 <= u <= v - b, got u = {u_cond}, v - b = {margin}"),
        ));
    }
    let u = u_cond.min(margin);
    if u == S::zero() {
        return Ok(v_i);
    }
    let weight = (S::one() - q_i) * u;
    let log_term = if weight > S::zero() {
        weight * ((margin - u) / weight).ln_1p()
    } else {
        S::zero()
    };
    Ok(v_i * (S::one() - u / margin) - log_term)
}

/// `min_{r ∈ [0,1]} (1 + r ln r)`, located numerically.
pub fn old_constant_minimum<S: Scalar>() -> Result<Minimum<S>> {
    let f = |r: S| {
        if r > S::zero() {
            S::one() + r * r.ln()
        } else {
            S::one()
        }
    };
    minimize_scalar(f, S::zero(), S::one(), &ToleranceConfig::minimization())
}

/// The classical guarantee `1 - 1/e`, computed by minimization.
pub fn old_constant<S: Scalar>() -> S {
    old_constant_minimum::<S>()
        .expect("[0, 1] is a valid interval")
        .min
}

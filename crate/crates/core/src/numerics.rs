//! Scalar numerical kernels: adaptive quadrature, bounded minimization and
//! bracketed root finding.
//!
//! Everything here is pure. Repeated calls with the same inputs return
//! bit-identical results, and all functions are safe to call from any thread.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hard cap on bisection depth inside the adaptive quadrature.
const MAX_DEPTH: usize = 60;

/// Initial panels the adaptive quadrature starts from.
const INITIAL_PANELS: usize = 4;

/// Error targets and iteration budget shared by the kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig<S> {
    pub abs_tol: S,
    pub rel_tol: S,
    /// Quadrature: total panel refinements. Minimization and root finding:
    /// iterations.
    pub max_iter: usize,
}

impl<S: Scalar> ToleranceConfig<S> {
    pub fn new(abs_tol: S, rel_tol: S, max_iter: usize) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > S::zero()) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidTolerance(format!(
                "abs_tol must be positive and finite, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol >= S::zero()) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidTolerance(format!(
                "rel_tol must be nonnegative and finite, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidTolerance(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Default for [`integrate`]: `abs_tol = 1e-8`.
    pub fn quadrature() -> Self {
        Self {
            abs_tol: S::lit(1e-8),
            rel_tol: S::lit(1e-9),
            max_iter: 200_000,
        }
    }

    /// Default for [`minimize_scalar`].
    pub fn minimization() -> Self {
        Self {
            abs_tol: S::lit(1e-9),
            rel_tol: S::lit(1e-9),
            max_iter: 200,
        }
    }

    /// Default for [`find_root`].
    pub fn root() -> Self {
        Self {
            abs_tol: S::lit(1e-12),
            rel_tol: S::zero(),
            max_iter: 200,
        }
    }

    /// Same tolerances with the absolute target replaced.
    pub fn with_abs_tol(mut self, abs_tol: S) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Value and error estimate returned by the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<S> {
    pub value: S,
    pub error_estimate: S,
    pub refinements: usize,
}

struct QuadState<S> {
    refinements: usize,
    budget: usize,
    error: S,
    exhausted: bool,
    /// Differences below this are rounding noise relative to the whole integral.
    noise_floor: S,
}

impl<S: Scalar> QuadState<S> {
    fn new(budget: usize, magnitude: S) -> Self {
        Self {
            refinements: 0,
            budget,
            error: S::zero(),
            exhausted: false,
            noise_floor: S::lit(64.0) * S::epsilon() * magnitude.abs(),
        }
    }

    fn finish(self, value: S) -> Result<Quadrature<S>> {
        if self.exhausted || !value.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                estimate: value.as_f64(),
                error_bound: self.error.as_f64(),
                refinements: self.refinements,
            });
        }
        Ok(Quadrature {
            value,
            error_estimate: self.error,
            refinements: self.refinements,
        })
    }
}

fn check_interval<S: Scalar>(lo: S, hi: S) -> Result<()> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    Ok(())
}

/// Accept a panel when the Richardson difference is at the target or at the
/// level of rounding noise, locally or relative to the whole integral.
fn panel_accepted<S: Scalar>(delta: S, left: S, right: S, eps: S, floor: S) -> bool {
    let noise = S::lit(64.0) * S::epsilon() * (left.abs() + right.abs());
    let d = delta.abs();
    d <= S::lit(15.0) * eps || d <= noise || d <= floor
}

/// Adaptive Simpson quadrature with Richardson extrapolation.
///
/// Returns `I` with `|I - ∫f| <= abs_tol + rel_tol·|I|` for smooth `f`.
/// The integrand is evaluated at both endpoints; see [`integrate_open`] for
/// integrands that degenerate there.
pub fn integrate<S, F>(f: F, lo: S, hi: S, tol: &ToleranceConfig<S>) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    integrate_with_estimate(f, lo, hi, tol).map(|q| q.value)
}

/// [`integrate`], also reporting the accumulated error estimate.
pub fn integrate_with_estimate<S, F>(
    f: F,
    lo: S,
    hi: S,
    tol: &ToleranceConfig<S>,
) -> Result<Quadrature<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    tol.validate()?;
    check_interval(lo, hi)?;
    if lo == hi {
        return Ok(Quadrature {
            value: S::zero(),
            error_estimate: S::zero(),
            refinements: 0,
        });
    }
    let two = S::lit(2.0);
    let width = (hi - lo) / S::from_usize_lossy(INITIAL_PANELS);
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut f_left = f(lo);
    let mut coarse = S::zero();
    for k in 0..INITIAL_PANELS {
        let a = lo + width * S::from_usize_lossy(k);
        let b = if k + 1 == INITIAL_PANELS {
            hi
        } else {
            a + width
        };
        let m = (a + b) / two;
        let (fm, fb) = (f(m), f(b));
        let whole = simpson(a, b, f_left, fm, fb);
        coarse = coarse + whole;
        panels.push((a, b, f_left, fm, fb, whole));
        f_left = fb;
    }
    let target = tol.abs_tol.max(tol.rel_tol * coarse.abs());
    let eps = target / S::from_usize_lossy(INITIAL_PANELS);
    let mut state = QuadState::new(tol.max_iter, coarse);
    let mut total = S::zero();
    for (a, b, fa, fm, fb, whole) in panels {
        total = total + simpson_step(&f, a, b, fa, fm, fb, whole, eps, 0, &mut state);
    }
    state.finish(total)
}

#[inline]
fn simpson<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::lit(6.0) * (fa + S::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<S, F>(
    f: &F,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    eps: S,
    depth: usize,
    state: &mut QuadState<S>,
) -> S
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if state.refinements >= state.budget {
        state.exhausted = true;
        return whole;
    }
    let two = S::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    state.refinements += 1;
    let extrapolated = left + right + delta / S::lit(15.0);
    if panel_accepted(delta, left, right, eps, state.noise_floor) {
        state.error = state.error + delta.abs() / S::lit(15.0);
        return extrapolated;
    }
    if depth >= MAX_DEPTH || state.refinements >= state.budget || !(lm > a && rm < b) {
        state.exhausted = true;
        state.error = state.error + delta.abs() / S::lit(15.0);
        return extrapolated;
    }
    let half = eps / two;
    simpson_step(f, a, m, fa, flm, fm, left, half, depth + 1, state)
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth + 1, state)
}

/// Adaptive open quadrature: never evaluates `f` at `lo` or `hi`.
///
/// Each panel uses Milne's three-point open rule; children reuse two of the
/// parent's nodes. Used for integrands containing logarithms whose argument
/// reaches zero at an endpoint.
pub fn integrate_open<S, F>(f: F, lo: S, hi: S, tol: &ToleranceConfig<S>) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    integrate_open_with_estimate(f, lo, hi, tol).map(|q| q.value)
}

pub fn integrate_open_with_estimate<S, F>(
    f: F,
    lo: S,
    hi: S,
    tol: &ToleranceConfig<S>,
) -> Result<Quadrature<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    tol.validate()?;
    check_interval(lo, hi)?;
    if lo == hi {
        return Ok(Quadrature {
            value: S::zero(),
            error_estimate: S::zero(),
            refinements: 0,
        });
    }
    let width = (hi - lo) / S::from_usize_lossy(INITIAL_PANELS);
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = S::zero();
    for k in 0..INITIAL_PANELS {
        let a = lo + width * S::from_usize_lossy(k);
        let b = if k + 1 == INITIAL_PANELS {
            hi
        } else {
            a + width
        };
        let h = (b - a) / S::lit(4.0);
        let (f1, f2, f3) = (f(a + h), f(a + h + h), f(b - h));
        let whole = milne(a, b, f1, f2, f3);
        coarse = coarse + whole;
        panels.push((a, b, f1, f3, whole));
    }
    let target = tol.abs_tol.max(tol.rel_tol * coarse.abs());
    let eps = target / S::from_usize_lossy(INITIAL_PANELS);
    let mut state = QuadState::new(tol.max_iter, coarse);
    let mut total = S::zero();
    for (a, b, f1, f3, whole) in panels {
        total = total + milne_step(&f, a, b, f1, f3, whole, eps, 0, &mut state);
    }
    state.finish(total)
}

#[inline]
fn milne<S: Scalar>(a: S, b: S, f1: S, f2: S, f3: S) -> S {
    let two = S::lit(2.0);
    (b - a) / S::lit(3.0) * (two * f1 - f2 + two * f3)
}

#[allow(clippy::too_many_arguments)]
fn milne_step<S, F>(
    f: &F,
    a: S,
    b: S,
    f1: S,
    f3: S,
    whole: S,
    eps: S,
    depth: usize,
    state: &mut QuadState<S>,
) -> S
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if state.refinements >= state.budget {
        state.exhausted = true;
        return whole;
    }
    let two = S::lit(2.0);
    let m = (a + b) / two;
    let h = (b - a) / S::lit(8.0);
    // left child nodes: a+h, a+2h (= old f1), a+3h; right: m+h, m+2h (= old f3), m+3h
    let (fl1, fl3) = (f(a + h), f(m - h));
    let (fr1, fr3) = (f(m + h), f(b - h));
    let left = milne(a, m, fl1, f1, fl3);
    let right = milne(m, b, fr1, f3, fr3);
    let delta = left + right - whole;
    state.refinements += 1;
    let extrapolated = left + right + delta / S::lit(15.0);
    if panel_accepted(delta, left, right, eps, state.noise_floor) {
        state.error = state.error + delta.abs() / S::lit(15.0);
        return extrapolated;
    }
    if depth >= MAX_DEPTH || state.refinements >= state.budget || !(a + h > a && b - h < b) {
        state.exhausted = true;
        state.error = state.error + delta.abs() / S::lit(15.0);
        return extrapolated;
    }
    let half = eps / two;
    milne_step(f, a, m, fl1, fl3, left, half, depth + 1, state)
        + milne_step(f, m, b, fr1, fr3, right, half, depth + 1, state)
}

/// Integrates across consecutive breakpoints, splitting the absolute target
/// in proportion to panel width. Use when the integrand has known kinks.
pub fn integrate_piecewise<S, F>(f: F, breaks: &[S], tol: &ToleranceConfig<S>) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    tol.validate()?;
    if breaks.len() < 2 {
        return Ok(S::zero());
    }
    let span = *breaks.last().unwrap() - breaks[0];
    if !(span >= S::zero()) {
        return Err(Error::InvalidInterval {
            lo: breaks[0].as_f64(),
            hi: breaks.last().unwrap().as_f64(),
        });
    }
    let mut total = S::zero();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        check_interval(a, b)?;
        if a == b {
            continue;
        }
        let share = if span > S::zero() {
            (b - a) / span
        } else {
            S::one()
        };
        let panel_tol = ToleranceConfig {
            abs_tol: (tol.abs_tol * share).max(S::min_positive_value()),
            ..*tol
        };
        total = total + integrate(&f, a, b, &panel_tol)?;
    }
    Ok(total)
}

/// Result of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum<S> {
    pub argmin: S,
    pub min: S,
    /// False when the iteration budget ran out before the bracket closed.
    pub converged: bool,
    pub iterations: usize,
}

/// Golden-section search with a parabolic polish, compared against both
/// endpoint values.
///
/// For unimodal `f` the result is the global minimizer on `[lo, hi]`;
/// otherwise it is a local minimizer or an endpoint.
pub fn minimize_scalar<S, F>(f: F, lo: S, hi: S, tol: &ToleranceConfig<S>) -> Result<Minimum<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    tol.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    // 2 - golden ratio
    let resp = S::lit(0.381_966_011_250_105_1);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = a + resp * (b - a);
    let mut x2 = b - resp * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    let width_ok = |a: S, b: S, x: S| b - a <= tol.abs_tol + tol.rel_tol * x.abs();
    while iterations < tol.max_iter && !width_ok(a, b, (a + b) / S::lit(2.0)) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + resp * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - resp * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let converged = width_ok(a, b, (a + b) / S::lit(2.0));
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };

    // parabolic polish through the best point and its neighbours
    let h = (b - a).max(tol.abs_tol);
    let xl = (best_x - h).max(lo);
    let xr = (best_x + h).min(hi);
    if xl < best_x && best_x < xr {
        let (fl, fr) = (f(xl), f(xr));
        let num = (best_x - xl).powi(2) * (best_f - fr) - (best_x - xr).powi(2) * (best_f - fl);
        let den = (best_x - xl) * (best_f - fr) - (best_x - xr) * (best_f - fl);
        if den != S::zero() {
            let vertex = best_x - num / (S::lit(2.0) * den);
            if vertex > xl && vertex < xr && vertex.is_finite() {
                let fv = f(vertex);
                if fv < best_f {
                    best_x = vertex;
                    best_f = fv;
                }
            }
        }
        for (x, fx) in [(xl, fl), (xr, fr)] {
            if fx < best_f {
                best_x = x;
                best_f = fx;
            }
        }
    }

    for x in [lo, hi] {
        let fx = f(x);
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    Ok(Minimum {
        argmin: best_x,
        min: best_f,
        converged,
        iterations,
    })
}

/// Brent's bracketed root finder.
///
/// Requires `f(lo)·f(hi) <= 0`. Returns once the bracket is narrower than
/// `abs_tol` (or an exact zero is hit).
pub fn find_root<S, F>(f: F, lo: S, hi: S, tol: &ToleranceConfig<S>) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    tol.validate()?;
    if !(lo <= hi) {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let two = S::lit(2.0);
    let half = S::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == S::zero() {
        return Ok(a);
    }
    if fb == S::zero() {
        return Ok(b);
    }
    if (fa > S::zero()) == (fb > S::zero()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::BracketSign {
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if (fb > S::zero()) == (fc > S::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * S::epsilon() * b.abs() + half * tol.abs_tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == S::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = S::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - S::one()));
                q = (qa - S::one()) * (r - S::one()) * (s - S::one());
            }
            if p > S::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = S::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > S::zero() { tol1 } else { -tol1 };
        }
        fb = f(b);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn quad() -> ToleranceConfig<f64> {
        ToleranceConfig::quadrature()
    }

    #[test]
    fn integrates_polynomial_and_sine() {
        let i = integrate(|t| t, 0.0, 1.0, &quad()).unwrap();
        assert!((i - 0.5).abs() < 1e-12);
        let s = integrate(f64::sin, 0.0, PI, &quad()).unwrap();
        assert!((s - 2.0).abs() < 1e-8);
        let so = integrate_open(f64::sin, 0.0, PI, &quad()).unwrap();
        assert!((so - 2.0).abs() < 1e-8);
    }

    #[test]
    fn open_rule_handles_log_singularity() {
        // ∫₀¹ ln t dt = -1, integrand is -inf at 0
        let tol = ToleranceConfig::quadrature().with_abs_tol(1e-7);
        let v = integrate_open(f64::ln, 0.0, 1.0, &tol).unwrap();
        assert!((v + 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn empty_interval_and_bad_interval() {
        assert_eq!(integrate(|t| t, 1.0, 1.0, &quad()).unwrap(), 0.0);
        assert!(matches!(
            integrate(|t| t, 1.0, 0.0, &quad()),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let tol = ToleranceConfig::new(1e-14, 0.0, 3).unwrap();
        let err = integrate(|t: f64| (50.0 * t).sin(), 0.0, 3.0, &tol).unwrap_err();
        match err {
            Error::QuadratureNonConvergence { refinements, .. } => {
                assert_eq!(refinements, 3)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(ToleranceConfig::new(0.0, 0.0, 1).is_err());
        assert!(ToleranceConfig::new(1e-3, -1.0, 1).is_err());
        assert!(ToleranceConfig::new(1e-3, 0.0, 0).is_err());
    }

    #[test]
    fn minimizes_known_functions() {
        let tol = ToleranceConfig::minimization();
        let m = minimize_scalar(|x: f64| (x - 0.3).powi(2), 0.0, 1.0, &tol).unwrap();
        assert!((m.argmin - 0.3).abs() < 1e-9);
        assert!(m.min.abs() < 1e-18);
        let m = minimize_scalar(|r: f64| 1.0 + r * r.ln(), 1e-12, 1.0, &tol).unwrap();
        assert!((m.argmin - 1.0 / E).abs() < 1e-6);
        assert!((m.min - (1.0 - 1.0 / E)).abs() < 1e-12);
        let m = minimize_scalar(f64::cos, 0.0, 2.0 * PI, &tol).unwrap();
        assert!((m.argmin - PI).abs() < 1e-7);
        assert!((m.min + 1.0).abs() < 1e-14);
        assert!(m.converged);
    }

    #[test]
    fn minimizer_returns_endpoint_minimum() {
        let tol = ToleranceConfig::minimization();
        let m = minimize_scalar(|x: f64| x, 0.0, 1.0, &tol).unwrap();
        assert_eq!(m.argmin, 0.0);
        assert_eq!(m.min, 0.0);
        assert!(minimize_scalar(|x: f64| x, 1.0, 1.0, &tol).is_err());
    }

    #[test]
    fn minimizer_flags_exhaustion() {
        let tol = ToleranceConfig::new(1e-12, 0.0, 3).unwrap();
        let m = minimize_scalar(|x: f64| (x - 0.3).powi(2), 0.0, 1.0, &tol).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }

    #[test]
    fn finds_roots() {
        let tol = ToleranceConfig::<f64>::root();
        assert!((find_root(|x| x - 0.25, 0.0, 1.0, &tol).unwrap() - 0.25).abs() < 1e-12);
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, &tol).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let z = find_root(|z| z * 0.8 - 0.4, 0.0, 1.0, &tol).unwrap();
        assert!((z - 0.5).abs() < 1e-12);
    }

    #[test]
    fn root_bracket_violation() {
        let tol = ToleranceConfig::root();
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, &tol),
            Err(Error::BracketSign { .. })
        ));
    }

    #[test]
    fn root_of_step_function_is_the_jump() {
        let tol = ToleranceConfig::root();
        let r = find_root(|x: f64| if x < 0.6 { -1.0 } else { 1.0 }, 0.0, 1.0, &tol).unwrap();
        assert!((r - 0.6).abs() < 1e-11);
    }

    #[test]
    fn f32_kernels() {
        let tol = ToleranceConfig::<f32>::new(1e-5, 1e-5, 10_000).unwrap();
        let s = integrate(f32::sin, 0.0, std::f32::consts::PI, &tol).unwrap();
        assert!((s - 2.0).abs() < 1e-4);
        let mtol = ToleranceConfig::<f32>::new(1e-4, 0.0, 200).unwrap();
        let m = minimize_scalar(|x: f32| (x - 0.3) * (x - 0.3), 0.0, 1.0, &mtol).unwrap();
        assert!((m.argmin - 0.3).abs() < 1e-3);
    }
}

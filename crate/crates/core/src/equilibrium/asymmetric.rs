use super::{
    best_response_residual, quantile_knots, tidy_knots, EquilibriumSolution, SolverMeta,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::model::{AuctionInstance, BidStrategy, DistributionSpec};
use crate::scalar::Scalar;

/// Inverse bid functions sampled along one backward trajectory, highest bid first.
struct Trajectory<S> {
    bids: Vec<S>,
    phi: [Vec<S>; 2],
}

enum Shot<S> {
    /// Some `φ_j(b) − b` reached zero above the cutoff: the common top bid was too high.
    Diagonal {
        at: S,
    },
    Bottom(Trajectory<S>),
}

/// Two-bidder equilibrium by backward shooting on the inverse bid functions.
///
/// The system `dφ_i/db = F_i(φ_i) / (f_i(φ_i) (φ_j(b) − b))` is integrated from
/// `φ_i(b̄) = hi_i` down to the common bottom, in the variable `ln(b − lo)` so
/// that steps shrink geometrically toward the singular end. `b̄` is bisected:
/// trajectories that touch the diagonal mean `b̄` is too high.
pub fn solve_asymmetric_two<S: Scalar>(
    d1: &DistributionSpec<S>,
    d2: &DistributionSpec<S>,
    opts: &SolverOptions<S>,
) -> Result<EquilibriumSolution<S>> {
    let dists = [d1, d2];
    if !dists.iter().all(|d| d.has_positive_density()) {
        return Err(Error::Unsupported(
            "a value distribution has a zero-density region".into(),
        ));
    }
    d1.validate()?;
    d2.validate()?;
    let (lo1, hi1) = d1.support();
    let (lo2, hi2) = d2.support();
    let scale = S::one() + hi1.abs().max(hi2.abs());
    if (lo1 - lo2).abs() > S::lit(1e-12) * scale {
        return Err(Error::Unsupported(format!(
            "supports must share their lower end, got {lo1} and {lo2}"
        )));
    }
    if opts.ode_steps == 0 || !(opts.low_cutoff > S::zero() && opts.low_cutoff < S::one()) {
        return Err(Error::domain(
            "solve_asymmetric_two",
            "need ode_steps > 0 and low_cutoff in (0, 1)",
        ));
    }
    let lo = lo1;
    let tops = [hi1, hi2];

    let mut bracket = (lo, hi1.min(hi2));
    let mut best: Option<Trajectory<S>> = None;
    let mut last_hit = None;
    let mut iterations = 0;
    for _ in 0..opts.bisection_iters {
        let mid = bracket.0 + (bracket.1 - bracket.0) / S::lit(2.0);
        if mid <= bracket.0 || mid >= bracket.1 {
            break;
        }
        iterations += 1;
        match shoot(dists, tops, lo, mid, opts) {
            Shot::Diagonal { at } => {
                bracket.1 = mid;
                last_hit = Some(at);
            }
            Shot::Bottom(traj) => {
                bracket.0 = mid;
                best = Some(traj);
            }
        }
    }
    let traj = best.ok_or_else(|| {
        Error::SolverNonConvergence(format!(
            "every shot in [{}, {}] touched the diagonal (last at bid {:?}) after {iterations} bisections",
            bracket.0, bracket.1, last_hit.map(|b: S| b.as_f64())
        ))
    })?;

    let strategies = (0..2)
        .map(|i| {
            let values = quantile_knots(dists[i], opts.knots);
            let bids: Vec<S> = values.iter().map(|&v| invert(&traj, i, v, lo)).collect();
            BidStrategy::new(tidy_knots(&values, &bids, lo))
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = AuctionInstance::new(vec![d1.clone(), d2.clone()])?;
    let residual = best_response_residual(&instance, &strategies, opts.grid)?;
    if !(residual <= opts.residual_tol) {
        return Err(Error::SolverNonConvergence(format!(
            "shooting bracket [{}, {}] after {iterations} bisections gives best-response residual {residual}, above {}",
            bracket.0, bracket.1, opts.residual_tol
        )));
    }
    Ok(EquilibriumSolution {
        meta: SolverMeta {
            solver: "asymmetric-shooting".into(),
            iterations,
            bracket: Some(bracket),
            b_bar: strategies.iter().map(|s| s.max_bid()).fold(lo, S::max),
            knots_per_bidder: opts.knots,
            value_grid: opts.grid.values,
            bid_grid: opts.grid.bids,
        },
        strategies,
        residual,
    })
}

/// Bid of bidder `i` at value `v`: the `b` with `φ_i(b) = v` along the trajectory.
fn invert<S: Scalar>(traj: &Trajectory<S>, i: usize, v: S, lo: S) -> S {
    let phi = &traj.phi[i];
    // phi decreases along the table; find the first entry at or below v
    let k = phi.partition_point(|&p| p > v);
    if k == 0 {
        return traj.bids[0];
    }
    if k == phi.len() {
        return lo;
    }
    let (p0, p1) = (phi[k - 1], phi[k]);
    let (b0, b1) = (traj.bids[k - 1], traj.bids[k]);
    if p0 == p1 {
        return b1;
    }
    b1 + (b0 - b1) * (v - p1) / (p0 - p1)
}

fn shoot<S: Scalar>(
    dists: [&DistributionSpec<S>; 2],
    tops: [S; 2],
    lo: S,
    b_bar: S,
    opts: &SolverOptions<S>,
) -> Shot<S> {
    let rhs = |t: S, y: [S; 2]| -> Option<[S; 2]> {
        let gap = t.exp();
        let b = lo + gap;
        let m = [y[1] - b, y[0] - b];
        if !(m[0] > S::zero() && m[1] > S::zero()) {
            return None;
        }
        Some([
            gap * dists[0].cdf_over_pdf(y[0]) / m[0],
            gap * dists[1].cdf_over_pdf(y[1]) / m[1],
        ])
    };
    let step = |t: S, y: [S; 2], h: S| -> Option<[S; 2]> {
        let half = h / S::lit(2.0);
        let add = |y: [S; 2], k: [S; 2], s: S| [y[0] + s * k[0], y[1] + s * k[1]];
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + half, add(y, k1, half))?;
        let k3 = rhs(t + half, add(y, k2, half))?;
        let k4 = rhs(t + h, add(y, k3, h))?;
        let sixth = h / S::lit(6.0);
        let next = [
            y[0] + sixth * (k1[0] + S::lit(2.0) * (k2[0] + k3[0]) + k4[0]),
            y[1] + sixth * (k1[1] + S::lit(2.0) * (k2[1] + k3[1]) + k4[1]),
        ];
        let b = lo + (t + h).exp();
        let ok = next.iter().all(|p| p.is_finite() && *p > b);
        ok.then_some(next)
    };

    let t0 = (b_bar - lo).ln();
    let dt = opts.low_cutoff.ln() / S::from_usize_lossy(opts.ode_steps);
    let min_step = dt.abs() * S::lit(1e-9);
    let mut traj = Trajectory {
        bids: vec![b_bar],
        phi: [vec![tops[0]], vec![tops[1]]],
    };
    let mut t = t0;
    let mut y = tops;
    for k in 1..=opts.ode_steps {
        let target = t0 + dt * S::from_usize_lossy(k);
        while t > target {
            let mut h = target - t;
            loop {
                if let Some(next) = step(t, y, h) {
                    t = if h == target - t { target } else { t + h };
                    y = next;
                    break;
                }
                h = h / S::lit(2.0);
                if h.abs() < min_step {
                    return Shot::Diagonal { at: lo + t.exp() };
                }
            }
        }
        traj.bids.push(lo + t.exp());
        traj.phi[0].push(y[0]);
        traj.phi[1].push(y[1]);
    }
    traj.bids.push(lo);
    traj.phi[0].push(lo);
    traj.phi[1].push(lo);
    Shot::Bottom(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_input_recovers_half_bidding() {
        let d: DistributionSpec<f64> = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let sol = solve_asymmetric_two(&d, &d, &SolverOptions::asymmetric()).unwrap();
        assert!(sol.residual < 1e-4, "{}", sol.residual);
        for s in &sol.strategies {
            for &(v, b) in s.knots() {
                assert!((b - v / 2.0).abs() < 1e-6, "{v} {b}");
            }
        }
    }

    #[test]
    fn uniform_one_versus_two_matches_closed_form() {
        // φ_1(b) = 2b/(1 + 3b²/4), φ_2(b) = 2b/(1 − 3b²/4), b̄ = 2/3
        let d1: DistributionSpec<f64> = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let d2 = DistributionSpec::uniform(0.0, 2.0).unwrap();
        let sol = solve_asymmetric_two(&d1, &d2, &SolverOptions::asymmetric()).unwrap();
        assert!(
            (sol.meta.b_bar - 2.0 / 3.0).abs() < 1e-6,
            "{}",
            sol.meta.b_bar
        );
        for &(v, b) in sol.strategies[0].knots() {
            let phi = 2.0 * b / (1.0 + 0.75 * b * b);
            assert!((phi - v).abs() < 1e-4, "{v} {b} {phi}");
        }
        for &(v, b) in sol.strategies[1].knots() {
            let phi = 2.0 * b / (1.0 - 0.75 * b * b);
            assert!((phi - v).abs() < 1e-4, "{v} {b} {phi}");
        }
    }

    #[test]
    fn mismatched_bottoms_are_unsupported() {
        let d1 = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let d2 = DistributionSpec::uniform(0.5, 2.0).unwrap();
        assert!(matches!(
            solve_asymmetric_two(&d1, &d2, &SolverOptions::asymmetric()),
            Err(Error::Unsupported(_))
        ));
    }
}

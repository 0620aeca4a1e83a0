//! Oracles shared by the integration tests. Nothing here calls the solver or
//! quadrature code under test.

#![allow(dead_code)]

use std::path::PathBuf;

use fpa_core::{Distribution, Instance};

/// Instances shipped in `instances/` at the workspace root.
pub fn suite() -> Vec<(String, Instance)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("instances directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, Instance::load(&p).unwrap())
        })
        .collect()
}

/// `1 − r(1−q) ln(1 + (1−r)/((1−q) r))`, written out independently.
fn objective(r: f64, q: f64) -> f64 {
    let w = (1.0 - q) * r;
    1.0 - w * (1.0 + (1.0 - r) / w).ln()
}

/// `min_r objective(r, q)` by golden section on `(0, 1]`.
pub fn ell_golden(q: f64) -> f64 {
    if q >= 1.0 {
        return 1.0;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-12, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c, q), objective(d, q));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c, q);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d, q);
        }
    }
    fc.min(fd).min(objective(1.0, q))
}

/// `min_x ∫_x^1 ℓ / (1 − x)` on an `n`-point midpoint rule, minimizing over
/// the midpoint cells' left edges.
pub fn phi_midpoint(n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let ells: Vec<f64> = (0..n).map(|k| ell_golden((k as f64 + 0.5) * h)).collect();
    let mut tail = 0.0;
    let mut best = f64::INFINITY;
    for k in (0..n).rev() {
        tail += ells[k] * h;
        let x = k as f64 * h;
        best = best.min(tail / (1.0 - x));
    }
    best
}

/// Composite Simpson on `[a, b]` with `panels` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Best-response iteration on a discretized two-bidder game.
///
/// Each bidder's strategy lives on a `values`-point uniform value grid and is
/// linear in between; deviations are searched over a `bids`-point grid on
/// `[0, min upper support]` with a three-point parabolic refinement. Updates
/// are damped by `1/(t+1)`, kept monotone by a running maximum, and the
/// second half of the `rounds` iterates is averaged.
pub fn discrete_game(
    dists: [&Distribution; 2],
    values: usize,
    bids: usize,
    rounds: usize,
) -> [Vec<(f64, f64)>; 2] {
    let grids: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| {
            let (lo, hi) = d.support();
            (0..values)
                .map(|k| lo + (hi - lo) * k as f64 / (values - 1) as f64)
                .collect()
        })
        .collect();
    let top = dists
        .iter()
        .map(|d| d.support().1)
        .fold(f64::INFINITY, f64::min);
    let bid_grid: Vec<f64> = (0..bids)
        .map(|k| top * k as f64 / (bids - 1) as f64)
        .collect();
    let step = bid_grid[1] - bid_grid[0];
    let mut cur: Vec<Vec<f64>> = grids
        .iter()
        .map(|g| g.iter().map(|v| (v / 2.0).min(top)).collect())
        .collect();
    let mut avg = vec![vec![0.0; values]; 2];
    let mut count = 0.0;

    // P[opponent's bid <= b] with the opponent bidding linearly between grid values
    let bid_cdf = |j: usize, strat: &[f64], b: f64| -> f64 {
        let k = strat.partition_point(|&s| s <= b);
        if k == 0 {
            return 0.0;
        }
        if k >= values {
            return 1.0;
        }
        let (s0, s1) = (strat[k - 1], strat[k]);
        let (v0, v1) = (grids[j][k - 1], grids[j][k]);
        dists[j].cdf(v0 + (b - s0) / (s1 - s0) * (v1 - v0))
    };

    for t in 1..rounds {
        let wins: Vec<Vec<f64>> = (0..2)
            .map(|i| {
                bid_grid
                    .iter()
                    .map(|&b| bid_cdf(1 - i, &cur[1 - i], b))
                    .collect()
            })
            .collect();
        for i in 0..2 {
            let mut run = f64::NEG_INFINITY;
            for (k, &v) in grids[i].iter().enumerate() {
                let u: Vec<f64> = bid_grid
                    .iter()
                    .zip(&wins[i])
                    .map(|(&b, &w)| (v - b) * w)
                    .collect();
                let m = (0..bids).fold(0, |m, k| if u[k] > u[m] { k } else { m });
                let mut br = bid_grid[m];
                if m > 0 && m + 1 < bids {
                    let den = u[m - 1] - 2.0 * u[m] + u[m + 1];
                    if den < 0.0 {
                        br += 0.5 * (u[m - 1] - u[m + 1]) / den * step;
                    }
                }
                let next = cur[i][k] + (br - cur[i][k]) / (t + 1) as f64;
                // strictly increasing by a hair so the bid CDF inverse is defined
                run = next.max(run + 1e-12);
                cur[i][k] = run;
            }
        }
        if t > rounds / 2 {
            for i in 0..2 {
                for k in 0..values {
                    avg[i][k] += cur[i][k];
                }
            }
            count += 1.0;
        }
    }
    let out = |i: usize| {
        grids[i]
            .iter()
            .zip(&avg[i])
            .map(|(&v, &b)| (v, b / count))
            .collect()
    };
    [out(0), out(1)]
}

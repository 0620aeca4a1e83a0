mod common;

use fpa_core::equilibrium::solve_instance;
use fpa_core::model::BidStrategy;
use fpa_core::welfare::{
    audit_lemmas, decomposition_check, equilibrium_welfare, gamma, gamma_total, optimal_welfare,
    AuditConfig, Method,
};
use fpa_core::{Distribution, Instance};

#[test]
fn quadrature_and_monte_carlo_agree_on_the_suite() {
    for (name, inst) in common::suite() {
        let sol = solve_instance(&inst, None).unwrap();
        let q = equilibrium_welfare(&inst, &sol.strategies, Method::Quadrature).unwrap();
        let mc = equilibrium_welfare(
            &inst,
            &sol.strategies,
            Method::MonteCarlo {
                seed: 21,
                samples: 200_000,
            },
        )
        .unwrap();
        assert!(0.0 <= q.welf && q.welf <= q.opt + 1e-12, "{name}");
        assert!(
            (q.welf - mc.welf).abs() <= 4.0 * mc.welf_std_err + 1e-12,
            "{name}: {q:?} {mc:?}"
        );
        assert!((q.ratio - q.welf / q.opt).abs() < 1e-15);
    }
}

#[test]
fn optimal_welfare_by_monte_carlo() {
    let inst = Instance::symmetric(Distribution::uniform(0.0, 1.0).unwrap(), 2).unwrap();
    let mc = optimal_welfare(
        &inst,
        Method::MonteCarlo {
            seed: 2,
            samples: 400_000,
        },
    )
    .unwrap();
    // sd of the max of two uniforms is sqrt(1/18)
    assert!((mc - 2.0 / 3.0).abs() < 4.0 * (1.0f64 / 18.0).sqrt() / 400_000f64.sqrt());
}

#[test]
fn gamma_vanishes_at_the_bottom_and_integrates_to_the_optimum() {
    for (name, inst) in common::suite() {
        for i in 0..inst.n() {
            assert_eq!(gamma(&inst, i, 0.0).unwrap(), 0.0, "{name}");
        }
        let opt = optimal_welfare(&inst, Method::Quadrature).unwrap();
        assert!((gamma_total(&inst).unwrap() - opt).abs() < 1e-6, "{name}");
    }
}

#[test]
fn decomposition_error_shrinks_like_inverse_root_samples() {
    let inst = Instance::new(vec![
        Distribution::uniform(0.0, 1.0).unwrap(),
        Distribution::uniform(0.0, 2.0).unwrap(),
    ])
    .unwrap();
    let sol = solve_instance(&inst, None).unwrap();
    let small = decomposition_check(&inst, &sol.strategies, 4, 10_000).unwrap();
    let large = decomposition_check(&inst, &sol.strategies, 4, 1_000_000).unwrap();
    assert!(small.discrepancy < 4.0 * small.std_err, "{small:?}");
    assert!(large.discrepancy < 4.0 * large.std_err, "{large:?}");
    let shrink = small.std_err / large.std_err;
    assert!((8.0..12.5).contains(&shrink), "{shrink}");
}

#[test]
fn audit_of_weak_strong_equilibrium_is_clean() {
    let inst = Instance::new(vec![
        Distribution::uniform(0.0, 1.0).unwrap(),
        Distribution::uniform(0.0, 2.0).unwrap(),
    ])
    .unwrap();
    let sol = solve_instance(&inst, None).unwrap();
    let r = audit_lemmas(
        &inst,
        &sol.strategies,
        sol.residual,
        &AuditConfig::new(3, 100_000, 1e-9),
    )
    .unwrap();
    assert_eq!(r.violations(), 0, "{r:?}");
    assert!(
        r.lemma_b.checks > 0,
        "misallocation happens in this instance"
    );

    let mut bad = sol.strategies.clone();
    bad[1] = BidStrategy::from_knots_unchecked(
        bad[1].knots().iter().map(|&(v, b)| (v, b + 0.2)).collect(),
    );
    let r = audit_lemmas(
        &inst,
        &bad,
        sol.residual,
        &AuditConfig::new(3, 100_000, 1e-9),
    )
    .unwrap();
    assert!(r.lemma_a.violations > 0);
}

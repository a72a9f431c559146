//! The verification layer itself: finite differences, identity and
//! inequality checkers, Monte Carlo rollouts and the method flows.

mod common;

use common::{f1, f2, random_stable, scalar_policy};
use mjlqr::opt::{hessian_form, mu_constant, MethodKind};
use mjlqr::riccati::{solve_care, CARE_MAX_ITER, CARE_TOL};
use mjlqr::tuple::MatTuple;
use mjlqr::value::{cost, state_correlation};
use mjlqr::verify::{
    almost_smoothness_gap, appendix_bounds, fd_gradient, fd_hessian_form,
    gradient_dominance_slack, mc_cost, ode_flow, ode_flow_with_truth,
};
use mjlqr::{Error, Policy};

#[test]
fn difference_oracles_recover_the_scalar_rational_derivatives() {
    // At gain 0.4 the gradient is -224/225; the differences know only C(K).
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    let g = fd_gradient(&problem, &k, 1e-6).unwrap();
    assert!((g.block(0)[(0, 0)] + 224.0 / 225.0).abs() < 1e-8);
    let e = MatTuple::new(vec![nalgebra::DMatrix::from_element(1, 1, 1.0)]).unwrap();
    let h2 = fd_hessian_form(&problem, &k, &e, 1e-4).unwrap();
    let exact = hessian_form(&problem, &k, &e).unwrap();
    assert!((h2 - exact).abs() < 1e-4 * exact.abs().max(1.0));
}

#[test]
fn difference_steps_are_validated() {
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    let e = MatTuple::new(vec![nalgebra::DMatrix::from_element(1, 1, 1.0)]).unwrap();
    for bad in [0.0, -1e-5, f64::NAN] {
        assert!(matches!(
            fd_gradient(&problem, &k, bad),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            fd_hessian_form(&problem, &k, &e, bad),
            Err(Error::Domain { .. })
        ));
    }
}

#[test]
fn expansion_identity_is_exact_on_the_scalar_pair() {
    // C(0.5) - C(0.4) = -41/700 and the quadratic expansion around 0.4
    // reproduces it term for term, so the identity gap is round-off only.
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    let k_prime = scalar_policy(&[0.5]);
    let diff = cost(&problem, &k_prime).unwrap() - cost(&problem, &k).unwrap();
    assert!((diff + 41.0 / 700.0).abs() < 1e-12);
    let gap = almost_smoothness_gap(&problem, &k, &k_prime).unwrap();
    assert!(gap < 1e-13, "identity gap {gap:.3e}");
}

#[test]
fn expansion_identity_holds_on_random_pairs() {
    for seed in 40..46u64 {
        let (problem, k0) = random_stable(3, 2, 3, seed);
        let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
        let c0 = cost(&problem, &k0).unwrap();
        let gap = almost_smoothness_gap(&problem, &k0, &truth.k_star).unwrap();
        assert!(gap <= 1e-9 * (1.0 + c0), "seed {seed}: gap {gap:.3e}");
    }
}

#[test]
fn dominance_inequality_has_nonnegative_slack() {
    for seed in 50..56u64 {
        let (problem, k0) = random_stable(3, 2, 3, seed);
        let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
        let slack = gradient_dominance_slack(&problem, &k0, &truth).unwrap();
        assert!(slack >= -1e-9 * (1.0 + truth.cost), "seed {seed}: {slack:.3e}");
        // At the optimum both sides vanish.
        let at_star = gradient_dominance_slack(&problem, &truth.k_star, &truth).unwrap();
        assert!(at_star.abs() <= 1e-6 * (1.0 + truth.cost), "seed {seed}: {at_star:.3e}");
    }
}

#[test]
fn sublevel_bounds_take_their_scalar_fixture_values() {
    // At gain 0.4: cost C = P = 116/75 so the value slack is exactly zero;
    // the trace slack is C - X = 16/75; with ξ = 232/75 and |P'| = 224/225
    // the derivative slack is 21312/5625.
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    let e = MatTuple::new(vec![nalgebra::DMatrix::from_element(1, 1, 1.0)]).unwrap();
    let report = appendix_bounds(&problem, &k, &[e]).unwrap();
    assert!((report.cost - 116.0 / 75.0).abs() < 1e-12);
    assert!(report.value_slack.abs() < 1e-12, "value slack {}", report.value_slack);
    assert!((report.trace_slack - 16.0 / 75.0).abs() < 1e-12);
    assert_eq!(report.derivative_slacks.len(), 1);
    assert!((report.derivative_slacks[0] - 21312.0 / 5625.0).abs() < 1e-12);
    assert_eq!(report.hessian_slacks.len(), 1);
    assert!(report.hessian_slacks[0] > 0.0);
}

#[test]
fn sublevel_bounds_hold_on_random_instances() {
    for seed in 60..66u64 {
        let (problem, k0) = random_stable(4, 2, 3, seed);
        let dirs: Vec<MatTuple> = (0..3)
            .map(|j| {
                let m = nalgebra::DMatrix::from_fn(2, 4, |r, c| {
                    ((seed as f64 + 1.0) * 0.37 + j as f64 * 0.11 + r as f64 * 0.07
                        + c as f64 * 0.046)
                        .sin()
                });
                MatTuple::new(vec![m.clone(), m.clone() * 0.5, m * -0.25]).unwrap()
            })
            .collect();
        let report = appendix_bounds(&problem, &k0, &dirs).unwrap();
        let floor = -1e-9 * (1.0 + report.cost);
        assert!(report.value_slack >= floor, "seed {seed}");
        assert!(report.trace_slack >= floor, "seed {seed}");
        assert!(report.derivative_slacks.iter().all(|&s| s >= floor), "seed {seed}");
        assert!(report.hessian_slacks.iter().all(|&s| s >= floor), "seed {seed}");
    }
}

#[test]
fn sublevel_bounds_reject_a_zero_direction() {
    let problem = f1();
    let zero = MatTuple::zeros(1, 1, 1);
    assert!(matches!(
        appendix_bounds(&problem, &scalar_policy(&[0.4]), &[zero]),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn rollout_estimate_brackets_the_exact_cost() {
    // Closed loop 0.5 has lifted radius 1/4, so 20 steps push the truncated
    // tail to 1e-12; three standard errors bound the sampling error.
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    let exact = cost(&problem, &k).unwrap();
    let est = mc_cost(&problem, &k, 20, 20_000, 1).unwrap();
    assert!(est.stderr > 0.0);
    assert!(
        (est.mean - exact).abs() <= 3.0 * est.stderr,
        "estimate {} vs exact {exact}, stderr {}",
        est.mean,
        est.stderr
    );
}

#[test]
fn rollout_estimates_are_reproducible() {
    let problem = f2();
    let k = Policy::zeros(&problem);
    let a = mc_cost(&problem, &k, 200, 500, 9).unwrap();
    let b = mc_cost(&problem, &k, 200, 500, 9).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let c = mc_cost(&problem, &k, 200, 500, 10).unwrap();
    assert_ne!(a.mean.to_bits(), c.mean.to_bits());
}

#[test]
fn rollout_preconditions_are_enforced() {
    let problem = f1();
    let k = scalar_policy(&[0.4]);
    // Radius 1/4 needs 20 steps; 19 leaves too heavy a tail.
    match mc_cost(&problem, &k, 19, 100, 0) {
        Err(Error::Domain { context }) => assert!(context.contains("at least 20"), "{context}"),
        other => panic!("expected Domain, got {other:?}"),
    }
    assert!(matches!(
        mc_cost(&problem, &k, 0, 100, 0),
        Err(Error::Domain { .. })
    ));
    assert!(matches!(
        mc_cost(&problem, &k, 20, 0, 0),
        Err(Error::Domain { .. })
    ));
    let unstable = scalar_policy(&[-0.2]);
    assert!(matches!(
        mc_cost(&problem, &unstable, 20, 100, 0),
        Err(Error::Stability { .. })
    ));
}

#[test]
fn gradient_flow_decays_inside_its_certified_envelope() {
    let problem = f1();
    let k0 = scalar_policy(&[0.0]);
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    let x_star = state_correlation(&problem, &truth.k_star)
        .unwrap()
        .norm_max();
    let mu = mu_constant(&problem);
    let decay = 4.0 * mu * mu * problem.r().lambda_min() / x_star;
    let trace = ode_flow_with_truth(
        &problem,
        &k0,
        MethodKind::GradientDescent,
        0.01,
        2.0,
        &truth,
    )
    .unwrap();
    let gap0 = trace.gaps[0];
    assert!(gap0 > 0.0);
    for (t, gap) in trace.times.iter().zip(&trace.gaps) {
        let envelope = gap0 * (-decay * t).exp();
        assert!(
            *gap <= envelope * (1.0 + 1e-6) + 1e-15,
            "t={t}: gap {gap:.6e} above envelope {envelope:.6e}"
        );
    }
}

#[test]
fn all_three_flows_reach_the_optimal_gain() {
    let problem = f1();
    let k0 = scalar_policy(&[0.0]);
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    for method in [
        MethodKind::GradientDescent,
        MethodKind::GaussNewton,
        MethodKind::NaturalPG,
    ] {
        let trace =
            ode_flow_with_truth(&problem, &k0, method, 0.01, 10.0, &truth).unwrap();
        assert_eq!(trace.times.len(), trace.costs.len());
        assert_eq!(trace.times.len(), trace.policies.len());
        for pair in trace.costs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{}: flow cost rose", method.tag());
        }
        let last = trace.policies.last().unwrap();
        let dist = (&last.k - &truth.k_star.k).norm_two();
        assert!(dist < 1e-6, "{}: final distance {dist:.3e}", method.tag());
    }
}

#[test]
fn flow_grid_parameters_are_validated_and_truth_is_reused() {
    let problem = f1();
    let k0 = scalar_policy(&[0.0]);
    for (dt, t_end) in [(0.0, 1.0), (-0.1, 1.0), (0.1, 0.0), (0.1, -2.0)] {
        assert!(matches!(
            ode_flow(&problem, &k0, MethodKind::GaussNewton, dt, t_end),
            Err(Error::Domain { .. })
        ));
    }
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    let a = ode_flow(&problem, &k0, MethodKind::GaussNewton, 0.05, 1.0).unwrap();
    let b = ode_flow_with_truth(&problem, &k0, MethodKind::GaussNewton, 0.05, 1.0, &truth).unwrap();
    assert_eq!(a.costs.len(), b.costs.len());
    for (ca, cb) in a.costs.iter().zip(&b.costs) {
        assert_eq!(ca.to_bits(), cb.to_bits());
    }
    assert_eq!(a.optimal_cost.to_bits(), b.optimal_cost.to_bits());
}

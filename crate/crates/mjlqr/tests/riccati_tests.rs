//! Reference Riccati solver against the scalar closed form, an independent
//! single-mode solver, and its own optimality conditions.

mod common;

use common::{f1, f1_closed_form, f2, oracle_dare, random_stable, scalar_policy};
use mjlqr::opt::gain_residual;
use mjlqr::riccati::{optimal_gain, solve_care, CARE_MAX_ITER, CARE_TOL};
use mjlqr::value::cost;
use mjlqr::Error;

#[test]
fn f1_solution_matches_the_scalar_closed_form() {
    let problem = f1();
    let solution = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    let (p_exact, k_exact) = f1_closed_form();
    assert!(
        (solution.p_star.block(0)[(0, 0)] - p_exact).abs() < 1e-11,
        "P* {} vs {p_exact}",
        solution.p_star.block(0)[(0, 0)]
    );
    assert!(
        (solution.k_star.k.block(0)[(0, 0)] - k_exact).abs() < 1e-11,
        "K* {} vs {k_exact}",
        solution.k_star.k.block(0)[(0, 0)]
    );
    assert!((solution.cost - p_exact).abs() < 1e-11, "unit initial moment");
    assert!(solution.residual <= CARE_TOL * 10.0);
}

#[test]
fn single_mode_matrix_instances_match_the_doubling_solver() {
    for seed in 0..6u64 {
        let (problem, _) = random_stable(4, 2, 1, seed);
        let solution = solve_care(&problem, 1e-14, CARE_MAX_ITER).unwrap();
        let oracle = oracle_dare(
            problem.a().block(0),
            problem.b().block(0),
            problem.q().block(0),
            problem.r().block(0),
        );
        let err = (solution.p_star.block(0) - &oracle).amax();
        assert!(
            err <= 1e-9 * (1.0 + oracle.amax()),
            "seed {seed}: doubling mismatch {err:.3e}"
        );
    }
}

#[test]
fn gain_residual_vanishes_at_the_optimum() {
    for seed in 10..14u64 {
        let (problem, _) = random_stable(3, 2, 3, seed);
        let solution = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
        let l = gain_residual(&problem, &solution.k_star).unwrap();
        assert!(
            l.norm_two() <= 1e-8 * (1.0 + solution.cost),
            "seed {seed}: residual {:.3e}",
            l.norm_two()
        );
    }
}

#[test]
fn optimal_cost_undercuts_perturbed_policies() {
    let problem = f2();
    let solution = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    for delta in [-0.05, 0.03, 0.08] {
        let perturbed = scalar_policy(&[
            solution.k_star.k.block(0)[(0, 0)] + delta,
            solution.k_star.k.block(1)[(0, 0)] - delta,
        ]);
        let c = cost(&problem, &perturbed).unwrap();
        assert!(
            c >= solution.cost - 1e-12,
            "perturbation {delta} beat the optimum: {c} < {}",
            solution.cost
        );
    }
}

#[test]
fn optimal_gain_reproduces_the_solution_gain() {
    let (problem, _) = random_stable(3, 1, 2, 21);
    let solution = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    let regained = optimal_gain(&problem, &solution.p_star).unwrap();
    assert!((&regained.k - &solution.k_star.k).norm_two() < 1e-10);
}

#[test]
fn tolerance_must_be_positive_and_cap_is_enforced() {
    let problem = f1();
    assert!(matches!(
        solve_care(&problem, 0.0, 10),
        Err(Error::Domain { .. })
    ));
    match solve_care(&problem, 1e-14, 3) {
        Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 3),
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

//! Correlation floor, amplification factor and smoothness constant against
//! hand-expanded scalar fixture values.

mod common;

use common::{f1, f2, random_stable, scalar_problem};
use mjlqr::opt::{mu_constant, smoothness_constants, smoothness_constants_with_truth};
use mjlqr::riccati::{solve_care, CARE_MAX_ITER, CARE_TOL};
use mjlqr::value::state_correlation;
use mjlqr::Error;

#[test]
fn correlation_floor_is_the_weighted_smallest_singular_value() {
    // Single mode, unit weight, unit covariance.
    assert_eq!(mu_constant(&f1()), 1.0);
    // Two modes with uniform start halve the floor.
    assert_eq!(mu_constant(&f2()), 0.5);
    // A shrunken covariance scales it linearly.
    let shrunk = scalar_problem::<1>(&[0.9], &[1.0], &[1.0], &[1.0], &[[1.0]], &[1.0], 0.25);
    assert!((mu_constant(&shrunk) - 0.25).abs() < 1e-15);
    // Generated instances start from covariance I/12 and a uniform mode law.
    let (gen3, _) = random_stable(3, 2, 4, 11);
    assert!((mu_constant(&gen3) - 1.0 / 48.0).abs() < 1e-15);
}

#[test]
fn scalar_constants_expand_to_their_rational_values() {
    // At sublevel value α = 116/75 (the fixture cost at gain 0.4) with unit
    // ‖B‖, ‖R‖ and Λ_min(Q):
    //   ξ = 2α + 1 - 1 = 232/75
    //   L = 2(1 + (1 + 2ξ)α)α = 15810568/421875
    let problem = f1();
    let alpha = 116.0 / 75.0;
    let bundle = smoothness_constants(&problem, alpha).unwrap();
    assert_eq!(bundle.alpha, alpha);
    assert!((bundle.mu - 1.0).abs() < 1e-15);
    assert!(
        (bundle.xi - 232.0 / 75.0).abs() < 1e-13,
        "xi {} vs {}",
        bundle.xi,
        232.0 / 75.0
    );
    let l_exact = 15_810_568.0 / 421_875.0;
    assert!(
        (bundle.smoothness_l - l_exact).abs() < 1e-12 * l_exact,
        "L {} vs {l_exact}",
        bundle.smoothness_l
    );
    assert!(bundle.x_star_maxnorm.is_none());
}

#[test]
fn constants_grow_with_the_sublevel_value() {
    let problem = f2();
    let lo = smoothness_constants(&problem, 2.0).unwrap();
    let hi = smoothness_constants(&problem, 3.0).unwrap();
    assert!(hi.xi > lo.xi);
    assert!(hi.smoothness_l > lo.smoothness_l);
    assert_eq!(hi.mu, lo.mu);
}

#[test]
fn sublevel_value_is_validated() {
    let problem = f1();
    for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(
            smoothness_constants(&problem, bad),
            Err(Error::Domain { .. })
        ));
    }
}

#[test]
fn truth_checked_constants_reject_values_below_the_optimum() {
    let problem = f1();
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    assert!(matches!(
        smoothness_constants_with_truth(&problem, truth.cost * 0.5, &truth),
        Err(Error::Domain { .. })
    ));
    let bundle = smoothness_constants_with_truth(&problem, truth.cost, &truth).unwrap();
    // ‖X*‖ = 1/(1 - Γ*²) for the scalar fixture.
    let x_star = bundle.x_star_maxnorm.unwrap();
    assert!((x_star - 1.151_126_2).abs() < 1e-6, "x_star {x_star}");
}

#[test]
fn optimal_correlation_norm_matches_a_direct_evaluation() {
    let (problem, _) = random_stable(3, 2, 3, 30);
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER).unwrap();
    let bundle = smoothness_constants_with_truth(&problem, truth.cost * 2.0, &truth).unwrap();
    let direct = state_correlation(&problem, &truth.k_star).unwrap().norm_max();
    assert_eq!(bundle.x_star_maxnorm.unwrap().to_bits(), direct.to_bits());
}

use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use scvx_core::examples::example1::initial_reference;
use scvx_core::examples::quadrotor::{example2_initial_reference, QuadRotorParams};
use scvx_core::examples::{example1_problem, example2_problem};
use scvx_core::penalty::{augmented_objective, infeasibility, penalty_al, penalty_l1};
use scvx_core::problem::check_jacobians;
use scvx_core::{PenaltyMode, PenaltyState};

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[test]
fn example1_evaluation_at_initial_reference() {
    let p = example1_problem();
    let e = p.evaluate(&initial_reference()).unwrap();
    assert_eq!(e.f0, 3.0);
    assert_eq!(e.h.len(), 0);
    assert_abs_diff_eq!(e.g[0], -4.6125, epsilon = 1e-12);
}

#[test]
fn example1_origin_is_feasible() {
    let p = example1_problem();
    let e = p.evaluate(&dv(&[0.0, 0.0])).unwrap();
    assert_eq!(e.f0, 0.0);
    assert_eq!(e.g[0], 0.0);
    assert_eq!(p.convex_violation(&[0.0, 0.0]), 0.0);
}

#[test]
fn example1_jacobian_at_initial_reference() {
    let p = example1_problem();
    let z = initial_reference();
    let j = p.jacobians(&z).unwrap();
    assert_abs_diff_eq!(j.jac_g[(0, 0)], -21.4, epsilon = 1e-12);
    assert_eq!(j.jac_g[(0, 1)], 1.0);
    assert!(check_jacobians(&p, &z, 1e-6).unwrap().max_error() <= 1e-5);
}

#[test]
fn example2_defect_jacobian_at_initial_reference() {
    let q = QuadRotorParams::default();
    let p = example2_problem(&q).unwrap();
    let report = check_jacobians(&p, &example2_initial_reference(&q), 1e-6).unwrap();
    assert!(report.equality <= 1e-4, "{report:?}");
    assert!(report.inequality <= 1e-4, "{report:?}");
}

#[test]
fn evaluation_is_deterministic() {
    let q = QuadRotorParams::default();
    let p = example2_problem(&q).unwrap();
    let z = example2_initial_reference(&q);
    let a = p.evaluate(&z).unwrap();
    let b = p.evaluate(&z).unwrap();
    assert_eq!(a.g, b.g);
    assert_eq!(a.h, b.h);
    assert_eq!(a.f0, b.f0);
}

#[test]
fn example2_hover_reference_objective() {
    let q = QuadRotorParams::default();
    let p = example2_problem(&q).unwrap();
    let e = p.evaluate(&example2_initial_reference(&q)).unwrap();
    let expected = q.nodes as f64 * q.hover_thrust().norm() * q.dt();
    assert_abs_diff_eq!(e.f0, expected, epsilon = 1e-12);
    assert_abs_diff_eq!(e.f0, 15.2055, epsilon = 1e-12);
}

#[test]
fn penalty_hand_values() {
    let mut s = PenaltyState::initial(1, 0, 2.0, 1e8);
    s.lambda[0] = 1.0;
    assert_eq!(penalty_al(&dv(&[2.0]), &dv(&[]), &s), 6.0);

    let mut s = PenaltyState::initial(0, 1, 10.0, 1e8);
    s.mu[0] = 3.0;
    assert_eq!(penalty_al(&dv(&[]), &dv(&[-5.0]), &s), 0.0);
    assert_eq!(penalty_al(&dv(&[]), &dv(&[2.0]), &s), 26.0);

    assert_eq!(penalty_l1(&dv(&[2.0, -1.0]), &dv(&[]), 3.0), 9.0);
    assert_eq!(penalty_l1(&dv(&[]), &dv(&[-1.0, 4.0]), 0.5), 2.0);
    assert_eq!(penalty_l1(&dv(&[0.0]), &dv(&[-1.0]), 7.0), 0.0);
}

#[test]
fn augmented_objective_example1() {
    let p = example1_problem();
    let z = initial_reference();
    let s = PenaltyState::initial(1, 0, 1.0, 1e8);
    let al = augmented_objective(&p, &z, &s, PenaltyMode::AugmentedLagrangian).unwrap();
    let l1 = augmented_objective(&p, &z, &s, PenaltyMode::L1).unwrap();
    assert_abs_diff_eq!(al, 3.0 + 0.5 * 4.6125 * 4.6125, epsilon = 1e-12);
    assert_abs_diff_eq!(l1, 7.6125, epsilon = 1e-12);

    let origin = dv(&[0.0, 0.0]);
    for mode in [PenaltyMode::AugmentedLagrangian, PenaltyMode::L1] {
        assert_eq!(augmented_objective(&p, &origin, &s, mode).unwrap(), 0.0);
    }
}

#[test]
fn infeasibility_hand_values() {
    assert_eq!(infeasibility(&dv(&[0.0]), &dv(&[-1.0, -2.0])), 0.0);
    assert_eq!(infeasibility(&dv(&[3.0]), &dv(&[4.0])), 5.0);
    assert_abs_diff_eq!(infeasibility(&dv(&[0.6]), &dv(&[-7.0, 0.8])), 1.0, epsilon = 1e-15);
}

#[test]
fn zero_multipliers_give_pure_quadratic_penalty() {
    let s = PenaltyState::initial(2, 2, 3.0, 1e8);
    let g = dv(&[0.5, -1.5]);
    let h = dv(&[2.0, -4.0]);
    assert_abs_diff_eq!(penalty_al(&g, &h, &s), 1.5 * (0.25 + 2.25 + 4.0), epsilon = 1e-14);
}

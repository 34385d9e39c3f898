//! Shared fixtures for the benchmarks.

use scvx_core::examples::quadrotor::{example2_initial_reference, example2_problem, QuadRotorParams};
use scvx_core::nalgebra::DVector;
use scvx_core::subproblem::{build_subproblem, linearize, ConvexSubproblem};
use scvx_core::{PenaltyMode, PenaltyState, ProblemDefinition};

pub fn quadrotor() -> (QuadRotorParams, ProblemDefinition, DVector<f64>) {
    let params = QuadRotorParams::default();
    let problem = example2_problem(&params).expect("default quad-rotor problem");
    let z = example2_initial_reference(&params);
    (params, problem, z)
}

/// First SCvx* subproblem of the quad-rotor problem.
pub fn quadrotor_subproblem() -> ConvexSubproblem {
    let (_, problem, z) = quadrotor();
    let model = linearize(&problem, &z).expect("linearization");
    let state = PenaltyState::initial(problem.n_eq(), problem.n_ineq(), 1.0, 1e8);
    build_subproblem(&model, &problem, &state, 0.1, PenaltyMode::AugmentedLagrangian).expect("subproblem")
}

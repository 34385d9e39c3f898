//! Benchmark problems.

pub mod example1;
pub mod quadrotor;

pub use example1::{brute_force_example1, example1_problem};
pub use quadrotor::{
    discretize_dynamics, example2_initial_reference, example2_problem, DiscretizationResult, Obstacle, QuadLayout,
    QuadRotorParams,
};

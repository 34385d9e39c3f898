//! Successive convexification with an augmented-Lagrangian penalty
//! (SCvx*) and the classic fixed-weight l1 variant (SCvx).
//!
//! ```no_run
//! use scvx_core::{examples, solve, AlgorithmConfig};
//!
//! let problem = examples::example1_problem();
//! let z0 = examples::example1::initial_reference();
//! let result = solve(&problem, &AlgorithmConfig::default(), &z0).unwrap();
//! println!("{:?} after {} iterations", result.status, result.iteration_count);
//! ```

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod driver;
pub mod error;
pub mod examples;
pub mod penalty;
pub mod problem;
pub mod subproblem;

pub use nalgebra;

pub use driver::{solve, solve_with, Algorithm, AlgorithmConfig, IterationRecord, SolveResult, SolveStatus};
pub use error::{Block, Result, ScvxError};
pub use penalty::{PenaltyMode, PenaltyState};
pub use problem::{
    AffineExpr, Bounds, ConstraintFunction, ConvexBlock, Evaluation, FnConstraint, ProblemDefinition,
    QuadraticObjective, SecondOrderCone,
};
pub use subproblem::{ClarabelBackend, ConvexBackend};

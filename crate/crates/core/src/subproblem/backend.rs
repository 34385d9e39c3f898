//! Convex solver adapters.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::conic::ConicProgram;
use crate::error::{Result, ScvxError};

/// Default primal/dual tolerance for subproblem solves.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendStatus {
    Optimal,
    /// Solved to the backend's reduced accuracy level.
    AlmostOptimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: BackendStatus,
    pub iterations: u32,
}

/// A solver for [`ConicProgram`]s. Implementations must be deterministic.
pub trait ConvexBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution>;
}

/// Looks up an adapter by configuration key.
pub fn backend_from_key(key: &str, tolerance: f64) -> Result<Box<dyn ConvexBackend>> {
    match key {
        "clarabel" => Ok(Box::new(ClarabelBackend::new(tolerance))),
        other => Err(ScvxError::InvalidConfig(format!("unknown convex backend `{other}`"))),
    }
}

/// Interior-point conic solver from the `clarabel` crate.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    pub tolerance: f64,
    pub max_iter: u32,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        Self::new(DEFAULT_TOLERANCE)
    }
}

impl ClarabelBackend {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            max_iter: 200,
        }
    }

    fn run(&self, program: &ConicProgram, objective_scale: f64) -> Result<ConicSolution> {
        let n = program.n_vars;

        let (pi, (pj, pv)): (Vec<_>, (Vec<_>, Vec<_>)) = program
            .quadratic
            .iter()
            .map(|&(i, j, v)| (i, (j, v * objective_scale)))
            .unzip();
        let p = CscMatrix::new_from_triplets(n, n, pi, pj, pv);
        let q: Vec<f64> = program.linear.iter().map(|v| v * objective_scale).collect();

        // Ax + s = b, s in K. An affine row `a.x + c` maps to A = a, b = -c
        // for the zero and nonnegative cones; cone entries are stored as
        // (t, v) = b - Ax, i.e. A = -a, b = c.
        let mut ai = Vec::new();
        let mut aj = Vec::new();
        let mut av = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();
        let mut row = 0;

        let mut push_rows = |exprs: &mut dyn Iterator<Item = &crate::problem::AffineExpr>, sign: f64| {
            for e in exprs {
                for &(j, c) in &e.terms {
                    ai.push(row);
                    aj.push(j);
                    av.push(sign * c);
                }
                b.push(-sign * e.constant);
                row += 1;
            }
        };

        if !program.equalities.is_empty() {
            push_rows(&mut program.equalities.iter().map(|r| &r.expr), 1.0);
            cones.push(SupportedConeT::ZeroConeT(program.equalities.len()));
        }
        if !program.inequalities.is_empty() {
            push_rows(&mut program.inequalities.iter().map(|r| &r.expr), 1.0);
            cones.push(SupportedConeT::NonnegativeConeT(program.inequalities.len()));
        }
        for cone in &program.cones {
            push_rows(&mut std::iter::once(&cone.bound).chain(&cone.vector), -1.0);
            cones.push(SupportedConeT::SecondOrderConeT(1 + cone.vector.len()));
        }
        let a = CscMatrix::new_from_triplets(row, n, ai, aj, av);

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_gap_abs(self.tolerance)
            .tol_gap_rel(self.tolerance)
            .tol_feas(self.tolerance)
            .max_threads(1)
            .build()
            .map_err(|e| ScvxError::Backend(format!("invalid clarabel settings: {e}")))?;

        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| ScvxError::Backend(format!("clarabel setup: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;

        let status = match sol.status {
            SolverStatus::Solved => BackendStatus::Optimal,
            SolverStatus::AlmostSolved => BackendStatus::AlmostOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => BackendStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => BackendStatus::Unbounded,
            _ => BackendStatus::NumericalTrouble,
        };
        Ok(ConicSolution {
            objective: program.objective(&sol.x),
            x: sol.x.clone(),
            status,
            iterations: sol.iterations,
        })
    }
}

impl ConvexBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, program: &ConicProgram) -> Result<ConicSolution> {
        let first = self.run(program, 1.0)?;
        if first.status != BackendStatus::NumericalTrouble {
            return Ok(first);
        }
        // one retry with the objective normalized to unit magnitude
        let magnitude = program
            .quadratic
            .iter()
            .map(|t| t.2.abs())
            .chain(program.linear.iter().map(|v| v.abs()))
            .fold(1.0, f64::max);
        self.run(program, 1.0 / magnitude)
    }
}

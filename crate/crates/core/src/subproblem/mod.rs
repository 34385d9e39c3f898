//! Linearization about a reference point and the relaxed convex subproblem.
//!
//! The subproblem variables are stacked as `[z, xi, zeta]`. In L1 mode the
//! free slack `xi` is split into nonnegative parts `[xi+, xi-]` so that its
//! absolute value stays linear.

pub mod backend;
pub mod conic;

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ScvxError};
use crate::penalty::{penalty, positive_part, PenaltyMode, PenaltyState};
use crate::problem::{AffineExpr, Evaluation, ProblemDefinition, QuadraticObjective};

pub use backend::{backend_from_key, BackendStatus, ClarabelBackend, ConicSolution, ConvexBackend};
pub use conic::{ConicProgram, LinearRow, RowKind};

/// First-order model of `g` and `h` at `z_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub z_ref: DVector<f64>,
    pub g_ref: DVector<f64>,
    pub h_ref: DVector<f64>,
    pub jac_g: DMatrix<f64>,
    pub jac_h: DMatrix<f64>,
}

impl LinearModel {
    /// Builds the model from an evaluation, computing Jacobians if needed.
    pub fn from_evaluation(mut eval: Evaluation, problem: &ProblemDefinition) -> Result<Self> {
        let jac = eval.jacobians(problem)?.clone();
        Ok(Self {
            z_ref: eval.z,
            g_ref: eval.g,
            h_ref: eval.h,
            jac_g: jac.jac_g,
            jac_h: jac.jac_h,
        })
    }

    pub fn g_tilde(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.g_ref + &self.jac_g * (z - &self.z_ref)
    }

    pub fn h_tilde(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.h_ref + &self.jac_h * (z - &self.z_ref)
    }
}

pub fn linearize(problem: &ProblemDefinition, z_ref: &DVector<f64>) -> Result<LinearModel> {
    LinearModel::from_evaluation(problem.evaluate_with_jacobians(z_ref)?, problem)
}

/// Positions of each variable group inside the subproblem vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableLayout {
    pub n_z: usize,
    pub n_eq: usize,
    pub n_ineq: usize,
    pub split_xi: bool,
}

impl VariableLayout {
    pub fn z(&self) -> Range<usize> {
        0..self.n_z
    }

    /// `xi` itself, or `xi+` when split.
    pub fn xi(&self) -> Range<usize> {
        self.n_z..self.n_z + self.n_eq
    }

    pub fn xi_minus(&self) -> Option<Range<usize>> {
        self.split_xi.then(|| self.n_z + self.n_eq..self.n_z + 2 * self.n_eq)
    }

    pub fn zeta(&self) -> Range<usize> {
        let start = self.n_z + if self.split_xi { 2 } else { 1 } * self.n_eq;
        start..start + self.n_ineq
    }

    pub fn n_vars(&self) -> usize {
        self.zeta().end
    }

    /// Stacks `(z, xi, zeta)` into one vector.
    pub fn pack(&self, z: &DVector<f64>, xi: &DVector<f64>, zeta: &DVector<f64>) -> Vec<f64> {
        let mut x = vec![0.0; self.n_vars()];
        x[self.z()].copy_from_slice(z.as_slice());
        match self.xi_minus() {
            Some(minus) => {
                for (k, &v) in xi.iter().enumerate() {
                    x[self.n_z + k] = v.max(0.0);
                    x[minus.start + k] = (-v).max(0.0);
                }
            }
            None => x[self.xi()].copy_from_slice(xi.as_slice()),
        }
        x[self.zeta()].copy_from_slice(zeta.as_slice());
        x
    }

    pub fn unpack(&self, x: &[f64]) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let z = DVector::from_column_slice(&x[self.z()]);
        let mut xi = DVector::from_column_slice(&x[self.xi()]);
        if let Some(minus) = self.xi_minus() {
            xi -= DVector::from_column_slice(&x[minus]);
        }
        let zeta = DVector::from_column_slice(&x[self.zeta()]);
        (z, xi, zeta)
    }
}

/// The relaxed, trust-region-constrained convex subproblem about a reference.
#[derive(Debug, Clone)]
pub struct ConvexSubproblem {
    pub program: ConicProgram,
    pub layout: VariableLayout,
    pub mode: PenaltyMode,
    pub radius: f64,
    pub model: LinearModel,
    pub state: PenaltyState,
    objective: QuadraticObjective,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ConvexSubproblem {
    /// `L(z, xi, zeta) = f0(z) + P(xi, zeta)`
    pub fn penalized_objective(&self, z: &DVector<f64>, xi: &DVector<f64>, zeta: &DVector<f64>) -> f64 {
        self.objective.value(z.as_slice()) + penalty(xi, zeta, &self.state, self.mode)
    }

    /// The always-feasible point `(z_ref, g(z_ref), [h(z_ref)]+)`.
    pub fn reference_candidate(&self) -> Vec<f64> {
        self.layout
            .pack(&self.model.z_ref, &self.model.g_ref, &positive_part(&self.model.h_ref))
    }

    /// Objective of the reference candidate; equals `J(z_ref)`.
    pub fn reference_value(&self) -> f64 {
        self.penalized_objective(&self.model.z_ref, &self.model.g_ref, &positive_part(&self.model.h_ref))
    }
}

pub fn build_subproblem(
    model: &LinearModel,
    problem: &ProblemDefinition,
    state: &PenaltyState,
    radius: f64,
    mode: PenaltyMode,
) -> Result<ConvexSubproblem> {
    if !(radius > 0.0) {
        return Err(ScvxError::InvalidConfig(format!(
            "trust-region radius must be > 0, got {radius}"
        )));
    }
    let n_z = problem.n_z();
    let layout = VariableLayout {
        n_z,
        n_eq: problem.n_eq(),
        n_ineq: problem.n_ineq(),
        split_xi: mode == PenaltyMode::L1,
    };
    let n_vars = layout.n_vars();
    let f0 = problem.objective();

    let mut quadratic = f0.hessian_triplets().to_vec();
    let mut linear = vec![0.0; n_vars];
    linear[..n_z].copy_from_slice(f0.linear_term());
    match mode {
        PenaltyMode::AugmentedLagrangian => {
            for (k, j) in layout.xi().enumerate() {
                quadratic.push((j, j, state.w));
                linear[j] = state.lambda[k];
            }
            for (k, j) in layout.zeta().enumerate() {
                quadratic.push((j, j, state.w));
                linear[j] = state.mu[k];
            }
        }
        PenaltyMode::L1 => {
            let minus = layout.xi_minus().unwrap_or(0..0);
            for j in layout.xi().chain(minus).chain(layout.zeta()) {
                linear[j] = state.w;
            }
        }
    }

    let mut equalities = Vec::new();
    let mut inequalities = Vec::new();

    // g_ref + jac_g (z - z_ref) - xi = 0
    for i in 0..layout.n_eq {
        let mut expr = linearized_row(&model.jac_g, i, &model.z_ref, model.g_ref[i]);
        expr.terms.push((layout.xi().start + i, -1.0));
        if let Some(minus) = layout.xi_minus() {
            expr.terms.push((minus.start + i, 1.0));
        }
        equalities.push(LinearRow {
            expr,
            kind: RowKind::Linearized,
        });
    }
    // h_ref + jac_h (z - z_ref) - zeta <= 0
    for i in 0..layout.n_ineq {
        let mut expr = linearized_row(&model.jac_h, i, &model.z_ref, model.h_ref[i]);
        expr.terms.push((layout.zeta().start + i, -1.0));
        inequalities.push(LinearRow {
            expr,
            kind: RowKind::Linearized,
        });
    }
    let minus = layout.xi_minus().unwrap_or(0..0);
    let signed: Vec<usize> = if layout.split_xi {
        layout.xi().chain(minus).chain(layout.zeta()).collect()
    } else {
        layout.zeta().collect()
    };
    for j in signed {
        inequalities.push(LinearRow {
            expr: AffineExpr::new(vec![(j, -1.0)], 0.0),
            kind: RowKind::SlackSign,
        });
    }

    // ||z - z_ref||_inf <= r as a box
    let mut lower = vec![f64::NEG_INFINITY; n_z];
    let mut upper = vec![f64::INFINITY; n_z];
    for j in 0..n_z {
        let c = model.z_ref[j];
        inequalities.push(LinearRow {
            expr: AffineExpr::new(vec![(j, 1.0)], -(c + radius)),
            kind: RowKind::TrustRegion,
        });
        inequalities.push(LinearRow {
            expr: AffineExpr::new(vec![(j, -1.0)], c - radius),
            kind: RowKind::TrustRegion,
        });
        lower[j] = c - radius;
        upper[j] = c + radius;
    }
    if let Some(bounds) = problem.bounds() {
        for j in 0..n_z {
            let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
            if hi.is_finite() {
                inequalities.push(LinearRow {
                    expr: AffineExpr::new(vec![(j, 1.0)], -hi),
                    kind: RowKind::Bound,
                });
            }
            if lo.is_finite() {
                inequalities.push(LinearRow {
                    expr: AffineExpr::new(vec![(j, -1.0)], lo),
                    kind: RowKind::Bound,
                });
            }
            lower[j] = lower[j].max(lo);
            upper[j] = upper[j].min(hi);
        }
    }

    let convex = problem.convex_block();
    equalities.extend(convex.equalities.iter().map(|e| LinearRow {
        expr: e.clone(),
        kind: RowKind::Convex,
    }));
    inequalities.extend(convex.inequalities.iter().map(|e| LinearRow {
        expr: e.clone(),
        kind: RowKind::Convex,
    }));

    Ok(ConvexSubproblem {
        program: ConicProgram {
            n_vars,
            quadratic,
            linear,
            constant: f0.constant(),
            equalities,
            inequalities,
            cones: convex.cones.clone(),
        },
        layout,
        mode,
        radius,
        model: model.clone(),
        state: state.clone(),
        objective: f0.clone(),
        lower,
        upper,
    })
}

fn linearized_row(jac: &DMatrix<f64>, i: usize, z_ref: &DVector<f64>, value: f64) -> AffineExpr {
    let mut terms = Vec::new();
    let mut constant = value;
    for j in 0..jac.ncols() {
        let a = jac[(i, j)];
        if a != 0.0 {
            terms.push((j, a));
            constant -= a * z_ref[j];
        }
    }
    AffineExpr::new(terms, constant)
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub z_star: DVector<f64>,
    pub xi_star: DVector<f64>,
    pub zeta_star: DVector<f64>,
    /// `L(z*, xi*, zeta*)`, evaluated from the returned point.
    pub l_star: f64,
    pub status: BackendStatus,
    /// Largest constraint violation of the returned point in the subproblem.
    pub max_violation: f64,
    pub backend_iterations: u32,
    /// The backend point scored worse than the reference candidate, which was
    /// returned instead.
    pub used_reference: bool,
}

/// Solves the subproblem and post-processes the result.
///
/// Given `z*`, the optimal slacks are available in closed form
/// (`xi = g~(z*)`, `zeta = [h~(z*)]+`), so they are recomputed from `z*`
/// rather than taken from the backend. If the resulting objective exceeds
/// that of the feasible reference candidate, the candidate is returned.
pub fn solve_subproblem(sp: &ConvexSubproblem, backend: &dyn ConvexBackend) -> Result<SubproblemSolution> {
    let raw = backend.solve(&sp.program)?;
    match raw.status {
        BackendStatus::Optimal | BackendStatus::AlmostOptimal => {}
        other => {
            return Err(ScvxError::Backend(format!(
                "{} returned {other:?} for a subproblem that is feasible by construction",
                backend.name()
            )))
        }
    }
    let (z_raw, _, _) = sp.layout.unpack(&raw.x);
    let z_star = DVector::from_iterator(
        z_raw.len(),
        z_raw
            .iter()
            .zip(sp.lower.iter().zip(&sp.upper))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi)),
    );
    let xi_star = sp.model.g_tilde(&z_star);
    let zeta_star = positive_part(&sp.model.h_tilde(&z_star));
    let l_star = sp.penalized_objective(&z_star, &xi_star, &zeta_star);
    let reference = sp.reference_value();

    let (z_star, xi_star, zeta_star, l_star, used_reference) = if l_star > reference {
        (
            sp.model.z_ref.clone(),
            sp.model.g_ref.clone(),
            positive_part(&sp.model.h_ref),
            reference,
            true,
        )
    } else {
        (z_star, xi_star, zeta_star, l_star, false)
    };
    let max_violation = sp.program.max_violation(&sp.layout.pack(&z_star, &xi_star, &zeta_star));

    Ok(SubproblemSolution {
        z_star,
        xi_star,
        zeta_star,
        l_star,
        status: raw.status,
        max_violation,
        backend_iterations: raw.iterations,
        used_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Bounds, FnConstraint};

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn square_eq() -> ProblemDefinition {
        ProblemDefinition::builder("sq", QuadraticObjective::linear(vec![0.0]))
            .equalities(FnConstraint::new(
                1,
                |z: &DVector<f64>| dv(&[z[0] * z[0]]),
                |z: &DVector<f64>| DMatrix::from_element(1, 1, 2.0 * z[0]),
            ))
            .build()
            .unwrap()
    }

    #[test]
    fn linearization_of_square_is_tangent() {
        let m = linearize(&square_eq(), &dv(&[1.0])).unwrap();
        assert_eq!(m.g_tilde(&dv(&[1.0]))[0], 1.0);
        assert_eq!(m.g_tilde(&dv(&[3.0]))[0], 1.0 + 2.0 * 2.0);
    }

    #[test]
    fn linearization_of_affine_is_identity() {
        let p = ProblemDefinition::builder("aff", QuadraticObjective::linear(vec![0.0]))
            .equalities(FnConstraint::new(
                1,
                |z: &DVector<f64>| dv(&[3.0 * z[0] + 1.0]),
                |_: &DVector<f64>| DMatrix::from_element(1, 1, 3.0),
            ))
            .build()
            .unwrap();
        let m = linearize(&p, &dv(&[-0.7])).unwrap();
        for z in [-4.0, 0.0, 2.5] {
            assert!((m.g_tilde(&dv(&[z]))[0] - (3.0 * z + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn layout_roundtrip_with_split() {
        let layout = VariableLayout {
            n_z: 2,
            n_eq: 2,
            n_ineq: 1,
            split_xi: true,
        };
        assert_eq!(layout.n_vars(), 7);
        let x = layout.pack(&dv(&[1.0, 2.0]), &dv(&[-3.0, 4.0]), &dv(&[5.0]));
        assert_eq!(x, vec![1.0, 2.0, 0.0, 4.0, 3.0, 0.0, 5.0]);
        let (z, xi, zeta) = layout.unpack(&x);
        assert_eq!((z, xi, zeta), (dv(&[1.0, 2.0]), dv(&[-3.0, 4.0]), dv(&[5.0])));
    }

    #[test]
    fn lp_corner_through_subproblem() {
        // f0 = z on [-1, 1], no non-convex rows, huge trust region
        let p = ProblemDefinition::builder("lp", QuadraticObjective::linear(vec![1.0]))
            .bounds(Bounds::uniform(1, -1.0, 1.0))
            .build()
            .unwrap();
        let m = linearize(&p, &dv(&[0.5])).unwrap();
        let state = PenaltyState::initial(0, 0, 1.0, 1e8);
        let sp = build_subproblem(&m, &p, &state, 10.0, PenaltyMode::AugmentedLagrangian).unwrap();
        assert_eq!(sp.program.rows_of_kind(RowKind::Bound).count(), 2);
        let sol = solve_subproblem(&sp, &ClarabelBackend::default()).unwrap();
        assert!((sol.z_star[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        let p = square_eq();
        let m = linearize(&p, &dv(&[1.0])).unwrap();
        let state = PenaltyState::initial(1, 0, 1.0, 1e8);
        assert!(build_subproblem(&m, &p, &state, 0.0, PenaltyMode::L1).is_err());
    }
}

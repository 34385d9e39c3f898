//! Non-convex problem description and evaluation.
//!
//! A [`ProblemDefinition`] has the form
//!
//! ```text
//! minimize   f0(z)
//! subject to g(z) = 0,  h(z) <= 0          (non-convex, linearized each iteration)
//!            affine(z) = 0, convex(z) <= 0 (passed to the convex subproblem as-is)
//!            lower <= z <= upper
//! ```
//!
//! The objective and the convex block are stored structurally so the
//! subproblem builder can forward them to a conic backend without
//! re-deriving them. The non-convex constraints are callbacks that supply
//! values and analytic Jacobians.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Result, ScvxError};

/// Affine scalar expression `sum(coeff * z[index]) + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn constant(constant: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant,
        }
    }

    /// `z[index]`
    pub fn var(index: usize) -> Self {
        Self::new(vec![(index, 1.0)], 0.0)
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(i, c)| acc + c * z[i])
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }
}

/// Second-order cone constraint `||vector(z)||_2 <= bound(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderCone {
    pub vector: Vec<AffineExpr>,
    pub bound: AffineExpr,
}

impl SecondOrderCone {
    pub fn violation(&self, z: &[f64]) -> f64 {
        let norm = self.vector.iter().map(|e| e.eval(z).powi(2)).sum::<f64>().sqrt();
        (norm - self.bound.eval(z)).max(0.0)
    }
}

/// Constraints that are already convex: affine equalities (`expr = 0`),
/// affine inequalities (`expr <= 0`) and second-order cones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexBlock {
    pub equalities: Vec<AffineExpr>,
    pub inequalities: Vec<AffineExpr>,
    pub cones: Vec<SecondOrderCone>,
}

impl ConvexBlock {
    pub fn is_empty(&self) -> bool {
        self.equalities.is_empty() && self.inequalities.is_empty() && self.cones.is_empty()
    }

    /// Largest violation over all rows (0 when feasible).
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|e| e.eval(z).abs());
        let ineq = self.inequalities.iter().map(|e| e.eval(z).max(0.0));
        let soc = self.cones.iter().map(|c| c.violation(z));
        eq.chain(ineq).chain(soc).fold(0.0, f64::max)
    }

    fn max_index(&self) -> Option<usize> {
        let affine = self
            .equalities
            .iter()
            .chain(&self.inequalities)
            .filter_map(AffineExpr::max_index);
        let cones = self.cones.iter().flat_map(|c| {
            c.vector
                .iter()
                .chain(std::iter::once(&c.bound))
                .filter_map(AffineExpr::max_index)
        });
        affine.chain(cones).max()
    }
}

/// Per-variable box bounds. Infinite entries mean "unbounded".
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Self {
        Self {
            lower: vec![lower; n],
            upper: vec![upper; n],
        }
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Convex quadratic objective `0.5 z'Hz + c'z + k`.
///
/// `hessian` holds the upper triangle (`row <= col`) as triplets; repeated
/// entries are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    hessian: Vec<(usize, usize, f64)>,
    linear: Vec<f64>,
    constant: f64,
}

impl QuadraticObjective {
    pub fn linear(linear: Vec<f64>) -> Self {
        Self {
            hessian: Vec::new(),
            linear,
            constant: 0.0,
        }
    }

    /// Fails if an entry lies below the diagonal or the Hessian is not
    /// positive semidefinite.
    pub fn new(hessian: Vec<(usize, usize, f64)>, linear: Vec<f64>, constant: f64) -> Result<Self> {
        let n = linear.len();
        if let Some(&(i, j, _)) = hessian.iter().find(|&&(i, j, _)| i > j || j >= n) {
            return Err(ScvxError::InvalidProblem(format!(
                "hessian entry ({i}, {j}) must be upper-triangular and within {n} variables"
            )));
        }
        let objective = Self {
            hessian,
            linear,
            constant,
        };
        if !objective.hessian.is_empty() {
            let min_eig = objective.dense_hessian().symmetric_eigenvalues().min();
            if min_eig < -1e-10 {
                return Err(ScvxError::InvalidProblem(format!(
                    "objective hessian is not positive semidefinite (min eigenvalue {min_eig:e})"
                )));
            }
        }
        Ok(objective)
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian_triplets(&self) -> &[(usize, usize, f64)] {
        &self.hessian
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        let quad: f64 = self
            .hessian
            .iter()
            .map(|&(i, j, h)| if i == j { 0.5 * h * z[i] * z[i] } else { h * z[i] * z[j] })
            .sum();
        let lin: f64 = self.linear.iter().zip(z).map(|(c, v)| c * v).sum();
        quad + lin + self.constant
    }

    pub fn gradient(&self, z: &[f64]) -> DVector<f64> {
        let mut grad = DVector::from_column_slice(&self.linear);
        for &(i, j, h) in &self.hessian {
            grad[i] += h * z[j];
            if i != j {
                grad[j] += h * z[i];
            }
        }
        grad
    }

    fn dense_hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, h) in &self.hessian {
            m[(i, j)] += h;
            if i != j {
                m[(j, i)] += h;
            }
        }
        m
    }
}

/// Vector-valued constraint function with an analytic Jacobian.
pub trait ConstraintFunction: Send + Sync {
    /// Number of output rows.
    fn dim(&self) -> usize;

    fn value(&self, z: &DVector<f64>) -> DVector<f64>;

    /// `dim() x z.len()` Jacobian.
    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64>;

    /// Override when the value falls out of the Jacobian computation for free.
    fn value_and_jacobian(&self, z: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        (self.value(z), self.jacobian(z))
    }
}

/// Closure-backed [`ConstraintFunction`].
pub struct FnConstraint<V, J> {
    dim: usize,
    value: V,
    jacobian: J,
}

impl<V, J> FnConstraint<V, J>
where
    V: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: V, jacobian: J) -> Self {
        Self { dim, value, jacobian }
    }
}

impl<V, J> ConstraintFunction for FnConstraint<V, J>
where
    V: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &DVector<f64>) -> DVector<f64> {
        (self.value)(z)
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        (self.jacobian)(z)
    }
}

/// Immutable description of a non-convex program. Cheap to clone.
#[derive(Clone)]
pub struct ProblemDefinition {
    name: String,
    n_z: usize,
    objective: QuadraticObjective,
    eq_constraints: Option<Arc<dyn ConstraintFunction>>,
    ineq_constraints: Option<Arc<dyn ConstraintFunction>>,
    convex: ConvexBlock,
    bounds: Option<Bounds>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("n_z", &self.n_z)
            .field("n_eq", &self.n_eq())
            .field("n_ineq", &self.n_ineq())
            .field("convex_equalities", &self.convex.equalities.len())
            .field("convex_inequalities", &self.convex.inequalities.len())
            .field("cones", &self.convex.cones.len())
            .field("bounded", &self.bounds.is_some())
            .finish()
    }
}

pub struct ProblemBuilder {
    name: String,
    objective: QuadraticObjective,
    eq_constraints: Option<Arc<dyn ConstraintFunction>>,
    ineq_constraints: Option<Arc<dyn ConstraintFunction>>,
    convex: ConvexBlock,
    bounds: Option<Bounds>,
}

impl ProblemBuilder {
    pub fn equalities(mut self, g: impl ConstraintFunction + 'static) -> Self {
        self.eq_constraints = Some(Arc::new(g));
        self
    }

    pub fn inequalities(mut self, h: impl ConstraintFunction + 'static) -> Self {
        self.ineq_constraints = Some(Arc::new(h));
        self
    }

    pub fn convex(mut self, convex: ConvexBlock) -> Self {
        self.convex = convex;
        self
    }

    pub fn bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn build(self) -> Result<ProblemDefinition> {
        let n_z = self.objective.dim();
        if n_z == 0 {
            return Err(ScvxError::InvalidProblem("problem has no variables".into()));
        }
        if let Some(i) = self.convex.max_index().filter(|&i| i >= n_z) {
            return Err(ScvxError::InvalidProblem(format!(
                "convex block references variable {i} but n_z = {n_z}"
            )));
        }
        if let Some(b) = &self.bounds {
            for (what, len) in [("lower bounds", b.lower.len()), ("upper bounds", b.upper.len())] {
                if len != n_z {
                    return Err(ScvxError::DimensionMismatch {
                        what,
                        expected: n_z,
                        got: len,
                    });
                }
            }
            if b.lower.iter().zip(&b.upper).any(|(lo, hi)| lo > hi) {
                return Err(ScvxError::InvalidProblem("lower bound exceeds upper bound".into()));
            }
        }
        Ok(ProblemDefinition {
            name: self.name,
            n_z,
            objective: self.objective,
            eq_constraints: self.eq_constraints,
            ineq_constraints: self.ineq_constraints,
            convex: self.convex,
            bounds: self.bounds,
        })
    }
}

/// Gradient and Jacobians at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobians {
    pub grad_f0: DVector<f64>,
    pub jac_g: DMatrix<f64>,
    pub jac_h: DMatrix<f64>,
}

/// Values of the objective and non-convex constraints at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub z: DVector<f64>,
    pub f0: f64,
    pub g: DVector<f64>,
    pub h: DVector<f64>,
    jacobians: Option<Jacobians>,
}

impl Evaluation {
    /// Computes the Jacobians on first use and caches them.
    pub fn jacobians(&mut self, problem: &ProblemDefinition) -> Result<&Jacobians> {
        if self.jacobians.is_none() {
            self.jacobians = Some(problem.jacobians(&self.z)?);
        }
        Ok(self.jacobians.as_ref().expect("populated above"))
    }
}

impl ProblemDefinition {
    pub fn builder(name: impl Into<String>, objective: QuadraticObjective) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            objective,
            eq_constraints: None,
            ineq_constraints: None,
            convex: ConvexBlock::default(),
            bounds: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_eq(&self) -> usize {
        self.eq_constraints.as_ref().map_or(0, |g| g.dim())
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq_constraints.as_ref().map_or(0, |h| h.dim())
    }

    pub fn objective(&self) -> &QuadraticObjective {
        &self.objective
    }

    pub fn convex_block(&self) -> &ConvexBlock {
        &self.convex
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    fn check_len(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.n_z {
            return Err(ScvxError::DimensionMismatch {
                what: "decision vector",
                expected: self.n_z,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `f0`, `g`, `h` at `z`. Jacobians are deferred to [`Evaluation::jacobians`].
    pub fn evaluate(&self, z: &DVector<f64>) -> Result<Evaluation> {
        self.check_len(z)?;
        let f0 = self.objective.value(z.as_slice());
        ensure_finite(std::iter::once(&f0), Block::Objective)?;
        let g = eval_block(self.eq_constraints.as_deref(), z, Block::Equality)?;
        let h = eval_block(self.ineq_constraints.as_deref(), z, Block::Inequality)?;
        Ok(Evaluation {
            z: z.clone(),
            f0,
            g,
            h,
            jacobians: None,
        })
    }

    /// Evaluation with Jacobians already populated, sharing work between
    /// values and derivatives where the constraint supports it.
    pub fn evaluate_with_jacobians(&self, z: &DVector<f64>) -> Result<Evaluation> {
        self.check_len(z)?;
        let f0 = self.objective.value(z.as_slice());
        ensure_finite(std::iter::once(&f0), Block::Objective)?;
        let grad_f0 = self.objective.gradient(z.as_slice());
        let (g, jac_g) = eval_block_jac(self.eq_constraints.as_deref(), z, Block::Equality)?;
        let (h, jac_h) = eval_block_jac(self.ineq_constraints.as_deref(), z, Block::Inequality)?;
        Ok(Evaluation {
            z: z.clone(),
            f0,
            g,
            h,
            jacobians: Some(Jacobians { grad_f0, jac_g, jac_h }),
        })
    }

    pub fn jacobians(&self, z: &DVector<f64>) -> Result<Jacobians> {
        self.check_len(z)?;
        let grad_f0 = self.objective.gradient(z.as_slice());
        ensure_finite(grad_f0.iter(), Block::Objective)?;
        let jac_g = jac_block(self.eq_constraints.as_deref(), z, Block::Equality)?;
        let jac_h = jac_block(self.ineq_constraints.as_deref(), z, Block::Inequality)?;
        Ok(Jacobians { grad_f0, jac_g, jac_h })
    }

    /// Violation of the convex block and bounds (not the non-convex rows).
    pub fn convex_violation(&self, z: &[f64]) -> f64 {
        let bounds = self.bounds.as_ref().map_or(0.0, |b| b.max_violation(z));
        self.convex.max_violation(z).max(bounds)
    }
}

fn ensure_finite<'a>(values: impl Iterator<Item = &'a f64>, block: Block) -> Result<()> {
    match values.enumerate().find(|(_, v)| !v.is_finite()) {
        Some((index, _)) => Err(ScvxError::NonFinite { block, index }),
        None => Ok(()),
    }
}

fn check_rows(got: usize, expected: usize, what: &'static str) -> Result<()> {
    if got != expected {
        return Err(ScvxError::DimensionMismatch { what, expected, got });
    }
    Ok(())
}

fn eval_block(f: Option<&dyn ConstraintFunction>, z: &DVector<f64>, block: Block) -> Result<DVector<f64>> {
    let Some(f) = f else {
        return Ok(DVector::zeros(0));
    };
    let v = f.value(z);
    check_rows(v.len(), f.dim(), "constraint output")?;
    ensure_finite(v.iter(), block)?;
    Ok(v)
}

fn jac_block(f: Option<&dyn ConstraintFunction>, z: &DVector<f64>, block: Block) -> Result<DMatrix<f64>> {
    let Some(f) = f else {
        return Ok(DMatrix::zeros(0, z.len()));
    };
    let j = f.jacobian(z);
    check_rows(j.nrows(), f.dim(), "jacobian rows")?;
    check_rows(j.ncols(), z.len(), "jacobian columns")?;
    // column-major flat index
    ensure_finite(j.iter(), block)?;
    Ok(j)
}

fn eval_block_jac(
    f: Option<&dyn ConstraintFunction>,
    z: &DVector<f64>,
    block: Block,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let Some(f) = f else {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, z.len())));
    };
    let (v, j) = f.value_and_jacobian(z);
    check_rows(v.len(), f.dim(), "constraint output")?;
    check_rows(j.nrows(), f.dim(), "jacobian rows")?;
    check_rows(j.ncols(), z.len(), "jacobian columns")?;
    ensure_finite(v.iter(), block)?;
    ensure_finite(j.iter(), block)?;
    Ok((v, j))
}

/// Worst mismatch between analytic and central-difference derivatives.
///
/// Each entry compares `|analytic - fd| / max(1, |fd|)`, so large entries
/// are judged relatively and small ones absolutely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianReport {
    pub objective: f64,
    pub equality: f64,
    pub inequality: f64,
}

impl JacobianReport {
    pub fn max_error(&self) -> f64 {
        self.objective.max(self.equality).max(self.inequality)
    }
}

/// Compares the analytic derivatives of `problem` with central differences.
pub fn check_jacobians(problem: &ProblemDefinition, z: &DVector<f64>, step: f64) -> Result<JacobianReport> {
    if !(step > 0.0) {
        return Err(ScvxError::InvalidConfig(format!(
            "finite-difference step must be > 0, got {step}"
        )));
    }
    let analytic = problem.jacobians(z)?;
    let n = problem.n_z();
    let mut fd_grad = DVector::zeros(n);
    let mut fd_g = DMatrix::zeros(problem.n_eq(), n);
    let mut fd_h = DMatrix::zeros(problem.n_ineq(), n);

    for j in 0..n {
        let mut plus = z.clone();
        let mut minus = z.clone();
        plus[j] += step;
        minus[j] -= step;
        // the representable spacing, not the nominal one
        let width = plus[j] - minus[j];
        let ep = problem.evaluate(&plus)?;
        let em = problem.evaluate(&minus)?;
        fd_grad[j] = (ep.f0 - em.f0) / width;
        fd_g.set_column(j, &((&ep.g - &em.g) / width));
        fd_h.set_column(j, &((&ep.h - &em.h) / width));
    }

    Ok(JacobianReport {
        objective: mixed_error(analytic.grad_f0.iter(), fd_grad.iter()),
        equality: mixed_error(analytic.jac_g.iter(), fd_g.iter()),
        inequality: mixed_error(analytic.jac_h.iter(), fd_h.iter()),
    })
}

fn mixed_error<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ProblemDefinition {
        ProblemDefinition::builder("square", QuadraticObjective::linear(vec![1.0]))
            .equalities(FnConstraint::new(
                1,
                |z: &DVector<f64>| DVector::from_element(1, z[0] * z[0]),
                |z: &DVector<f64>| DMatrix::from_element(1, 1, 2.0 * z[0]),
            ))
            .build()
            .unwrap()
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = square();
        let err = p.evaluate(&DVector::zeros(2)).unwrap_err();
        assert!(matches!(
            err,
            ScvxError::DimensionMismatch {
                expected: 1,
                got: 2,
                ..
            }
        ));
    }

    #[test]
    fn non_finite_output_reports_component() {
        let p = ProblemDefinition::builder("nan", QuadraticObjective::linear(vec![0.0, 0.0]))
            .inequalities(FnConstraint::new(
                3,
                |z: &DVector<f64>| DVector::from_vec(vec![0.0, z[0].ln(), 1.0]),
                |_: &DVector<f64>| DMatrix::zeros(3, 2),
            ))
            .build()
            .unwrap();
        let err = p.evaluate(&DVector::from_vec(vec![-1.0, 0.0])).unwrap_err();
        assert!(matches!(
            err,
            ScvxError::NonFinite {
                block: Block::Inequality,
                index: 1
            }
        ));
    }

    #[test]
    fn wrong_output_length_is_caught() {
        let p = ProblemDefinition::builder("bad", QuadraticObjective::linear(vec![0.0]))
            .equalities(FnConstraint::new(
                2,
                |_: &DVector<f64>| DVector::zeros(1),
                |_: &DVector<f64>| DMatrix::zeros(2, 1),
            ))
            .build()
            .unwrap();
        assert!(p.evaluate(&DVector::zeros(1)).is_err());
    }

    #[test]
    fn jacobians_are_lazy_and_cached() {
        let p = square();
        let mut e = p.evaluate(&DVector::from_element(1, 3.0)).unwrap();
        assert!(e.jacobians.is_none());
        assert_eq!(e.jacobians(&p).unwrap().jac_g[(0, 0)], 6.0);
        assert!(e.jacobians.is_some());
        let full = p.evaluate_with_jacobians(&DVector::from_element(1, 3.0)).unwrap();
        assert_eq!(full, e);
    }

    #[test]
    fn affine_constraint_has_exact_fd_jacobian() {
        let p = ProblemDefinition::builder("affine", QuadraticObjective::linear(vec![2.0]))
            .equalities(FnConstraint::new(
                1,
                |z: &DVector<f64>| DVector::from_element(1, 3.0 * z[0] + 1.0),
                |_: &DVector<f64>| DMatrix::from_element(1, 1, 3.0),
            ))
            .build()
            .unwrap();
        for z in [-7.5, 0.0, 0.3, 12.0] {
            let r = check_jacobians(&p, &DVector::from_element(1, z), 1e-3).unwrap();
            assert!(r.max_error() <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn quadratic_objective_value_and_gradient() {
        // 0.5*(2 z0^2 + 2*2*z0 z1 + 4 z1^2) with H = [[2, 2], [2, 4]]
        let f = QuadraticObjective::new(vec![(0, 0, 2.0), (0, 1, 2.0), (1, 1, 4.0)], vec![1.0, -1.0], 0.5).unwrap();
        let z = [1.0, 2.0];
        let expected = 0.5 * (2.0 + 2.0 * 2.0 * 2.0 + 4.0 * 4.0) + 1.0 - 2.0 + 0.5;
        assert!((f.value(&z) - expected).abs() < 1e-14);
        let g = f.gradient(&z);
        assert_eq!(g.as_slice(), &[2.0 + 4.0 + 1.0, 2.0 + 8.0 - 1.0]);
    }

    #[test]
    fn indefinite_hessian_is_rejected() {
        assert!(QuadraticObjective::new(vec![(0, 0, 1.0), (1, 1, -1.0)], vec![0.0, 0.0], 0.0).is_err());
        assert!(QuadraticObjective::new(vec![(1, 0, 1.0)], vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn convex_block_index_is_validated() {
        let convex = ConvexBlock {
            inequalities: vec![AffineExpr::var(5)],
            ..Default::default()
        };
        let res = ProblemDefinition::builder("x", QuadraticObjective::linear(vec![0.0; 2]))
            .convex(convex)
            .build();
        assert!(res.is_err());
    }

    #[test]
    fn soc_violation() {
        let cone = SecondOrderCone {
            vector: vec![AffineExpr::var(0), AffineExpr::var(1)],
            bound: AffineExpr::var(2),
        };
        assert_eq!(cone.violation(&[3.0, 4.0, 5.0]), 0.0);
        assert!((cone.violation(&[3.0, 4.0, 4.0]) - 1.0).abs() < 1e-15);
    }
}

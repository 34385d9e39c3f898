use crate::problem::{AffineExpr, SecondOrderCone};

/// Origin of a constraint row, kept for inspection and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Relaxed linearization of a non-convex constraint.
    Linearized,
    /// Sign restriction on a slack variable.
    SlackSign,
    TrustRegion,
    Bound,
    /// Copied from the problem's convex block.
    Convex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub expr: AffineExpr,
    pub kind: RowKind,
}

/// Canonical convex program handed to a backend:
///
/// ```text
/// minimize   0.5 x'Px + q'x + constant
/// subject to equalities(x) = 0, inequalities(x) <= 0, x in cones
/// ```
///
/// `quadratic` lists the upper triangle of `P` (`row <= col`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub linear: Vec<f64>,
    pub constant: f64,
    pub equalities: Vec<LinearRow>,
    pub inequalities: Vec<LinearRow>,
    pub cones: Vec<SecondOrderCone>,
}

impl ConicProgram {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|&(i, j, p)| if i == j { 0.5 * p * x[i] * x[i] } else { p * x[i] * x[j] })
            .sum();
        let lin: f64 = self.linear.iter().zip(x).map(|(q, v)| q * v).sum();
        quad + lin + self.constant
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|r| r.expr.eval(x).abs());
        let ineq = self.inequalities.iter().map(|r| r.expr.eval(x).max(0.0));
        let soc = self.cones.iter().map(|c| c.violation(x));
        eq.chain(ineq).chain(soc).fold(0.0, f64::max)
    }

    pub fn rows_of_kind(&self, kind: RowKind) -> impl Iterator<Item = &LinearRow> {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .filter(move |r| r.kind == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_and_violation() {
        let p = ConicProgram {
            n_vars: 2,
            quadratic: vec![(0, 0, 2.0), (0, 1, 1.0)],
            linear: vec![1.0, 0.0],
            constant: 3.0,
            equalities: vec![LinearRow {
                expr: AffineExpr::new(vec![(0, 1.0), (1, 1.0)], -1.0),
                kind: RowKind::Convex,
            }],
            inequalities: vec![LinearRow {
                expr: AffineExpr::new(vec![(1, 1.0)], -0.25),
                kind: RowKind::TrustRegion,
            }],
            cones: vec![],
        };
        let x = [0.5, 0.5];
        // 0.5*2*0.25 + 1*0.25 + 0.5 + 3
        assert!((p.objective(&x) - 4.0).abs() < 1e-15);
        assert!((p.max_violation(&x) - 0.25).abs() < 1e-15);
        assert_eq!(p.rows_of_kind(RowKind::TrustRegion).count(), 1);
    }
}

//! Two-variable problem with a quartic equality constraint, a classic
//! trigger of the crawling phenomenon in SCP methods.
//!
//! ```text
//! minimize   z1 + z2
//! subject to z2 - z1^4 - 2 z1^3 + 1.2 z1^2 + 2 z1 = 0
//!            -z2 - (4/3) z1 - 2/3 <= 0
//!            -2 <= z <= 2
//! ```

use nalgebra::{DMatrix, DVector};

use crate::problem::{AffineExpr, Bounds, ConvexBlock, FnConstraint, ProblemDefinition, QuadraticObjective};

pub const INITIAL_REFERENCE: [f64; 2] = [1.5, 1.5];

/// `z2` on the equality curve as a function of `z1`.
pub fn curve(z1: f64) -> f64 {
    z1.powi(4) + 2.0 * z1.powi(3) - 1.2 * z1 * z1 - 2.0 * z1
}

pub fn equality_residual(z1: f64, z2: f64) -> f64 {
    z2 - z1.powi(4) - 2.0 * z1.powi(3) + 1.2 * z1 * z1 + 2.0 * z1
}

fn linear_inequality(z1: f64, z2: f64) -> f64 {
    -z2 - 4.0 / 3.0 * z1 - 2.0 / 3.0
}

pub fn example1_problem() -> ProblemDefinition {
    let g = FnConstraint::new(
        1,
        |z: &DVector<f64>| DVector::from_element(1, equality_residual(z[0], z[1])),
        |z: &DVector<f64>| {
            let z1 = z[0];
            let d1 = -4.0 * z1.powi(3) - 6.0 * z1 * z1 + 2.4 * z1 + 2.0;
            DMatrix::from_row_slice(1, 2, &[d1, 1.0])
        },
    );
    let convex = ConvexBlock {
        inequalities: vec![AffineExpr::new(vec![(0, -4.0 / 3.0), (1, -1.0)], -2.0 / 3.0)],
        ..Default::default()
    };
    ProblemDefinition::builder("example1", QuadraticObjective::linear(vec![1.0, 1.0]))
        .equalities(g)
        .convex(convex)
        .bounds(Bounds::uniform(2, -2.0, 2.0))
        .build()
        .expect("example 1 is well formed")
}

pub fn initial_reference() -> DVector<f64> {
    DVector::from_column_slice(&INITIAL_REFERENCE)
}

/// Global minimizer by exhaustive search along the equality curve.
///
/// The equality is eliminated (`z2 = curve(z1)`), `z1` is scanned on
/// `grid_n` points over `[-2, 2]`, infeasible points are dropped, and the
/// best point is refined by bisection: on the objective's derivative when
/// the minimizer is interior, or on the active inequality otherwise.
pub fn brute_force_example1(grid_n: usize) -> ([f64; 2], f64) {
    assert!(grid_n >= 2, "grid needs at least two points");
    let feasible = |z1: f64| {
        let z2 = curve(z1);
        (-2.0..=2.0).contains(&z1) && (-2.0..=2.0).contains(&z2) && linear_inequality(z1, z2) <= 0.0
    };
    let objective = |z1: f64| z1 + curve(z1);
    let step = 4.0 / (grid_n - 1) as f64;
    let at = |i: usize| -2.0 + step * i as f64;

    let (best_i, _) = (0..grid_n)
        .filter(|&i| feasible(at(i)))
        .map(|i| (i, objective(at(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("origin is feasible");

    let mut z1 = at(best_i);
    let lo = at(best_i.saturating_sub(1));
    let hi = at((best_i + 1).min(grid_n - 1));
    let slope = |x: f64| 4.0 * x.powi(3) + 6.0 * x * x - 2.4 * x - 1.0;

    if feasible(lo) && feasible(hi) && slope(lo) < 0.0 && slope(hi) > 0.0 {
        z1 = bisect(lo, hi, slope);
    } else if !feasible(lo) || !feasible(hi) {
        // minimizer sits on the edge of the feasible set
        let outside = if !feasible(lo) { lo } else { hi };
        let edge = bisect_boundary(z1, outside, feasible);
        if objective(edge) < objective(z1) {
            z1 = edge;
        }
    }
    let z = [z1, curve(z1)];
    (z, z[0] + z[1])
}

fn bisect(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn bisect_boundary(mut inside: f64, mut outside: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (inside + outside);
        if feasible(m) {
            inside = m;
        } else {
            outside = m;
        }
    }
    inside
}

//! Planar quad-rotor path planning around two cylindrical obstacles.
//!
//! State `x = (p, v)` in R^6, control `u = (T, Gamma)` in R^4 with
//! zero-order hold over each interval. Gravity acts along the first axis and
//! the vehicle is confined to the plane `p_1 = 0`. The dynamics
//!
//! ```text
//! p' = v
//! v' = T / m - k_D |v| v + g
//! ```
//!
//! are integrated with fixed-step RK4. The state-transition sensitivities
//! `A = dx+/dx` and `B = dx+/du` are propagated with the same RK4 stages,
//! so they are the exact derivatives of the discrete map.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Matrix6x4, SMatrix, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Block, Result, ScvxError};
use crate::problem::{
    AffineExpr, ConstraintFunction, ConvexBlock, ProblemDefinition, QuadraticObjective, SecondOrderCone,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadRotorParams {
    /// kg
    pub mass: f64,
    /// 1/m
    pub drag: f64,
    /// m/s^2
    pub gravity: [f64; 3],
    /// N
    pub thrust_min: f64,
    /// N
    pub thrust_max: f64,
    /// rad
    pub tilt_max: f64,
    /// s
    pub final_time: f64,
    pub nodes: usize,
    pub x_initial: [f64; 6],
    pub x_final: [f64; 6],
    pub obstacles: Vec<Obstacle>,
    /// RK4 steps per discretization interval.
    pub substeps: usize,
}

impl Default for QuadRotorParams {
    fn default() -> Self {
        Self {
            mass: 0.3,
            drag: 0.5,
            gravity: [-9.81, 0.0, 0.0],
            thrust_min: 1.0,
            thrust_max: 4.0,
            tilt_max: std::f64::consts::FRAC_PI_4,
            final_time: 5.0,
            nodes: 31,
            x_initial: [0.0, 0.0, 0.0, 0.0, 0.5, 0.0],
            x_final: [0.0, 10.0, 0.0, 0.0, 0.5, 0.0],
            obstacles: vec![
                Obstacle {
                    center: [0.0, 3.0, -0.2],
                    radius: 1.0,
                },
                Obstacle {
                    center: [0.0, 7.0, 0.2],
                    radius: 1.0,
                },
            ],
            substeps: 10,
        }
    }
}

impl QuadRotorParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(ScvxError::InvalidProblem(m.into()));
        if self.nodes < 2 {
            return fail("need at least two nodes");
        }
        if !(self.thrust_min < self.thrust_max) {
            return fail("thrust_min must be below thrust_max");
        }
        if !(self.mass > 0.0 && self.final_time > 0.0) {
            return fail("mass and final_time must be positive");
        }
        if self.substeps == 0 {
            return fail("substeps must be at least 1");
        }
        if self.obstacles.iter().any(|o| !(o.radius > 0.0)) {
            return fail("obstacle radius must be positive");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.final_time / (self.nodes - 1) as f64
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }

    /// Thrust vector that cancels gravity.
    pub fn hover_thrust(&self) -> Vector3<f64> {
        -self.gravity() * self.mass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationResult {
    pub x_next: Vector6<f64>,
    /// `dx_next / dx`
    pub a: Matrix6<f64>,
    /// `dx_next / du`
    pub b: Matrix6x4<f64>,
    /// `x_next - A x - B u`
    pub c: Vector6<f64>,
}

/// State together with its sensitivities, integrated as one ODE.
#[derive(Clone, Copy)]
struct Augmented {
    x: Vector6<f64>,
    phi_x: Matrix6<f64>,
    phi_u: Matrix6x4<f64>,
}

impl Add for Augmented {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            x: self.x + o.x,
            phi_x: self.phi_x + o.phi_x,
            phi_u: self.phi_u + o.phi_u,
        }
    }
}

impl Mul<f64> for Augmented {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            x: self.x * s,
            phi_x: self.phi_x * s,
            phi_u: self.phi_u * s,
        }
    }
}

struct Dynamics {
    thrust_accel: Vector3<f64>,
    gravity: Vector3<f64>,
    drag: f64,
    inv_mass: f64,
}

impl Dynamics {
    fn new(u: &SMatrix<f64, 4, 1>, params: &QuadRotorParams) -> Self {
        let inv_mass = 1.0 / params.mass;
        Self {
            thrust_accel: Vector3::new(u[0], u[1], u[2]) * inv_mass,
            gravity: params.gravity(),
            drag: params.drag,
            inv_mass,
        }
    }

    fn rhs(&self, x: &Vector6<f64>) -> Vector6<f64> {
        let v: Vector3<f64> = x.fixed_rows::<3>(3).into();
        let accel = self.thrust_accel - v * (self.drag * v.norm()) + self.gravity;
        let mut out = Vector6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&v);
        out.fixed_rows_mut::<3>(3).copy_from(&accel);
        out
    }

    /// `d/dv (-k |v| v) = -k (|v| I + v v' / |v|)`, zero at `v = 0`.
    fn drag_jacobian(&self, v: &Vector3<f64>) -> Matrix3<f64> {
        let speed = v.norm();
        if speed == 0.0 {
            return Matrix3::zeros();
        }
        -(Matrix3::identity() * speed + v * v.transpose() / speed) * self.drag
    }

    fn augmented_rhs(&self, y: &Augmented) -> Augmented {
        let v: Vector3<f64> = y.x.fixed_rows::<3>(3).into();
        let mut fx = Matrix6::zeros();
        fx.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
        fx.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.drag_jacobian(&v));
        let mut fu = Matrix6x4::zeros();
        fu.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(Matrix3::identity() * self.inv_mass));
        Augmented {
            x: self.rhs(&y.x),
            phi_x: fx * y.phi_x,
            phi_u: fx * y.phi_u + fu,
        }
    }
}

fn rk4<T: Copy + Add<Output = T> + Mul<f64, Output = T>>(y: T, h: f64, f: impl Fn(&T) -> T) -> T {
    let k1 = f(&y);
    let k2 = f(&(y + k1 * (0.5 * h)));
    let k3 = f(&(y + k2 * (0.5 * h)));
    let k4 = f(&(y + k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates one interval of length `dt` with constant control `u` and
/// returns the end state and its linearization.
pub fn discretize_dynamics(
    x: &Vector6<f64>,
    u: &SMatrix<f64, 4, 1>,
    params: &QuadRotorParams,
    dt: f64,
    substeps: usize,
) -> Result<DiscretizationResult> {
    if !(dt > 0.0) || substeps == 0 {
        return Err(ScvxError::InvalidConfig("dt must be positive and substeps >= 1".into()));
    }
    let dynamics = Dynamics::new(u, params);
    let h = dt / substeps as f64;
    let mut y = Augmented {
        x: *x,
        phi_x: Matrix6::identity(),
        phi_u: Matrix6x4::zeros(),
    };
    for _ in 0..substeps {
        y = rk4(y, h, |s| dynamics.augmented_rhs(s));
    }
    if let Some(index) = y.x.iter().position(|v| !v.is_finite()) {
        return Err(ScvxError::NonFinite {
            block: Block::Dynamics,
            index,
        });
    }
    Ok(DiscretizationResult {
        x_next: y.x,
        a: y.phi_x,
        b: y.phi_u,
        c: y.x - y.phi_x * x - y.phi_u * u,
    })
}

/// State-only propagation, without sensitivities.
pub fn propagate(
    x: &Vector6<f64>,
    u: &SMatrix<f64, 4, 1>,
    params: &QuadRotorParams,
    dt: f64,
    substeps: usize,
) -> Vector6<f64> {
    let dynamics = Dynamics::new(u, params);
    let h = dt / substeps as f64;
    (0..substeps).fold(*x, |y, _| rk4(y, h, |s| dynamics.rhs(s)))
}

/// Index map of the stacked decision vector `[x_1..x_N, u_1..u_N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadLayout {
    pub nodes: usize,
}

impl QuadLayout {
    pub const NX: usize = 6;
    pub const NU: usize = 4;

    /// Offset of `x_s` (0-based node).
    pub fn state(&self, s: usize) -> usize {
        Self::NX * s
    }

    /// Offset of `u_s` (0-based node).
    pub fn control(&self, s: usize) -> usize {
        Self::NX * self.nodes + Self::NU * s
    }

    pub fn thrust_magnitude(&self, s: usize) -> usize {
        self.control(s) + 3
    }

    pub fn n_z(&self) -> usize {
        (Self::NX + Self::NU) * self.nodes
    }

    pub fn x(&self, z: &DVector<f64>, s: usize) -> Vector6<f64> {
        Vector6::from_column_slice(&z.as_slice()[self.state(s)..self.state(s) + Self::NX])
    }

    pub fn u(&self, z: &DVector<f64>, s: usize) -> SMatrix<f64, 4, 1> {
        SMatrix::<f64, 4, 1>::from_column_slice(&z.as_slice()[self.control(s)..self.control(s) + Self::NU])
    }

    pub fn position(&self, z: &DVector<f64>, s: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&z.as_slice()[self.state(s)..self.state(s) + 3])
    }
}

/// Defects `x_{s+1} - Phi(x_s, u_s)` for `s = 1..N-1`.
struct DynamicsDefects {
    params: QuadRotorParams,
    layout: QuadLayout,
}

impl DynamicsDefects {
    fn intervals(&self) -> usize {
        self.layout.nodes - 1
    }

    fn discretize(&self, z: &DVector<f64>, s: usize) -> DiscretizationResult {
        let l = &self.layout;
        // failures surface as NaN and are caught by the evaluator
        discretize_dynamics(
            &l.x(z, s),
            &l.u(z, s),
            &self.params,
            self.params.dt(),
            self.params.substeps,
        )
        .unwrap_or_else(|_| DiscretizationResult {
            x_next: Vector6::repeat(f64::NAN),
            a: Matrix6::repeat(f64::NAN),
            b: Matrix6x4::repeat(f64::NAN),
            c: Vector6::repeat(f64::NAN),
        })
    }
}

impl ConstraintFunction for DynamicsDefects {
    fn dim(&self) -> usize {
        QuadLayout::NX * self.intervals()
    }

    fn value(&self, z: &DVector<f64>) -> DVector<f64> {
        let l = &self.layout;
        let dt = self.params.dt();
        let mut out = DVector::zeros(self.dim());
        for s in 0..self.intervals() {
            let next = propagate(&l.x(z, s), &l.u(z, s), &self.params, dt, self.params.substeps);
            out.fixed_rows_mut::<6>(6 * s).copy_from(&(l.x(z, s + 1) - next));
        }
        out
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        self.value_and_jacobian(z).1
    }

    fn value_and_jacobian(&self, z: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let l = &self.layout;
        let mut value = DVector::zeros(self.dim());
        let mut jac = DMatrix::zeros(self.dim(), l.n_z());
        for s in 0..self.intervals() {
            let d = self.discretize(z, s);
            let row = 6 * s;
            value.fixed_rows_mut::<6>(row).copy_from(&(l.x(z, s + 1) - d.x_next));
            jac.fixed_view_mut::<6, 6>(row, l.state(s + 1))
                .copy_from(&Matrix6::identity());
            jac.fixed_view_mut::<6, 6>(row, l.state(s)).copy_from(&(-d.a));
            jac.fixed_view_mut::<6, 4>(row, l.control(s)).copy_from(&(-d.b));
        }
        (value, jac)
    }
}

/// `R_j - |p_s - c_j| <= 0` at interior nodes, ordered node-major.
struct ObstacleAvoidance {
    obstacles: Vec<Obstacle>,
    layout: QuadLayout,
}

impl ObstacleAvoidance {
    fn rows(&self) -> impl Iterator<Item = (usize, &Obstacle)> {
        (1..self.layout.nodes.saturating_sub(1)).flat_map(move |s| self.obstacles.iter().map(move |o| (s, o)))
    }
}

impl ConstraintFunction for ObstacleAvoidance {
    fn dim(&self) -> usize {
        self.layout.nodes.saturating_sub(2) * self.obstacles.len()
    }

    fn value(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.rows()
                .map(|(s, o)| o.radius - (self.layout.position(z, s) - Vector3::from(o.center)).norm()),
        )
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.dim(), self.layout.n_z());
        for (row, (s, o)) in self.rows().enumerate() {
            let d = self.layout.position(z, s) - Vector3::from(o.center);
            let dist = d.norm();
            if dist > 0.0 {
                for i in 0..3 {
                    jac[(row, self.layout.state(s) + i)] = -d[i] / dist;
                }
            }
        }
        jac
    }
}

pub fn example2_problem(params: &QuadRotorParams) -> Result<ProblemDefinition> {
    params.validate()?;
    let n = params.nodes;
    let layout = QuadLayout { nodes: n };
    let dt = params.dt();

    let mut linear = vec![0.0; layout.n_z()];
    for s in 0..n {
        linear[layout.thrust_magnitude(s)] = dt;
    }

    let mut convex = ConvexBlock::default();
    fn pin(offset: usize, values: &[f64]) -> Vec<AffineExpr> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| AffineExpr::new(vec![(offset + i, 1.0)], -v))
            .collect()
    }
    let hover = params.hover_thrust();
    convex.equalities.extend(pin(layout.state(0), &params.x_initial));
    convex.equalities.extend(pin(layout.state(n - 1), &params.x_final));
    convex.equalities.extend(pin(layout.control(0), hover.as_slice()));
    convex.equalities.extend(pin(layout.control(n - 1), hover.as_slice()));

    let cos_tilt = params.tilt_max.cos();
    for s in 0..n {
        let t = layout.control(s);
        let gamma = layout.thrust_magnitude(s);
        // planar flight: first position component stays at zero
        convex.equalities.push(AffineExpr::var(layout.state(s)));
        convex.cones.push(SecondOrderCone {
            vector: (0..3).map(|i| AffineExpr::var(t + i)).collect(),
            bound: AffineExpr::var(gamma),
        });
        convex
            .inequalities
            .push(AffineExpr::new(vec![(gamma, -1.0)], params.thrust_min));
        convex
            .inequalities
            .push(AffineExpr::new(vec![(gamma, 1.0)], -params.thrust_max));
        convex
            .inequalities
            .push(AffineExpr::new(vec![(gamma, cos_tilt), (t, -1.0)], 0.0));
    }

    let mut builder = ProblemDefinition::builder("example2", QuadraticObjective::linear(linear))
        .equalities(DynamicsDefects {
            params: params.clone(),
            layout,
        })
        .convex(convex);
    if !params.obstacles.is_empty() && n > 2 {
        builder = builder.inequalities(ObstacleAvoidance {
            obstacles: params.obstacles.clone(),
            layout,
        });
    }
    builder.build()
}

/// Straight line between the boundary states with hover thrust everywhere.
pub fn example2_initial_reference(params: &QuadRotorParams) -> DVector<f64> {
    let n = params.nodes;
    let layout = QuadLayout { nodes: n };
    let mut z = DVector::zeros(layout.n_z());
    let x0 = Vector6::from(params.x_initial);
    let x1 = Vector6::from(params.x_final);
    let hover = params.hover_thrust();
    for s in 0..n {
        let t = s as f64 / (n - 1) as f64;
        z.rows_mut(layout.state(s), 6).copy_from(&(x0 + (x1 - x0) * t));
        z.rows_mut(layout.control(s), 3).copy_from(&hover);
        z[layout.thrust_magnitude(s)] = hover.norm();
    }
    z
}

/// Largest per-interval defect after re-integrating each interval with
/// `substeps` RK4 steps.
pub fn reintegration_defect(params: &QuadRotorParams, z: &DVector<f64>, substeps: usize) -> f64 {
    let layout = QuadLayout { nodes: params.nodes };
    (0..params.nodes - 1)
        .map(|s| {
            let next = propagate(&layout.x(z, s), &layout.u(z, s), params, params.dt(), substeps);
            (layout.x(z, s + 1) - next).amax()
        })
        .fold(0.0, f64::max)
}

/// Propagates `x_initial` through all controls and returns the distance of
/// the end state from `x_final`.
pub fn terminal_error(params: &QuadRotorParams, z: &DVector<f64>, substeps: usize) -> f64 {
    let layout = QuadLayout { nodes: params.nodes };
    let end = (0..params.nodes - 1).fold(Vector6::from(params.x_initial), |x, s| {
        propagate(&x, &layout.u(z, s), params, params.dt(), substeps)
    });
    (end - Vector6::from(params.x_final)).norm()
}

/// Smallest `|p_s - c_j| - R_j` over interior nodes.
pub fn min_obstacle_margin(params: &QuadRotorParams, z: &DVector<f64>) -> f64 {
    let layout = QuadLayout { nodes: params.nodes };
    (1..params.nodes - 1)
        .flat_map(|s| {
            params
                .obstacles
                .iter()
                .map(move |o| (layout.position(z, s) - Vector3::from(o.center)).norm() - o.radius)
        })
        .fold(f64::INFINITY, f64::min)
}

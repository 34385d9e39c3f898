//! Penalty functions, penalized objectives and the infeasibility measure.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScvxError};
use crate::problem::{Evaluation, ProblemDefinition};

/// Which penalty the objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    /// `lambda.g + w/2 |g|^2 + mu.[h]+ + w/2 |[h]+|^2`
    AugmentedLagrangian,
    /// `w |g|_1 + w |[h]+|_1`; multipliers are ignored.
    L1,
}

/// Multipliers, weight and the stationarity tolerances of the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub lambda: DVector<f64>,
    pub mu: DVector<f64>,
    pub w: f64,
    /// Stationarity tolerance; starts at +inf.
    pub delta: f64,
    /// Rate-variant threshold; starts at +inf.
    pub eta: f64,
    pub w_max: f64,
}

impl PenaltyState {
    /// Zero multipliers, `delta = eta = inf`.
    pub fn initial(n_eq: usize, n_ineq: usize, w: f64, w_max: f64) -> Self {
        Self {
            lambda: DVector::zeros(n_eq),
            mu: DVector::zeros(n_ineq),
            w: w.min(w_max),
            delta: f64::INFINITY,
            eta: f64::INFINITY,
            w_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.iter().any(|&m| !(m >= 0.0)) {
            return Err(ScvxError::InvalidConfig("inequality multipliers must be >= 0".into()));
        }
        if !(self.w > 0.0 && self.w <= self.w_max) {
            return Err(ScvxError::InvalidConfig(format!(
                "penalty weight {} must lie in (0, {}]",
                self.w, self.w_max
            )));
        }
        if !(self.delta > 0.0) || !(self.eta > 0.0) {
            return Err(ScvxError::InvalidConfig("delta and eta must be positive".into()));
        }
        Ok(())
    }

    fn check_dims(&self, g: &DVector<f64>, h: &DVector<f64>) {
        assert_eq!(g.len(), self.lambda.len(), "g and lambda differ in length");
        assert_eq!(h.len(), self.mu.len(), "h and mu differ in length");
    }
}

pub fn positive_part(h: &DVector<f64>) -> DVector<f64> {
    h.map(|v| v.max(0.0))
}

/// Augmented-Lagrangian penalty.
pub fn penalty_al(g: &DVector<f64>, h: &DVector<f64>, state: &PenaltyState) -> f64 {
    state.check_dims(g, h);
    let hp = positive_part(h);
    state.lambda.dot(g) + 0.5 * state.w * g.norm_squared() + state.mu.dot(&hp) + 0.5 * state.w * hp.norm_squared()
}

/// Gradient of [`penalty_al`] with respect to `(g, h)`.
pub fn penalty_al_gradient(g: &DVector<f64>, h: &DVector<f64>, state: &PenaltyState) -> (DVector<f64>, DVector<f64>) {
    state.check_dims(g, h);
    let dg = &state.lambda + g * state.w;
    let dh = DVector::from_iterator(
        h.len(),
        h.iter()
            .zip(state.mu.iter())
            .map(|(&hj, &mj)| if hj > 0.0 { mj + state.w * hj } else { 0.0 }),
    );
    (dg, dh)
}

pub fn penalty_l1(g: &DVector<f64>, h: &DVector<f64>, w: f64) -> f64 {
    w * g.lp_norm(1) + w * h.iter().map(|v| v.max(0.0)).sum::<f64>()
}

pub fn penalty(g: &DVector<f64>, h: &DVector<f64>, state: &PenaltyState, mode: PenaltyMode) -> f64 {
    match mode {
        PenaltyMode::AugmentedLagrangian => penalty_al(g, h, state),
        PenaltyMode::L1 => penalty_l1(g, h, state.w),
    }
}

/// `J(z) = f0(z) + P(g(z), h(z))` from an existing evaluation.
pub fn penalized_value(eval: &Evaluation, state: &PenaltyState, mode: PenaltyMode) -> f64 {
    eval.f0 + penalty(&eval.g, &eval.h, state, mode)
}

/// `J(z) = f0(z) + P(g(z), h(z))`.
pub fn augmented_objective(
    problem: &ProblemDefinition,
    z: &DVector<f64>,
    state: &PenaltyState,
    mode: PenaltyMode,
) -> Result<f64> {
    let eval = problem.evaluate(z)?;
    Ok(penalized_value(&eval, state, mode))
}

/// `|| (g, [h]+) ||_2`
pub fn infeasibility(g: &DVector<f64>, h: &DVector<f64>) -> f64 {
    (g.norm_squared() + positive_part(h).norm_squared()).sqrt()
}

//! The SCvx* outer loop and the fixed-weight SCvx baseline.
//!
//! Each iteration linearizes the non-convex constraints at the reference
//! point, solves the relaxed convex subproblem inside a trust region, and
//! compares the actual reduction of the penalized objective `J` with the
//! reduction predicted by the subproblem. Accepted steps move the reference;
//! in SCvx* mode an accepted step that is nearly stationary also triggers an
//! augmented-Lagrangian multiplier update and grows the penalty weight.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScvxError};
use crate::penalty::{infeasibility, penalized_value, PenaltyMode, PenaltyState};
use crate::problem::{Evaluation, ProblemDefinition};
use crate::subproblem::{
    backend_from_key, build_subproblem, solve_subproblem, ConvexBackend, LinearModel, SubproblemSolution,
};

/// Predicted reductions below this are treated as exactly zero.
pub const ZERO_PREDICTED_REDUCTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Augmented-Lagrangian penalty with multiplier iteration.
    ScvxStar,
    /// l1 penalty with a fixed weight.
    Scvx,
}

impl Algorithm {
    pub fn penalty_mode(self) -> PenaltyMode {
        match self {
            Algorithm::ScvxStar => PenaltyMode::AugmentedLagrangian,
            Algorithm::Scvx => PenaltyMode::L1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::ScvxStar => "SCvx*",
            Algorithm::Scvx => "SCvx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub eps_opt: f64,
    pub eps_feas: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Trust-region contraction factor.
    pub alpha1: f64,
    /// Trust-region expansion factor.
    pub alpha2: f64,
    /// Penalty weight growth factor.
    pub beta: f64,
    /// Decay factor of the stationarity tolerance.
    pub gamma: f64,
    pub r_init: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub w_init: f64,
    pub w_max: f64,
    pub max_iters: usize,
    pub mode: Algorithm,
    /// Use `|dJ| <= min(delta, eta * chi)` as the multiplier update test.
    pub rate_variant: bool,
    pub backend: String,
    pub backend_tolerance: f64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            eps_opt: 1e-5,
            eps_feas: 1e-5,
            rho0: 0.0,
            rho1: 0.25,
            rho2: 0.7,
            alpha1: 2.0,
            alpha2: 3.0,
            beta: 2.0,
            gamma: 0.9,
            r_init: 0.1,
            r_min: 1e-10,
            r_max: 10.0,
            w_init: 1.0,
            w_max: 1e8,
            max_iters: 100,
            mode: Algorithm::ScvxStar,
            rate_variant: false,
            backend: "clarabel".into(),
            backend_tolerance: crate::subproblem::backend::DEFAULT_TOLERANCE,
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(ScvxError::InvalidConfig(msg.into()));
        if !(self.eps_opt > 0.0 && self.eps_feas > 0.0) {
            return fail("tolerances must be positive");
        }
        if !(self.rho0 < self.rho1 && self.rho1 < self.rho2) {
            return fail("require rho0 < rho1 < rho2");
        }
        if !(self.alpha1 > 1.0 && self.alpha2 > 1.0 && self.beta > 1.0) {
            return fail("alpha1, alpha2 and beta must exceed 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must lie in (0, 1)");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return fail("require 0 < r_min < r_max");
        }
        if !(self.r_init >= self.r_min && self.r_init <= self.r_max) {
            return fail("r_init must lie in [r_min, r_max]");
        }
        if !(self.w_init > 0.0 && self.w_init <= self.w_max) {
            return fail("w_init must lie in (0, w_max]");
        }
        if self.max_iters == 0 {
            return fail("max_iters must be at least 1");
        }
        if !(self.backend_tolerance > 0.0) {
            return fail("backend_tolerance must be positive");
        }
        Ok(())
    }
}

/// One pass of the outer loop. Penalty quantities are the ones in force
/// during the iteration, before any update it triggers.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub z_ref: DVector<f64>,
    pub z_star: DVector<f64>,
    pub delta_j: f64,
    pub delta_l: f64,
    pub chi: f64,
    pub rho: f64,
    pub r: f64,
    pub w: f64,
    pub delta: f64,
    pub lambda: DVector<f64>,
    pub mu: DVector<f64>,
    pub accepted: bool,
    pub multipliers_updated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    EvaluationFailure,
    BackendFailure,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub z_final: DVector<f64>,
    pub lambda_final: DVector<f64>,
    pub mu_final: DVector<f64>,
    pub w_final: f64,
    pub iterations: Vec<IterationRecord>,
    pub iteration_count: usize,
    /// Iteration index and message for failure statuses.
    pub failure: Option<(usize, String)>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn multiplier_updates(&self) -> usize {
        self.iterations.iter().filter(|r| r.multipliers_updated).count()
    }
}

/// Actual reduction, predicted reduction and infeasibility of a step.
///
/// Both penalized values use the penalty state of the current iteration.
pub fn step_metrics(
    reference: &Evaluation,
    candidate: &Evaluation,
    sol: &SubproblemSolution,
    state: &PenaltyState,
    mode: PenaltyMode,
) -> (f64, f64, f64) {
    let j_ref = penalized_value(reference, state, mode);
    let j_star = penalized_value(candidate, state, mode);
    (
        j_ref - j_star,
        j_ref - sol.l_star,
        infeasibility(&candidate.g, &candidate.h),
    )
}

pub fn acceptance_ratio(delta_j: f64, delta_l: f64) -> f64 {
    if delta_l.abs() < ZERO_PREDICTED_REDUCTION {
        1.0
    } else {
        delta_j / delta_l
    }
}

pub fn update_trust_region(r: f64, rho: f64, config: &AlgorithmConfig) -> f64 {
    if rho < config.rho1 {
        (r / config.alpha1).max(config.r_min)
    } else if rho < config.rho2 {
        r
    } else {
        (config.alpha2 * r).min(config.r_max)
    }
}

/// Whether an accepted step should trigger a multiplier update.
///
/// In rate-variant mode the first success fixes `eta = |dJ| / chi`. With
/// `chi = 0` the rate test would never pass, so only `delta` is used.
pub fn multiplier_update_criterion(delta_j: f64, chi: f64, state: &mut PenaltyState, config: &AlgorithmConfig) -> bool {
    let dj = delta_j.abs();
    if !config.rate_variant {
        return dj < state.delta;
    }
    if chi <= 0.0 {
        return dj <= state.delta;
    }
    let fires = dj <= state.delta.min(state.eta * chi);
    if fires && state.eta.is_infinite() {
        state.eta = dj / chi;
    }
    fires
}

/// Multiplier and weight update from the constraint values at the new point.
pub fn update_multipliers(
    state: &PenaltyState,
    g: &DVector<f64>,
    h: &DVector<f64>,
    config: &AlgorithmConfig,
) -> PenaltyState {
    let w = state.w;
    PenaltyState {
        lambda: &state.lambda + g * w,
        mu: (&state.mu + h * w).map(|v| v.max(0.0)),
        w: (config.beta * w).min(state.w_max),
        ..state.clone()
    }
}

pub fn update_delta(delta: f64, delta_j: f64, gamma: f64) -> f64 {
    if delta.is_infinite() {
        delta_j.abs()
    } else {
        gamma * delta
    }
}

/// Runs the configured algorithm from `z_init` with zero multipliers.
pub fn solve(problem: &ProblemDefinition, config: &AlgorithmConfig, z_init: &DVector<f64>) -> Result<SolveResult> {
    config.validate()?;
    let backend = backend_from_key(&config.backend, config.backend_tolerance)?;
    solve_with(problem, config, z_init, None, backend.as_ref())
}

/// Like [`solve`], with an optional warm-start penalty state and an explicit
/// backend.
pub fn solve_with(
    problem: &ProblemDefinition,
    config: &AlgorithmConfig,
    z_init: &DVector<f64>,
    initial: Option<PenaltyState>,
    backend: &dyn ConvexBackend,
) -> Result<SolveResult> {
    config.validate()?;
    if z_init.len() != problem.n_z() {
        return Err(ScvxError::DimensionMismatch {
            what: "initial reference",
            expected: problem.n_z(),
            got: z_init.len(),
        });
    }
    let mut state = match initial {
        Some(s) => {
            if s.lambda.len() != problem.n_eq() || s.mu.len() != problem.n_ineq() {
                return Err(ScvxError::DimensionMismatch {
                    what: "warm-start multipliers",
                    expected: problem.n_eq() + problem.n_ineq(),
                    got: s.lambda.len() + s.mu.len(),
                });
            }
            s.validate()?;
            s
        }
        None => PenaltyState::initial(problem.n_eq(), problem.n_ineq(), config.w_init, config.w_max),
    };
    let mode = config.mode.penalty_mode();
    let mut r = config.r_init;
    let mut records: Vec<IterationRecord> = Vec::new();

    let finish = |status, z: DVector<f64>, state: &PenaltyState, records: Vec<IterationRecord>, failure| SolveResult {
        status,
        z_final: z,
        lambda_final: state.lambda.clone(),
        mu_final: state.mu.clone(),
        w_final: state.w,
        iteration_count: records.len(),
        iterations: records,
        failure,
    };

    let mut reference = match problem.evaluate_with_jacobians(z_init) {
        Ok(e) => e,
        Err(e) => {
            return Ok(finish(
                SolveStatus::EvaluationFailure,
                z_init.clone(),
                &state,
                records,
                Some((0, e.to_string())),
            ))
        }
    };

    for k in 1..=config.max_iters {
        let model = match LinearModel::from_evaluation(reference.clone(), problem) {
            Ok(m) => m,
            Err(e) => {
                let z = reference.z.clone();
                return Ok(finish(
                    SolveStatus::EvaluationFailure,
                    z,
                    &state,
                    records,
                    Some((k, e.to_string())),
                ));
            }
        };
        let sp = build_subproblem(&model, problem, &state, r, mode)?;
        let sol = match solve_subproblem(&sp, backend) {
            Ok(s) => s,
            Err(e) => {
                let z = reference.z.clone();
                return Ok(finish(
                    SolveStatus::BackendFailure,
                    z,
                    &state,
                    records,
                    Some((k, e.to_string())),
                ));
            }
        };
        let candidate = match problem.evaluate(&sol.z_star) {
            Ok(e) => e,
            Err(e) => {
                let z = reference.z.clone();
                return Ok(finish(
                    SolveStatus::EvaluationFailure,
                    z,
                    &state,
                    records,
                    Some((k, e.to_string())),
                ));
            }
        };

        let (delta_j, delta_l, chi) = step_metrics(&reference, &candidate, &sol, &state, mode);
        let rho = acceptance_ratio(delta_j, delta_l);
        let accepted = rho >= config.rho0;

        let mut record = IterationRecord {
            k,
            z_ref: reference.z.clone(),
            z_star: sol.z_star.clone(),
            delta_j,
            delta_l,
            chi,
            rho,
            r,
            w: state.w,
            delta: state.delta,
            lambda: state.lambda.clone(),
            mu: state.mu.clone(),
            accepted,
            multipliers_updated: false,
        };

        if accepted {
            if config.mode == Algorithm::ScvxStar && multiplier_update_criterion(delta_j, chi, &mut state, config) {
                state = update_multipliers(&state, &candidate.g, &candidate.h, config);
                state.delta = update_delta(state.delta, delta_j, config.gamma);
                record.multipliers_updated = true;
            }
            reference = candidate;
        }
        r = update_trust_region(r, rho, config);
        records.push(record);

        if delta_j.abs() <= config.eps_opt && chi <= config.eps_feas {
            return Ok(finish(SolveStatus::Converged, sol.z_star, &state, records, None));
        }
    }

    let z = reference.z.clone();
    Ok(finish(SolveStatus::MaxIters, z, &state, records, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn defaults_match_parameter_table() {
        let c = AlgorithmConfig::default();
        assert_eq!((c.eps_opt, c.eps_feas), (1e-5, 1e-5));
        assert_eq!((c.rho0, c.rho1, c.rho2), (0.0, 0.25, 0.7));
        assert_eq!((c.alpha1, c.alpha2, c.beta, c.gamma), (2.0, 3.0, 2.0, 0.9));
        assert_eq!((c.r_init, c.r_min, c.r_max), (0.1, 1e-10, 10.0));
        assert_eq!((c.w_max, c.max_iters), (1e8, 100));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            AlgorithmConfig {
                rho1: 0.8,
                ..Default::default()
            },
            AlgorithmConfig {
                alpha1: 1.0,
                ..Default::default()
            },
            AlgorithmConfig {
                gamma: 1.0,
                ..Default::default()
            },
            AlgorithmConfig {
                r_min: 20.0,
                ..Default::default()
            },
            AlgorithmConfig {
                w_init: 0.0,
                ..Default::default()
            },
            AlgorithmConfig {
                max_iters: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn acceptance_ratio_cases() {
        assert_eq!(acceptance_ratio(0.5, 1.0), 0.5);
        assert_eq!(acceptance_ratio(123.0, 0.0), 1.0);
        assert_eq!(acceptance_ratio(-3.0, 1e-13), 1.0);
        assert_eq!(acceptance_ratio(-0.2, 0.4), -0.5);
        assert!(acceptance_ratio(-0.2, 0.4) < AlgorithmConfig::default().rho0);
    }

    #[test]
    fn trust_region_update_cases() {
        let c = AlgorithmConfig::default();
        assert_eq!(update_trust_region(0.1, 0.1, &c), 0.05);
        assert_eq!(update_trust_region(0.1, 0.5, &c), 0.1);
        assert_eq!(update_trust_region(8.0, 0.9, &c), 10.0);
        assert_eq!(update_trust_region(1e-10, -5.0, &c), 1e-10);
        assert!((update_trust_region(1.0, 0.7, &c) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn plain_update_criterion() {
        let c = AlgorithmConfig::default();
        let mut s = PenaltyState::initial(0, 0, 1.0, 1e8);
        assert!(multiplier_update_criterion(1e30, 0.0, &mut s, &c));
        s.delta = 0.1;
        assert!(multiplier_update_criterion(0.05, 1.0, &mut s, &c));
        assert!(multiplier_update_criterion(-0.05, 1.0, &mut s, &c));
        assert!(!multiplier_update_criterion(0.2, 1.0, &mut s, &c));
        assert!(s.eta.is_infinite());
    }

    #[test]
    fn rate_variant_criterion() {
        let c = AlgorithmConfig {
            rate_variant: true,
            ..Default::default()
        };
        let mut s = PenaltyState::initial(0, 0, 1.0, 1e8);
        s.delta = 0.1;
        s.eta = 1.0;
        assert!(!multiplier_update_criterion(0.05, 0.01, &mut s, &c));
        assert!(multiplier_update_criterion(0.005, 0.01, &mut s, &c));

        // first success fixes eta
        let mut s = PenaltyState::initial(0, 0, 1.0, 1e8);
        assert!(multiplier_update_criterion(0.3, 0.6, &mut s, &c));
        assert_eq!(s.eta, 0.5);

        // chi = 0 falls back to delta alone
        let mut s = PenaltyState::initial(0, 0, 1.0, 1e8);
        s.delta = 0.1;
        s.eta = 1.0;
        assert!(multiplier_update_criterion(0.05, 0.0, &mut s, &c));
        assert_eq!(s.eta, 1.0);
    }

    #[test]
    fn multiplier_update_cases() {
        let c = AlgorithmConfig::default();
        let mut s = PenaltyState::initial(1, 1, 2.0, 1e8);
        s.mu[0] = 1.0;
        let next = update_multipliers(&s, &dv(&[0.5]), &dv(&[-3.0]), &c);
        assert_eq!(next.lambda[0], 1.0);
        assert_eq!(next.mu[0], 0.0);
        assert_eq!(next.w, 4.0);

        let s = PenaltyState::initial(0, 1, 1.0, 1e8);
        let next = update_multipliers(&PenaltyState { mu: dv(&[1.0]), ..s }, &dv(&[]), &dv(&[-3.0]), &c);
        assert_eq!(next.mu[0], 0.0);

        let capped = update_multipliers(&PenaltyState::initial(0, 0, 1e8, 1e8), &dv(&[]), &dv(&[]), &c);
        assert_eq!(capped.w, 1e8);
    }

    #[test]
    fn delta_schedule() {
        assert_eq!(update_delta(f64::INFINITY, 0.7, 0.9), 0.7);
        assert_eq!(update_delta(f64::INFINITY, -0.7, 0.9), 0.7);
        assert!((update_delta(0.7, 123.0, 0.9) - 0.63).abs() < 1e-15);
        let mut d = 2.0;
        for _ in 0..200 {
            d = update_delta(d, 0.0, 0.9);
        }
        assert!((d - 2.0 * 0.9f64.powi(200)).abs() < 1e-20);
    }
}

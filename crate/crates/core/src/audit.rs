//! Consistency checks over a finished iteration trace.

use crate::driver::{Algorithm, AlgorithmConfig, SolveResult};
use crate::penalty::infeasibility;
use crate::problem::ProblemDefinition;

/// Slack used for floating-point comparisons in the checks below.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub k: usize,
    pub rule: &'static str,
    pub detail: String,
}

/// Returns every invariant the trace breaks; empty means the trace is
/// consistent with the update rules in `config`.
pub fn audit_trace(result: &SolveResult, config: &AlgorithmConfig, problem: &ProblemDefinition) -> Vec<AuditViolation> {
    let mut out = Vec::new();
    let mut flag = |k: usize, rule: &'static str, detail: String| out.push(AuditViolation { k, rule, detail });
    let tol = AUDIT_TOLERANCE;
    let recs = &result.iterations;

    for (i, rec) in recs.iter().enumerate() {
        let k = rec.k;
        if rec.delta_l < -tol * (1.0 + rec.delta_l.abs()) {
            flag(k, "predicted reduction is negative", format!("dL = {:e}", rec.delta_l));
        }
        if rec.mu.iter().any(|&m| m < 0.0) {
            flag(k, "negative inequality multiplier", format!("{:?}", rec.mu.as_slice()));
        }
        if rec.w > config.w_max {
            flag(k, "weight above w_max", format!("w = {}", rec.w));
        }
        if rec.r < config.r_min * (1.0 - tol) || rec.r > config.r_max * (1.0 + tol) {
            flag(k, "trust region out of range", format!("r = {}", rec.r));
        }
        let step = (&rec.z_star - &rec.z_ref).amax();
        if step > rec.r + 1e-8 {
            flag(k, "step leaves trust region", format!("|dz| = {step}, r = {}", rec.r));
        }
        if rec.accepted && rec.delta_j < config.rho0 * rec.delta_l - tol * (1.0 + rec.delta_l.abs()) {
            flag(
                k,
                "accepted step below rho0",
                format!("dJ = {:e}, dL = {:e}", rec.delta_j, rec.delta_l),
            );
        }
        if config.mode == Algorithm::Scvx && rec.multipliers_updated {
            flag(k, "baseline updated multipliers", String::new());
        }
        if rec.multipliers_updated && !rec.accepted {
            flag(k, "multipliers updated on rejected step", String::new());
        }

        let Some(next) = recs.get(i + 1) else { continue };
        let expected_ref = if rec.accepted { &rec.z_star } else { &rec.z_ref };
        if next.z_ref != *expected_ref {
            flag(next.k, "reference does not follow acceptance", String::new());
        }
        if next.w < rec.w {
            flag(next.k, "weight decreased", format!("{} -> {}", rec.w, next.w));
        }
        if rec.delta.is_finite() && next.delta > rec.delta {
            flag(next.k, "delta increased", format!("{} -> {}", rec.delta, next.delta));
        }
        if !rec.multipliers_updated
            && (next.lambda != rec.lambda || next.mu != rec.mu || next.w != rec.w || next.delta != rec.delta)
        {
            flag(next.k, "penalty state changed without an update", String::new());
        }
    }

    if result.converged() {
        match problem.evaluate(&result.z_final) {
            Ok(e) => {
                let chi = infeasibility(&e.g, &e.h);
                if chi > config.eps_feas {
                    flag(
                        result.iteration_count,
                        "converged point is infeasible",
                        format!("chi = {chi:e}"),
                    );
                }
            }
            Err(e) => flag(
                result.iteration_count,
                "converged point does not evaluate",
                e.to_string(),
            ),
        }
    }
    out
}

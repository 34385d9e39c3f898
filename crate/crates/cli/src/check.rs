//! Invariant and derivative checks over the benchmark sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scvx_core::audit::audit_trace;
use scvx_core::examples::quadrotor::{QuadLayout, QuadRotorParams};
use scvx_core::nalgebra::DVector;
use scvx_core::penalty::{penalty_al, penalty_al_gradient};
use scvx_core::problem::check_jacobians;
use scvx_core::{Algorithm, PenaltyState};

use crate::error::Result;
use crate::spec::ExperimentSpec;
use crate::sweep::{run_sweep, SweepReport};

pub const SWEEP_WEIGHTS: [f64; 7] = [1e-1, 1e0, 1e1, 1e2, 1e3, 1e4, 1e5];

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// The sweeps the invariant audit runs over.
pub fn standard_specs() -> Vec<ExperimentSpec> {
    let spec = |problem: &str, modes: Vec<Algorithm>, rate_variant: bool, w: &[f64]| ExperimentSpec {
        problem: problem.into(),
        modes,
        rate_variant,
        w_init: w.to_vec(),
        algorithm: Default::default(),
        quadrotor: Default::default(),
        output_dir: None,
        seed: 0,
        workers: 0,
    };
    vec![
        spec(
            "example1",
            vec![Algorithm::ScvxStar, Algorithm::Scvx],
            false,
            &SWEEP_WEIGHTS,
        ),
        spec("example2", vec![Algorithm::ScvxStar], false, &SWEEP_WEIGHTS),
        spec("example1", vec![Algorithm::ScvxStar], true, &[1.0]),
    ]
}

/// Audits every iteration of every run in `report`.
pub fn audit_report(report: &SweepReport, spec: &ExperimentSpec) -> Result<CheckOutcome> {
    let instance = spec.instance()?;
    let mut problems = Vec::new();
    let mut iterations = 0;
    for cell in &report.cells {
        match &cell.outcome {
            Ok(result) => {
                iterations += result.iterations.len();
                for v in audit_trace(result, &cell.config, &instance.problem) {
                    problems.push(format!(
                        "{} w={:e} k={}: {} {}",
                        cell.mode.label(),
                        cell.w_init,
                        v.k,
                        v.rule,
                        v.detail
                    ));
                }
            }
            Err(e) => problems.push(format!("{} w={:e}: {e}", cell.mode.label(), cell.w_init)),
        }
    }
    let name = format!(
        "invariants {}{}",
        report.problem,
        if spec.rate_variant { " (rate variant)" } else { "" }
    );
    let detail = if problems.is_empty() {
        format!("{} runs, {iterations} iterations", report.cells.len())
    } else {
        problems.join("; ")
    };
    Ok(CheckOutcome::new(name, problems.is_empty(), detail))
}

/// Central-difference Jacobian checks at 10 random points per problem.
pub fn jacobian_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let p1 = scvx_core::examples::example1_problem();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = DVector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
        worst = worst.max(check_jacobians(&p1, &z, 1e-6)?.max_error());
    }
    out.push(CheckOutcome::new(
        "jacobians example1",
        worst <= 1e-4,
        format!("max rel err {worst:.2e}"),
    ));

    let params = QuadRotorParams::default();
    let p2 = scvx_core::examples::example2_problem(&params)?;
    let layout = QuadLayout { nodes: params.nodes };
    let base = scvx_core::examples::example2_initial_reference(&params);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut z = base.clone();
        for s in 0..params.nodes {
            for i in 0..6 {
                z[layout.state(s) + i] += rng.gen_range(-1.0..1.0);
            }
            for i in 0..4 {
                z[layout.control(s) + i] += rng.gen_range(-1.0..1.0);
            }
        }
        worst = worst.max(check_jacobians(&p2, &z, 1e-6)?.max_error());
    }
    out.push(CheckOutcome::new(
        "jacobians example2",
        worst <= 1e-4,
        format!("max rel err {worst:.2e}"),
    ));
    Ok(out)
}

/// Gradient of the augmented-Lagrangian penalty against central differences
/// at 20 random points.
pub fn penalty_gradient_check(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let step = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut state = PenaltyState::initial(n, n, rng.gen_range(0.01..100.0), 1e8);
        state.lambda = DVector::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
        state.mu = DVector::from_fn(n, |_, _| rng.gen_range(0.0..5.0));
        let g = DVector::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
        // keep h away from the hinge, where the penalty is only C1
        let h = DVector::from_fn(n, |_, _| {
            let v: f64 = rng.gen_range(0.01..5.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        });
        let (dg, dh) = penalty_al_gradient(&g, &h, &state);
        for i in 0..n {
            let (mut gp, mut gm) = (g.clone(), g.clone());
            gp[i] += step;
            gm[i] -= step;
            let fd = (penalty_al(&gp, &h, &state) - penalty_al(&gm, &h, &state)) / (gp[i] - gm[i]);
            worst = worst.max((dg[i] - fd).abs() / fd.abs().max(1.0));
            let (mut hp, mut hm) = (h.clone(), h.clone());
            hp[i] += step;
            hm[i] -= step;
            let fd = (penalty_al(&g, &hp, &state) - penalty_al(&g, &hm, &state)) / (hp[i] - hm[i]);
            worst = worst.max((dh[i] - fd).abs() / fd.abs().max(1.0));
        }
    }
    CheckOutcome::new("penalty gradient", worst <= 1e-6, format!("max rel err {worst:.2e}"))
}

/// Runs the standard sweeps with invariant audits plus derivative checks.
pub fn run_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for spec in standard_specs() {
        let report = run_sweep(&spec)?;
        out.push(audit_report(&report, &spec)?);
    }
    out.extend(jacobian_checks(seed)?);
    out.push(penalty_gradient_check(seed));
    Ok(out)
}

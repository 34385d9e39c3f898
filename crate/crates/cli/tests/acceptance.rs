//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use scvx_cli::check::{audit_report, jacobian_checks, penalty_gradient_check, SWEEP_WEIGHTS};
use scvx_cli::sweep::SweepReport;
use scvx_cli::{run_sweep, ExperimentSpec};
use scvx_core::examples::brute_force_example1;
use scvx_core::examples::quadrotor::{min_obstacle_margin, reintegration_defect, terminal_error};
use scvx_core::{Algorithm, SolveStatus};

struct Criterion {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn spec(problem: &str, modes: &[Algorithm], rate_variant: bool, w: &[f64], out: Option<&Path>) -> ExperimentSpec {
    ExperimentSpec {
        problem: problem.into(),
        modes: modes.to_vec(),
        rate_variant,
        w_init: w.to_vec(),
        algorithm: Default::default(),
        quadrotor: Default::default(),
        output_dir: out.map(Path::to_path_buf),
        seed: 0,
        workers: 0,
    }
}

/// Converged within `range` iterations with both tolerances met on the
/// final iteration.
fn converged_within(
    report: &SweepReport,
    mode: Algorithm,
    range: std::ops::RangeInclusive<usize>,
) -> (bool, Vec<String>) {
    let mut ok = true;
    let mut cells = Vec::new();
    for cell in report.row(mode) {
        let good = match &cell.outcome {
            Ok(r) => {
                let last = r.iterations.last();
                r.status == SolveStatus::Converged
                    && range.contains(&r.iteration_count)
                    && last.is_some_and(|it| it.delta_j.abs() <= 1e-5 && it.chi <= 1e-5)
            }
            Err(_) => false,
        };
        ok &= good;
        cells.push(format!("{:e}:{}", cell.w_init, cell.label()));
    }
    (ok, cells)
}

fn a1(report: &SweepReport, elapsed: f64) -> Criterion {
    let (ok, cells) = converged_within(report, Algorithm::ScvxStar, 15..=100);
    Criterion {
        id: "A1",
        passed: ok && elapsed <= 120.0,
        detail: format!("example1 SCvx* [{}] in {elapsed:.1}s", cells.join(" ")),
    }
}

fn a2(report: &SweepReport) -> Criterion {
    let (z_best, f_best) = brute_force_example1(1_000_000);
    let problem = scvx_core::examples::example1_problem();
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for cell in report.row(Algorithm::ScvxStar) {
        let Ok(r) = &cell.outcome else { continue };
        if !r.converged() {
            continue;
        }
        let df = (problem.objective().value(r.z_final.as_slice()) - f_best).abs();
        let dz = ((r.z_final[0] - z_best[0]).powi(2) + (r.z_final[1] - z_best[1]).powi(2)).sqrt();
        ok &= df <= 1e-3 && dz <= 1e-2;
        worst = (worst.0.max(df), worst.1.max(dz));
    }
    Criterion {
        id: "A2",
        passed: ok,
        detail: format!(
            "oracle f*={f_best:.7} z*=({:.6}, {:.6}); worst |df|={:.2e} |dz|={:.2e}",
            z_best[0], z_best[1], worst.0, worst.1
        ),
    }
}

fn a3(report: &SweepReport) -> Criterion {
    let status = |w: f64| {
        report
            .cell(Algorithm::Scvx, w)
            .and_then(|c| c.outcome.as_ref().ok())
            .map(|r| r.status)
    };
    let ok = status(1e-1) == Some(SolveStatus::MaxIters)
        && status(1e0) == Some(SolveStatus::MaxIters)
        && status(1e1) == Some(SolveStatus::Converged)
        && status(1e2) == Some(SolveStatus::Converged);
    let row: Vec<String> = report
        .row(Algorithm::Scvx)
        .iter()
        .map(|c| format!("{:e}:{}", c.w_init, c.label()))
        .collect();
    Criterion {
        id: "A3",
        passed: ok,
        detail: format!("example1 SCvx [{}]", row.join(" ")),
    }
}

fn a4(report: &SweepReport, spec: &ExperimentSpec) -> Criterion {
    let instance = spec.instance().expect("example2 builds");
    let params = instance.quadrotor.as_ref().expect("quad-rotor params");
    let (mut ok, cells) = converged_within(report, Algorithm::ScvxStar, 1..=60);
    let mut worst = [0.0f64, f64::INFINITY, 0.0, 0.0];
    for cell in report.row(Algorithm::ScvxStar) {
        let Ok(r) = &cell.outcome else { continue };
        let z = &r.z_final;
        let defect = reintegration_defect(params, z, 10 * params.substeps);
        let margin = min_obstacle_margin(params, z);
        let convex = instance.problem.convex_violation(z.as_slice());
        let terminal = terminal_error(params, z, 10 * params.substeps);
        ok &= defect <= 1e-4 && margin >= -1e-5 && convex <= 1e-8 && terminal <= 1e-4;
        worst = [
            worst[0].max(defect),
            worst[1].min(margin),
            worst[2].max(convex),
            worst[3].max(terminal),
        ];
    }
    Criterion {
        id: "A4",
        passed: ok,
        detail: format!(
            "example2 SCvx* [{}]; defect {:.1e}, margin {:.1e}, convex {:.1e}, terminal {:.1e}",
            cells.join(" "),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    }
}

fn a7(report: &SweepReport) -> Criterion {
    let (ok, cells) = converged_within(report, Algorithm::ScvxStar, 15..=100);
    let updates = report.cells[0]
        .outcome
        .as_ref()
        .map(|r| r.multiplier_updates())
        .unwrap_or(0);
    Criterion {
        id: "A7",
        passed: ok && updates > 0,
        detail: format!("rate variant [{}], {updates} multiplier updates", cells.join(" ")),
    }
}

fn a8(first: &Path, second: &Path) -> Criterion {
    let mut names: Vec<_> = std::fs::read_dir(first)
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.file_name()).collect())
        .unwrap_or_default();
    names.retain(|n| n.to_string_lossy().ends_with(".csv"));
    names.sort();
    let identical = names
        .iter()
        .filter(|n| std::fs::read(first.join(n)).ok() == std::fs::read(second.join(n)).ok())
        .count();
    Criterion {
        id: "A8",
        passed: names.len() == 14 && identical == names.len(),
        detail: format!("{identical}/{} traces byte-identical", names.len()),
    }
}

fn main() -> ExitCode {
    let dir_a = tempfile::tempdir().expect("temp dir");
    let dir_b = tempfile::tempdir().expect("temp dir");
    let both = [Algorithm::ScvxStar, Algorithm::Scvx];

    let spec1 = spec("example1", &both, false, &SWEEP_WEIGHTS, Some(dir_a.path()));
    let start = Instant::now();
    let sweep1 = run_sweep(&spec1).expect("example1 sweep");
    let elapsed = start.elapsed().as_secs_f64();

    let spec2 = spec("example2", &[Algorithm::ScvxStar], false, &SWEEP_WEIGHTS, None);
    let sweep2 = run_sweep(&spec2).expect("example2 sweep");

    let spec7 = spec("example1", &[Algorithm::ScvxStar], true, &[1.0], None);
    let sweep7 = run_sweep(&spec7).expect("rate-variant run");

    let audits =
        [(&sweep1, &spec1), (&sweep2, &spec2), (&sweep7, &spec7)].map(|(r, s)| audit_report(r, s).expect("audit"));
    let a5 = Criterion {
        id: "A5",
        passed: audits.iter().all(|a| a.passed),
        detail: audits
            .iter()
            .map(|a| format!("{}: {}", a.name, a.detail))
            .collect::<Vec<_>>()
            .join("; "),
    };

    let mut derivative = jacobian_checks(7).expect("jacobian checks");
    derivative.push(penalty_gradient_check(7));
    let a6 = Criterion {
        id: "A6",
        passed: derivative.iter().all(|c| c.passed),
        detail: derivative
            .iter()
            .map(|c| format!("{} {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; "),
    };

    let spec8 = spec("example1", &both, false, &SWEEP_WEIGHTS, Some(dir_b.path()));
    run_sweep(&spec8).expect("repeat sweep");

    let criteria = [
        a1(&sweep1, elapsed),
        a2(&sweep1),
        a3(&sweep1),
        a4(&sweep2, &spec2),
        a5,
        a6,
        a7(&sweep7),
        a8(dir_a.path(), dir_b.path()),
    ];
    for c in &criteria {
        println!("{} {}: {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    if criteria.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

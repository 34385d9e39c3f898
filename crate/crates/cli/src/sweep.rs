//! Weight sweeps and convergence tables.

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use scvx_core::{solve, Algorithm, AlgorithmConfig, SolveResult, SolveStatus};

use crate::error::{CliError, Result};
use crate::spec::{ExperimentSpec, ProblemInstance};
use crate::trace::emit_trace;

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub mode: Algorithm,
    pub w_init: f64,
    pub config: AlgorithmConfig,
    /// `Err` holds the message of a solve that could not start.
    pub outcome: std::result::Result<SolveResult, String>,
    pub trace_path: Option<PathBuf>,
}

impl SweepCell {
    /// Iteration count, or `None` when the run did not converge.
    pub fn converged_iterations(&self) -> Option<usize> {
        match &self.outcome {
            Ok(r) if r.status == SolveStatus::Converged => Some(r.iteration_count),
            _ => None,
        }
    }

    /// Table entry: the iteration count, `N/A` for runs that hit the
    /// iteration limit, and the status name for other failures.
    pub fn label(&self) -> String {
        match &self.outcome {
            Ok(r) => match r.status {
                SolveStatus::Converged => r.iteration_count.to_string(),
                SolveStatus::MaxIters => "N/A".into(),
                SolveStatus::EvaluationFailure => "eval-fail".into(),
                SolveStatus::BackendFailure => "backend-fail".into(),
            },
            Err(_) => "error".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub problem: String,
    pub w_init: Vec<f64>,
    pub modes: Vec<Algorithm>,
    /// Mode-major: `cells[m * w_init.len() + j]`.
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn cell(&self, mode: Algorithm, w_init: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.mode == mode && c.w_init == w_init)
    }

    pub fn row(&self, mode: Algorithm) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.mode == mode).collect()
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = std::iter::once("w(1)".to_string())
            .chain(self.w_init.iter().map(|w| format!("{w:e}")))
            .collect::<Vec<_>>();
        let mut rows = vec![head];
        for &mode in &self.modes {
            rows.push(
                std::iter::once(format!("{} # ite.", mode.label()))
                    .chain(self.row(mode).iter().map(|c| c.label()))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        writeln!(f, "{}", self.problem)?;
        for row in rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (cell, &w))| {
                    if j == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            writeln!(f, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

/// File stem used for a cell's trace, e.g. `scvx_star_w1e-1`.
pub fn trace_stem(mode: Algorithm, w_init: f64) -> String {
    let tag = match mode {
        Algorithm::ScvxStar => "scvx_star",
        Algorithm::Scvx => "scvx",
    };
    format!("{tag}_w{w_init:e}")
}

/// Runs every (mode, weight) cell of `spec`. Cells run on a bounded worker
/// pool; results are assembled in input order so output is deterministic.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepReport> {
    spec.validate()?;
    let instance = spec.instance()?;
    let jobs: Vec<(Algorithm, f64)> = spec
        .modes
        .iter()
        .flat_map(|&m| spec.w_init.iter().map(move |&w| (m, w)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let cells = pool.install(|| {
        jobs.par_iter()
            .map(|&(mode, w)| run_cell(spec, &instance, mode, w))
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(SweepReport {
        problem: instance.problem.name().to_string(),
        w_init: spec.w_init.clone(),
        modes: spec.modes.clone(),
        cells,
    })
}

fn run_cell(spec: &ExperimentSpec, instance: &ProblemInstance, mode: Algorithm, w_init: f64) -> Result<SweepCell> {
    let config = spec.config(mode, w_init)?;
    let outcome = solve(&instance.problem, &config, &instance.z_init).map_err(|e| e.to_string());
    let trace_path = match (&spec.output_dir, &outcome) {
        (Some(dir), Ok(result)) if !result.iterations.is_empty() => {
            let path = dir.join(format!("{}.csv", trace_stem(mode, w_init)));
            emit_trace(result, &config, instance.problem.name(), &path)?;
            Some(path)
        }
        _ => None,
    };
    Ok(SweepCell {
        mode,
        w_init,
        config,
        outcome,
        trace_path,
    })
}

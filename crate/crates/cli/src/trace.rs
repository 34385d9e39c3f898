//! Per-iteration trace files: a CSV table plus a JSON sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use scvx_core::{AlgorithmConfig, SolveResult, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TRACE_HEADER: [&str; 10] = [
    "k",
    "delta_J",
    "delta_L",
    "chi",
    "rho",
    "r",
    "w",
    "delta",
    "accepted",
    "multipliers_updated",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    #[serde(rename = "delta_J")]
    pub delta_j: f64,
    #[serde(rename = "delta_L")]
    pub delta_l: f64,
    pub chi: f64,
    pub rho: f64,
    pub r: f64,
    pub w: f64,
    pub delta: f64,
    pub accepted: bool,
    pub multipliers_updated: bool,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    problem: &'a str,
    status: SolveStatus,
    iteration_count: usize,
    failure: Option<&'a (usize, String)>,
    config: &'a AlgorithmConfig,
    z_final: &'a [f64],
    lambda_final: &'a [f64],
    mu_final: &'a [f64],
    w_final: f64,
}

pub fn trace_rows(result: &SolveResult) -> Vec<TraceRow> {
    result
        .iterations
        .iter()
        .map(|it| TraceRow {
            k: it.k,
            delta_j: it.delta_j,
            delta_l: it.delta_l,
            chi: it.chi,
            rho: it.rho,
            r: it.r,
            w: it.w,
            delta: it.delta,
            accepted: it.accepted,
            multipliers_updated: it.multipliers_updated,
        })
        .collect()
}

/// Writes `path` (CSV) and `path` with extension `json` (final state and
/// configuration). Returns the sidecar path.
pub fn emit_trace(result: &SolveResult, config: &AlgorithmConfig, problem: &str, path: &Path) -> Result<PathBuf> {
    if result.iterations.is_empty() {
        return Err(CliError::Trace {
            path: path.to_path_buf(),
            message: "result has no iterations".into(),
        });
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let csv_err = |e: csv::Error| CliError::Trace {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in trace_rows(result) {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))?;

    let sidecar_path = path.with_extension("json");
    let sidecar = Sidecar {
        problem,
        status: result.status,
        iteration_count: result.iteration_count,
        failure: result.failure.as_ref(),
        config,
        z_final: result.z_final.as_slice(),
        lambda_final: result.lambda_final.as_slice(),
        mu_final: result.mu_final.as_slice(),
        w_final: result.w_final,
    };
    let file = File::create(&sidecar_path).map_err(|e| CliError::io(&sidecar_path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &sidecar).map_err(|e| CliError::Trace {
        path: sidecar_path.clone(),
        message: e.to_string(),
    })?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&sidecar_path, e))?;
    Ok(sidecar_path)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let err = |e: csv::Error| CliError::Trace {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(path).map_err(err)?;
    let header: Vec<String> = reader.headers().map_err(err)?.iter().map(String::from).collect();
    if header != TRACE_HEADER {
        return Err(CliError::Trace {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    reader.deserialize().collect::<std::result::Result<_, _>>().map_err(err)
}

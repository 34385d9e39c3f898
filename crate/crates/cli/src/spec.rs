//! Declarative experiment description.
//!
//! ```toml
//! problem = "example1"            # example1 | example2 | path to quad-rotor params
//! modes = ["scvx_star", "scvx"]
//! w_init = [0.1, 1.0, 10.0]
//! output_dir = "results/example1"
//! algorithm.max_iters = 100       # any AlgorithmConfig field
//! quadrotor.mass = 0.3            # any QuadRotorParams field (example2 only)
//! ```

use std::path::{Path, PathBuf};

use scvx_core::examples::example1;
use scvx_core::examples::quadrotor::{example2_initial_reference, example2_problem, QuadRotorParams};
use scvx_core::nalgebra::DVector;
use scvx_core::{Algorithm, AlgorithmConfig, ProblemDefinition};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: String,
    #[serde(default = "default_modes")]
    pub modes: Vec<Algorithm>,
    #[serde(default)]
    pub rate_variant: bool,
    pub w_init: Vec<f64>,
    /// Overrides applied on top of [`AlgorithmConfig::default`].
    #[serde(default)]
    pub algorithm: toml::Table,
    /// Overrides applied on top of [`QuadRotorParams::default`].
    #[serde(default)]
    pub quadrotor: toml::Table,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed for randomized checks; the solver itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for the sweep; 0 picks the number of cores.
    #[serde(default)]
    pub workers: usize,
}

fn default_modes() -> Vec<Algorithm> {
    vec![Algorithm::ScvxStar]
}

/// A problem together with its initial reference.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub problem: ProblemDefinition,
    pub z_init: DVector<f64>,
    pub quadrotor: Option<QuadRotorParams>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_init.is_empty() {
            return Err(CliError::Config("w_init must list at least one weight".into()));
        }
        if self.modes.is_empty() {
            return Err(CliError::Config("modes must list at least one algorithm".into()));
        }
        // surfaces unknown or ill-typed override keys early
        for &w in &self.w_init {
            self.config(Algorithm::ScvxStar, w)?.validate()?;
        }
        if !self.quadrotor.is_empty() && self.problem != "example2" {
            return Err(CliError::Config("quadrotor overrides only apply to example2".into()));
        }
        Ok(())
    }

    /// Algorithm settings for one sweep cell.
    pub fn config(&self, mode: Algorithm, w_init: f64) -> Result<AlgorithmConfig> {
        let mut config: AlgorithmConfig = apply_overrides(&AlgorithmConfig::default(), &self.algorithm, "algorithm")?;
        config.mode = mode;
        config.w_init = w_init;
        config.rate_variant = config.rate_variant || self.rate_variant;
        Ok(config)
    }

    pub fn instance(&self) -> Result<ProblemInstance> {
        match self.problem.as_str() {
            "example1" => Ok(ProblemInstance {
                problem: example1::example1_problem(),
                z_init: example1::initial_reference(),
                quadrotor: None,
            }),
            "example2" => {
                let params = apply_overrides(&QuadRotorParams::default(), &self.quadrotor, "quadrotor")?;
                quadrotor_instance(params)
            }
            path => {
                let path = Path::new(path);
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let params: QuadRotorParams =
                    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                quadrotor_instance(params)
            }
        }
    }
}

fn quadrotor_instance(params: QuadRotorParams) -> Result<ProblemInstance> {
    Ok(ProblemInstance {
        problem: example2_problem(&params)?,
        z_init: example2_initial_reference(&params),
        quadrotor: Some(params),
    })
}

/// Merges `overrides` into the serialized form of `base`.
fn apply_overrides<T>(base: &T, overrides: &toml::Table, section: &str) -> Result<T>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let mut table = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("[{section}] {}", e.message())))
}

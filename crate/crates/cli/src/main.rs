use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scvx_cli::check::run_checks;
use scvx_cli::plot::render_convergence_plot;
use scvx_cli::trace::{emit_trace, read_trace, trace_rows};
use scvx_cli::{run_sweep, CliError, ExperimentSpec, Result};
use scvx_core::{solve, Algorithm};

#[derive(Parser)]
#[command(name = "scvx", version, about = "Successive convexification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with one configuration.
    Solve {
        /// Experiment file; the first mode and weight are used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// example1, example2 or a quad-rotor parameter file.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Algorithm>,
        #[arg(long)]
        w_init: Option<f64>,
        #[arg(long)]
        rate_variant: bool,
        /// Dotted override, e.g. `algorithm.max_iters=50` or `quadrotor.mass=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write the iteration trace (CSV + JSON sidecar) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the convergence plot (SVG) here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run a weight sweep and print the convergence table.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Render a trace CSV as an SVG convergence plot.
    Plot {
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-5)]
        eps_opt: f64,
        #[arg(long, default_value_t = 1e-5)]
        eps_feas: f64,
    },
    /// Run the invariant audit and derivative checks.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_mode(s: &str) -> std::result::Result<Algorithm, String> {
    match s.to_ascii_lowercase().as_str() {
        "scvx_star" | "scvx*" | "star" => Ok(Algorithm::ScvxStar),
        "scvx" | "baseline" => Ok(Algorithm::Scvx),
        other => Err(format!("unknown mode `{other}` (expected scvx_star or scvx)")),
    }
}

fn apply_set(spec: &mut ExperimentSpec, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("`{item}` is not KEY=VALUE")))?;
        let parsed: toml::Table = toml::from_str(&format!("v = {value}"))
            .or_else(|_| toml::from_str(&format!("v = {:?}", value.trim())))
            .map_err(|e| CliError::Config(format!("{item}: {e}")))?;
        let value = parsed["v"].clone();
        match key.trim().split_once('.') {
            Some(("algorithm", k)) => {
                spec.algorithm.insert(k.into(), value);
            }
            Some(("quadrotor", k)) => {
                spec.quadrotor.insert(k.into(), value);
            }
            _ => return Err(CliError::Config(format!("unknown override section in `{key}`"))),
        }
    }
    spec.validate()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve {
            config,
            problem,
            mode,
            w_init,
            rate_variant,
            overrides,
            trace,
            plot,
        } => {
            let mut spec = match config {
                Some(path) => ExperimentSpec::load(&path)?,
                None => ExperimentSpec::from_toml("problem = \"example1\"\nw_init = [1.0]\n")?,
            };
            if let Some(p) = problem {
                spec.problem = p;
            }
            if let Some(m) = mode {
                spec.modes = vec![m];
            }
            if let Some(w) = w_init {
                spec.w_init = vec![w];
            }
            spec.rate_variant |= rate_variant;
            apply_set(&mut spec, &overrides)?;

            let instance = spec.instance()?;
            let algo = spec.config(spec.modes[0], spec.w_init[0])?;
            let result = solve(&instance.problem, &algo, &instance.z_init)?;
            println!(
                "{} {} w_init={:e}: {:?} after {} iterations, {} multiplier updates",
                instance.problem.name(),
                algo.mode.label(),
                algo.w_init,
                result.status,
                result.iteration_count,
                result.multiplier_updates()
            );
            println!(
                "f0 = {:.8}",
                instance.problem.objective().value(result.z_final.as_slice())
            );
            if let Some((k, msg)) = &result.failure {
                println!("failure at iteration {k}: {msg}");
            }
            if let Some(path) = trace {
                let sidecar = emit_trace(&result, &algo, instance.problem.name(), &path)?;
                println!("trace: {} ({})", path.display(), sidecar.display());
            }
            if let Some(path) = plot {
                render_convergence_plot(&trace_rows(&result), algo.eps_opt, algo.eps_feas, &path)?;
                println!("plot: {}", path.display());
            }
            Ok(true)
        }
        Command::Sweep {
            config,
            output_dir,
            workers,
            overrides,
        } => {
            let mut spec = ExperimentSpec::load(&config)?;
            if output_dir.is_some() {
                spec.output_dir = output_dir;
            }
            if let Some(n) = workers {
                spec.workers = n;
            }
            apply_set(&mut spec, &overrides)?;
            let report = run_sweep(&spec)?;
            print!("{report}");
            for cell in &report.cells {
                if let Err(e) = &cell.outcome {
                    eprintln!("{} w={:e}: {e}", cell.mode.label(), cell.w_init);
                }
            }
            Ok(true)
        }
        Command::Plot {
            trace,
            output,
            eps_opt,
            eps_feas,
        } => {
            let rows = read_trace(&trace)?;
            let out = output.unwrap_or_else(|| trace.with_extension("svg"));
            render_convergence_plot(&rows, eps_opt, eps_feas, &out)?;
            println!("{}", out.display());
            Ok(true)
        }
        Command::Check { seed } => {
            let outcomes = run_checks(seed)?;
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roundavg::cli::{
    cmd_lyapunov, cmd_reproduce, cmd_simulate, BuiltinSeries, CliError, ExperimentConfig, FilterSwitch, LyapunovSource,
};
use roundavg::orbits::RoundingPolicy;
use roundavg::rounding::RoundingBackend;

#[derive(Parser, Debug)]
#[command(
    name = "roundavg",
    version,
    about = "Rounding-mode averaging experiments on the Lorenz system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat TOML experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Integration method: rk3, rk4 or rk5.
    #[arg(long)]
    method: Option<String>,
    /// Averaging filter: on or off.
    #[arg(long)]
    filter: Option<FilterSwitch>,
    /// Rounding backend: hardware or emulated.
    #[arg(long)]
    backend: Option<RoundingBackend>,
    /// Rounding policy of the filtered run: strict or matlab_faithful.
    #[arg(long)]
    policy: Option<RoundingPolicy>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate and write the orbit(s) as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the effective configuration to this path.
        #[arg(long)]
        save_config: Option<PathBuf>,
    },
    /// Estimate the largest Lyapunov exponent of a series.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        /// CSV file with a header row (as written by `simulate`).
        #[arg(long, conflicts_with = "builtin")]
        input: Option<PathBuf>,
        /// Column to analyse; defaults to `x`, then `x_avg`.
        #[arg(long, requires = "input")]
        column: Option<String>,
        /// Sample interval; defaults to the spacing of the `t` column.
        #[arg(long, requires = "input")]
        dt: Option<f64>,
        /// Builtin test series: logistic.
        #[arg(long)]
        builtin: Option<BuiltinSeries>,
        /// Embedding delay in samples; chosen by mutual information if omitted.
        #[arg(long)]
        tau: Option<usize>,
        /// Embedding dimension; chosen by false nearest neighbours if omitted.
        #[arg(long)]
        dim: Option<usize>,
        /// Seconds dropped from the start of the series.
        #[arg(long)]
        transient: Option<f64>,
    },
    /// Run all three methods traditional and filtered; report exponents.
    Reproduce {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &common.method {
        cfg.method = m.clone();
    }
    if let Some(f) = common.filter {
        cfg.filter = f;
    }
    if let Some(b) = common.backend {
        cfg.rounding_backend = b;
    }
    if let Some(p) = common.policy {
        cfg.policy = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common, save_config } => {
            let mut cfg = load(&common)?;
            if let Some(out) = &common.out {
                cfg.output = out.clone();
            }
            if let Some(p) = save_config {
                std::fs::write(&p, cfg.to_toml_string())?;
            }
            let summary = cmd_simulate(&cfg, &cfg.output)?;
            println!(
                "wrote {} rows to {} (backend={})",
                summary.rows,
                summary.path.display(),
                summary.backend
            );
            Ok(())
        }
        Command::Lyapunov {
            common,
            input,
            column,
            dt,
            builtin,
            tau,
            dim,
            transient,
        } => {
            let mut cfg = load(&common)?;
            cfg.lyapunov_tau = tau.or(cfg.lyapunov_tau);
            cfg.lyapunov_m = dim.or(cfg.lyapunov_m);
            if let Some(t) = transient {
                cfg.lyapunov_transient = t;
            }
            cfg.validate()?;
            let source = match (input, builtin) {
                (Some(path), _) => LyapunovSource::File { path, column, dt },
                (None, Some(b)) => LyapunovSource::Builtin(b),
                (None, None) => LyapunovSource::Simulation,
            };
            let report = cmd_lyapunov(&source, &cfg)?;
            print!("{}", report.to_key_values());
            Ok(())
        }
        Command::Reproduce { common } => {
            let mut cfg = load(&common)?;
            if let Some(out) = &common.out {
                cfg.report = out.clone();
            }
            let report = cmd_reproduce(&cfg)?;
            print!("{}", report.render_table());
            std::fs::write(&cfg.report, report.to_json())?;
            println!("report written to {}", cfg.report.display());
            if report.criteria_met {
                Ok(())
            } else {
                Err(CliError::CriteriaUnmet(
                    "need traditional lambda > 0 and filtered lambda < 0.01 for every method".into(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

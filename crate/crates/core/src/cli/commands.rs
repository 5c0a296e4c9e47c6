use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::lyapunov::{
    choose_delay, choose_dimension, estimate_lambda_max, EmbeddingConfig, LyapunovError, LyapunovEstimate,
    FALLBACK_DELAY, FALLBACK_DIMENSION,
};
use crate::orbits::{run_filtered, run_traditional, CoupledOrbitPair, PseudoOrbit, RoundingPolicy};
use crate::rounding::{hardware_available, RoundingBackend, RoundingMode};

use super::config::ExperimentConfig;
use super::csvio::{read_table, write_filtered, write_traditional};
use super::report::{run_cells, ReproductionReport};
use super::CliError;

/// The configured backend, or the emulated one with a notice when the
/// hardware environment is not settable here.
pub fn resolve_backend(requested: RoundingBackend) -> (RoundingBackend, Option<String>) {
    match requested {
        RoundingBackend::HardwareEnv if !hardware_available() => (
            RoundingBackend::SoftwareEmulated,
            Some("hardware rounding control unavailable; using the emulated backend".into()),
        ),
        b => (b, None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Simulation {
    Traditional(PseudoOrbit),
    Filtered(CoupledOrbitPair),
}

impl Simulation {
    /// The x series a Lyapunov estimate is taken from: the orbit itself, or
    /// the averaged orbit of a filtered run.
    pub fn x_series(&self) -> Vec<f64> {
        match self {
            Simulation::Traditional(o) => o.component(0),
            Simulation::Filtered(p) => p.averaged.component(0),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Simulation::Traditional(o) => o.len(),
            Simulation::Filtered(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Runs the configured simulation. The traditional run is to-nearest
/// throughout; the filtered run uses the configured policy.
pub fn simulate(cfg: &ExperimentConfig, backend: RoundingBackend) -> Result<Simulation, CliError> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let stepper = cfg.stepper()?;
    let y0 = cfg.initial_state();
    Ok(if cfg.filter.is_on() {
        Simulation::Filtered(run_filtered(&model, &y0, &stepper, cfg.policy, backend)?)
    } else {
        Simulation::Traditional(run_traditional(
            &model,
            &y0,
            &stepper,
            RoundingMode::ToNearestEven,
            backend,
        )?)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub backend: RoundingBackend,
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateSummary, CliError> {
    let (backend, notice) = resolve_backend(cfg.rounding_backend);
    if let Some(n) = notice {
        eprintln!("note: {n}");
    }
    let sim = simulate(cfg, backend)?;
    let file = BufWriter::new(File::create(out)?);
    match &sim {
        Simulation::Traditional(o) => write_traditional(file, o)?,
        Simulation::Filtered(p) => write_filtered(file, p)?,
    }
    Ok(SimulateSummary {
        path: out.to_path_buf(),
        rows: sim.len(),
        backend,
    })
}

/// Embedding choices for one analysis. `None` fields are chosen from the
/// series.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSettings {
    pub tau: Option<usize>,
    pub m: Option<usize>,
    pub theiler: Option<usize>,
    pub fit_range: (usize, usize),
    pub neighbors: usize,
    /// Seconds dropped from the start of the series.
    pub transient: f64,
}

impl From<&ExperimentConfig> for LyapunovSettings {
    fn from(cfg: &ExperimentConfig) -> Self {
        LyapunovSettings {
            tau: cfg.lyapunov_tau,
            m: cfg.lyapunov_m,
            theiler: cfg.lyapunov_theiler,
            fit_range: (cfg.lyapunov_fit_min, cfg.lyapunov_fit_max),
            neighbors: cfg.lyapunov_neighbors,
            transient: cfg.lyapunov_transient,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAnalysis {
    pub estimate: LyapunovEstimate,
    pub h: f64,
    pub skipped: usize,
    pub delay_fallback: bool,
    pub dimension_fallback: bool,
}

fn with_fallback(r: Result<usize, LyapunovError>, fallback: usize) -> Result<(usize, bool), LyapunovError> {
    match r {
        Ok(v) => Ok((v, false)),
        Err(LyapunovError::NoMinimumFound(_)) | Err(LyapunovError::SeriesTooShort { .. }) => Ok((fallback, true)),
        Err(e) => Err(e),
    }
}

/// Drops the transient, chooses any unset embedding parameters and
/// estimates λ_max.
pub fn analyze_series(series: &[f64], h: f64, settings: &LyapunovSettings) -> Result<SeriesAnalysis, CliError> {
    let skipped = (settings.transient / h).round() as usize;
    if skipped >= series.len() {
        return Err(CliError::Data(format!(
            "transient of {} s covers the whole {}-sample series",
            settings.transient,
            series.len()
        )));
    }
    let s = &series[skipped..];
    let (tau, delay_fallback) = match settings.tau {
        Some(t) => (t, false),
        None => with_fallback(choose_delay(s), FALLBACK_DELAY)?,
    };
    let (m, dimension_fallback) = match settings.m {
        Some(m) => (m, false),
        None => with_fallback(choose_dimension(s, tau), FALLBACK_DIMENSION)?,
    };
    let cfg = EmbeddingConfig::new(tau, m)
        .with_theiler_window(settings.theiler.unwrap_or(tau * m))
        .with_fit_range(settings.fit_range.0, settings.fit_range.1)
        .with_neighbor_count(settings.neighbors);
    let estimate = estimate_lambda_max(s, h, &cfg)?;
    Ok(SeriesAnalysis {
        estimate,
        h,
        skipped,
        delay_fallback,
        dimension_fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinSeries {
    /// xₙ₊₁ = 4xₙ(1 − xₙ), 10⁴ samples from x₀ = 0.3, unit sample interval.
    Logistic,
}

impl std::str::FromStr for BuiltinSeries {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(BuiltinSeries::Logistic),
            other => Err(format!("unknown builtin series `{other}` (known: logistic)")),
        }
    }
}

pub fn logistic_series(n: usize, x0: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut x = x0;
    for _ in 0..n {
        out.push(x);
        x = 4.0 * x * (1.0 - x);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum LyapunovSource {
    /// A CSV file with a header row. `column` defaults to `x`, then `x_avg`;
    /// `dt` defaults to the spacing of the `t` column.
    File {
        path: PathBuf,
        column: Option<String>,
        dt: Option<f64>,
    },
    Builtin(BuiltinSeries),
    /// Simulate per the configuration and analyse the resulting x series.
    Simulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub source: String,
    pub analysis: SeriesAnalysis,
}

impl LyapunovReport {
    /// `key=value` lines, stable order.
    pub fn to_key_values(&self) -> String {
        let a = &self.analysis;
        let e = &a.estimate;
        let c = &e.config;
        let lines = [
            format!("source={}", self.source),
            format!("lambda_max={}", e.lambda_max),
            format!("tau={}", c.delay),
            format!("m={}", c.dimension),
            format!("theiler_window={}", c.theiler_window),
            format!("fit_min={}", c.fit_range.0),
            format!("fit_max={}", c.fit_range.1),
            format!("neighbors={}", c.neighbor_count),
            format!("fit_r2={}", e.fit_r2),
            format!("series_len={}", e.series_len),
            format!("skipped={}", a.skipped),
            format!("h={}", a.h),
            format!("tau_fallback={}", a.delay_fallback),
            format!("m_fallback={}", a.dimension_fallback),
        ];
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

pub fn cmd_lyapunov(source: &LyapunovSource, cfg: &ExperimentConfig) -> Result<LyapunovReport, CliError> {
    let settings = LyapunovSettings::from(cfg);
    match source {
        LyapunovSource::Builtin(BuiltinSeries::Logistic) => {
            let series = logistic_series(10_000, 0.3);
            let settings = LyapunovSettings {
                tau: Some(cfg.lyapunov_tau.unwrap_or(1)),
                m: Some(cfg.lyapunov_m.unwrap_or(2)),
                theiler: cfg.lyapunov_theiler,
                fit_range: (0, 5),
                neighbors: cfg.lyapunov_neighbors,
                transient: 0.0,
            };
            Ok(LyapunovReport {
                source: "builtin:logistic".into(),
                analysis: analyze_series(&series, 1.0, &settings)?,
            })
        }
        LyapunovSource::File { path, column, dt } => {
            let table = read_table(File::open(path)?)?;
            let name = match column {
                Some(c) => c.clone(),
                None => ["x", "x_avg"]
                    .into_iter()
                    .find(|c| table.column(c).is_some())
                    .ok_or_else(|| CliError::Data("no `x` or `x_avg` column; pass --column".into()))?
                    .to_string(),
            };
            let series = table
                .column(&name)
                .ok_or_else(|| CliError::Data(format!("column `{name}` not found")))?;
            let h = dt.or_else(|| table.sample_interval()).unwrap_or(cfg.h);
            Ok(LyapunovReport {
                source: format!("{}:{name}", path.display()),
                analysis: analyze_series(series, h, &settings)?,
            })
        }
        LyapunovSource::Simulation => {
            let (backend, notice) = resolve_backend(cfg.rounding_backend);
            if let Some(n) = notice {
                eprintln!("note: {n}");
            }
            let sim = simulate(cfg, backend)?;
            let label = if cfg.filter.is_on() {
                format!("simulation:{}:filtered:{}", cfg.method, cfg.policy)
            } else {
                format!("simulation:{}:traditional", cfg.method)
            };
            Ok(LyapunovReport {
                source: label,
                analysis: analyze_series(&sim.x_series(), cfg.h, &settings)?,
            })
        }
    }
}

/// Runs traditional, strict-filtered and Matlab-faithful-filtered cells for
/// rk3, rk4 and rk5 at the configured settings, one thread per cell.
pub fn cmd_reproduce(base: &ExperimentConfig) -> Result<ReproductionReport, CliError> {
    base.validate()?;
    let (backend, notice) = resolve_backend(base.rounding_backend);
    if let Some(n) = notice {
        eprintln!("note: {n}");
    }
    let started = Instant::now();
    let mut report = run_cells(base, backend);
    report.total_runtime_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

pub(super) fn cell_config(base: &ExperimentConfig, method: &str, policy: Option<RoundingPolicy>) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.method = method.to_string();
    match policy {
        Some(p) => {
            cfg.filter = super::FilterSwitch::On;
            cfg.policy = p;
        }
        None => cfg.filter = super::FilterSwitch::Off,
    }
    cfg
}

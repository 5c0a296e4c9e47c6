use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lyapunov::autocorrelation_peak;
use crate::orbits::RoundingPolicy;
use crate::rounding::RoundingBackend;

use super::commands::{analyze_series, cell_config, simulate, LyapunovSettings};
use super::config::ExperimentConfig;
use super::CliError;

/// Published largest exponents: (method, traditional, filtered).
pub const PUBLISHED_EXPONENTS: [(&str, f64, f64); 3] = [
    ("rk3", 0.344215, -0.011370),
    ("rk4", 0.087915, -0.001371),
    ("rk5", 0.165580, -0.001362),
];

/// A filtered cell counts as non-chaotic below this exponent (1/s).
pub const FILTERED_LAMBDA_MAX: f64 = 0.01;
/// Autocorrelation above this at some lag of at least one second counts as
/// a repeating cycle.
pub const PERIODIC_PEAK_MIN: f64 = 0.95;
const PERIODICITY_MIN_LAG: f64 = 1.0;
const PERIODICITY_WINDOW: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub lambda: Option<f64>,
    pub fit_r2: Option<f64>,
    pub tau: Option<usize>,
    pub m: Option<usize>,
    /// Peak autocorrelation of x (lag ≥ 1 s). Traditional cells use the whole
    /// run, filtered cells the last 50 s.
    pub autocorr_peak: Option<f64>,
    pub autocorr_lag_secs: Option<f64>,
    pub runtime_secs: f64,
    pub error: Option<String>,
}

impl CellResult {
    fn failed(e: CliError, runtime_secs: f64) -> Self {
        CellResult {
            lambda: None,
            fit_r2: None,
            tau: None,
            m: None,
            autocorr_peak: None,
            autocorr_lag_secs: None,
            runtime_secs,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionRow {
    pub method: String,
    pub published_traditional: f64,
    pub published_filtered: f64,
    pub traditional: CellResult,
    /// Strict policy; this is the cell the exit status is judged on.
    pub filtered: CellResult,
    pub filtered_matlab_faithful: CellResult,
    /// [traditional λ > 0, strict filtered λ < 0.01].
    pub sign_match: [bool; 2],
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub backend: RoundingBackend,
    pub transient_secs: f64,
    pub rows: Vec<ReproductionRow>,
    pub criteria_met: bool,
    pub total_runtime_secs: f64,
}

impl ReproductionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn render_table(&self) -> String {
        let fmt_cell = |c: &CellResult| match (c.lambda, &c.error) {
            (Some(l), _) => format!("{l:>12.6}"),
            (None, Some(_)) => format!("{:>12}", "ERROR"),
            (None, None) => format!("{:>12}", "-"),
        };
        let fmt_peak = |c: &CellResult| c.autocorr_peak.map_or("-".to_string(), |p| format!("{p:.3}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:>12} {:>12} {:>12} {:>12} {:>12}  {:>8} {:>8} {:>8}  signs",
            "method", "trad", "filtered", "filt(mf)", "pub trad", "pub filt", "ac trad", "ac filt", "ac mf"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<6} {} {} {} {:>12.6} {:>12.6}  {:>8} {:>8} {:>8}  {}/{}",
                r.method,
                fmt_cell(&r.traditional),
                fmt_cell(&r.filtered),
                fmt_cell(&r.filtered_matlab_faithful),
                r.published_traditional,
                r.published_filtered,
                fmt_peak(&r.traditional),
                fmt_peak(&r.filtered),
                fmt_peak(&r.filtered_matlab_faithful),
                if r.sign_match[0] { "ok" } else { "FAIL" },
                if r.sign_match[1] { "ok" } else { "FAIL" },
            );
        }
        for r in &self.rows {
            for (label, c) in [
                ("traditional", &r.traditional),
                ("filtered", &r.filtered),
                ("filtered(matlab_faithful)", &r.filtered_matlab_faithful),
            ] {
                if let Some(e) = &c.error {
                    let _ = writeln!(s, "error in {} {label}: {e}", r.method);
                }
            }
        }
        let _ = writeln!(
            s,
            "backend={} transient={}s runtime={:.2}s criteria_met={}",
            self.backend, self.transient_secs, self.total_runtime_secs, self.criteria_met
        );
        s
    }
}

fn run_cell(cfg: &ExperimentConfig, backend: RoundingBackend, filtered: bool) -> CellResult {
    let started = Instant::now();
    let outcome = (|| -> Result<CellResult, CliError> {
        let sim = simulate(cfg, backend)?;
        let x = sim.x_series();
        let analysis = analyze_series(&x, cfg.h, &LyapunovSettings::from(cfg))?;
        let window = if filtered {
            let keep = ((PERIODICITY_WINDOW / cfg.h).round() as usize + 1).min(x.len());
            &x[x.len() - keep..]
        } else {
            &x[..]
        };
        let peak = autocorrelation_peak(window, cfg.h, PERIODICITY_MIN_LAG);
        Ok(CellResult {
            lambda: Some(analysis.estimate.lambda_max),
            fit_r2: Some(analysis.estimate.fit_r2),
            tau: Some(analysis.estimate.config.delay),
            m: Some(analysis.estimate.config.dimension),
            autocorr_peak: peak.map(|p| p.value),
            autocorr_lag_secs: peak.map(|p| p.lag as f64 * cfg.h),
            runtime_secs: 0.0,
            error: None,
        })
    })();
    let runtime = started.elapsed().as_secs_f64();
    match outcome {
        Ok(mut c) => {
            c.runtime_secs = runtime;
            c
        }
        Err(e) => CellResult::failed(e, runtime),
    }
}

pub(super) fn run_cells(base: &ExperimentConfig, backend: RoundingBackend) -> ReproductionReport {
    let policies = [None, Some(RoundingPolicy::Strict), Some(RoundingPolicy::MatlabFaithful)];
    let cells: Vec<Vec<CellResult>> = std::thread::scope(|scope| {
        let handles: Vec<Vec<_>> = PUBLISHED_EXPONENTS
            .iter()
            .map(|(method, _, _)| {
                policies
                    .iter()
                    .map(|policy| {
                        let cfg = cell_config(base, method, *policy);
                        scope.spawn(move || run_cell(&cfg, backend, policy.is_some()))
                    })
                    .collect()
            })
            .collect();
        handles
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|h| {
                        h.join()
                            .unwrap_or_else(|_| CellResult::failed(CliError::Data("cell panicked".into()), 0.0))
                    })
                    .collect()
            })
            .collect()
    });

    let rows: Vec<ReproductionRow> = PUBLISHED_EXPONENTS
        .iter()
        .zip(cells)
        .map(|(&(method, published_traditional, published_filtered), mut row)| {
            let filtered_matlab_faithful = row.pop().expect("three cells");
            let filtered = row.pop().expect("three cells");
            let traditional = row.pop().expect("three cells");
            let sign_match = [
                traditional.lambda.is_some_and(|l| l > 0.0),
                filtered.lambda.is_some_and(|l| l < FILTERED_LAMBDA_MAX),
            ];
            let runtime_secs = traditional.runtime_secs + filtered.runtime_secs + filtered_matlab_faithful.runtime_secs;
            ReproductionRow {
                method: method.to_string(),
                published_traditional,
                published_filtered,
                traditional,
                filtered,
                filtered_matlab_faithful,
                sign_match,
                runtime_secs,
            }
        })
        .collect();
    let criteria_met = rows.iter().all(|r| r.sign_match[0] && r.sign_match[1]);
    ReproductionReport {
        backend,
        transient_secs: base.lyapunov_transient,
        rows,
        criteria_met,
        total_runtime_secs: 0.0,
    }
}

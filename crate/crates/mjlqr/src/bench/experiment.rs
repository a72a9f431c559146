//! One-shot experiment driver: reference solve, per-method optimizer runs,
//! CSV traces and a combined convergence plot.

use std::path::{Path, PathBuf};

use crate::bench::io::{trace_to_csv, write_text};
use crate::bench::svg::render_rel_err_svg;
use crate::error::{Error, Result};
use crate::opt::{optimize, MethodKind, OptTrace, StepSize};
use crate::problem::{MjlsProblem, Policy};
use crate::riccati::{solve_care, CareSolution, CARE_MAX_ITER, CARE_TOL};

/// A single optimizer run inside an experiment.
#[derive(Debug, Clone, Copy)]
pub struct MethodRun {
    /// Which update rule to use.
    pub method: MethodKind,
    /// Step size, certified automatically or fixed by the caller.
    pub eta: StepSize,
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Runs to execute, in order.
    pub runs: Vec<MethodRun>,
    /// Relative-error convergence tolerance shared by all runs.
    pub tol: f64,
    /// Iteration cap shared by all runs.
    pub max_iter: usize,
    /// Base path for CSV traces; a `-gd`/`-gn`/`-npg` suffix is inserted
    /// before the extension when more than one run is configured.
    pub csv_base: Option<PathBuf>,
    /// Path for the combined convergence plot.
    pub svg_path: Option<PathBuf>,
}

/// Everything an experiment produced.
pub struct ExperimentOutcome {
    /// Reference solution the runs were measured against.
    pub truth: CareSolution,
    /// One trace per configured run, in configuration order.
    pub traces: Vec<(MethodKind, OptTrace)>,
    /// CSV files written, in configuration order.
    pub csv_paths: Vec<PathBuf>,
}

/// Suffixes `base` with `-tag` before its extension (`trace.csv` becomes
/// `trace-gd.csv`); used when one run writes several trace files.
pub fn suffixed_path(base: &Path, tag: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace");
    let ext = base.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(ext) => format!("{stem}-{tag}.{ext}"),
        None => format!("{stem}-{tag}"),
    };
    base.with_file_name(name)
}

/// Solves the instance once, then runs every configured optimizer against
/// that reference, writing traces and the plot as requested.
///
/// Runs that stop early (step rejected, iterate left the stabilizing set)
/// fail the whole experiment; the caller sees the first offending error.
pub fn run_experiment(
    problem: &MjlsProblem,
    k0: &Policy,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    if config.runs.is_empty() {
        return Err(Error::invalid("experiment", "no methods configured"));
    }
    let truth = solve_care(problem, CARE_TOL, CARE_MAX_ITER)?;

    let mut traces = Vec::with_capacity(config.runs.len());
    for run in &config.runs {
        let trace = optimize(
            problem,
            k0,
            run.method,
            run.eta,
            config.tol,
            config.max_iter,
            Some(&truth),
        )?;
        traces.push((run.method, trace));
    }

    let mut csv_paths = Vec::new();
    if let Some(base) = &config.csv_base {
        for (method, trace) in &traces {
            let path = if traces.len() == 1 {
                base.clone()
            } else {
                suffixed_path(base, method.tag())
            };
            write_text(&path, &trace_to_csv(trace))?;
            csv_paths.push(path);
        }
    }
    if let Some(svg_path) = &config.svg_path {
        let borrowed: Vec<(MethodKind, &OptTrace)> =
            traces.iter().map(|(m, t)| (*m, t)).collect();
        write_text(svg_path, &render_rel_err_svg(&borrowed))?;
    }

    Ok(ExperimentOutcome {
        truth,
        traces,
        csv_paths,
    })
}

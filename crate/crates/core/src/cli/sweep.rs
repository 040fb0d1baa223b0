//! Steady-state parameter sweeps on a worker pool.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use super::config::{ConfigError, ConfigResult, Output, RunConfig, Truncation};
use super::table::{Cell, Table};
use crate::darkstates::{bright_population, dark_populations};
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::model::{liouvillian, SystemParams};
use crate::observables::ObservableSet;
use crate::solvers::{steady_state, steady_state_auto};

/// Grid of steady-state observables, one row per parameter point.
///
/// Columns are the axes, then the requested outputs in alphabetical order,
/// then `n_max` and `status`. Failed points keep their axis values, leave
/// the other cells empty and carry the error message in `status`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub table: Table,
    pub failed_points: usize,
}

impl SweepResult {
    pub fn header(&self) -> &[String] {
        &self.table.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.table.rows
    }

    pub fn to_csv(&self) -> String {
        self.table.to_csv()
    }
}

/// Every grid point, axis 1 outermost, so rows come out sorted
/// lexicographically by axis values.
pub fn grid_points(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &cfg.axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    points
}

fn point_params(cfg: &RunConfig, values: &[f64]) -> SystemParams {
    cfg.axes
        .iter()
        .zip(values)
        .fold(cfg.params, |p, (axis, &v)| axis.name.apply(p, v))
}

/// Steady state for `params` under the configured truncation policy.
pub fn solve(params: &SystemParams, truncation: Truncation) -> Result<(SystemParams, DensityMatrix)> {
    match truncation {
        Truncation::Auto => steady_state_auto(params),
        Truncation::Fixed(n) => {
            let p = params.with_n_max(n);
            let rho = steady_state(&liouvillian(&p)?)?;
            Ok((p, rho))
        }
    }
}

/// Dark-state quantities are undefined when both couplings vanish.
fn undefined_when_uncoupled(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::CouplingsVanish) => Ok(None),
        Err(e) => Err(e),
    }
}

fn evaluate(outputs: &[Output], p: &SystemParams, rho: &DensityMatrix) -> Result<Vec<Option<f64>>> {
    let obs = ObservableSet::evaluate(rho);
    outputs
        .iter()
        .map(|o| match o {
            Output::BrightPopulation => undefined_when_uncoupled(bright_population(rho, p)),
            Output::Concurrence => Ok(Some(obs.concurrence)),
            Output::DarkP0 => undefined_when_uncoupled(dark_populations(rho, p, 0).map(|v| v[0])),
            Output::DarkP1 => undefined_when_uncoupled(dark_populations(rho, p, 1).map(|v| v[1])),
            Output::G2Zero => Ok(obs.g2_zero),
            Output::NPhoton => Ok(Some(obs.n_photon)),
            Output::P33 => Ok(Some(obs.p33)),
            Output::ProjectedTrace => Ok(Some(obs.projected_trace)),
            Output::Ratio => Ok(obs.ratio),
        })
        .collect()
}

fn run_point(cfg: &RunConfig, values: &[f64]) -> std::result::Result<(usize, Vec<Option<f64>>), String> {
    let params = point_params(cfg, values);
    let attempt = catch_unwind(AssertUnwindSafe(|| {
        let (p, rho) = solve(&params, cfg.truncation)?;
        Ok::<_, Error>((p.n_max, evaluate(&cfg.outputs, &p, &rho)?))
    }));
    match attempt {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("internal error while solving this point".into()),
    }
}

pub fn sweep_header(cfg: &RunConfig) -> Vec<String> {
    let mut header: Vec<String> = cfg.axes.iter().map(|a| a.name.as_str().to_string()).collect();
    header.extend(cfg.outputs.iter().map(|o| o.as_str().to_string()));
    header.push("n_max".into());
    header.push("status".into());
    header
}

/// Runs every grid point on a pool of `cfg.workers` threads.
///
/// Each point is solved sequentially and lands in its own row slot, so the
/// result does not depend on the worker count. A failing point becomes an
/// error row and the sweep carries on.
pub fn run_sweep(cfg: &RunConfig) -> ConfigResult<SweepResult> {
    cfg.validate_sweep()?;
    let mut cfg = cfg.clone();
    cfg.outputs.sort();
    cfg.outputs.dedup();
    let cfg = &cfg;
    let points = grid_points(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let outcomes: Vec<_> = pool.install(|| points.par_iter().map(|v| run_point(cfg, v)).collect());

    let mut table = Table::new(cfg.resolved_lines(), sweep_header(cfg));
    let mut failed_points = 0;
    for (values, outcome) in points.iter().zip(outcomes) {
        let mut row: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
        match outcome {
            Ok((n_max, obs)) => {
                row.extend(obs.into_iter().map(Cell::from));
                row.push(Cell::Int(n_max));
                row.push(Cell::Text("ok".into()));
            }
            Err(message) => {
                failed_points += 1;
                row.extend(std::iter::repeat(Cell::Empty).take(cfg.outputs.len() + 1));
                row.push(Cell::Text(format!("error: {message}")));
            }
        }
        table.rows.push(row);
    }
    Ok(SweepResult { table, failed_points })
}

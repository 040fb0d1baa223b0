//! Master-equation time series from a basis state.

use super::config::{ConfigError, ConfigResult, RunConfig, Truncation};
use super::report::cat_truncation;
use super::table::{Cell, Table};
use crate::darkstates::dark_populations;
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::model::{liouvillian, SystemParams};
use crate::observables::{excited_population, photon_number};
use crate::solvers::{evolve_visit, EvolveOptions, TRUNCATION_START, TRUNCATION_STEP};
use crate::strongdrive::{cat_state, drive_frame};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeEvoOutput {
    /// Rows up to the last successfully integrated time.
    pub table: Table,
    /// Integrator failure, if the run stopped early.
    pub failure: Option<String>,
}

/// `"auto"` keeps the initial photon number plus one truncation step of
/// headroom, but never drops below the steady-state starting truncation.
/// In strong mode it also holds the largest cat amplitude.
pub fn timeevo_n_max(cfg: &RunConfig) -> Result<usize> {
    match cfg.truncation {
        Truncation::Auto => {
            let base = TRUNCATION_START.max(cfg.timeevo.initial.1 + TRUNCATION_STEP);
            if cfg.timeevo.strong {
                Ok(base.max(cat_truncation(&cfg.params)?))
            } else {
                Ok(base)
            }
        }
        Truncation::Fixed(n) => Ok(n),
    }
}

fn header(cfg: &RunConfig) -> Vec<String> {
    let mut h = vec!["t".to_string(), "n_photon".into(), "p33".into()];
    h.extend((0..cfg.timeevo.dark_states).map(|n| format!("dark_p{n}")));
    if cfg.timeevo.strong {
        h.push("cat_fidelity".into());
    }
    h
}

fn row(cfg: &RunConfig, p: &SystemParams, elapsed: f64, t: f64, rho: &DensityMatrix) -> Result<Vec<Cell>> {
    let mut cells = vec![Cell::Num(t), photon_number(rho).into(), excited_population(rho).into()];
    let k = cfg.timeevo.dark_states;
    if k > 0 {
        match dark_populations(rho, p, k - 1) {
            Ok(pops) => cells.extend(pops.into_iter().map(Cell::from)),
            Err(Error::CouplingsVanish) => cells.extend(std::iter::repeat(Cell::Empty).take(k)),
            Err(e) => return Err(e),
        }
    }
    if cfg.timeevo.strong {
        let spec = rho.spec();
        let cat = cat_state(elapsed, p)?.state_vector(spec)?;
        let frame = drive_frame(p, elapsed, spec);
        cells.push(rho.transformed(&frame)?.overlap(&cat)?.into());
    }
    Ok(cells)
}

/// Evolves `|k, n⟩` over the configured grid.
///
/// Columns are `t`, `n_photon`, `p33`, the lowest dark-state populations
/// and, in strong mode, the fidelity with the analytic cat state (after
/// removing the ground-state drive rotation). An integrator failure ends the
/// table at the last good time and is returned alongside it.
pub fn run_timeevo(cfg: &RunConfig) -> ConfigResult<TimeEvoOutput> {
    cfg.validate_timeevo()?;
    let invalid = |e: Error| ConfigError::Invalid(e.to_string());
    let s = &cfg.timeevo;
    if s.strong && s.initial != (1, 0) {
        return Err(ConfigError::Invalid(
            "the cat-state comparison starts from [1, 0]".into(),
        ));
    }
    let n_max = timeevo_n_max(cfg).map_err(invalid)?;
    if s.initial.1 > n_max {
        return Err(ConfigError::Invalid(format!(
            "initial photon number {} exceeds n_max = {n_max}",
            s.initial.1
        )));
    }
    if s.dark_states > n_max + 1 {
        return Err(ConfigError::Invalid(format!(
            "{} dark states requested but n_max = {n_max} holds {}",
            s.dark_states,
            n_max + 1
        )));
    }
    let p = cfg.params.with_n_max(n_max);
    let spec = p.spec().map_err(invalid)?;
    let rho0 = DensityMatrix::basis(s.initial.0, s.initial.1, spec).map_err(invalid)?;
    let l = liouvillian(&p).map_err(invalid)?;
    let grid = s.grid()?;

    let resolved = RunConfig {
        truncation: Truncation::Fixed(n_max),
        ..cfg.clone()
    };
    let mut table = Table::new(resolved.resolved_timeevo_lines(), header(cfg));
    let mut row_error = None;
    let outcome = evolve_visit(&l, &rho0, &grid, EvolveOptions::default(), |t, rho| {
        if row_error.is_some() {
            return;
        }
        match row(cfg, &p, t - grid.t0, t, rho) {
            Ok(cells) => table.rows.push(cells),
            Err(e) => row_error = Some(e),
        }
    });
    if let Some(e) = row_error {
        return Err(invalid(e));
    }
    let failure = outcome.err().map(|e| {
        let last = table.rows.last().and_then(|r| r[0].as_f64()).unwrap_or(grid.t0);
        format!("{e}; last good time {last:?}")
    });
    Ok(TimeEvoOutput { table, failure })
}

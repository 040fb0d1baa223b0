//! Command-line front end: configuration, sweeps, time series and reports.
//!
//! Every command produces a [`Table`] whose CSV form starts with `#` lines
//! holding the resolved configuration, so a data file can be regenerated
//! from its own header.

pub mod config;
pub mod report;
pub mod sweep;
pub mod table;
pub mod timeevo;

pub use config::{AxisName, AxisSpec, ConfigError, Output, RunConfig, Scale, TimeEvoSettings, Truncation};
pub use report::{run_catscan, run_darkstate_report};
pub use sweep::{run_sweep, SweepResult};
pub use table::{Cell, Table};
pub use timeevo::{run_timeevo, TimeEvoOutput};

use std::path::PathBuf;
use std::str::FromStr;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    ConfigError = 1,
    PartialFailure = 2,
}

/// Value of `--delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaOverride {
    Auto,
    Value(f64),
}

impl FromStr for DeltaOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(DeltaOverride::Auto);
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(DeltaOverride::Value(x)),
            _ => Err(format!("expected a finite number or `auto`, got `{s}`")),
        }
    }
}

/// Command-line flags that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub n_max: Option<Truncation>,
    pub delta: Option<DeltaOverride>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(out) = &self.out {
            cfg.out_path = Some(out.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(n) = self.n_max {
            cfg.truncation = n;
        }
        match self.delta {
            Some(DeltaOverride::Auto) => cfg.params.delta = None,
            Some(DeltaOverride::Value(x)) => cfg.params.delta = Some(x),
            None => {}
        }
        cfg
    }
}

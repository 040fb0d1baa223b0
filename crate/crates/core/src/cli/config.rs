//! Flat `key = value` run configuration.
//!
//! One setting per line, keys are dotted paths and values are JSON:
//!
//! ```text
//! # Δ₁₂-Δ₂₃ map
//! params.g = 10
//! params.omega12 = 0.1
//! params.n_max = "auto"
//! sweep.axis1.name = "delta12"
//! sweep.axis1.min = -10
//! sweep.axis1.max = 10
//! sweep.axis1.count = 41
//! outputs = ["n_photon", "p33"]
//! ```
//!
//! Blank lines, lines starting with `#` and a `#` comment after a value are
//! ignored, so the metadata header written in front of every CSV file
//! parses back into the same configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::model::SystemParams;
use crate::solvers::TimeGrid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("key `{key}` set twice (lines {first} and {second})")]
    Duplicate { key: String, first: usize, second: usize },

    #[error("`{key}`: {message}")]
    Value { key: String, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("cannot read config: {0}")]
    Io(String),
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Names that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisName {
    Delta12,
    Delta23,
    Omega12,
    Omega23,
    G,
}

impl AxisName {
    pub const ALL: [AxisName; 5] = [
        AxisName::Delta12,
        AxisName::Delta23,
        AxisName::Omega12,
        AxisName::Omega23,
        AxisName::G,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Delta12 => "delta12",
            AxisName::Delta23 => "delta23",
            AxisName::Omega12 => "omega12",
            AxisName::Omega23 => "omega23",
            AxisName::G => "g",
        }
    }

    /// `params` with this axis set to `value`.
    pub fn apply(self, params: SystemParams, value: f64) -> SystemParams {
        let mut p = params;
        match self {
            AxisName::Delta12 => p.delta12 = value,
            AxisName::Delta23 => p.delta23 = value,
            AxisName::Omega12 => p.omega12 = value,
            AxisName::Omega23 => p.omega23 = value,
            AxisName::G => p.g = value,
        }
        p
    }
}

impl FromStr for AxisName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxisName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown axis `{s}`, expected one of delta12, delta23, omega12, omega23, g"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn as_str(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl AxisSpec {
    pub fn validate(&self) -> ConfigResult<()> {
        let name = self.name.as_str();
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(ConfigError::Invalid(format!("axis {name}: bounds must be finite")));
        }
        if self.count < 2 {
            return Err(ConfigError::Invalid(format!(
                "axis {name}: count must be at least 2, got {}",
                self.count
            )));
        }
        if !(self.min < self.max) {
            return Err(ConfigError::Invalid(format!(
                "axis {name}: min must be below max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "axis {name}: log scale needs min > 0, got {}",
                self.min
            )));
        }
        Ok(())
    }

    /// Grid values in increasing order; both end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let s = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * s).exp(),
                }
            })
            .collect()
    }
}

/// Observables a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    BrightPopulation,
    Concurrence,
    DarkP0,
    DarkP1,
    G2Zero,
    NPhoton,
    P33,
    ProjectedTrace,
    Ratio,
}

impl Output {
    pub const ALL: [Output; 9] = [
        Output::BrightPopulation,
        Output::Concurrence,
        Output::DarkP0,
        Output::DarkP1,
        Output::G2Zero,
        Output::NPhoton,
        Output::P33,
        Output::ProjectedTrace,
        Output::Ratio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::BrightPopulation => "bright_population",
            Output::Concurrence => "concurrence",
            Output::DarkP0 => "dark_p0",
            Output::DarkP1 => "dark_p1",
            Output::G2Zero => "g2_zero",
            Output::NPhoton => "n_photon",
            Output::P33 => "p33",
            Output::ProjectedTrace => "projected_trace",
            Output::Ratio => "ratio",
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL.into_iter().find(|o| o.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Output::ALL.iter().map(|o| o.as_str()).collect();
            format!("unknown output `{s}`, expected one of {}", names.join(", "))
        })
    }
}

/// Fock truncation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Fixed(usize),
}

impl FromStr for Truncation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Truncation::Auto);
        }
        s.parse::<usize>()
            .map(Truncation::Fixed)
            .map_err(|_| format!("expected a non-negative integer or `auto`, got `{s}`"))
    }
}

/// Time-evolution settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEvoSettings {
    /// Initial basis state `|k, n⟩`.
    pub initial: (usize, usize),
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    /// Number of lowest dark-state populations to report.
    pub dark_states: usize,
    /// Adds the fidelity with the analytic strong-drive cat state.
    pub strong: bool,
}

impl Default for TimeEvoSettings {
    fn default() -> Self {
        Self {
            initial: (1, 0),
            t0: 0.0,
            t1: 10.0,
            steps: 100,
            dark_states: 2,
            strong: false,
        }
    }
}

impl TimeEvoSettings {
    pub fn grid(&self) -> ConfigResult<TimeGrid> {
        TimeGrid::new(self.t0, self.t1, self.steps).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Base parameters; `params.n_max` is ignored in favour of `truncation`.
    pub params: SystemParams,
    pub truncation: Truncation,
    pub axes: Vec<AxisSpec>,
    /// Sorted and free of duplicates.
    pub outputs: Vec<Output>,
    pub out_path: Option<PathBuf>,
    pub workers: usize,
    pub timeevo: TimeEvoSettings,
    /// Number of rotation angles in `[0, π]` sampled by `catscan`.
    pub catscan_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            truncation: Truncation::Auto,
            axes: Vec::new(),
            outputs: vec![Output::NPhoton, Output::P33],
            out_path: None,
            workers: 1,
            timeevo: TimeEvoSettings::default(),
            catscan_points: 21,
        }
    }
}

struct Entry {
    line: usize,
    value: Value,
}

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn as_f64(key: &str, v: &Value) -> ConfigResult<f64> {
    v.as_f64()
        .ok_or_else(|| value_err(key, format!("expected a number, got {v}")))
}

fn as_usize(key: &str, v: &Value) -> ConfigResult<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| value_err(key, format!("expected a non-negative integer, got {v}")))
}

fn as_str<'a>(key: &str, v: &'a Value) -> ConfigResult<&'a str> {
    v.as_str()
        .ok_or_else(|| value_err(key, format!("expected a string, got {v}")))
}

fn as_bool(key: &str, v: &Value) -> ConfigResult<bool> {
    v.as_bool()
        .ok_or_else(|| value_err(key, format!("expected true or false, got {v}")))
}

fn parse_truncation(key: &str, v: &Value) -> ConfigResult<Truncation> {
    match v {
        Value::String(s) => s.parse().map_err(|e| value_err(key, e)),
        _ => as_usize(key, v).map(Truncation::Fixed),
    }
}

fn parse_delta(key: &str, v: &Value) -> ConfigResult<Option<f64>> {
    match v {
        Value::String(s) if s == "auto" => Ok(None),
        _ => as_f64(key, v).map(Some),
    }
}

fn parse_outputs(key: &str, v: &Value) -> ConfigResult<Vec<Output>> {
    let items = v
        .as_array()
        .ok_or_else(|| value_err(key, format!("expected an array of names, got {v}")))?;
    let mut outputs = items
        .iter()
        .map(|item| as_str(key, item)?.parse::<Output>().map_err(|e| value_err(key, e)))
        .collect::<ConfigResult<Vec<_>>>()?;
    outputs.sort();
    outputs.dedup();
    Ok(outputs)
}

/// One JSON value, optionally followed by a `#` comment.
fn parse_value(text: &str) -> Result<Value, String> {
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Value>();
    let value = match stream.next() {
        Some(Ok(v)) => v,
        Some(Err(e)) => return Err(format!("value is not valid JSON: {e}")),
        None => return Err("missing value".into()),
    };
    let rest = text[stream.byte_offset()..].trim_start();
    if rest.is_empty() || rest.starts_with('#') {
        Ok(value)
    } else {
        Err(format!("unexpected `{rest}` after the value"))
    }
}

impl RunConfig {
    /// Parses the text of a config file. Unset keys keep their defaults.
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty key".into(),
                });
            }
            let value = parse_value(value).map_err(|message| ConfigError::Syntax { line, message })?;
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    first: prev.line,
                    second: line,
                });
            }
            entries.insert(key.to_string(), Entry { line, value });
        }

        let mut cfg = RunConfig::default();
        let mut axes: BTreeMap<usize, AxisDraft> = BTreeMap::new();
        for (key, Entry { value: v, .. }) in &entries {
            let key = key.as_str();
            let p = &mut cfg.params;
            match key {
                "params.g" => p.g = as_f64(key, v)?,
                "params.omega12" => p.omega12 = as_f64(key, v)?,
                "params.omega23" => p.omega23 = as_f64(key, v)?,
                "params.delta12" => p.delta12 = as_f64(key, v)?,
                "params.delta23" => p.delta23 = as_f64(key, v)?,
                "params.delta" => p.delta = parse_delta(key, v)?,
                "params.kappa" => p.kappa = as_f64(key, v)?,
                "params.gamma31" => p.gamma31 = as_f64(key, v)?,
                "params.gamma32" => p.gamma32 = as_f64(key, v)?,
                "params.n_max" => cfg.truncation = parse_truncation(key, v)?,
                "outputs" => cfg.outputs = parse_outputs(key, v)?,
                "out_path" => cfg.out_path = Some(PathBuf::from(as_str(key, v)?)),
                "workers" => cfg.workers = as_usize(key, v)?,
                "timeevo.initial" => cfg.timeevo.initial = parse_initial(key, v)?,
                "timeevo.t0" => cfg.timeevo.t0 = as_f64(key, v)?,
                "timeevo.t1" => cfg.timeevo.t1 = as_f64(key, v)?,
                "timeevo.steps" => cfg.timeevo.steps = as_usize(key, v)?,
                "timeevo.dark_states" => cfg.timeevo.dark_states = as_usize(key, v)?,
                "timeevo.strong" => cfg.timeevo.strong = as_bool(key, v)?,
                "catscan.points" => cfg.catscan_points = as_usize(key, v)?,
                _ => match key.strip_prefix("sweep.axis") {
                    Some(rest) => parse_axis_key(key, rest, v, &mut axes)?,
                    None => return Err(ConfigError::UnknownKey(key.to_string())),
                },
            }
        }

        let expected: Vec<usize> = (1..=axes.len()).collect();
        if axes.keys().copied().collect::<Vec<_>>() != expected {
            return Err(ConfigError::Invalid("sweep axes must be numbered axis1, axis2".into()));
        }
        cfg.axes = axes
            .into_iter()
            .map(|(i, draft)| draft.finish(i))
            .collect::<ConfigResult<Vec<_>>>()?;
        cfg.validate_common()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate_common(&self) -> ConfigResult<()> {
        self.params
            .with_n_max(1)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Truncation::Fixed(n) = self.truncation {
            if n < 1 {
                return Err(ConfigError::Invalid("n_max must be at least 1".into()));
            }
        }
        if self.workers < 1 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(ConfigError::Invalid(format!(
                "axis {} appears twice",
                self.axes[0].name.as_str()
            )));
        }
        Ok(())
    }

    /// Checks what `sweep` needs beyond the common validation.
    pub fn validate_sweep(&self) -> ConfigResult<()> {
        self.validate_common()?;
        if !(1..=2).contains(&self.axes.len()) {
            return Err(ConfigError::Invalid(format!(
                "a sweep needs one or two axes, got {}",
                self.axes.len()
            )));
        }
        if self.outputs.is_empty() {
            return Err(ConfigError::Invalid("no outputs requested".into()));
        }
        Ok(())
    }

    pub fn validate_timeevo(&self) -> ConfigResult<()> {
        self.validate_common()?;
        self.timeevo.grid()?;
        let (k, _) = self.timeevo.initial;
        if !(1..=3).contains(&k) {
            return Err(ConfigError::Invalid(format!(
                "initial atomic level must be 1, 2 or 3, got {k}"
            )));
        }
        Ok(())
    }

    pub fn validate_catscan(&self) -> ConfigResult<()> {
        self.validate_common()?;
        if self.catscan_points < 2 {
            return Err(ConfigError::Invalid("catscan.points must be at least 2".into()));
        }
        Ok(())
    }

    /// Setting lines that reproduce this run, in config-file syntax.
    ///
    /// Worker count and output path are left out: they do not change the
    /// numbers, and leaving them out keeps files byte-identical across runs.
    pub fn resolved_lines(&self) -> Vec<String> {
        let p = &self.params;
        let mut lines = vec![
            format!("params.g = {}", json_f64(p.g)),
            format!("params.omega12 = {}", json_f64(p.omega12)),
            format!("params.omega23 = {}", json_f64(p.omega23)),
            format!("params.delta12 = {}", json_f64(p.delta12)),
            format!("params.delta23 = {}", json_f64(p.delta23)),
            format!(
                "params.delta = {}",
                p.delta.map_or_else(|| "\"auto\"".to_string(), json_f64)
            ),
            format!("params.kappa = {}", json_f64(p.kappa)),
            format!("params.gamma31 = {}", json_f64(p.gamma31)),
            format!("params.gamma32 = {}", json_f64(p.gamma32)),
            format!("params.n_max = {}", self.truncation),
        ];
        for (i, axis) in self.axes.iter().enumerate() {
            let prefix = format!("sweep.axis{}", i + 1);
            lines.push(format!("{prefix}.name = \"{}\"", axis.name.as_str()));
            lines.push(format!("{prefix}.min = {}", json_f64(axis.min)));
            lines.push(format!("{prefix}.max = {}", json_f64(axis.max)));
            lines.push(format!("{prefix}.count = {}", axis.count));
            lines.push(format!("{prefix}.scale = \"{}\"", axis.scale.as_str()));
        }
        let names: Vec<String> = self.outputs.iter().map(|o| format!("\"{}\"", o.as_str())).collect();
        lines.push(format!("outputs = [{}]", names.join(", ")));
        lines
    }

    /// [`RunConfig::resolved_lines`] plus the time-evolution settings.
    pub fn resolved_timeevo_lines(&self) -> Vec<String> {
        let t = &self.timeevo;
        let mut lines = self.resolved_lines();
        lines.pop();
        lines.extend([
            format!("timeevo.initial = [{}, {}]", t.initial.0, t.initial.1),
            format!("timeevo.t0 = {}", json_f64(t.t0)),
            format!("timeevo.t1 = {}", json_f64(t.t1)),
            format!("timeevo.steps = {}", t.steps),
            format!("timeevo.dark_states = {}", t.dark_states),
            format!("timeevo.strong = {}", t.strong),
        ]);
        lines
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Auto => f.write_str("\"auto\""),
            Truncation::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// Shortest round-trip decimal. For finite `x` this is also valid JSON
/// (`1.0`, `-0.25`, `1e-7`).
pub fn json_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_initial(key: &str, v: &Value) -> ConfigResult<(usize, usize)> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([k, n]) => Ok((as_usize(key, k)?, as_usize(key, n)?)),
        _ => Err(value_err(key, format!("expected [level, photons], got {v}"))),
    }
}

#[derive(Default)]
struct AxisDraft {
    name: Option<AxisName>,
    min: Option<f64>,
    max: Option<f64>,
    count: Option<usize>,
    scale: Option<Scale>,
}

impl AxisDraft {
    fn finish(self, index: usize) -> ConfigResult<AxisSpec> {
        let missing = |field: &str| ConfigError::Invalid(format!("sweep.axis{index}.{field} is missing"));
        Ok(AxisSpec {
            name: self.name.ok_or_else(|| missing("name"))?,
            min: self.min.ok_or_else(|| missing("min"))?,
            max: self.max.ok_or_else(|| missing("max"))?,
            count: self.count.ok_or_else(|| missing("count"))?,
            scale: self.scale.unwrap_or(Scale::Linear),
        })
    }
}

fn parse_axis_key(key: &str, rest: &str, v: &Value, axes: &mut BTreeMap<usize, AxisDraft>) -> ConfigResult<()> {
    let unknown = || ConfigError::UnknownKey(key.to_string());
    let (index, field) = rest.split_once('.').ok_or_else(unknown)?;
    let index: usize = index.parse().map_err(|_| unknown())?;
    if !(1..=2).contains(&index) {
        return Err(ConfigError::Invalid(format!(
            "a sweep has at most two axes, found `{key}`"
        )));
    }
    let draft = axes.entry(index).or_default();
    match field {
        "name" => draft.name = Some(as_str(key, v)?.parse().map_err(|e| value_err(key, e))?),
        "min" => draft.min = Some(as_f64(key, v)?),
        "max" => draft.max = Some(as_f64(key, v)?),
        "count" => draft.count = Some(as_usize(key, v)?),
        "scale" => {
            draft.scale = Some(match as_str(key, v)? {
                "linear" => Scale::Linear,
                "log" => Scale::Log,
                other => return Err(value_err(key, format!("scale must be linear or log, got `{other}`"))),
            })
        }
        _ => return Err(unknown()),
    }
    Ok(())
}

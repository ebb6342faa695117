//! Run configuration: what to compute, with which parameters, on which grid.
//!
//! On disk a configuration is a flat TOML document, for example
//!
//! ```toml
//! task = "emission-sweep"
//! grid = "0:3:300"
//! g_a = 1.0
//! g_b = 0.1
//! gamma = 0.05
//! kappa = 0.07
//! ```
//!
//! Every key other than `task`, `grid`, `format` and `out` is a model
//! parameter. `single-mode` runs take single-mode parameters
//! (`g_a`, `delta_omega_a`, `gamma`, `kappa`).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rarr_core::{SingleModeParams, SystemParams};
use serde::Serialize;
use thiserror::Error;

/// Process exit status for each failure class.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] rarr_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    EigenSweep,
    Trajectory,
    EmissionSweep,
    Spectrum,
    SingleMode,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::EigenSweep,
        Task::Trajectory,
        Task::EmissionSweep,
        Task::Spectrum,
        Task::SingleMode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::EigenSweep => "eigen-sweep",
            Task::Trajectory => "trajectory",
            Task::EmissionSweep => "emission-sweep",
            Task::Spectrum => "spectrum",
            Task::SingleMode => "single-mode",
        }
    }

    /// Grid used when neither the config nor the flags give one.
    pub fn default_grid(self) -> Grid {
        match self {
            Task::EigenSweep => Grid::new(0.0, 3.0, 600),
            Task::Trajectory | Task::SingleMode => Grid::new(0.0, 100.0, 2000),
            Task::EmissionSweep => Grid::new(0.0, 3.0, 300),
            Task::Spectrum => Grid::new(-2.0, 2.0, 4001),
        }
    }

    /// What the grid runs over.
    pub fn axis_name(self) -> &'static str {
        match self {
            Task::EigenSweep | Task::EmissionSweep => "delta_omega",
            Task::Trajectory | Task::SingleMode => "t",
            Task::Spectrum => "omega",
        }
    }
}

impl FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown task `{s}`")))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Uniform axis `start:stop:count`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Config(format!(
                "grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || !(self.start < self.stop) {
            return Err(CliError::Config(format!(
                "grid start must be below stop, got {}:{}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("grid must look like start:stop:count, got `{s}`"));
        let fields: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, count] = fields[..] else {
            return Err(bad());
        };
        let grid = Grid {
            start: start.parse().map_err(|_| bad())?,
            stop: stop.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
        };
        grid.check()?;
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// Tab-separated columns under a `#` header.
    #[default]
    Tab,
    /// One JSON document.
    Doc,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "tab" => Ok(Format::Tab),
            "doc" => Ok(Format::Doc),
            _ => Err(CliError::Config(format!(
                "format must be `tab` or `doc`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Tab => "tab",
            Format::Doc => "doc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamSet {
    TwoMode(SystemParams),
    SingleMode(SingleModeParams),
}

impl ParamSet {
    pub fn two_mode(&self) -> Option<&SystemParams> {
        match self {
            ParamSet::TwoMode(p) => Some(p),
            ParamSet::SingleMode(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub params: ParamSet,
    pub grid: Grid,
    pub format: Format,
    pub out: Option<PathBuf>,
}

const RUN_KEYS: [&str; 4] = ["task", "grid", "format", "out"];

fn take_string(table: &mut toml::Table, key: &str) -> Result<Option<String>, CliError> {
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(CliError::Config(format!(
            "`{key}` must be a string, got {other}"
        ))),
    }
}

impl RunConfig {
    /// Builds a configuration from a flat key-value table. `task` may be
    /// supplied by the caller instead of the table; when both are present
    /// they must agree.
    pub fn from_table(mut table: toml::Table, task: Option<Task>) -> Result<Self, CliError> {
        let listed = take_string(&mut table, "task")?
            .map(|s| s.parse::<Task>())
            .transpose()?;
        let task = match (listed, task) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!(
                    "config is for task `{a}`, not `{b}`"
                )))
            }
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => return Err(CliError::Config("missing field `task`".into())),
        };
        let grid = match take_string(&mut table, "grid")? {
            Some(s) => s.parse()?,
            None => task.default_grid(),
        };
        let format = take_string(&mut table, "format")?
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or_default();
        let out = take_string(&mut table, "out")?.map(PathBuf::from);
        // Integers are accepted wherever a float is expected.
        for (_, value) in table.iter_mut() {
            if let toml::Value::Integer(i) = *value {
                *value = toml::Value::Float(i as f64);
            }
        }
        let params = match task {
            Task::SingleMode => ParamSet::SingleMode(
                table
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?,
            ),
            _ => ParamSet::TwoMode(
                table
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?,
            ),
        };
        Ok(Self {
            task,
            params,
            grid,
            format,
            out,
        })
    }

    pub fn from_toml_str(text: &str, task: Option<Task>) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        Self::from_table(table, task)
    }

    /// Reads back the `#` header written by a run.
    pub fn from_header(text: &str) -> Result<Self, CliError> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| l.contains(" = "))
            .map(|l| format!("{l}\n"))
            .collect();
        Self::from_toml_str(&body, None)
    }

    /// Flat TOML echo of the whole configuration.
    pub fn to_table(&self) -> toml::Table {
        let mut table = toml::Table::new();
        table.insert("task".into(), self.task.name().into());
        table.insert("grid".into(), self.grid.to_string().into());
        table.insert("format".into(), self.format.to_string().into());
        if let Some(out) = &self.out {
            table.insert("out".into(), out.display().to_string().into());
        }
        let params =
            toml::Table::try_from(self.params).expect("parameter sets are flat tables of floats");
        table.extend(params);
        table
    }

    pub fn echo_lines(&self) -> Vec<String> {
        let table = self.to_table();
        let mut lines = Vec::with_capacity(table.len());
        for key in RUN_KEYS.iter().copied().chain(
            table
                .keys()
                .map(String::as_str)
                .filter(|k| !RUN_KEYS.contains(k)),
        ) {
            if let Some(value) = table.get(key) {
                lines.push(format!("{key} = {value}"));
            }
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_enforces_invariants() {
        assert_eq!("0:3:300".parse::<Grid>().unwrap(), Grid::new(0.0, 3.0, 300));
        assert_eq!(
            "-2 : 2 : 5".parse::<Grid>().unwrap().points(),
            vec![-2.0, -1.0, 0.0, 1.0, 2.0]
        );
        for bad in ["0:3", "0:3:1", "3:0:10", "1:1:10", "a:1:2", "0:nan:4"] {
            assert!(
                matches!(bad.parse::<Grid>(), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn flat_config_parses_with_defaults() {
        let c = RunConfig::from_toml_str("task = \"fig\"", None);
        assert!(c.is_err());
        let c = RunConfig::from_toml_str("task = \"emission-sweep\"\ng_a = 1\nkappa = 0.07", None)
            .unwrap();
        assert_eq!(c.grid, Task::EmissionSweep.default_grid());
        assert_eq!(
            c.params,
            ParamSet::TwoMode(SystemParams::new(1.0, 0.0, 0.0, 0.0, 0.07))
        );
    }

    #[test]
    fn missing_coupling_names_the_field() {
        let err = RunConfig::from_toml_str("task = \"trajectory\"\ng_b = 0.1", None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("g_a"), "{err}");
    }

    #[test]
    fn unknown_and_mismatched_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("task = \"trajectory\"\ng_a = 1\ng_c = 2", None).is_err());
        assert!(
            RunConfig::from_toml_str("task = \"single-mode\"\ng_a = 1\ng_b = 2", None).is_err()
        );
        assert!(
            RunConfig::from_toml_str("task = \"trajectory\"\ng_a = 1", Some(Task::Spectrum))
                .is_err()
        );
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig {
            task: Task::SingleMode,
            params: ParamSet::SingleMode(SingleModeParams::new(1.0, 0.25, 0.01, 0.1)),
            grid: Grid::new(0.0, 50.0, 11),
            format: Format::Doc,
            out: Some("x/y.tsv".into()),
        };
        let header: String = c.echo_lines().iter().map(|l| format!("# {l}\n")).collect();
        assert_eq!(RunConfig::from_header(&header).unwrap(), c);
    }
}

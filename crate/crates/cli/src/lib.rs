//! Command-line front end for the `rarr-core` solvers: configuration files,
//! figure presets and tabular or JSON output.

// `!(x < y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod preset;
pub mod run;

pub use config::{CliError, Format, Grid, ParamSet, RunConfig, Task};
pub use preset::{preset, PRESET_NAMES};
pub use run::{execute, render, run, RunOutput};

/// Parameter and output overrides given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub g_a: Option<f64>,
    pub g_b: Option<f64>,
    pub delta_omega: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub grid: Option<String>,
    pub format: Option<String>,
    pub out: Option<String>,
}

impl Overrides {
    fn apply(&self, table: &mut toml::Table, task: Task) -> Result<(), CliError> {
        let detuning_key = if task == Task::SingleMode {
            "delta_omega_a"
        } else {
            "delta_omega"
        };
        if task == Task::SingleMode && self.g_b.is_some() {
            return Err(CliError::Config(
                "--g-b does not apply to single-mode runs".into(),
            ));
        }
        let values = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            (detuning_key, self.delta_omega),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
        ];
        for (key, value) in values {
            if let Some(v) = value {
                table.insert(key.into(), v.into());
            }
        }
        for (key, value) in [
            ("grid", &self.grid),
            ("format", &self.format),
            ("out", &self.out),
        ] {
            if let Some(v) = value {
                table.insert(key.into(), v.clone().into());
            }
        }
        Ok(())
    }
}

/// Resolves the configuration of one invocation. Layers, lowest first: the
/// preset (or `g_a = 1`), the config file, the command-line overrides.
pub fn resolve(
    task: Option<Task>,
    preset_name: Option<&str>,
    config_text: Option<&str>,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let mut table = match preset_name {
        Some(name) => {
            let mut base = preset(name)?.to_table();
            base.remove("format");
            base
        }
        None if config_text.is_none() => {
            toml::Table::from_iter([("g_a".to_string(), toml::Value::from(1.0))])
        }
        None => toml::Table::new(),
    };
    if let Some(text) = config_text {
        let file: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().trim().to_string()))?;
        table.extend(file);
    }
    let task = match (task, table.get("task").and_then(toml::Value::as_str)) {
        (Some(t), _) => t,
        (None, Some(name)) => name.parse()?,
        (None, None) => return Err(CliError::Config("missing field `task`".into())),
    };
    overrides.apply(&mut table, task)?;
    RunConfig::from_table(table, Some(task))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rarr_core::{SingleModeParams, SystemParams};

    #[test]
    fn bare_invocation_defaults_to_unit_coupling() {
        let c = resolve(Some(Task::Trajectory), None, None, &Overrides::default()).unwrap();
        assert_eq!(
            c.params,
            ParamSet::TwoMode(SystemParams::new(1.0, 0.0, 0.0, 0.0, 0.0))
        );
        assert_eq!(c.grid, Task::Trajectory.default_grid());
    }

    #[test]
    fn layers_override_in_order() {
        let overrides = Overrides {
            kappa: Some(0.2),
            grid: Some("0:1:3".into()),
            ..Default::default()
        };
        let c = resolve(None, Some("fig4"), Some("gamma = 0.1"), &overrides).unwrap();
        assert_eq!(c.task, Task::EmissionSweep);
        assert_eq!(
            c.params,
            ParamSet::TwoMode(SystemParams::new(1.0, 0.1, 0.0, 0.1, 0.2))
        );
        assert_eq!(c.grid, Grid::new(0.0, 1.0, 3));
    }

    #[test]
    fn config_file_without_coupling_is_a_parse_error() {
        let err = resolve(
            Some(Task::Trajectory),
            None,
            Some("g_b = 0.1"),
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`g_a`"));
    }

    #[test]
    fn single_mode_detuning_flag() {
        let overrides = Overrides {
            delta_omega: Some(0.5),
            ..Default::default()
        };
        let c = resolve(Some(Task::SingleMode), None, None, &overrides).unwrap();
        assert_eq!(
            c.params,
            ParamSet::SingleMode(SingleModeParams::new(1.0, 0.5, 0.0, 0.0))
        );
        let overrides = Overrides {
            g_b: Some(0.5),
            ..Default::default()
        };
        assert!(resolve(Some(Task::SingleMode), None, None, &overrides).is_err());
    }
}

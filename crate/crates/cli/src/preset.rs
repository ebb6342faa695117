//! Named configurations reproducing the published figures.

use rarr_core::SystemParams;

use crate::config::{CliError, Format, Grid, ParamSet, RunConfig, Task};

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3a", "fig3b", "fig4", "fig5-raman", "fig5-rarr"];

const G_A: f64 = 1.0;
const G_B: f64 = 0.1;
const GAMMA: f64 = 0.05;
const KAPPA: f64 = 0.07;

fn config(task: Task, params: SystemParams, grid: Grid) -> RunConfig {
    RunConfig {
        task,
        params: ParamSet::TwoMode(params),
        grid,
        format: Format::Tab,
        out: None,
    }
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let lossless = |dw| SystemParams::new(G_A, G_B, dw, 0.0, 0.0);
    let lossy = |dw| SystemParams::new(G_A, G_B, dw, GAMMA, KAPPA);
    Ok(match name {
        "fig2" => config(Task::EigenSweep, lossless(0.0), Grid::new(0.0, 3.0, 600)),
        "fig3a" => config(Task::Trajectory, lossless(0.0), Grid::new(0.0, 100.0, 2000)),
        "fig3b" => config(Task::Trajectory, lossless(G_A), Grid::new(0.0, 100.0, 2000)),
        "fig4" => config(Task::EmissionSweep, lossy(0.0), Grid::new(0.0, 3.0, 300)),
        "fig5-raman" => config(
            Task::Spectrum,
            lossy(0.0),
            Grid::new(-2.0 * G_A, 2.0 * G_A, 4001),
        ),
        "fig5-rarr" => config(
            Task::Spectrum,
            lossy(G_A),
            Grid::new(-2.0 * G_A, 2.0 * G_A, 4001),
        ),
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

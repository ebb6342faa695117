//! Executes one configured task and renders its outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rarr_core::eigen::EigenTriple;
use rarr_core::table::{eigen_table, emission_table, spectrum_table, trajectory_table, Table};
use rarr_core::{
    emission_probabilities, full_spectrum, sample_trajectory, solve_single_mode, solve_two_mode,
    sweep_eigenvalues, sweep_emission, validate, validate_single_mode, EmissionProbabilities,
    Horizon, Peak, SystemParams, TrajectorySample, ValidationReport,
};
use serde_json::json;

use crate::config::{CliError, Format, ParamSet, RunConfig, Task};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Data table, summary values and advisory warnings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub summary: toml::Table,
    pub warnings: Vec<String>,
}

fn checked(report: ValidationReport) -> Result<Vec<String>, CliError> {
    let warnings = report.warnings().map(str::to_string).collect();
    if report.is_valid() {
        Ok(warnings)
    } else {
        Err(CliError::Validation(
            report.errors().collect::<Vec<_>>().join("; "),
        ))
    }
}

fn has_carriers(p: &SystemParams) -> bool {
    p.omega_a != 0.0 || p.omega_b != 0.0
}

/// Sample axis of a spectrum run. With carriers set, the grid is a detuning
/// window laid around each carrier and the two windows are merged.
pub fn spectrum_axis(config: &RunConfig, p: &SystemParams) -> Vec<f64> {
    let window = config.grid.points();
    if !has_carriers(p) {
        return window;
    }
    let mut axis: Vec<f64> = window
        .iter()
        .map(|d| p.omega_b + d)
        .chain(window.iter().map(|d| p.omega_a + d))
        .collect();
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    axis
}

pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.grid.check()?;
    let params = match config.params {
        ParamSet::SingleMode(p) => {
            let warnings = checked(validate_single_mode(&p))?;
            return single_mode(config, &p, warnings);
        }
        ParamSet::TwoMode(p) => p,
    };
    let mut warnings = checked(validate(&params))?;
    // Overlap only matters for spectra placed on absolute carriers.
    if !(config.task == Task::Spectrum && has_carriers(&params)) {
        warnings.retain(|w| !w.starts_with("mode spectra overlap"));
    }
    let grid = config.grid.points();
    let (table, summary) = match config.task {
        Task::EigenSweep => {
            let sweep = sweep_eigenvalues(&params, &grid)?;
            (eigen_table(&grid, &sweep), eigen_summary(&grid, &sweep))
        }
        Task::Trajectory => {
            let samples = sample_trajectory(&solve_two_mode(&params)?, &grid);
            let summary = trajectory_summary(&samples);
            (trajectory_table(&samples), summary)
        }
        Task::EmissionSweep => {
            let sweep = sweep_emission(&params, &grid)?;
            if let Some(Err(e)) = sweep.iter().find(|r| r.is_err()) {
                if sweep.iter().all(Result::is_err) {
                    return Err(e.clone().into());
                }
                let failed = sweep.iter().filter(|r| r.is_err()).count();
                warnings.push(format!(
                    "{failed} sweep points failed ({e}) and are written as NaN"
                ));
            }
            let summary = emission_summary(&params, &grid, &sweep)?;
            (emission_table(&grid, &sweep), summary)
        }
        Task::Spectrum => {
            let axis = spectrum_axis(config, &params);
            let spectrum = full_spectrum(&solve_two_mode(&params)?, &params, &axis)?;
            let mut summary = toml::Table::new();
            summary.insert("peaks_a".into(), peaks_table(&spectrum.peaks_a).into());
            summary.insert("peaks_b".into(), peaks_table(&spectrum.peaks_b).into());
            (spectrum_table(&spectrum), summary)
        }
        Task::SingleMode => unreachable!("single-mode runs carry single-mode parameters"),
    };
    Ok(RunOutput {
        table,
        summary,
        warnings,
    })
}

fn single_mode(
    config: &RunConfig,
    p: &rarr_core::SingleModeParams,
    warnings: Vec<String>,
) -> Result<RunOutput, CliError> {
    if config.task != Task::SingleMode {
        return Err(CliError::Config(format!(
            "task `{}` needs two-mode parameters",
            config.task
        )));
    }
    let solution = solve_single_mode(p)?;
    let samples = solution.sample(&config.grid.points());
    let mut summary = trajectory_summary(&samples);
    summary.remove("occ_f_exceeds_occ_g");
    summary.insert(
        "form".into(),
        if solution.is_printed_form() {
            "printed"
        } else {
            "residue"
        }
        .into(),
    );
    Ok(RunOutput {
        table: trajectory_table(&samples),
        summary,
        warnings,
    })
}

fn argmax(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    values
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |best, (k, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((k, v)),
        })
}

fn eigen_summary(grid: &[f64], sweep: &[EigenTriple]) -> toml::Table {
    let mut summary = toml::Table::new();
    // Gap between the two branches with the largest frequencies.
    let gaps = sweep.iter().map(|t| -(t.lambdas[2] - t.lambdas[1]).norm());
    if let Some((k, gap)) = argmax(gaps) {
        summary.insert("min_upper_gap".into(), (-gap).into());
        summary.insert("min_upper_gap_delta_omega".into(), grid[k].into());
    }
    summary
}

fn trajectory_summary(samples: &[TrajectorySample]) -> toml::Table {
    let mut summary = toml::Table::new();
    if let Some((k, occ_f)) = argmax(samples.iter().map(|s| s.occ_f)) {
        let s = &samples[k];
        summary.insert("max_occ_f".into(), occ_f.into());
        summary.insert("max_occ_f_t".into(), s.t.into());
        summary.insert("occ_e_at_max_occ_f".into(), s.occ_e.into());
        summary.insert("occ_g_at_max_occ_f".into(), s.occ_g.into());
    }
    if let Some((k, occ_g)) = argmax(samples.iter().map(|s| s.occ_g)) {
        summary.insert("max_occ_g".into(), occ_g.into());
        summary.insert("max_occ_g_t".into(), samples[k].t.into());
    }
    summary.insert(
        "occ_f_exceeds_occ_g".into(),
        samples.iter().any(|s| s.occ_f > s.occ_g).into(),
    );
    summary
}

fn emission_summary(
    params: &SystemParams,
    grid: &[f64],
    sweep: &[rarr_core::Result<EmissionProbabilities>],
) -> Result<toml::Table, CliError> {
    let mut summary = toml::Table::new();
    let p3 = sweep.iter().map(|r| r.as_ref().map_or(f64::NAN, |e| e.p3));
    if let Some((k, peak)) = argmax(p3) {
        summary.insert("p3_peak".into(), peak.into());
        summary.insert("p3_peak_delta_omega".into(), grid[k].into());
    }
    let worst = sweep
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|e| (e.total() - 1.0).abs())
        .fold(0.0, f64::max);
    summary.insert("max_sum_deviation".into(), worst.into());
    // Raman resonance against Raman-assisted Rabi resonance.
    let at = |dw: f64| -> rarr_core::Result<EmissionProbabilities> {
        let p = params.with_delta_omega(dw);
        emission_probabilities(&solve_two_mode(&p)?, &p, Horizon::Infinity)
    };
    if let (Ok(raman), Ok(rarr)) = (at(0.0), at(params.g_a)) {
        summary.insert("enhancement".into(), (rarr.p3 / raman.p3).into());
        summary.insert("p3_over_p2_at_g_a".into(), (rarr.p3 / rarr.p2).into());
    }
    Ok(summary)
}

fn peaks_table(peaks: &[Peak]) -> toml::Table {
    let mut table = toml::Table::new();
    table.insert("count".into(), (peaks.len() as i64).into());
    table.insert(
        "locations".into(),
        peaks
            .iter()
            .map(|p| toml::Value::from(p.location))
            .collect::<Vec<_>>()
            .into(),
    );
    table.insert(
        "heights".into(),
        peaks
            .iter()
            .map(|p| toml::Value::from(p.height))
            .collect::<Vec<_>>()
            .into(),
    );
    table
}

fn header_lines(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("rarr {VERSION}")];
    lines.extend(config.echo_lines());
    lines
}

/// The data file contents. Summary values are appended as `#` lines when
/// `inline_summary` is set and the format is tabular.
pub fn render(config: &RunConfig, output: &RunOutput, inline_summary: bool) -> String {
    match config.format {
        Format::Tab => {
            let mut text: String = header_lines(config)
                .iter()
                .map(|l| format!("# {l}\n"))
                .collect();
            text.push_str(&output.table.to_tsv());
            if inline_summary {
                for line in summary_text(&output.summary).lines() {
                    text.push_str(&format!("# {line}\n"));
                }
            }
            text
        }
        Format::Doc => {
            let doc = json!({
                "version": VERSION,
                "config": config.to_table(),
                "columns": output.table.columns,
                "rows": output.table.rows,
                "summary": output.summary,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("finite tree of plain values");
            text.push('\n');
            text
        }
    }
}

pub fn summary_text(summary: &toml::Table) -> String {
    toml::to_string(summary).expect("summary tables hold plain values")
}

pub fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.toml");
    PathBuf::from(name)
}

/// Runs the task and writes its outputs: to `config.out` plus a summary
/// sidecar when an output path is set, to `stdout` otherwise.
pub fn run(
    config: &RunConfig,
    stdout: &mut impl Write,
    stderr: &mut impl Write,
) -> Result<(), CliError> {
    let output = execute(config)?;
    for w in &output.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    match &config.out {
        Some(path) => {
            fs::write(path, render(config, &output, false))?;
            fs::write(summary_path(path), summary_text(&output.summary))?;
        }
        None => stdout.write_all(render(config, &output, true).as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;
    use crate::preset::preset;

    #[test]
    fn header_round_trips_for_every_task() {
        for name in crate::preset::PRESET_NAMES {
            let mut c = preset(name).unwrap();
            c.grid = Grid::new(c.grid.start, c.grid.stop, 5);
            let text = render(&c, &execute(&c).unwrap(), true);
            assert_eq!(RunConfig::from_header(&text).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn carrier_windows_are_merged() {
        let mut c = preset("fig5-rarr").unwrap();
        c.grid = Grid::new(-2.0, 2.0, 5);
        let p = c.params.two_mode().unwrap().with_carriers(20.0, 0.0);
        assert_eq!(
            spectrum_axis(&c, &p),
            vec![-2.0, -1.0, 0.0, 1.0, 2.0, 18.0, 19.0, 20.0, 21.0, 22.0]
        );
        let overlapping = p.with_carriers(1.0, 0.0);
        assert_eq!(
            spectrum_axis(&c, &overlapping),
            vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn validation_failures_map_to_status_three() {
        let mut c = preset("fig4").unwrap();
        c.params = ParamSet::TwoMode(SystemParams::new(1.0, 0.1, 0.0, -0.05, 0.07));
        assert_eq!(execute(&c).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn numerical_failures_map_to_status_four() {
        let mut c = preset("fig3b").unwrap();
        c.params = ParamSet::TwoMode(SystemParams::new(1.0, 0.0, 1.0, 0.0, 0.0));
        assert_eq!(execute(&c).unwrap_err().exit_code(), 4);
        let mut c = preset("fig4").unwrap();
        c.params = ParamSet::TwoMode(SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.0));
        assert_eq!(execute(&c).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn summary_sidecar_name() {
        assert_eq!(
            summary_path(Path::new("out/fig4.tsv")),
            PathBuf::from("out/fig4.tsv.summary.toml")
        );
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rarr_cli::{resolve, run, CliError, Overrides, Task};

/// Single-photon emission of an emitter coupled to two lossy cavity modes.
#[derive(Parser)]
#[command(name = "rarr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenfrequency branches over a detuning grid.
    EigenSweep(RunArgs),
    /// Amplitudes and occupations over a time grid.
    Trajectory(RunArgs),
    /// Emission probabilities of each channel over a detuning grid.
    EmissionSweep(RunArgs),
    /// Time-integrated emission spectrum over a frequency grid.
    Spectrum(RunArgs),
    /// One-mode reference dynamics over a time grid.
    SingleMode(RunArgs),
    /// Run a figure preset (fig2, fig3a, fig3b, fig4, fig5-raman, fig5-rarr).
    Preset {
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; a `.summary.toml` sidecar is written next to it.
    #[arg(long)]
    out: Option<String>,
    /// `tab` for tab-separated text, `doc` for JSON.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    g_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g_b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Axis as start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

fn execute(command: Command) -> Result<(), CliError> {
    let (task, preset, args) = match command {
        Command::EigenSweep(a) => (Some(Task::EigenSweep), None, a),
        Command::Trajectory(a) => (Some(Task::Trajectory), None, a),
        Command::EmissionSweep(a) => (Some(Task::EmissionSweep), None, a),
        Command::Spectrum(a) => (Some(Task::Spectrum), None, a),
        Command::SingleMode(a) => (Some(Task::SingleMode), None, a),
        Command::Preset { name, args } => (None, Some(name), args),
    };
    let config_text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let overrides = Overrides {
        g_a: args.g_a,
        g_b: args.g_b,
        delta_omega: args.delta_omega,
        gamma: args.gamma,
        kappa: args.kappa,
        grid: args.grid,
        format: args.format,
        out: args.out,
    };
    let config = resolve(task, preset.as_deref(), config_text.as_deref(), &overrides).map_err(
        |e| match (&args.config, e) {
            (Some(path), CliError::Config(msg)) => {
                CliError::Config(format!("config {}: {msg}", path.display()))
            }
            (_, e) => e,
        },
    )?;
    run(
        &config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rarr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line front end. Every data command writes its outputs plus a
//! manifest that `replay` can re-execute.

mod args;
mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{CommandFactory, FromArgMatches};

pub use args::{BuildGraphArgs, Cli, Command, ExperimentArgs, IoArgs, ReplayArgs, RunArgs, SweepArgs, TuneArgs};
pub use config::{parse_config, render_config};
pub use manifest::{write_atomic, Invocation, RunManifest, MANIFEST_FILE};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(crate::Error::InvalidConfig(_) | crate::Error::InvalidHyperparameter(_)) => 2,
            Self::Data(crate::Error::InvalidClusterConfig(_) | crate::Error::InvalidRate(_)) => 2,
            Self::Data(_) => 1,
        }
    }
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Parses `argv`, folding in `--config` entries underneath explicit flags.
/// Help and version requests surface as clap errors, as with `try_parse`.
pub fn parse_args<I, T>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from_argv(&argv)?;
    let config = match &cli.command {
        Command::BuildGraph(a) => a.config.clone(),
        Command::Run(a) => a.config.clone(),
        Command::Sweep(a) => a.config.clone(),
        Command::Tune(a) => a.config.clone(),
        Command::Replay(_) => None,
    };
    let Some(path) = config else {
        return Ok(cli.command);
    };
    // argv[1] is the subcommand: there are no top-level flags besides
    // help and version, which never reach this point.
    let sub_name = argv[1].to_string_lossy().into_owned();
    let root = Cli::command();
    let sub = root.find_subcommand(&sub_name).expect("parsed subcommand exists");
    let known: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long())
        .map(str::to_string)
        .collect();
    let extra = config::config_arguments(&path, &known)
        .map_err(|e| Cli::command().error(clap::error::ErrorKind::ValueValidation, e))?;
    let mut merged = argv[..2].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[2..]);
    Ok(Cli::try_parse_from_argv(&merged)?.command)
}

impl Cli {
    fn try_parse_from_argv(argv: &[OsString]) -> Result<Self, clap::Error> {
        let matches = Self::command().try_get_matches_from(argv)?;
        Self::from_arg_matches(&matches)
    }
}

/// Executes a resolved command, writing outputs and the manifest.
pub fn execute(invocation: Invocation, stdout: &mut dyn Write) -> Result<RunManifest, CliError> {
    let started_at = timestamp();
    let dir = invocation.out_dir().to_path_buf();
    let mut out = commands::Outputs::new(&dir, stdout)?;
    match &invocation {
        Invocation::BuildGraph(a) => commands::build_graph(a, &mut out)?,
        Invocation::Run(a) => commands::run(a, &mut out)?,
        Invocation::Sweep(a) => commands::sweep(a, &mut out)?,
        Invocation::Tune(a) => commands::tune(a, &mut out)?,
    }
    let mut outputs = out.written;
    outputs.push(MANIFEST_FILE.to_string());
    let manifest = RunManifest::new(invocation, outputs, started_at, timestamp());
    manifest.save(&dir)?;
    Ok(manifest)
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<RunManifest, CliError> {
    let mut invocation = match command {
        Command::BuildGraph(a) => Invocation::BuildGraph(a),
        Command::Run(a) => Invocation::Run(a),
        Command::Sweep(a) => Invocation::Sweep(a),
        Command::Tune(a) => Invocation::Tune(a),
        Command::Replay(a) => {
            let mut recorded = RunManifest::load(&a.manifest)?.invocation;
            if let Some(dir) = a.out {
                recorded.set_out_dir(dir);
            }
            recorded
        }
    };
    // Recorded input paths must survive a replay from another directory.
    let input = invocation.input_mut();
    *input = std::path::absolute(&*input).map_err(|e| crate::Error::io(input.clone(), e))?;
    execute(invocation, stdout)
}

/// Entry point used by the binary. Returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(command, &mut stdout) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

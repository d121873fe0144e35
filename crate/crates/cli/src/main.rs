//! `esmap`: build, evaluate, query, synthesise and ablate evidential
//! semantic maps.
//!
//! Exit codes: 0 success, 1 invalid input, 2 internal error.

mod commands;
mod error;
mod manifest;

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use error::{EXIT_INPUT, EXIT_INTERNAL, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "esmap", version, about = "Evidential semantic voxel mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate scans into a map.
    Build {
        /// Directory of scan files, read in lexicographic order.
        #[arg(long)]
        scans: PathBuf,
        /// One pose per line, matching the n-th scan file.
        #[arg(long)]
        poses: PathBuf,
        /// Map config (key=value).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path; defaults to `<out>.manifest`.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Score a map against ground-truth voxel labels.
    Eval {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        include_unobserved: bool,
        /// Manifest path; printed to stderr when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Print the class, probabilities and vacuity at a point.
    Query {
        #[arg(long)]
        map: PathBuf,
        /// "x,y,z" in meters.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Manifest path; printed to stderr when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter over a synthetic dataset.
    Ablate {
        #[arg(long)]
        spec: PathBuf,
        /// PARAM=v1,v2,...
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        out: PathBuf,
        /// Base map config; defaults to one matching the spec.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        include_unobserved: bool,
        /// Manifest path; defaults to `<out>.manifest`.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> error::CliResult<()> {
    match cli.command {
        Command::Build {
            scans,
            poses,
            config,
            out,
            manifest,
        } => commands::build(&scans, &poses, &config, &out, manifest.as_deref()),
        Command::Eval {
            map,
            truth,
            include_unobserved,
            manifest,
        } => commands::eval(&map, &truth, include_unobserved, manifest.as_deref()),
        Command::Query {
            map,
            point,
            manifest,
        } => commands::query(&map, &point, manifest.as_deref()),
        Command::Synth { spec, out } => commands::synth(&spec, &out),
        Command::Ablate {
            spec,
            sweep,
            out,
            config,
            include_unobserved,
            manifest,
        } => commands::ablate(
            &spec,
            &sweep,
            &out,
            config.as_deref(),
            include_unobserved,
            manifest.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let code = match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("{e}");
            e.exit_code()
        }
        Err(_) => EXIT_INTERNAL,
    };
    ExitCode::from(code as u8)
}

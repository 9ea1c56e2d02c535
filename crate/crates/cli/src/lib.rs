//! `hbl`: command-line access to the Brownian-bridge multiple Hermite
//! machinery. Each subcommand prints a JSON document on stdout and, with
//! `--out`, writes the same document plus CSV tables into a directory.

mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{ConfigFile, Overrides, RunConfig};
use error::{CliError, EXIT_CONFIG, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "hbl", version, about = "Multiple Hermite polynomials, recurrence coefficients and Painlevé II double scaling for two groups of Brownian bridges")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Configuration file (schema hbl-config/1); a built-in large-separation
    /// example is used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Working precision in bits (at least 128).
    #[arg(long, global = true, value_name = "BITS")]
    pub precision: Option<u32>,
    /// Directory receiving `<command>.json` and CSV tables.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Multi-index n, comma separated (`density` uses its sum).
    #[arg(long, global = true, value_delimiter = ',', value_name = "N1,N2")]
    pub n: Option<Vec<usize>>,
    /// Multi-index m, comma separated.
    #[arg(long, global = true, value_delimiter = ',', value_name = "M1,M2")]
    pub m: Option<Vec<usize>>,
    /// Time in (0, 1), as a decimal.
    #[arg(long, global = true, value_name = "T")]
    pub t: Option<String>,
    /// Double-scaling parameter in T_n = 1 + L n^(-2/3).
    #[arg(long = "L", global = true, allow_hyphen_values = true, value_name = "L")]
    pub l: Option<String>,
    /// Path counts for `scaling`, comma separated.
    #[arg(long = "n-list", global = true, value_delimiter = ',', value_name = "N,...")]
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Separation regime, critical time and critical temperature.
    Classify,
    /// Ellipse endpoints and semicircle densities at time t.
    Geometry,
    /// The residue matrix Y1 and the products c_ij c_ji.
    Coefficients,
    /// Scalar-product identities between recurrence coefficients.
    Identities,
    /// One-point density (1/n) K_n(x, x) against the semicircle laws.
    Density,
    /// The Hastings–McLeod solution and its Hamiltonian on [-10, 10].
    Painleve,
    /// Recurrence coefficients across n in the configuration's regime.
    Scaling,
    /// Large-z expansions of the spectral curve branches.
    Spectral,
    /// Phase boundary and regime raster in the (t, T) plane.
    PhaseDiagram,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Geometry => "geometry",
            Command::Coefficients => "coefficients",
            Command::Identities => "identities",
            Command::Density => "density",
            Command::Painleve => "painleve",
            Command::Scaling => "scaling",
            Command::Spectral => "spectral",
            Command::PhaseDiagram => "phase-diagram",
        }
    }

    fn needs_config(self) -> bool {
        !matches!(self, Command::Painleve)
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((doc, failure)) => {
            print!("{}", output::pretty(&doc));
            match failure {
                Some(f) => {
                    eprintln!("{}", f.report());
                    f.exit
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit
        }
    }
}

/// Runs the parsed command; returns the JSON document and an optional
/// failure that should set a non-zero exit code after output is written.
pub fn execute(cli: &Cli) -> Result<(Value, Option<CliError>), CliError> {
    let o = &cli.opts;
    let rc = if cli.command.needs_config() {
        let file = match &o.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::builtin(),
        };
        Some(RunConfig::resolve(file, &Overrides { precision: o.precision, t: o.t.clone(), l: o.l.clone() })?)
    } else {
        None
    };
    let artifact = commands::dispatch(cli.command, rc.as_ref(), o)?;
    let parameters = json!({
        "precision": rc.as_ref().map(|r| r.prec).or(o.precision),
        "n": o.n,
        "m": o.m,
        "t": o.t,
        "L": o.l,
        "n_list": o.n_list,
    });
    let doc = artifact.document(rc.as_ref().map(RunConfig::echo), parameters);
    if let Some(dir) = &o.out {
        artifact.write(dir, &doc)?;
    }
    Ok((doc, artifact.failure.clone()))
}

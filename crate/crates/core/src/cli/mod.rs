//! The `ffvar` command line.

mod commands;
pub mod output;
pub mod params;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
pub use output::{Cell, Document, Format, FORMAT_VERSION};
pub use params::Params;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FFVAR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ffvar", version, about = "Divisor sums in progressions over F_q[t] and unitary matrix integrals")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; defaults to $FFVAR_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Lift the q^n enumeration budget.
    #[arg(long, global = true)]
    pub allow_large: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact variance of d_k over progressions: model= k= q= (or p= r=) Q= n=
    Variance { params: Vec<String> },
    /// Matrix integrals I_k(n; R)
    Rmt {
        #[command(subcommand)]
        which: RmtCommand,
    },
    /// Classify every nontrivial character mod Q: model= q= Q=
    TwistScan { params: Vec<String> },
    /// Dump a_f and d_k(f): model= k= q= n=
    DivisorTable { params: Vec<String> },
    /// Calibration and invariant checks
    Selftest { params: Vec<String> },
}

#[derive(Debug, Subcommand)]
pub enum RmtCommand {
    /// Exact lattice count: k= R= n=
    Lattice { params: Vec<String> },
    /// Closed-form binomials next to the lattice count: k= R= n=
    Closed { params: Vec<String> },
    /// Haar Monte Carlo: k= R= n= samples= seed=
    Mc { params: Vec<String> },
    /// Leading coefficient gamma_k(c): k= c= samples= seed= R=
    Gamma { params: Vec<String> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Variance { .. } => "variance",
            Command::Rmt { which } => match which {
                RmtCommand::Lattice { .. } => "rmt-lattice",
                RmtCommand::Closed { .. } => "rmt-closed",
                RmtCommand::Mc { .. } => "rmt-mc",
                RmtCommand::Gamma { .. } => "rmt-gamma",
            },
            Command::TwistScan { .. } => "twist-scan",
            Command::DivisorTable { .. } => "divisor-table",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// Result of a command: the document and whether every check passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: Document,
    pub success: bool,
}

/// Runs a parsed command line and returns its document.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let go = || commands::dispatch(&cli.command, cli.allow_large);
    match cli.workers {
        Some(0) => Err(Error::ConfigParse("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn destination(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{}.{}", cli.command.name(), cli.format.extension())))
    })
}

/// Writes the error record to stderr.
pub fn report_error(e: &Error) {
    let rec = json!({
        "format_version": FORMAT_VERSION,
        "error": { "module": e.module(), "kind": e.kind(), "message": e.to_string() }
    });
    eprintln!("{rec}");
}

/// Parses the process arguments, runs, writes output, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            report_error(&Error::ConfigParse(e.kind().to_string()));
            let _ = e.print();
            return 2;
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            report_error(&e);
            return if matches!(e, Error::ConfigParse(_)) { 2 } else { 1 };
        }
    };
    let written = match destination(&cli) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                let _ = std::fs::create_dir_all(dir);
            }
            File::create(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
                .and_then(|mut f| outcome.document.write(cli.format, &mut f))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            outcome.document.write(cli.format, &mut lock).and_then(|_| {
                lock.flush().map_err(|e| Error::Io(e.to_string()))
            })
        }
    };
    if let Err(e) = written {
        report_error(&e);
        return 1;
    }
    if outcome.success {
        0
    } else {
        1
    }
}

//! Command-line driver for the two-disk field computations: frequency
//! sweeps, field maps, truncation studies and the validation suite.

pub mod config;
pub mod converge;
pub mod error;
pub mod fieldmap;
pub mod schemes;
pub mod sweep;
pub mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{RunConfig, Scheme};
use crate::error::CliError;
use crate::sweep::{write_rows, write_sidecar, Sidecar, SweepMeta, BUILD_DESCRIBE};
use crate::validate::Fault;

#[derive(Debug, Parser)]
#[command(name = "twodisk", version, about = "Plasmonic response of two coupled disks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Origin-gradient curves over the frequency sweep.
    Sweep(Common),
    /// |grad(u - H)| and Re(u - H) on a grid at one frequency.
    Fieldmap(Common),
    /// Worst relative error of every curve against the solver.
    Converge(Common),
    /// Invariant suite with the formula adjudication reports.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Inject a known defect to confirm the suite catches it.
        #[arg(long, value_parser = ["eigenvalue-sign"], hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; defaults describe the reference setup.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; a JSON sidecar is written next to it. Stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict the run to one scheme.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Truncation orders, e.g. `5,10,20`.
    #[arg(long, value_delimiter = ',')]
    pub truncation: Option<Vec<usize>>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let scheme = self.scheme.as_deref().map(str::parse::<Scheme>).transpose()?;
        config.select(scheme, self.truncation.clone())?;
        if let Some(out) = &self.out {
            config.output.path = Some(out.display().to_string());
        }
        Ok(config)
    }
}

fn with_threads<T>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

fn emit<R: Serialize, E: Serialize>(config: &RunConfig, command: &str, rows: &[R], extra: E) -> Result<(), CliError> {
    match config.output.path.as_deref() {
        Some(path) => {
            let path = Path::new(path);
            write_rows(rows, BufWriter::new(File::create(path)?))?;
            let sidecar = Sidecar { command, build: BUILD_DESCRIBE, config, rows: rows.len(), extra };
            write_sidecar(path, &sidecar)
        }
        None => write_rows(rows, io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct FieldMeta {
    omega: f64,
    scheme: Scheme,
    trunc: usize,
    nx: usize,
    ny: usize,
}

#[derive(Serialize)]
struct ConvergeMeta<'a> {
    reference_nodes: usize,
    tail_estimates: &'a [sweep::TailSummary],
    flagged: &'a [sweep::FlaggedRow],
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(common) => {
            let config = common.resolve()?;
            let result = with_threads(common.threads, || sweep::run_sweep(&config))??;
            let meta = SweepMeta { omegas: config.sweep.steps, tail_estimates: &result.tails, flagged: &result.flagged };
            emit(&config, "sweep", &result.rows, meta)
        }
        Command::Fieldmap(common) => {
            let config = common.resolve()?;
            let map = with_threads(common.threads, || fieldmap::run_fieldmap(&config))??;
            let meta = FieldMeta { omega: map.omega, scheme: map.scheme, trunc: map.trunc, nx: map.nx, ny: map.ny };
            emit(&config, "fieldmap", &map.rows, meta)
        }
        Command::Converge(common) => {
            let config = common.resolve()?;
            let (rows, result) = with_threads(common.threads, || converge::run_convergence(&config))??;
            let meta = ConvergeMeta { reference_nodes: config.truncation.nodes, tail_estimates: &result.tails, flagged: &result.flagged };
            emit(&config, "converge", &rows, meta)
        }
        Command::Validate { out, threads, inject_fault } => {
            let fault = inject_fault.map(|_| Fault::EigenvalueSign);
            let report = with_threads(threads, || validate::run_validate(fault))??;
            let text = report.render();
            match out {
                Some(path) => std::fs::write(path, &text)?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
            match report.failures() {
                0 => Ok(()),
                n => Err(CliError::Invariants(n)),
            }
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("twodisk: {e}");
            e.exit_code()
        }
    }
}

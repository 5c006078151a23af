//! `multifrac`: batch runs over one sectioned config file.
//!
//! Every run writes its result files plus `manifest.json` into `--out`.
//! Passing a manifest as `--config` repeats the run it records.
//!
//! Exit codes: 0 success, 1 bad input, 2 infeasible level or parameter,
//! 3 a verification check failed.

mod cmd;
mod format;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use multifrac::config::ConfigFile;
use multifrac::Error;

use cmd::CommandFn;
use run::{load_input, CliError, FileHash, Manifest, Output, Settings};

#[derive(Parser)]
#[command(
    name = "multifrac",
    version,
    about = "Level-set spectra, Moran constructions and smooth-map experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure from the transfer operator, cross-checked by word counts.
    Pressure(Args),
    /// Level-set spectrum from the Legendre transform, word counts and a constrained search.
    Spectrum(Args),
    /// Build a Moran construction and run its checks.
    MoranVerify(Args),
    /// Dimension from the root of a pressure equation.
    BsDim(Args),
    /// Smooth-map evaluations, ensembles and the coded MP spectrum.
    Maps(Args),
    /// Specification-gap search with verified witnesses.
    SpecGap(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every sampling step.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the largest word length.
    #[arg(long)]
    nmax: Option<usize>,
    /// Override the agreement tolerance of pressure and spectrum.
    #[arg(long)]
    tol: Option<f64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Args, CommandFn) {
        match self {
            Command::Pressure(a) => ("pressure", a, cmd::pressure::run),
            Command::Spectrum(a) => ("spectrum", a, cmd::spectrum::run),
            Command::MoranVerify(a) => ("moran-verify", a, cmd::moran::run),
            Command::BsDim(a) => ("bs-dim", a, cmd::bs::run),
            Command::Maps(a) => ("maps", a, cmd::maps::run),
            Command::SpecGap(a) => ("spec-gap", a, cmd::gap::run),
        }
    }
}

fn execute(name: &str, args: &Args, command: CommandFn) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let input = load_input(&args.config)?;
    let recorded = match &input.manifest {
        Some(m) if m.subcommand != name => {
            return Err(Error::config(1, format!("manifest records `{}`, not `{name}`", m.subcommand)).into());
        }
        Some(m) => Some(m.settings.clone()),
        None => None,
    };
    let settings = Settings {
        seed: args.seed.or(recorded.as_ref().map(|s| s.seed)).unwrap_or(0),
        workers: args
            .workers
            .or(recorded.as_ref().map(|s| s.workers))
            .unwrap_or_else(rayon::current_num_threads),
        nmax: args.nmax.or(recorded.as_ref().and_then(|s| s.nmax)),
        tol: args.tol.or(recorded.as_ref().and_then(|s| s.tol)),
    };
    if settings.workers == 0 {
        return Err(Error::InvalidArgument("--workers must be at least 1".into()).into());
    }
    let cfg = ConfigFile::parse(&input.text)?;
    let mut out = Output::create(&args.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let finished = pool.install(|| command(&cfg, &settings, &mut out))?;

    let mut inputs = vec![input.hash.clone()];
    if input.manifest.is_some() {
        inputs.push(FileHash {
            path: format!("{}#config_text", input.path.display()),
            sha256: run::sha256_hex(input.text.as_bytes()),
            bytes: input.text.len(),
        });
    }
    for f in out.files() {
        println!("{}", args.out.join(&f.path).display());
    }
    let manifest = Manifest {
        tool: "multifrac".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: name.into(),
        config_path: input.path.display().to_string(),
        config_text: input.text,
        settings,
        resolved: finished.resolved,
        inputs,
        outputs: out.files().to_vec(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    out.finish(&manifest)?;
    Ok(finished.failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors; bad flags are input errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, args, command) = cli.command.parts();
    match execute(name, args, command) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            match &e {
                CliError::Core(Error::Config { .. }) => {
                    eprintln!("error: {}: {e}", args.config.display())
                }
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

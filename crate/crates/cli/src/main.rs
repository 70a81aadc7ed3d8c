//! `cone-dirac`: kernels, decay checks, admissibility tables and exact
//! evolution of spinor fields on a cone, driven by a JSON config.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 a check ran
//! but missed its tolerance, 1 anything else.

mod commands;
mod config;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use commands::{Output, ToleranceFailure, VerifyKind};
use config::{reject, KernelKind, RunConfig, ValidationError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Kernel,
    Verify,
    Evolve,
    Classify,
}

#[derive(Debug, Parser)]
#[command(name = "cone-dirac", version, about = "Dirac flows on a cosmic-string cone")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    cmd: Cmd,
    /// verify: dispersive-perp | dispersive-p0-weighted | dispersive-p0-lq |
    /// counterexample | classify. kernel: wave | schrodinger | heat.
    #[arg(long)]
    kind: Option<String>,
    /// Field file for `evolve`; overrides `input` in the config.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("CONE_DIRAC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| reject("CONE_DIRAC_THREADS", format!("must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn run(args: &Args) -> Result<()> {
    init_threads()?;
    let cfg = RunConfig::load(&args.config)?;
    cfg.validate()?;
    let dir = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let out = Output { dir, quiet: args.quiet };
    let kind = args.kind.as_deref();
    // Parse the kind before touching the file system.
    match args.cmd {
        Cmd::Kernel => {
            let kind = kind
                .map(|k| KernelKind::parse(k).ok_or_else(|| reject("--kind", format!("unknown kernel kind {k:?}; use wave, schrodinger or heat"))))
                .transpose()?;
            prepare(&out)?;
            commands::kernel(&cfg, kind, &out)
        }
        Cmd::Verify => {
            let k = kind.ok_or_else(|| reject("--kind", format!("required by verify; one of {}", VerifyKind::NAMES.join(", "))))?;
            let k = VerifyKind::parse(k)
                .ok_or_else(|| reject("--kind", format!("unknown verify kind {k:?}; one of {}", VerifyKind::NAMES.join(", "))))?;
            prepare(&out)?;
            commands::verify(&cfg, k, &out)
        }
        Cmd::Evolve => {
            prepare(&out)?;
            commands::evolve(&cfg, args.input.as_deref(), &out)
        }
        Cmd::Classify => {
            prepare(&out)?;
            commands::classify_pairs(&cfg, &out)
        }
    }
}

fn prepare(out: &Output) -> Result<()> {
    std::fs::create_dir_all(&out.dir).with_context(|| format!("creating output directory {}", out.dir.display()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ValidationError>() {
            return 2;
        }
        if cause.is::<ToleranceFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<cone_dirac::Error>() {
            use cone_dirac::Error::*;
            return match e {
                Io(_) | SpecFun(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

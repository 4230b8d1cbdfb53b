//! `aklab` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use aklab_cli::config::{
    ConfigFile, FieldsArgs, PointmodelArgs, ScalarfuncsArgs, TiteicaArgs, UsageError, WangArgs,
};
use aklab_cli::pipeline::{run_all, run_module, write_json, Timings};
use aklab_cli::report::ModuleReport;
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aklab", version, about = "Numerical verification suites for affine spheres and cubic differentials")]
struct Cli {
    /// Seed for every randomized suite.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "aklab-out")]
    out: PathBuf,
    /// Multiplies upper tolerances and divides lower ones.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// TOML or JSON configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conformal profile table and identities.
    Scalarfuncs(ScalarfuncsArgs),
    /// Point-model pseudo-Kähler, moment-map and symbol suites.
    Pointmodel {
        #[command(flatten)]
        args: PointmodelArgs,
        /// Write the report here instead of `<out>/report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Field scenario export and surface-field suites.
    Fields(FieldsArgs),
    /// Wang equation solve and solver suite.
    Wang(WangArgs),
    /// Affine sphere mesh for constant cubic data and frame suite.
    Titeica(TiteicaArgs),
    /// Every module, with a combined summary.
    All,
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("AKLAB_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| UsageError(format!("AKLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    Ok(())
}

fn print_report(r: &ModuleReport) {
    for s in &r.suites {
        let tag = s.criterion.map(|c| format!(" [criterion {c}]")).unwrap_or_default();
        println!("{} {}/{}{}", if s.pass { "PASS" } else { "FAIL" }, r.module, s.name, tag);
        for c in s.failures() {
            eprintln!("  {}: {} {} {}", c.name, c.value, serde_json::to_string(&c.bound).unwrap_or_default().trim_matches('"'), c.tol);
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let tol_scale = cli.tol_scale.or(cfg.tol_scale).unwrap_or(1.0);
    if !(tol_scale.is_finite() && tol_scale > 0.0) {
        return Err(UsageError(format!("tol-scale must be positive, got {tol_scale}")).into());
    }
    let mut timings = Timings::default();
    let reports = match cli.command {
        Command::All => {
            std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
            run_all(&cfg, seed, tol_scale, &cli.out, &mut timings)?
        }
        cmd => {
            let (module, report) = match cmd {
                Command::Scalarfuncs(a) => {
                    cfg.scalarfuncs = a.or(cfg.scalarfuncs);
                    ("scalarfuncs", None)
                }
                Command::Pointmodel { args, report } => {
                    cfg.pointmodel = args.or(cfg.pointmodel);
                    if let Some(parent) = report.as_deref().and_then(|p| p.parent()).filter(|p| !p.as_os_str().is_empty()) {
                        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
                    }
                    ("pointmodel", report)
                }
                Command::Fields(a) => {
                    cfg.fields = a.or(cfg.fields);
                    ("fields", None)
                }
                Command::Wang(a) => {
                    cfg.wang = a.or(cfg.wang);
                    ("wang", None)
                }
                Command::Titeica(a) => {
                    cfg.titeica = a.or(cfg.titeica);
                    ("titeica", None)
                }
                Command::All => unreachable!(),
            };
            vec![run_module(module, &cfg, seed, tol_scale, &cli.out, report.as_deref(), &mut timings)?]
        }
    };
    write_json(&cli.out.join("timings.json"), &timings)?;
    reports.iter().for_each(print_report);
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let mut args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    if args.get(1).is_some_and(|a| a == "run") {
        args.remove(1);
    }
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

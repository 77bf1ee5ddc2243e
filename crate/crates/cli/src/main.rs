mod checks;
mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use manifest::Run;

/// Exit codes.
const EXIT_INTERNAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// A config file or flag that cannot be used.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// The command ran but its outcome is a failure.
#[derive(Debug)]
pub enum Failure {
    Strict(String),
    Verdict(String),
    Check(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Strict(s) => write!(f, "strict mode: {s}"),
            Failure::Verdict(s) => write!(f, "{s}"),
            Failure::Check(s) => write!(f, "check failed: {s}"),
        }
    }
}

impl std::error::Error for Failure {}

#[derive(Parser, Debug)]
#[command(name = "rough-taylor", version, about = "Taylor schemes for fBm-driven equations and their convergence rates")]
struct Cli {
    /// Config file (JSON); a manifest from an earlier run is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the seed given in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "ROUGH_TAYLOR_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Treat diverged trajectories as failure.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample driving paths into binary files.
    Simulate,
    /// Run one scheme on one or many paths.
    Solve,
    /// Run a rate experiment plan: a built-in name or a plan file.
    Rates { plan: Option<String> },
    /// Run a property suite: combinatorics, jets, integrals or all.
    Check {
        #[arg(default_value = "all")]
        suite: String,
    },
}

fn need_config(cli: &Cli) -> Result<&PathBuf> {
    cli.config
        .as_ref()
        .ok_or_else(|| ConfigError("--config is required for this command".into()).into())
}

fn check(suite: &str, cli: &Cli) -> Result<()> {
    let results = checks::run_suite(suite).ok_or_else(|| {
        ConfigError(format!("unknown suite {suite:?}; expected one of {:?} or \"all\"", checks::SUITES))
    })?;
    let config = serde_json::json!({ "suite": suite });
    let mut run = Run::start(&cli.out, "check", config, 0)?;
    for r in &results {
        println!(
            "{} {}/{}: {} cases, max discrepancy {:e} (tolerance {:e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.name,
            r.cases,
            r.max_discrepancy,
            r.tolerance
        );
    }
    let first = results.iter().find(|r| !r.passed);
    let summary = serde_json::json!({
        "manifest": run.reference(),
        "suite": suite,
        "passed": first.is_none(),
        "checks": results,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    run.output("check.json", text.as_bytes())?;
    println!("{text}");
    if let Some(f) = first {
        run.finish("fail")?;
        let ce = f.counterexample.clone().unwrap_or_default();
        return Err(Failure::Check(format!("{}/{}: {ce}", f.suite, f.name)).into());
    }
    run.finish("ok")
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building the worker pool")?;
    }
    match &cli.command {
        Command::Simulate => commands::simulate(need_config(cli)?, cli.seed, &cli.out),
        Command::Solve => commands::solve(need_config(cli)?, cli.seed, &cli.out, cli.strict),
        Command::Rates { plan } => {
            let source = match (plan, &cli.config) {
                (Some(p), None) => p.clone(),
                (None, Some(c)) => c.display().to_string(),
                (Some(_), Some(_)) => return Err(ConfigError("give a plan or --config, not both".into()).into()),
                (None, None) => return Err(ConfigError("no plan given".into()).into()),
            };
            commands::rates(&source, cli.seed, &cli.out)
        }
        Command::Check { suite } => check(suite, cli),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use rough_taylor::Error as E;
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<Failure>() {
            return EXIT_INTERNAL;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config(_) | E::InvalidArgument(_) | E::Json(_) => EXIT_CONFIG,
                E::Infeasible(_) | E::InsufficientLadder { .. } => EXIT_INFEASIBLE,
                _ => EXIT_INTERNAL,
            };
        }
    }
    EXIT_INTERNAL
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

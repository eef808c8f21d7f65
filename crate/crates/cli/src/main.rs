use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use qcausal_cli::{
    cmd_certify, cmd_compile, cmd_oracle, parse_mode, OracleCommand, ProfileFlags, RunConfig,
};

#[derive(Parser)]
#[command(name = "qcausal", version, about = "Rank-constrained quantum inflation hierarchy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the relaxation; writes problem.sdpa and report.json.
    Compile(RunArgs),
    /// Compile, solve and decide. Exit code 0 notRejected, 2 rejected,
    /// 3 inconclusive, 1 error.
    Certify(RunArgs),
    /// Explicit finite-dimensional models.
    #[command(subcommand)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario document (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Distribution document (JSON).
    #[arg(long = "dist")]
    distribution: Option<PathBuf>,
    /// Inflation level.
    #[arg(short = 'n', default_value_t = 1)]
    n: usize,
    /// Moment matrix level.
    #[arg(short = 'k', default_value_t = 1)]
    k: usize,
    /// Schmidt rank.
    #[arg(short = 'r', default_value_t = 1)]
    r: usize,
    /// Norm bound on each Schmidt factor.
    #[arg(short = 'C', default_value_t = 1.0)]
    c_bound: f64,
    #[arg(long = "eps", default_value_t = 0.0)]
    epsilon: f64,
    /// polarizedObjective, linearConstraints or quadraticEpigraph.
    #[arg(long, default_value = "quadraticEpigraph")]
    mode: String,
    /// Comma-separated: hermitianGenerators, legacyProjective, legacyMarginals.
    #[arg(long, default_value = "default")]
    profile: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seconds.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let config = RunConfig {
            scenario: self.scenario,
            distribution: self.distribution,
            n: self.n,
            k: self.k,
            r: self.r,
            c_bound: self.c_bound,
            epsilon: self.epsilon,
            mode: parse_mode(&self.mode)?,
            profile: ProfileFlags::parse(&self.profile)?,
            tol: self.tol,
            time_limit: self.time_limit,
            out: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum OracleArgs {
    /// Random model and the distribution it induces. With --magic, the
    /// magic-basis triangle model instead.
    Sample {
        #[arg(long, required_unless_present = "magic")]
        scenario: Option<PathBuf>,
        /// Dimension of every source endpoint.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Schmidt rank of the sampled POVMs; omit for unstructured POVMs.
        #[arg(short = 'r')]
        r: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with = "scenario")]
        magic: bool,
        /// Inflation copies for --magic.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Moments of a model at hierarchy level (n, k).
    Moments {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(short = 'k', default_value_t = 1)]
        k: usize,
        /// Words to report (letter syntax of the report); all words by default.
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Schmidt-rank truncation of every two-slot party.
    Truncate {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'r')]
        r: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

impl From<OracleArgs> for OracleCommand {
    fn from(a: OracleArgs) -> Self {
        match a {
            OracleArgs::Sample {
                magic: true,
                copies,
                out,
                ..
            } => OracleCommand::Magic { copies, out },
            OracleArgs::Sample {
                scenario,
                dim,
                r,
                seed,
                out,
                ..
            } => OracleCommand::Sample {
                scenario: scenario.unwrap_or_default(),
                endpoint_dim: dim,
                rank: r,
                seed,
                out,
            },
            OracleArgs::Moments {
                model,
                n,
                k,
                words,
                out,
            } => OracleCommand::Moments {
                model,
                n,
                k,
                words,
                out,
            },
            OracleArgs::Truncate {
                model,
                r,
                delta,
                out,
            } => OracleCommand::Truncate {
                model,
                r,
                delta,
                out,
            },
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Compile(args) => {
            let report = cmd_compile(&args.into_config()?)?;
            println!("{}", serde_json::to_string_pretty(&report.stats)?);
            Ok(0)
        }
        Command::Certify(args) => {
            let report = cmd_certify(&args.into_config()?)?;
            println!(
                "{}",
                serde_json::to_string(&serde_json::json!({
                    "decision": report.decision,
                    "status": report.status,
                    "value": report.value,
                }))?
            );
            Ok(report.decision.exit_code())
        }
        Command::Oracle(args) => {
            let report = cmd_oracle(&args.into())?;
            if let Some(e) = report.distribution_error {
                println!("distribution error {e:e}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // Usage errors must not collide with exit code 2 (rejected).
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ComfortMode, EnvKind, Settings, Terminal, UsageError};

#[derive(Parser)]
#[command(
    name = "reqshape",
    version,
    about = "Compile requirement specs into shaped rewards, monitor traces and train tabular agents"
)]
struct Cli {
    /// TOML file with default settings; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write CSV output and a run.json sidecar into this directory instead
    /// of printing to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec file and print its requirement partition and precedence.
    Validate {
        spec: Option<PathBuf>,
    },
    /// Evaluate every requirement of a spec on a JSON-lines trace.
    Monitor {
        spec: Option<PathBuf>,
        trace: Option<PathBuf>,
        /// Episode horizon used to check the trace length.
        #[arg(long)]
        horizon: Option<usize>,
        /// How comfort robustness aggregates over time.
        #[arg(long, value_enum)]
        comfort_robustness: Option<ComfortMode>,
    },
    /// Per-step shaped and baseline rewards along a trace.
    Shape {
        spec: Option<PathBuf>,
        trace: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Potential of the final state when the trace ends in an absorbing state.
        #[arg(long, value_enum)]
        terminal: Option<Terminal>,
        /// Window length for the bounded-horizon robustness reward.
        #[arg(long)]
        bhnr_window: Option<usize>,
    },
    /// Tabular Q-learning; prints the mean learning curve over seeds.
    Train {
        #[command(flatten)]
        learn: LearnArgs,
        /// Reward formulation: hprs, sparse, morl-unif, morl-decr, tltl or bhnr.
        #[arg(long)]
        reward: Option<String>,
    },
    /// Solve gridworld models under the sparse and the shaped reward and
    /// compare optimal actions.
    VerifyInvariance {
        /// Grid configuration files; the bundled small layouts by default.
        grids: Vec<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Value-iteration stopping tolerance.
        #[arg(long)]
        vi_epsilon: Option<f64>,
    },
    /// Train under every reward formulation and report success rates.
    Bench {
        #[command(flatten)]
        learn: LearnArgs,
        /// Minimum comfort average for an episode to count as comfortable.
        #[arg(long)]
        comfort_cutoff: Option<f64>,
    },
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    env: Option<EnvKind>,
    #[arg(long, value_name = "PATH")]
    env_config: Option<PathBuf>,
    /// Comma-separated seeds; falls back to HPRS_SEED, then 0..4.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Training episodes between greedy evaluations.
    #[arg(long)]
    eval_interval: Option<usize>,
    /// Greedy episodes per evaluation.
    #[arg(long)]
    eval_episodes: Option<usize>,
}

impl LearnArgs {
    fn settings(self) -> Settings {
        Settings {
            spec: self.spec,
            env: self.env,
            env_config: self.env_config,
            seeds: self.seeds,
            episodes: self.episodes,
            alpha: self.alpha,
            gamma: self.gamma,
            eval_interval: self.eval_interval,
            eval_episodes: self.eval_episodes,
            ..Default::default()
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Monitor { .. } => "monitor",
            Command::Shape { .. } => "shape",
            Command::Train { .. } => "train",
            Command::VerifyInvariance { .. } => "verify-invariance",
            Command::Bench { .. } => "bench",
        }
    }

    fn settings(self) -> Settings {
        match self {
            Command::Validate { spec } => Settings {
                spec,
                ..Default::default()
            },
            Command::Monitor {
                spec,
                trace,
                horizon,
                comfort_robustness,
            } => Settings {
                spec,
                trace,
                horizon,
                comfort_robustness,
                ..Default::default()
            },
            Command::Shape {
                spec,
                trace,
                horizon,
                terminal,
                bhnr_window,
            } => Settings {
                spec,
                trace,
                horizon,
                terminal,
                bhnr_window,
                ..Default::default()
            },
            Command::Train { learn, reward } => Settings {
                reward,
                ..learn.settings()
            },
            Command::VerifyInvariance {
                grids,
                spec,
                gamma,
                vi_epsilon,
            } => Settings {
                grids: (!grids.is_empty()).then_some(grids),
                spec,
                gamma,
                vi_epsilon,
                ..Default::default()
            },
            Command::Bench {
                learn,
                comfort_cutoff,
            } => Settings {
                comfort_cutoff,
                ..learn.settings()
            },
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let name = cli.command.name();
    let settings = cli.command.settings().over(file);
    let cfg = config::RunConfig::resolve(name, settings, config::seed_from_env()?)?;
    let out = output::Output { dir: cli.out };
    commands::dispatch(cfg, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
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

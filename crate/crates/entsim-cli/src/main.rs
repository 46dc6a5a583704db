use clap::{Parser, Subcommand, ValueEnum};
use entsim_cli::commands::{self, CliError, SuiteKind};
use entsim_cli::report;
use std::path::PathBuf;
use std::process::ExitCode;

/// Reproducible experiments on entanglement-assisted channel simulation.
///
/// Every subcommand prints one JSON report to stdout and exits 0 when all
/// of its checks pass, 1 when a mathematical check fails, and 2 on usage
/// or parse errors. Reports are byte-identical across reruns with the same
/// arguments.
#[derive(Parser)]
#[command(name = "entsim", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the built-in treasure-hunt protocol: per-configuration win
    /// probabilities, overall value, and the two-message classical baseline.
    Treasure,
    /// Decompose an instance into a convex mixture of channels with at most
    /// four nonzero rows; optionally write the mixture to a JSON file.
    Decompose {
        /// Instance JSON file, or a builtin name: "treasure" (alias "appendix").
        #[arg(long = "in", value_name = "FILE|NAME", default_value = "treasure")]
        input: String,
        /// Write the decomposition JSON here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Decide whether a channel is a shared-randomness mixture of channels
    /// with at most N nonzero rows; emits a certificate or a witness game.
    Membership {
        /// Channel JSON file, or a builtin name: "treasure" (alias "appendix").
        #[arg(long = "in", value_name = "FILE|NAME")]
        input: String,
        /// Row-support bound for the mixture components.
        #[arg(long)]
        n: usize,
        /// Feasibility tolerance on the mixture distance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a seeded randomized property suite.
    Props {
        /// Suite to run.
        #[arg(value_enum)]
        suite: Suite,
        /// Number of random trials.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Base seed for the trial generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Suite {
    /// Slack of the two-part positive-split trace inequality.
    Lemma2,
    /// Round-trip residuals of the conditional-state right inverse.
    Gamma,
    /// Marginal consistency of quantum-realized resources.
    Nonsignaling,
    /// Counterexample search over candidate bilinear forms.
    Remark,
}

impl From<Suite> for SuiteKind {
    fn from(s: Suite) -> SuiteKind {
        match s {
            Suite::Lemma2 => SuiteKind::Lemma2,
            Suite::Gamma => SuiteKind::Gamma,
            Suite::Nonsignaling => SuiteKind::Nonsignaling,
            Suite::Remark => SuiteKind::Remark,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Treasure => commands::cmd_treasure(),
        Cmd::Decompose { input, out } => commands::cmd_decompose(&input, out.as_deref()),
        Cmd::Membership { input, n, tol } => commands::cmd_membership(&input, n, tol),
        Cmd::Props { suite, trials, seed } => commands::cmd_props(suite.into(), trials, seed),
    };
    match outcome {
        Ok(rep) => {
            print!("{}", report::to_json_string(&rep));
            if rep.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! `custody`: simulations, capacity analyses and ledger operations for an
//! evidence chain-of-custody blockchain.
//!
//! Exit codes: 0 on success, 1 when an operation fails, 2 on bad
//! arguments or configuration.

mod analyze;
mod config;
mod error;
mod ledger_cmd;
mod output;
mod sim;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

const CONFIG_HELP: &str = "\
Settings come from built-in defaults, then the --config file, then flags.
Config files hold `key = value` lines; `#` starts a comment line. Keys:
  period         block period in seconds (default 300)
  gas_limit      block gas limit (default 10000000)
  validators     number of validators (default 4)
  byzantine      faulty validators: `IDX:silent,IDX:equivocator` or `none`
  seed           RNG seed (default 0)
  periods        run length in block periods (default 100)
  workload       `rate:CREATES,TRANSFERS,REMOVES` per period (default rate:1,10,1),
                 `ramp:START_GAS,END_GAS` (transfers only) or `annual:N`
  description    create description lengths: `fixed:LEN` (default fixed:1024)
                 or `uniform:MIN:MAX`
  clients        client identities (default 8)
  bandwidth      bytes per second (default 1000000)
  base_delay_ms  fixed per-message latency (default 0)
  jitter_ms      maximum random extra latency (default 0)
  header_size    block header bytes (default 1909)
  genesis_size   genesis block bytes (default 4096)
  pp_overhead    pre-prepare framing bytes (default 256)
  prepare_size   prepare message bytes (default 128)
  commit_size    commit message bytes (default 128)

Exit codes: 0 success, 1 operation error, 2 configuration error.";

#[derive(Debug, Parser)]
#[command(name = "custody", version, about = "Evidence chain-of-custody simulator and analysis tool", after_help = CONFIG_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. They override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Read settings from a `key = value` file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// RNG seed
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Write output to PATH instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Block period in seconds
    #[arg(long, global = true, value_name = "SECONDS")]
    pub period: Option<String>,
    /// Block gas limit
    #[arg(long = "gas-limit", global = true, value_name = "UNITS")]
    pub gas_limit: Option<String>,
    /// Number of validators
    #[arg(long, global = true, value_name = "N")]
    pub validators: Option<String>,
    /// Faulty validators, e.g. `0:silent` or `1:equivocator,2:silent`
    #[arg(long, global = true, value_name = "SPEC")]
    pub byzantine: Option<String>,
    /// Run sweep points on all available cores
    #[arg(long = "parallel-sweep", global = true)]
    pub parallel_sweep: bool,
}

impl Common {
    /// Flag values as config overrides.
    pub fn overrides(&self) -> Vec<(&'static str, String)> {
        [
            ("seed", &self.seed),
            ("period", &self.period),
            ("gas_limit", &self.gas_limit),
            ("validators", &self.validators),
            ("byzantine", &self.byzantine),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run consensus simulations
    #[command(subcommand)]
    Sim(sim::SimCommand),
    /// Closed-form capacity and sizing analyses
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
    /// Operate on a persistent local ledger and evidence store
    Ledger(ledger_cmd::LedgerArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sim(cmd) => sim::run(cmd, &cli.common),
        Command::Analyze(cmd) => analyze::run(cmd, &cli.common),
        Command::Ledger(args) => ledger_cmd::run(args, &cli.common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("custody: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

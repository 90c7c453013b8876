//! `sim run` and `sim sweep`.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use custody_core::experiment::{self, ExperimentConfig, RunResult};

use crate::config;
use crate::error::CliError;
use crate::output::{csv_out, f};
use crate::Common;

const RUN_COLUMNS: &str = "\
Output columns, one row per committed block:
  period            block period index the block closes (0-based)
  height            block height
  gas_rate          gas issued by clients during that period
  tx_count          transactions in the block
  mean_lb_s         mean inclusion latency of the block's transactions, seconds
  max_lb_s          largest inclusion latency in the block, seconds
  mean_lc_s         mean consensus latency across honest validators, seconds
  block_size_bytes  header plus transaction bytes
  chain_size_bytes  genesis plus all committed blocks so far
  mempool_depth     transactions still pending after the block was built

With --tips PATH, also writes `validator,height,tip_digest` per honest validator.";

const SWEEP_COLUMNS: &str = "\
Output columns, one row per (gas limit, seed) point:
  gas_limit      block gas limit of the run
  seed           RNG seed of the run
  blocks         committed blocks on the reference honest chain
  issued         transactions issued by clients
  committed      transactions included in committed blocks
  mean_lb_s      mean inclusion latency over all committed transactions, seconds
  max_lb_s       largest inclusion latency, seconds
  mean_lc_s      mean consensus latency over all blocks, seconds
  chain_bytes    final chain size in bytes
  honest_agree   `true` when all honest validators hold the same tip
  trace_digest   digest of the full event trace, for reproducibility checks";

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    /// Run length in block periods
    #[arg(long, value_name = "N")]
    periods: Option<String>,
    /// Workload: `rate:C,T,R`, `ramp:START,END` or `annual:N`
    #[arg(long, value_name = "SPEC")]
    workload: Option<String>,
}

impl RunOpts {
    fn overrides(&self, common: &Common) -> Vec<(&'static str, String)> {
        let mut o = common.overrides();
        o.extend(self.periods.clone().map(|v| ("periods", v)));
        o.extend(self.workload.clone().map(|v| ("workload", v)));
        o
    }
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Run one simulation and print per-block metrics
    #[command(after_help = RUN_COLUMNS)]
    Run {
        #[command(flatten)]
        opts: RunOpts,
        /// Write per-validator tips to PATH
        #[arg(long, value_name = "PATH")]
        tips: Option<PathBuf>,
    },
    /// Run a grid of gas limits and seeds and print one summary row each
    #[command(after_help = SWEEP_COLUMNS)]
    Sweep {
        #[command(flatten)]
        opts: RunOpts,
        /// Comma-separated gas limits; defaults to the configured one
        #[arg(long = "gas-limits", value_name = "LIST", value_delimiter = ',')]
        gas_limits: Vec<u64>,
        /// Comma-separated seeds; defaults to the configured one
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        seeds: Vec<u64>,
    },
}

pub fn run(cmd: SimCommand, common: &Common) -> Result<(), CliError> {
    match cmd {
        SimCommand::Run { opts, tips } => {
            let cfg = config::build(common.config.as_deref(), &opts.overrides(common))?;
            let result = experiment::run_experiment(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
            write_run(&result, common)?;
            if let Some(path) = tips {
                let mut w = csv_out(Some(&path), &["validator", "height", "tip_digest"])?;
                for (v, (h, d)) in &result.tips {
                    w.write_record([v.to_string(), h.to_string(), d.to_hex()])?;
                }
                w.flush()?;
            }
            if !result.honest_agree() {
                return Err(CliError::Failed("honest validators disagree on the chain tip".into()));
            }
            Ok(())
        }
        SimCommand::Sweep { opts, gas_limits, seeds } => {
            let base = config::build(common.config.as_deref(), &opts.overrides(common))?;
            let configs = grid(&base, &gas_limits, &seeds);
            let results = experiment::sweep(&configs, common.parallel_sweep);
            let mut w = csv_out(
                common.out.as_deref(),
                &[
                    "gas_limit",
                    "seed",
                    "blocks",
                    "issued",
                    "committed",
                    "mean_lb_s",
                    "max_lb_s",
                    "mean_lc_s",
                    "chain_bytes",
                    "honest_agree",
                    "trace_digest",
                ],
            )?;
            for (cfg, result) in configs.iter().zip(results) {
                let r = result.map_err(|e| CliError::Config(e.to_string()))?;
                w.write_record(summary_row(cfg, &r))?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn grid(base: &ExperimentConfig, gas_limits: &[u64], seeds: &[u64]) -> Vec<ExperimentConfig> {
    let gas_limits = if gas_limits.is_empty() { vec![base.params.gas_limit] } else { gas_limits.to_vec() };
    let seeds = if seeds.is_empty() { vec![base.seed] } else { seeds.to_vec() };
    let mut out = Vec::with_capacity(gas_limits.len() * seeds.len());
    for &g in &gas_limits {
        for &s in &seeds {
            let mut c = base.clone();
            c.params.gas_limit = g;
            c.seed = s;
            out.push(c);
        }
    }
    out
}

fn write_run(result: &RunResult, common: &Common) -> Result<(), CliError> {
    let mut w = csv_out(
        common.out.as_deref(),
        &[
            "period",
            "height",
            "gas_rate",
            "tx_count",
            "mean_lb_s",
            "max_lb_s",
            "mean_lc_s",
            "block_size_bytes",
            "chain_size_bytes",
            "mempool_depth",
        ],
    )?;
    for r in &result.rows {
        w.write_record([
            r.period_index.to_string(),
            r.height.to_string(),
            r.gas_rate.to_string(),
            r.tx_count.to_string(),
            f(r.mean_lb, 6),
            f(r.max_lb, 6),
            f(r.mean_lc, 6),
            r.block_size.to_string(),
            r.chain_size.to_string(),
            r.mempool_depth.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn summary_row(cfg: &ExperimentConfig, r: &RunResult) -> Vec<String> {
    let txs: usize = r.rows.iter().map(|x| x.tx_count).sum();
    let mean_lb =
        if txs == 0 { 0.0 } else { r.rows.iter().map(|x| x.mean_lb * x.tx_count as f64).sum::<f64>() / txs as f64 };
    let max_lb = r.rows.iter().map(|x| x.max_lb).fold(0.0, f64::max);
    let mean_lc =
        if r.rows.is_empty() { 0.0 } else { r.rows.iter().map(|x| x.mean_lc).sum::<f64>() / r.rows.len() as f64 };
    vec![
        cfg.params.gas_limit.to_string(),
        cfg.seed.to_string(),
        r.rows.len().to_string(),
        r.issued.to_string(),
        r.committed_txs.to_string(),
        f(mean_lb, 6),
        f(max_lb, 6),
        f(mean_lc, 6),
        r.rows.last().map_or(0, |x| x.chain_size).to_string(),
        r.honest_agree().to_string(),
        r.trace.to_hex(),
    ]
}

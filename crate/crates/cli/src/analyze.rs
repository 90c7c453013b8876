//! `analyze` subcommands: closed-form growth, header overhead, gas limit
//! planning and the knapsack cross-check.

use clap::Subcommand;
use custody_core::analytics::{
    self, fig3, gas_limit_range_for_max_size, gas_rate, max_block_size_closed_form, plan_gas_limit, table2, UkpSolver,
    MIB,
};
use custody_core::experiment::gen_workload;
use custody_core::{Catalog, ChainParams, TxKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config;
use crate::error::CliError;
use crate::output::{csv_out, f};
use crate::Common;

const TABLE2_COLUMNS: &str = "\
Yearly chain growth for n creates, n removes and 10n transfers per year.
Output columns, one row per n in {10000, 100000, 1000000}:
  n              evidence items created (and removed) per year
  content_bytes  transaction bytes per year
  content_mib    content_bytes in MiB (2^20 bytes)
  header_bytes   block header bytes per year at the configured period
  header_mib     header_bytes in MiB
  total_bytes    content_bytes + header_bytes
  total_mib      total_bytes in MiB
  overhead_pct   header share of total_bytes, percent";

const FIG3_COLUMNS: &str = "\
Yearly header overhead for block periods of 1, 2, 5, 10, 15, 30 and 60 minutes.
Output columns:
  period_min             block period, minutes
  period_s               block period, seconds
  header_bytes_per_year  header bytes produced per year
  header_mib_per_year    the same in MiB (2^20 bytes)";

const PLAN_COLUMNS: &str = "\
GL is the largest per-period gas rate, GL_avg the mean rate and GU the largest
gas limit whose full block still meets the consensus latency bound. Missing
GL and GL_avg are measured from the configured workload; GU needs --gu or
--max-consensus-latency.
Output columns:
  gl         max-rate lower bound on the gas limit
  gl_avg     average-rate lower bound
  gu         latency upper bound
  gas_limit  recommended gas limit
  range_lo   lowest acceptable gas limit, empty unless gl <= gu
  range_hi   highest acceptable gas limit, empty unless gl <= gu
  tag        ideal, average-bounded or latency-tradeoff";

const UKP_COLUMNS: &str = "\
Compares the closed-form maximum block size with an exact unbounded knapsack
solution over every transaction type. Checks uniform samples in [0, MAX_GAS]
plus k*g_T and k*g_T + g_T - 1 for k = 0..=10. Exits 1 on any mismatch.
Output columns:
  gas_limit          block gas limit checked
  closed_form_bytes  header plus floor(G / g_T) transfers
  dp_bytes           header plus the knapsack optimum
  match              `true` when the two agree";

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Yearly chain growth for three workload sizes
    #[command(name = "table2", after_help = TABLE2_COLUMNS)]
    Table2,
    /// Yearly header overhead across block periods
    #[command(name = "fig3", after_help = FIG3_COLUMNS)]
    Fig3,
    /// Recommend a block gas limit from rate and latency bounds
    #[command(name = "plan-gas-limit", after_help = PLAN_COLUMNS)]
    PlanGasLimit {
        /// Max-rate bound; measured from the workload when omitted
        #[arg(long, value_name = "UNITS")]
        gl: Option<u64>,
        /// Average-rate bound; measured from the workload when omitted
        #[arg(long = "gl-avg", value_name = "UNITS")]
        gl_avg: Option<u64>,
        /// Latency upper bound
        #[arg(long, value_name = "UNITS", conflicts_with = "max_consensus_latency")]
        gu: Option<u64>,
        /// Derive GU from a consensus latency bound in seconds
        #[arg(long = "max-consensus-latency", value_name = "SECONDS")]
        max_consensus_latency: Option<f64>,
        /// Workload used to measure GL and GL_avg
        #[arg(long, value_name = "SPEC")]
        workload: Option<String>,
        /// Periods of workload to measure
        #[arg(long, value_name = "N")]
        periods: Option<String>,
    },
    /// Cross-check the closed-form block size against the exact knapsack
    #[command(name = "ukp-check", after_help = UKP_COLUMNS)]
    UkpCheck {
        /// Number of uniformly sampled gas limits
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Upper end of the sampling range
        #[arg(long = "max-gas", default_value_t = 10_000_000)]
        max_gas: u64,
    },
}

pub fn run(cmd: AnalyzeCommand, common: &Common) -> Result<(), CliError> {
    match cmd {
        AnalyzeCommand::Table2 => {
            let cfg = config::build(common.config.as_deref(), &common.overrides())?;
            let mut w = csv_out(
                common.out.as_deref(),
                &[
                    "n",
                    "content_bytes",
                    "content_mib",
                    "header_bytes",
                    "header_mib",
                    "total_bytes",
                    "total_mib",
                    "overhead_pct",
                ],
            )?;
            for row in table2(cfg.params.period) {
                let g = row.growth;
                w.write_record([
                    row.n.to_string(),
                    g.content_bytes.to_string(),
                    f(g.content_bytes as f64 / MIB, 4),
                    f(g.header_bytes, 2),
                    f(g.header_bytes / MIB, 4),
                    f(g.total_bytes(), 2),
                    f(g.total_bytes() / MIB, 4),
                    f(g.overhead_pct(), 4),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        AnalyzeCommand::Fig3 => {
            let mut w = csv_out(
                common.out.as_deref(),
                &["period_min", "period_s", "header_bytes_per_year", "header_mib_per_year"],
            )?;
            for (t, bytes) in fig3() {
                w.write_record([
                    (t.as_secs() / 60).to_string(),
                    t.as_secs().to_string(),
                    f(bytes, 2),
                    f(bytes / MIB, 4),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        AnalyzeCommand::PlanGasLimit { gl, gl_avg, gu, max_consensus_latency, workload, periods } => {
            let mut overrides = common.overrides();
            overrides.extend(workload.map(|v| ("workload", v)));
            overrides.extend(periods.map(|v| ("periods", v)));
            let cfg = config::build(common.config.as_deref(), &overrides)?;
            let gu = match (gu, max_consensus_latency) {
                (Some(gu), _) => gu,
                (None, Some(l)) => latency_bound(l, &cfg.params)?,
                (None, None) => {
                    return Err(CliError::Config("one of --gu or --max-consensus-latency is required".into()))
                }
            };
            let (gl, gl_avg) = match (gl, gl_avg) {
                (Some(a), Some(b)) => (a, b),
                (a, b) => {
                    let txs = gen_workload(&cfg.workload, cfg.seed, cfg.params.period, cfg.periods, cfg.clients)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    let series = gas_rate(
                        txs.iter().map(|t| (t.issue_time(), t.gas())),
                        cfg.params.period,
                        cfg.periods as usize,
                    );
                    (a.unwrap_or(series.max()), b.unwrap_or(series.mean().ceil() as u64))
                }
            };
            let plan = plan_gas_limit(gl, gl_avg, gu).map_err(|e| CliError::Config(e.to_string()))?;
            let mut w =
                csv_out(common.out.as_deref(), &["gl", "gl_avg", "gu", "gas_limit", "range_lo", "range_hi", "tag"])?;
            let (lo, hi) = plan.range.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            w.write_record([
                plan.gl.to_string(),
                plan.gl_avg.to_string(),
                plan.gu.to_string(),
                plan.gas_limit.to_string(),
                lo,
                hi,
                plan.tag.as_str().to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
        AnalyzeCommand::UkpCheck { samples, max_gas } => {
            let cfg = config::build(common.config.as_deref(), &common.overrides())?;
            let mismatches = ukp_check(samples, max_gas, cfg.seed, cfg.params.header_size, common)?;
            if mismatches > 0 {
                return Err(CliError::Failed(format!("{mismatches} gas limits disagree")));
            }
            Ok(())
        }
    }
}

/// Largest gas limit whose worst-case block meets `latency` seconds.
fn latency_bound(latency: f64, p: &ChainParams) -> Result<u64, CliError> {
    if !(latency.is_finite() && latency > 0.0) {
        return Err(CliError::Config("--max-consensus-latency must be positive".into()));
    }
    let catalog = Catalog::default();
    let t = catalog.transfer().map_err(|e| CliError::Failed(e.to_string()))?;
    let budget = (latency * p.bandwidth as f64).floor() as i128
        - (p.sizes.pp_overhead + p.sizes.prepare + p.sizes.commit + p.header_size) as i128;
    if budget < 0 {
        return Err(CliError::Failed("latency bound is below the cost of an empty block".into()));
    }
    let k = budget as u64 / t.size;
    let (_, hi) = gas_limit_range_for_max_size(p.header_size + k * t.size, &catalog, p.header_size)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(hi)
}

/// Gas limits checked by `ukp-check`: lattice points first, then samples.
pub fn ukp_points(samples: usize, max_gas: u64, seed: u64) -> Vec<u64> {
    let g = custody_core::tx_gas(TxKind::Transfer).expect("transfer cost");
    let mut points: Vec<u64> = (0..=10u64).flat_map(|k| [k * g, k * g + g - 1]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points.extend((0..samples).map(|_| rng.random_range(0..=max_gas)));
    points
}

fn ukp_check(samples: usize, max_gas: u64, seed: u64, header: u64, common: &Common) -> Result<usize, CliError> {
    let catalog = Catalog::default();
    if analytics::dominance_check(&catalog) != Some(TxKind::Transfer) {
        return Err(CliError::Failed("transfer does not dominate the catalog".into()));
    }
    let points = ukp_points(samples, max_gas, seed);
    let capacity = points.iter().copied().max().unwrap_or(0);
    let solver = UkpSolver::new(&catalog, capacity).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut w = csv_out(common.out.as_deref(), &["gas_limit", "closed_form_bytes", "dp_bytes", "match"])?;
    let mut mismatches = 0;
    for g in points {
        let closed = max_block_size_closed_form(g, &catalog, header);
        let dp = header + solver.max_content(g).map_err(|e| CliError::Failed(e.to_string()))?;
        if closed != dp {
            mismatches += 1;
        }
        w.write_record([g.to_string(), closed.to_string(), dp.to_string(), (closed == dp).to_string()])?;
    }
    w.flush()?;
    Ok(mismatches)
}

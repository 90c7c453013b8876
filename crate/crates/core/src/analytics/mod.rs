//! Closed-form performance models and gas-limit planning.
//!
//! Byte quantities reported in MiB/GiB use powers of two.

pub mod ukp;

use std::collections::HashMap;

use thiserror::Error;

pub use ukp::{max_block_size_ukp, UkpError, UkpSolution, UkpSolver};

use crate::consensus::MessageSizes;
use crate::ledger::{CostModel, LedgerError, TxCost, TxKind, MAX_DESCRIPTION_LEN};
use crate::pipeline::HEADER_SIZE;
use crate::time::SimTime;

pub const MIB: f64 = 1024.0 * 1024.0;
pub const GIB: f64 = MIB * 1024.0;
/// Default genesis block size in bytes.
pub const GENESIS_SIZE: u64 = 4096;
/// Default slowest-link bandwidth, bytes per second.
pub const DEFAULT_BANDWIDTH: u64 = 1_000_000;
pub const DEFAULT_GAS_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("catalog has no Transfer entry")]
    MissingTransfer,
    #[error("catalog entries need positive size and gas")]
    NonPositiveCost,
    #[error("max size {0} is not header size plus a whole number of transfers")]
    InvalidMaxSize(u64),
    #[error("average gas rate bound {gl_avg} exceeds max gas rate bound {gl}")]
    InvalidBounds { gl: u64, gl_avg: u64 },
    #[error("{0} is not in the catalog")]
    UnknownKind(String),
    #[error("interval end precedes start")]
    InvalidInterval,
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainParams {
    pub period: SimTime,
    pub gas_limit: u64,
    pub header_size: u64,
    pub bandwidth: u64,
    pub sizes: MessageSizes,
    pub genesis_size: u64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            period: SimTime::from_secs(300),
            gas_limit: DEFAULT_GAS_LIMIT,
            header_size: HEADER_SIZE,
            bandwidth: DEFAULT_BANDWIDTH,
            sizes: MessageSizes::default(),
            genesis_size: GENESIS_SIZE,
        }
    }
}

/// Transaction types with their size and gas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    entries: Vec<(TxKind, TxCost)>,
    index: HashMap<TxKind, usize>,
}

impl Default for Catalog {
    /// Transfer, RemoveEvidence and CreateEvidence for every description
    /// length, priced by the default cost model.
    fn default() -> Self {
        Catalog::from_model(&CostModel::default())
    }
}

impl Catalog {
    pub fn new(entries: Vec<(TxKind, TxCost)>) -> Result<Self, AnalyticsError> {
        if entries.iter().any(|(_, c)| c.size == 0 || c.gas == 0) {
            return Err(AnalyticsError::NonPositiveCost);
        }
        Ok(Catalog::indexed(entries))
    }

    fn indexed(entries: Vec<(TxKind, TxCost)>) -> Self {
        let index = entries.iter().enumerate().map(|(i, (k, _))| (*k, i)).collect();
        Catalog { entries, index }
    }

    pub fn from_model(model: &CostModel) -> Self {
        let mut kinds = vec![TxKind::Transfer, TxKind::RemoveEvidence];
        kinds.extend((0..=MAX_DESCRIPTION_LEN).map(|l| TxKind::CreateEvidence { description_len: l as u16 }));
        let entries = kinds.into_iter().map(|k| (k, model.cost(k).expect("length in range"))).collect();
        Catalog::indexed(entries)
    }

    pub fn from_kinds(kinds: &[TxKind]) -> Result<Self, AnalyticsError> {
        let model = CostModel::default();
        let entries = kinds.iter().map(|&k| Ok((k, model.cost(k)?))).collect::<Result<_, AnalyticsError>>()?;
        Catalog::new(entries)
    }

    pub fn entries(&self) -> &[(TxKind, TxCost)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cost(&self, kind: TxKind) -> Option<TxCost> {
        self.index.get(&kind).map(|&i| self.entries[i].1)
    }

    pub fn transfer(&self) -> Result<TxCost, AnalyticsError> {
        self.cost(TxKind::Transfer).ok_or(AnalyticsError::MissingTransfer)
    }
}

/// `ctime(block) + T - ctime(tx)` in seconds.
pub fn block_inclusion_latency(tx_issue: SimTime, block_creation: SimTime, period: SimTime) -> f64 {
    (block_creation + period).as_secs_f64() - tx_issue.as_secs_f64()
}

/// Time to push a pre-prepare, a prepare and a commit over the slowest link,
/// in seconds.
pub fn consensus_latency(block_size: u64, params: &ChainParams) -> f64 {
    let s = &params.sizes;
    (s.pp_overhead + block_size + s.prepare + s.commit) as f64 / params.bandwidth as f64
}

/// Largest block when Transfer dominates: `sH + floor(G / g_T) * s_T`.
pub fn max_block_size_closed_form(gas_limit: u64, catalog: &Catalog, header_size: u64) -> u64 {
    let t = catalog.transfer().expect("catalog includes Transfer");
    header_size + (gas_limit / t.gas) * t.size
}

/// The kind `K` such that, for every other kind `J`, the `floor(g_J / g_K)`
/// copies of `K` that fit in `J`'s gas are at least as large as `J`.
pub fn dominance_check(catalog: &Catalog) -> Option<TxKind> {
    let dominates = |k: &TxCost, j: &TxCost| (j.gas / k.gas) * k.size >= j.size;
    catalog
        .entries()
        .iter()
        .find(|(_, k)| catalog.entries().iter().all(|(_, j)| dominates(k, j)))
        .map(|(kind, _)| *kind)
}

/// Gas limits whose largest block is exactly `max_size` bytes.
pub fn gas_limit_range_for_max_size(
    max_size: u64,
    catalog: &Catalog,
    header_size: u64,
) -> Result<(u64, u64), AnalyticsError> {
    let t = catalog.transfer()?;
    if max_size < header_size || !(max_size - header_size).is_multiple_of(t.size) {
        return Err(AnalyticsError::InvalidMaxSize(max_size));
    }
    let k = (max_size - header_size) / t.size;
    Ok((k * t.gas, k * t.gas + t.gas - 1))
}

/// Total header bytes produced over `t`: `sH * t / T`.
pub fn header_overhead(t: SimTime, period: SimTime, header_size: u64) -> f64 {
    header_size as f64 * t.as_nanos() as f64 / period.as_nanos() as f64
}

/// [`header_overhead`] floored to whole bytes, computed exactly.
pub fn header_overhead_bytes(t: SimTime, period: SimTime, header_size: u64) -> u64 {
    (header_size as u128 * t.as_nanos() as u128 / period.as_nanos() as u128) as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRate {
    pub header_bytes: f64,
    pub content_bytes: u64,
}

impl GrowthRate {
    pub fn total_bytes(&self) -> f64 {
        self.header_bytes + self.content_bytes as f64
    }

    /// Share of the total taken by headers, in percent.
    pub fn overhead_pct(&self) -> f64 {
        100.0 * self.header_bytes / self.total_bytes()
    }
}

/// Chain growth over `[t1, t2)` for the transactions included in it.
pub fn growth_rate<'a>(
    t1: SimTime,
    t2: SimTime,
    period: SimTime,
    included: impl IntoIterator<Item = &'a TxKind>,
    catalog: &Catalog,
    header_size: u64,
) -> Result<GrowthRate, AnalyticsError> {
    let span = t2.checked_sub(t1).ok_or(AnalyticsError::InvalidInterval)?;
    let mut content = 0u64;
    for kind in included {
        content += catalog.cost(*kind).map(|c| c.size).ok_or_else(|| AnalyticsError::UnknownKind(kind.label()))?;
    }
    Ok(GrowthRate { header_bytes: header_overhead(span, period, header_size), content_bytes: content })
}

/// Annual workload: `n` creates, `n` removes and `10n` transfers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnualWorkload {
    pub n: u64,
    pub description_len: u16,
}

impl AnnualWorkload {
    pub fn new(n: u64) -> Self {
        AnnualWorkload { n, description_len: MAX_DESCRIPTION_LEN as u16 }
    }

    pub fn counts(&self) -> [(TxKind, u64); 3] {
        [
            (TxKind::CreateEvidence { description_len: self.description_len }, self.n),
            (TxKind::RemoveEvidence, self.n),
            (TxKind::Transfer, 10 * self.n),
        ]
    }

    pub fn content_bytes(&self, catalog: &Catalog) -> Result<u64, AnalyticsError> {
        self.counts().iter().try_fold(0u64, |acc, (k, c)| {
            let cost = catalog.cost(*k).ok_or_else(|| AnalyticsError::UnknownKind(k.label()))?;
            Ok(acc + cost.size * c)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Row {
    pub n: u64,
    pub growth: GrowthRate,
}

/// Yearly growth for `n` in `{10^4, 10^5, 10^6}`.
pub fn table2(period: SimTime) -> Vec<Table2Row> {
    let catalog = Catalog::default();
    [10_000u64, 100_000, 1_000_000]
        .into_iter()
        .map(|n| {
            let content = AnnualWorkload::new(n).content_bytes(&catalog).expect("default catalog");
            let growth = GrowthRate {
                header_bytes: header_overhead(crate::time::YEAR, period, HEADER_SIZE),
                content_bytes: content,
            };
            Table2Row { n, growth }
        })
        .collect()
}

pub const FIG3_PERIODS_MIN: [u64; 7] = [1, 2, 5, 10, 15, 30, 60];

/// `(period, yearly header bytes)` for each period in [`FIG3_PERIODS_MIN`].
pub fn fig3() -> Vec<(SimTime, f64)> {
    FIG3_PERIODS_MIN
        .iter()
        .map(|&m| {
            let t = SimTime::from_mins(m);
            (t, header_overhead(crate::time::YEAR, t, HEADER_SIZE))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasRateSeries {
    pub per_period: Vec<u64>,
}

impl GasRateSeries {
    pub fn max(&self) -> u64 {
        self.per_period.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.per_period.is_empty() {
            return 0.0;
        }
        self.per_period.iter().sum::<u64>() as f64 / self.per_period.len() as f64
    }

    /// First period whose gas rate exceeds `gas_limit`.
    pub fn first_crossing(&self, gas_limit: u64) -> Option<usize> {
        self.per_period.iter().position(|&g| g > gas_limit)
    }
}

/// Gas issued per period, bucketed by issue time. The series covers
/// `periods` periods; issues past the last one are ignored.
pub fn gas_rate(issued: impl IntoIterator<Item = (SimTime, u64)>, period: SimTime, periods: usize) -> GasRateSeries {
    let mut per_period = vec![0u64; periods];
    for (t, gas) in issued {
        if let Some(slot) = per_period.get_mut(t.period_index(period) as usize) {
            *slot += gas;
        }
    }
    GasRateSeries { per_period }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanTag {
    Ideal,
    AverageBounded,
    LatencyTradeoff,
}

impl PlanTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanTag::Ideal => "ideal",
            PlanTag::AverageBounded => "average-bounded",
            PlanTag::LatencyTradeoff => "latency-tradeoff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GasLimitPlan {
    pub gl: u64,
    pub gl_avg: u64,
    pub gu: u64,
    pub gas_limit: u64,
    /// Acceptable range when both bounds hold.
    pub range: Option<(u64, u64)>,
    pub tag: PlanTag,
}

/// Picks `G` from the max-rate bound `gl`, average-rate bound `gl_avg` and
/// consensus-latency bound `gu`.
pub fn plan_gas_limit(gl: u64, gl_avg: u64, gu: u64) -> Result<GasLimitPlan, AnalyticsError> {
    if gl_avg > gl {
        return Err(AnalyticsError::InvalidBounds { gl, gl_avg });
    }
    let (gas_limit, range, tag) = if gl <= gu {
        (gl + (gu - gl) / 2, Some((gl, gu)), PlanTag::Ideal)
    } else if gl_avg <= gu {
        (gu, None, PlanTag::AverageBounded)
    } else {
        (gl_avg, None, PlanTag::LatencyTradeoff)
    };
    Ok(GasLimitPlan { gl, gl_avg, gu, gas_limit, range, tag })
}

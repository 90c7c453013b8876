//! Exact maximum block content for a gas budget.
//!
//! Filling a block is an unbounded knapsack: item values are transaction
//! sizes, weights are gas costs, capacity is the block gas limit. Gas costs
//! are large (tens of thousands of units) while the achievable content is a
//! few hundred thousand bytes at most, so the table is indexed by content
//! size: `min_gas[v]` is the least gas that produces exactly `v` bytes. One
//! table answers every capacity up to the one it was built for.

use thiserror::Error;

use super::Catalog;
use crate::ledger::{TxCost, TxKind};

/// Largest capacity the exact solver accepts, in gas units.
pub const DEFAULT_CAPACITY_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UkpError {
    #[error("capacity {capacity} exceeds the exact solver cap {cap}; use the closed form")]
    CapacityTooLargeForExactDP { capacity: u64, cap: u64 },
    #[error("catalog is empty")]
    EmptyCatalog,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UkpSolution {
    /// Total transaction bytes, header excluded.
    pub content: u64,
    pub gas: u64,
    /// `(kind, count)` of one optimal filling.
    pub items: Vec<(TxKind, u64)>,
}

#[derive(Debug, Clone)]
pub struct UkpSolver {
    items: Vec<(TxKind, TxCost)>,
    capacity: u64,
    min_gas: Vec<u64>,
    choice: Vec<u32>,
    /// `suffix_min[v] = min(min_gas[v..])`, non-decreasing in `v`.
    suffix_min: Vec<u64>,
}

const NONE: u32 = u32::MAX;

impl UkpSolver {
    pub fn new(catalog: &Catalog, capacity: u64) -> Result<Self, UkpError> {
        Self::with_cap(catalog, capacity, DEFAULT_CAPACITY_CAP)
    }

    pub fn with_cap(catalog: &Catalog, capacity: u64, cap: u64) -> Result<Self, UkpError> {
        if capacity > cap {
            return Err(UkpError::CapacityTooLargeForExactDP { capacity, cap });
        }
        let items: Vec<_> = catalog.entries().to_vec();
        let min_item_gas = items.iter().map(|(_, c)| c.gas).min().ok_or(UkpError::EmptyCatalog)?;
        let max_item_size = items.iter().map(|(_, c)| c.size).max().unwrap_or(0);
        let vmax = (capacity / min_item_gas) * max_item_size;
        let len = vmax as usize + 1;

        let mut min_gas = vec![u64::MAX; len];
        let mut choice = vec![NONE; len];
        min_gas[0] = 0;
        for v in 1..len {
            let mut best = u64::MAX;
            let mut pick = NONE;
            for (i, (_, c)) in items.iter().enumerate() {
                let s = c.size as usize;
                if s > v {
                    continue;
                }
                let prev = min_gas[v - s];
                if prev == u64::MAX {
                    continue;
                }
                let g = prev + c.gas;
                if g < best {
                    best = g;
                    pick = i as u32;
                }
            }
            min_gas[v] = best;
            choice[v] = pick;
        }
        let mut suffix_min = min_gas.clone();
        for v in (0..len.saturating_sub(1)).rev() {
            suffix_min[v] = suffix_min[v].min(suffix_min[v + 1]);
        }
        Ok(UkpSolver { items, capacity, min_gas, choice, suffix_min })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Largest content reachable within `gas_limit`.
    pub fn max_content(&self, gas_limit: u64) -> Result<u64, UkpError> {
        if gas_limit > self.capacity {
            return Err(UkpError::CapacityTooLargeForExactDP { capacity: gas_limit, cap: self.capacity });
        }
        // last v with suffix_min[v] <= gas_limit; v = 0 always qualifies
        let v = self.suffix_min.partition_point(|&g| g <= gas_limit) - 1;
        Ok(v as u64)
    }

    pub fn solve(&self, gas_limit: u64) -> Result<UkpSolution, UkpError> {
        let mut v = self.max_content(gas_limit)? as usize;
        let content = v as u64;
        let gas = self.min_gas[v];
        let mut counts = vec![0u64; self.items.len()];
        while v > 0 {
            let i = self.choice[v] as usize;
            counts[i] += 1;
            v -= self.items[i].1.size as usize;
        }
        let items = counts.into_iter().enumerate().filter(|(_, c)| *c > 0).map(|(i, c)| (self.items[i].0, c)).collect();
        Ok(UkpSolution { content, gas, items })
    }
}

/// Maximum block size for `gas_limit` by exact optimization.
pub fn max_block_size_ukp(gas_limit: u64, catalog: &Catalog, header_size: u64) -> Result<u64, UkpError> {
    Ok(header_size + UkpSolver::new(catalog, gas_limit)?.max_content(gas_limit)?)
}

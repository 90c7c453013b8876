//! Timestamped transaction schedules.
//!
//! Issue times are uniform within each block period. Commands are made
//! coherent against a running model of the ledger: transfers move evidence
//! that exists at issue time and are signed by its owner, removals are
//! signed by the creator. When nothing exists yet, transfers and removals
//! target an unknown id and will revert, which still costs gas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ledger::{tx_gas, Command, Transaction, TxKind, MAX_DESCRIPTION_LEN};
use crate::time::SimTime;
use crate::types::{digest_of, Address, EvidenceId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("invalid workload: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptionDist {
    Fixed(u16),
    /// Uniform over `min..=max` characters.
    Uniform {
        min: u16,
        max: u16,
    },
}

impl Default for DescriptionDist {
    fn default() -> Self {
        DescriptionDist::Fixed(MAX_DESCRIPTION_LEN as u16)
    }
}

impl DescriptionDist {
    fn validate(&self) -> Result<(), WorkloadError> {
        let max = MAX_DESCRIPTION_LEN as u16;
        match *self {
            DescriptionDist::Fixed(l) if l > max => {
                Err(WorkloadError::InvalidSpec(format!("description length {l} > {max}")))
            }
            DescriptionDist::Uniform { min, max: hi } if min > hi || hi > max => {
                Err(WorkloadError::InvalidSpec(format!("description range {min}..={hi}")))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u16 {
        match *self {
            DescriptionDist::Fixed(l) => l,
            DescriptionDist::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkloadSpec {
    /// A fixed number of each transaction type every period.
    Rate { creates: u64, transfers: u64, removes: u64, description: DescriptionDist },
    /// Transfers only. The gas issued in period `k` is the largest multiple
    /// of the transfer gas not above a target that moves linearly from
    /// `start_gas` (first period) to `end_gas` (last period).
    GasRamp { start_gas: u64, end_gas: u64 },
    /// `n` creates, `n` removes and `10n` transfers spread over the run.
    Annual { n: u64, description: DescriptionDist },
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        match self {
            WorkloadSpec::Rate { description, .. } | WorkloadSpec::Annual { description, .. } => description.validate(),
            WorkloadSpec::GasRamp { .. } => Ok(()),
        }
    }

    /// Gas target of period `k` for a ramp over `periods` periods.
    pub fn ramp_target(start_gas: u64, end_gas: u64, k: u64, periods: u64) -> u64 {
        if periods <= 1 {
            return start_gas;
        }
        let (s, e) = (start_gas as i128, end_gas as i128);
        (s + (e - s) * k as i128 / (periods as i128 - 1)) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Create(u16),
    Transfer,
    Remove,
}

fn uniform_in_period(rng: &mut ChaCha8Rng, k: u64, period: SimTime) -> SimTime {
    let start = period.as_nanos() * k;
    SimTime::from_nanos(start + rng.random_range(0..period.as_nanos()))
}

/// Generates the schedule for `periods` block periods, sorted by issue time
/// with sequence numbers in that order.
pub fn gen_workload(
    spec: &WorkloadSpec,
    seed: u64,
    period: SimTime,
    periods: u64,
    clients: usize,
) -> Result<Vec<Transaction>, WorkloadError> {
    spec.validate()?;
    if period == SimTime::ZERO || periods == 0 {
        return Err(WorkloadError::InvalidSpec("period and run length must be positive".into()));
    }
    if clients == 0 {
        return Err(WorkloadError::InvalidSpec("at least one client is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<(SimTime, Category)> = Vec::new();
    match *spec {
        WorkloadSpec::Rate { creates, transfers, removes, description } => {
            for k in 0..periods {
                for _ in 0..creates {
                    let len = description.sample(&mut rng);
                    slots.push((uniform_in_period(&mut rng, k, period), Category::Create(len)));
                }
                for _ in 0..transfers {
                    slots.push((uniform_in_period(&mut rng, k, period), Category::Transfer));
                }
                for _ in 0..removes {
                    slots.push((uniform_in_period(&mut rng, k, period), Category::Remove));
                }
            }
        }
        WorkloadSpec::GasRamp { start_gas, end_gas } => {
            let g = tx_gas(TxKind::Transfer).expect("transfer cost");
            for k in 0..periods {
                let count = WorkloadSpec::ramp_target(start_gas, end_gas, k, periods) / g;
                for _ in 0..count {
                    slots.push((uniform_in_period(&mut rng, k, period), Category::Transfer));
                }
            }
        }
        WorkloadSpec::Annual { n, description } => {
            let span = period.as_nanos() * periods;
            let at = |rng: &mut ChaCha8Rng| SimTime::from_nanos(rng.random_range(0..span));
            for _ in 0..n {
                let len = description.sample(&mut rng);
                slots.push((at(&mut rng), Category::Create(len)));
            }
            for _ in 0..n {
                slots.push((at(&mut rng), Category::Remove));
            }
            for _ in 0..10 * n {
                slots.push((at(&mut rng), Category::Transfer));
            }
        }
    }
    slots.sort_by_key(|(t, _)| *t);

    let client = |i: usize| Address::from_index(i as u64);
    // (id, creator, owner) of evidence alive in the model
    let mut live: Vec<(EvidenceId, usize, usize)> = Vec::new();
    let mut txs = Vec::with_capacity(slots.len());
    for (seq, (time, cat)) in slots.into_iter().enumerate() {
        let seq = seq as u64;
        let fresh_id = EvidenceId::from(digest_of(&[b"workload", &seed.to_be_bytes(), &seq.to_be_bytes()]));
        let (issuer, command) = match cat {
            Category::Create(len) => {
                let c = rng.random_range(0..clients);
                live.push((fresh_id, c, c));
                (c, Command::CreateEvidence { id: fresh_id, description: "e".repeat(len as usize) })
            }
            Category::Transfer if !live.is_empty() => {
                let i = rng.random_range(0..live.len());
                let owner = live[i].2;
                let to = if clients > 1 { (owner + rng.random_range(1..clients)) % clients } else { owner };
                live[i].2 = to;
                (owner, Command::Transfer { id: live[i].0, new_owner: client(to) })
            }
            Category::Remove if !live.is_empty() => {
                let i = rng.random_range(0..live.len());
                let (id, creator, _) = live.swap_remove(i);
                (creator, Command::RemoveEvidence { id })
            }
            Category::Transfer => {
                let c = rng.random_range(0..clients);
                (c, Command::Transfer { id: fresh_id, new_owner: client((c + 1) % clients) })
            }
            Category::Remove => (rng.random_range(0..clients), Command::RemoveEvidence { id: fresh_id }),
        };
        let tx = Transaction::new(seq, client(issuer), command, time).expect("generated commands are well formed");
        txs.push(tx);
    }
    Ok(txs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::LedgerState;

    const T: SimTime = SimTime::from_secs(300);

    #[test]
    fn fixed_rate_per_period() {
        let spec = WorkloadSpec::Rate { creates: 0, transfers: 2, removes: 0, description: DescriptionDist::default() };
        let txs = gen_workload(&spec, 1, T, 10, 4).unwrap();
        assert_eq!(txs.len(), 20);
        for k in 0..10 {
            assert_eq!(txs.iter().filter(|t| t.issue_time().period_index(T) == k).count(), 2);
        }
        assert!(txs.windows(2).all(|w| w[0].issue_time() <= w[1].issue_time() && w[0].seq() + 1 == w[1].seq()));
    }

    #[test]
    fn annual_counts() {
        let spec = WorkloadSpec::Annual { n: 100, description: DescriptionDist::Fixed(1024) };
        let txs = gen_workload(&spec, 2, T, 105_120, 8).unwrap();
        let count = |k: TxKind| txs.iter().filter(|t| t.kind() == k).count();
        assert_eq!(count(TxKind::create(1024).unwrap()), 100);
        assert_eq!(count(TxKind::RemoveEvidence), 100);
        assert_eq!(count(TxKind::Transfer), 1000);
    }

    #[test]
    fn ramp_crosses_near_midpoint() {
        let g = 1_000_000u64;
        let spec = WorkloadSpec::GasRamp { start_gas: 0, end_gas: 2 * g };
        let txs = gen_workload(&spec, 3, T, 200, 4).unwrap();
        let mut per = vec![0u64; 200];
        for t in &txs {
            per[t.issue_time().period_index(T) as usize] += t.gas();
        }
        assert!(per.windows(2).all(|w| w[0] <= w[1]));
        let crossing = per.iter().position(|&x| x > g).unwrap();
        assert!((95..=105).contains(&crossing), "crossing at {crossing}");
    }

    #[test]
    fn deterministic_and_coherent() {
        let spec = WorkloadSpec::Rate {
            creates: 3,
            transfers: 5,
            removes: 1,
            description: DescriptionDist::Uniform { min: 0, max: 64 },
        };
        let a = gen_workload(&spec, 9, T, 20, 5).unwrap();
        assert_eq!(a, gen_workload(&spec, 9, T, 20, 5).unwrap());
        assert_ne!(a, gen_workload(&spec, 10, T, 20, 5).unwrap());
        // applied in issue order, everything after the first create succeeds
        let mut ledger = LedgerState::new();
        let first_create = a.iter().position(|t| matches!(t.kind(), TxKind::CreateEvidence { .. })).unwrap();
        for tx in &a[first_create..] {
            let r = ledger.apply_transaction(tx, tx.issue_time().as_secs());
            assert!(r.succeeded(), "{tx:?} {r:?}");
        }
    }

    #[test]
    fn invalid_specs() {
        let bad =
            WorkloadSpec::Rate { creates: 1, transfers: 0, removes: 0, description: DescriptionDist::Fixed(2000) };
        assert!(gen_workload(&bad, 0, T, 1, 1).is_err());
        let bad = WorkloadSpec::Annual { n: 1, description: DescriptionDist::Uniform { min: 5, max: 2 } };
        assert!(gen_workload(&bad, 0, T, 1, 1).is_err());
        let ok = WorkloadSpec::GasRamp { start_gas: 0, end_gas: 0 };
        assert!(gen_workload(&ok, 0, T, 0, 1).is_err());
    }
}

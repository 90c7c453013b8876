//! Mempool and block construction.
//!
//! Blocks are filled from the mempool in strict FIFO order: the builder takes
//! pending transactions while the cumulative gas stays within the block gas
//! limit and stops at the first one that does not fit. Nothing behind a
//! blocked head is pulled forward, so a transaction that misses its period
//! waits for the next block in the same relative order.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ledger::{LedgerError, LedgerState, Transaction};
use crate::time::SimTime;
use crate::types::{digest_of, Digest};

/// Serialized header size of the prototype, in bytes.
pub const HEADER_SIZE: u64 = 1909;

/// Position of a validator in the fixed validator list.
pub type ValidatorIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    height: u64,
    parent: Digest,
    proposer: ValidatorIndex,
    timestamp: SimTime,
    /// Free header field. Two blocks differing only here have different
    /// digests, which is what an equivocating proposer exploits.
    extra: u64,
    header_size: u64,
    transactions: Vec<Transaction>,
    digest: Digest,
}

impl Block {
    pub fn new(
        height: u64,
        parent: Digest,
        proposer: ValidatorIndex,
        timestamp: SimTime,
        extra: u64,
        header_size: u64,
        transactions: Vec<Transaction>,
    ) -> Self {
        let mut b =
            Block { height, parent, proposer, timestamp, extra, header_size, transactions, digest: Digest::ZERO };
        b.digest = b.compute_digest();
        b
    }

    pub fn genesis(header_size: u64) -> Self {
        Block::new(0, Digest::ZERO, 0, SimTime::ZERO, 0, header_size, Vec::new())
    }

    fn compute_digest(&self) -> Digest {
        let tx_hashes: Vec<u8> =
            self.transactions.iter().flat_map(|tx| *digest_of(&[&tx.encode()]).as_bytes()).collect();
        let tx_root = digest_of(&[&tx_hashes]);
        digest_of(&[
            b"block",
            &self.height.to_be_bytes(),
            self.parent.as_bytes(),
            &(self.proposer as u64).to_be_bytes(),
            &self.timestamp.as_nanos().to_be_bytes(),
            &self.extra.to_be_bytes(),
            &self.header_size.to_be_bytes(),
            tx_root.as_bytes(),
        ])
    }

    /// Hash of the header, which commits to the transaction list.
    pub fn digest(&self) -> Digest {
        self.digest
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn parent(&self) -> Digest {
        self.parent
    }

    pub fn proposer(&self) -> ValidatorIndex {
        self.proposer
    }

    /// Start of the block period this block covers.
    pub fn timestamp(&self) -> SimTime {
        self.timestamp
    }

    pub fn extra(&self) -> u64 {
        self.extra
    }

    pub fn header_size(&self) -> u64 {
        self.header_size
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn gas_used(&self) -> u64 {
        self.transactions.iter().map(Transaction::gas).sum()
    }

    /// Header plus the sum of transaction sizes.
    pub fn size(&self) -> u64 {
        block_size(self)
    }

    /// Same contents under a different `extra`, hence a different digest.
    pub fn with_extra(&self, extra: u64) -> Block {
        Block::new(
            self.height,
            self.parent,
            self.proposer,
            self.timestamp,
            extra,
            self.header_size,
            self.transactions.clone(),
        )
    }
}

pub fn block_size(block: &Block) -> u64 {
    block.header_size + block.transactions.iter().map(Transaction::size).sum::<u64>()
}

/// Pending transactions in arrival order.
#[derive(Debug, Clone, Default)]
pub struct Mempool {
    pending: VecDeque<Transaction>,
    known: HashSet<u64>,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `tx`. Transactions already seen (pending or committed) are
    /// ignored and `false` is returned.
    pub fn submit(&mut self, tx: Transaction) -> bool {
        if !self.known.insert(tx.seq()) {
            return false;
        }
        self.pending.push_back(tx);
        true
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending(&self) -> impl Iterator<Item = &Transaction> {
        self.pending.iter()
    }

    /// Drops everything included in a committed block. The sequence numbers
    /// stay known so late copies are not re-admitted.
    pub fn remove_committed(&mut self, block: &Block) {
        let included: HashSet<u64> = block.transactions().iter().map(Transaction::seq).collect();
        self.known.extend(included.iter().copied());
        self.pending.retain(|tx| !included.contains(&tx.seq()));
    }

    /// Drops specific transactions, e.g. ones rejected by pre-validation.
    pub fn discard(&mut self, seqs: &[u64]) {
        let set: HashSet<u64> = seqs.iter().copied().collect();
        self.pending.retain(|tx| !set.contains(&tx.seq()));
    }
}

/// Header fields fixed by the proposer before filling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockTemplate {
    pub height: u64,
    pub parent: Digest,
    pub proposer: ValidatorIndex,
    pub period_start: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The head of the queue needs more gas than any block can hold; it and
    /// everything behind it are stuck.
    OversizedTransaction { seq: u64, gas: u64, gas_limit: u64 },
    /// Dropped by mempool pre-validation.
    Rejected { seq: u64, reason: LedgerError },
}

#[derive(Debug, Clone)]
pub struct BuiltBlock {
    pub block: Block,
    pub diagnostics: Vec<Diagnostic>,
}

impl BuiltBlock {
    pub fn rejected_seqs(&self) -> Vec<u64> {
        self.diagnostics
            .iter()
            .filter_map(|d| match d {
                Diagnostic::Rejected { seq, .. } => Some(*seq),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockBuilder {
    pub gas_limit: u64,
    pub header_size: u64,
    /// Pre-validate against the proposer's ledger and drop failing
    /// transactions instead of including them as reverts.
    pub reject_invalid: bool,
}

impl BlockBuilder {
    pub fn new(gas_limit: u64) -> Self {
        BlockBuilder { gas_limit, header_size: HEADER_SIZE, reject_invalid: false }
    }

    /// Fills a block from `mempool`.
    ///
    /// Only transactions issued strictly before `cutoff` are eligible when it
    /// is given; the scan stops at the first later one. `ledger` is required
    /// when `reject_invalid` is set.
    pub fn build(
        &self,
        mempool: &Mempool,
        template: BlockTemplate,
        cutoff: Option<SimTime>,
        ledger: Option<&LedgerState>,
    ) -> BuiltBlock {
        let mut scratch = if self.reject_invalid { ledger.cloned() } else { None };
        let ledger_time = template.period_start.as_secs();
        let mut gas_used = 0u64;
        let mut txs = Vec::new();
        let mut diagnostics = Vec::new();

        for tx in mempool.pending() {
            if cutoff.is_some_and(|c| tx.issue_time() >= c) {
                break;
            }
            if let Some(state) = scratch.as_mut() {
                let receipt = state.apply_transaction(tx, ledger_time);
                if let crate::ledger::TxStatus::Reverted(reason) = receipt.status {
                    diagnostics.push(Diagnostic::Rejected { seq: tx.seq(), reason });
                    continue;
                }
            }
            if gas_used + tx.gas() > self.gas_limit {
                if tx.gas() > self.gas_limit {
                    diagnostics.push(Diagnostic::OversizedTransaction {
                        seq: tx.seq(),
                        gas: tx.gas(),
                        gas_limit: self.gas_limit,
                    });
                }
                break;
            }
            gas_used += tx.gas();
            txs.push(tx.clone());
        }

        let block = Block::new(
            template.height,
            template.parent,
            template.proposer,
            template.period_start,
            0,
            self.header_size,
            txs,
        );
        BuiltBlock { block, diagnostics }
    }
}

/// Strict-FIFO block under gas limit `gas_limit` with the default header.
pub fn build_block(mempool: &Mempool, gas_limit: u64, template: BlockTemplate) -> BuiltBlock {
    BlockBuilder::new(gas_limit).build(mempool, template, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{Command, LedgerState};
    use crate::types::{Address, EvidenceId};

    fn transfer(seq: u64) -> Transaction {
        Transaction::new(
            seq,
            Address::from_index(0),
            Command::Transfer { id: EvidenceId::new([1; 32]), new_owner: Address::from_index(1) },
            SimTime::from_secs(seq),
        )
        .unwrap()
    }

    fn create_full(seq: u64) -> Transaction {
        Transaction::new(
            seq,
            Address::from_index(0),
            Command::CreateEvidence { id: EvidenceId::new([2; 32]), description: "x".repeat(1024) },
            SimTime::from_secs(seq),
        )
        .unwrap()
    }

    fn template() -> BlockTemplate {
        BlockTemplate { height: 1, parent: Digest::ZERO, proposer: 0, period_start: SimTime::ZERO }
    }

    #[test]
    fn submit_keeps_fifo_and_dedups() {
        let mut m = Mempool::new();
        for s in 0..10 {
            assert!(m.submit(transfer(s)));
        }
        assert!(!m.submit(transfer(3)));
        let order: Vec<u64> = m.pending().map(Transaction::seq).collect();
        assert_eq!(order, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn gas_limit_caps_block() {
        let mut m = Mempool::new();
        for s in 0..3 {
            m.submit(transfer(s));
        }
        let built = build_block(&m, 170_207, template());
        assert_eq!(built.block.transactions().len(), 2);
        assert_eq!(built.block.gas_used(), 161_004);
        assert_eq!(built.block.size(), 2257);
        assert!(built.diagnostics.is_empty());
        // building does not consume; committing does
        assert_eq!(m.len(), 3);
        m.remove_committed(&built.block);
        assert_eq!(m.pending().map(Transaction::seq).collect::<Vec<_>>(), vec![2]);
        assert!(!m.submit(transfer(0)));
    }

    #[test]
    fn empty_block_is_header_only() {
        let built = build_block(&Mempool::new(), 170_207, template());
        assert!(built.block.transactions().is_empty());
        assert_eq!(built.block.size(), 1909);
    }

    #[test]
    fn oversized_head_blocks_queue() {
        let mut m = Mempool::new();
        m.submit(create_full(0));
        m.submit(transfer(1));
        let built = build_block(&m, 170_207, template());
        assert!(built.block.transactions().is_empty());
        assert_eq!(
            built.diagnostics,
            vec![Diagnostic::OversizedTransaction { seq: 0, gas: 897_367, gas_limit: 170_207 }]
        );
    }

    #[test]
    fn strict_fifo_no_gap_filling() {
        let mut m = Mempool::new();
        m.submit(transfer(0));
        m.submit(create_full(1));
        m.submit(transfer(2));
        let built = build_block(&m, 900_000, template());
        // 80502 + 897367 > 900000, and the trailing transfer must not jump ahead
        assert_eq!(built.block.transactions().iter().map(Transaction::seq).collect::<Vec<_>>(), vec![0]);
        assert!(built.diagnostics.is_empty());
    }

    #[test]
    fn sizes() {
        let mut m = Mempool::new();
        m.submit(create_full(0));
        let built = build_block(&m, 1_000_000, template());
        assert_eq!(built.block.size(), 3142);
    }

    #[test]
    fn cutoff_excludes_later_issues() {
        let mut m = Mempool::new();
        for s in 0..5 {
            m.submit(transfer(s));
        }
        let b = BlockBuilder::new(u64::MAX).build(&m, template(), Some(SimTime::from_secs(3)), None);
        assert_eq!(b.block.transactions().len(), 3);
    }

    #[test]
    fn prevalidation_drops_invalid() {
        let mut m = Mempool::new();
        m.submit(transfer(0)); // evidence does not exist
        let creator = Address::from_index(0);
        let id = EvidenceId::new([1; 32]);
        let create =
            Transaction::new(1, creator, Command::CreateEvidence { id, description: String::new() }, SimTime::ZERO)
                .unwrap();
        m.submit(create);
        m.submit(transfer(2)); // valid after the create
        let builder = BlockBuilder { reject_invalid: true, ..BlockBuilder::new(u64::MAX) };
        let b = builder.build(&m, template(), None, Some(&LedgerState::new()));
        assert_eq!(b.block.transactions().iter().map(Transaction::seq).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(b.rejected_seqs(), vec![0]);
    }

    #[test]
    fn digest_commits_to_content() {
        let g = Block::genesis(HEADER_SIZE);
        assert_eq!(g.digest(), Block::genesis(HEADER_SIZE).digest());
        assert_ne!(g.digest(), g.with_extra(1).digest());
        let mut m = Mempool::new();
        m.submit(transfer(0));
        let b1 = build_block(&m, u64::MAX, template()).block;
        let b0 = build_block(&Mempool::new(), u64::MAX, template()).block;
        assert_ne!(b1.digest(), b0.digest());
    }
}

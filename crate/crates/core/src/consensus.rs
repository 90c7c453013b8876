//! IBFT-style proof-of-authority consensus.
//!
//! A fixed list of `n = 3f + 1` validators decides one block per height. For
//! each `(height, round)` the proposer `validators[(height + round) mod n]`
//! broadcasts a pre-prepare carrying the block. Validators that accept it
//! broadcast a prepare for its digest; `2f + 1` matching prepares move a
//! validator to *prepared*, where it locks the block and broadcasts a commit;
//! `2f + 1` matching commits append the block to its chain.
//!
//! Failure handling is a timeout-driven round bump. A validator that reached
//! *prepared* keeps its lock across rounds: it only accepts a re-proposal of
//! the locked block and, as proposer, re-proposes it. After committing,
//! validators announce the decision with its commit certificate so that a
//! validator which missed the quorum (for instance because of an equivocating
//! peer) can fetch the block and keep up.
//!
//! [`Validator`] is a pure state machine. It never touches the network or
//! the clock; every handler takes the current time and returns [`Output`]s
//! for the driver to execute.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::pipeline::{Block, BlockTemplate, ValidatorIndex};
use crate::time::SimTime;
use crate::types::{digest_of, Digest};

/// Largest `f` with `3f + 1 <= n`.
pub fn fault_tolerance(n: usize) -> usize {
    assert!(n >= 1, "validator set must be non-empty");
    (n - 1) / 3
}

/// Number of matching votes needed to progress: `2f + 1`.
pub fn quorum_size(n: usize) -> usize {
    2 * fault_tolerance(n) + 1
}

/// Round-robin proposer election.
pub fn select_proposer(height: u64, round: u64, n: usize) -> ValidatorIndex {
    assert!(n >= 1, "validator set must be non-empty");
    ((height as u128 + round as u128) % n as u128) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    AwaitingProposal,
    PrePrepared,
    Prepared,
    Committed,
}

/// Wire sizes of consensus messages, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSizes {
    /// Framing added to the block in a pre-prepare.
    pub pp_overhead: u64,
    pub prepare: u64,
    pub commit: u64,
}

impl Default for MessageSizes {
    fn default() -> Self {
        MessageSizes { pp_overhead: 256, prepare: 128, commit: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    PrePrepare {
        height: u64,
        round: u64,
        block: Arc<Block>,
    },
    Prepare {
        height: u64,
        round: u64,
        digest: Digest,
    },
    Commit {
        height: u64,
        round: u64,
        digest: Digest,
    },
    /// Announces a committed block with the senders of its commit quorum.
    Decided {
        height: u64,
        digest: Digest,
        certificate: Vec<ValidatorIndex>,
    },
    SyncRequest {
        from_height: u64,
    },
    SyncResponse {
        blocks: Vec<(Arc<Block>, Vec<ValidatorIndex>)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusMessage {
    pub sender: ValidatorIndex,
    pub payload: Payload,
}

impl ConsensusMessage {
    pub fn new(sender: ValidatorIndex, payload: Payload) -> Self {
        ConsensusMessage { sender, payload }
    }

    pub fn phase(&self) -> Option<Phase> {
        match self.payload {
            Payload::PrePrepare { .. } => Some(Phase::PrePrepared),
            Payload::Prepare { .. } => Some(Phase::Prepared),
            Payload::Commit { .. } => Some(Phase::Committed),
            _ => None,
        }
    }

    /// `(height, round)` for the three voting phases.
    pub fn view(&self) -> Option<(u64, u64)> {
        match self.payload {
            Payload::PrePrepare { height, round, .. }
            | Payload::Prepare { height, round, .. }
            | Payload::Commit { height, round, .. } => Some((height, round)),
            _ => None,
        }
    }

    pub fn digest(&self) -> Option<Digest> {
        match &self.payload {
            Payload::PrePrepare { block, .. } => Some(block.digest()),
            Payload::Prepare { digest, .. } | Payload::Commit { digest, .. } | Payload::Decided { digest, .. } => {
                Some(*digest)
            }
            _ => None,
        }
    }

    pub fn wire_size(&self, sizes: &MessageSizes) -> u64 {
        match &self.payload {
            Payload::PrePrepare { block, .. } => sizes.pp_overhead + block.size(),
            Payload::Prepare { .. } | Payload::SyncRequest { .. } => sizes.prepare,
            Payload::Commit { .. } | Payload::Decided { .. } => sizes.commit,
            Payload::SyncResponse { blocks } => {
                blocks.iter().map(|(b, _)| sizes.pp_overhead + b.size()).sum::<u64>().max(sizes.prepare)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimerKind {
    Propose { height: u64, round: u64 },
    RoundTimeout { height: u64, round: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Broadcast(ConsensusMessage),
    Send {
        to: ValidatorIndex,
        msg: ConsensusMessage,
    },
    /// Drop every timer previously requested by this validator.
    CancelTimers,
    SetTimer {
        at: SimTime,
        timer: TimerKind,
    },
    /// The driver must build a block for this template from its mempool
    /// (only transactions issued before `cutoff`) and call
    /// [`Validator::propose`].
    BuildProposal {
        template: BlockTemplate,
        round: u64,
        cutoff: SimTime,
    },
    Committed {
        block: Arc<Block>,
        round: Option<u64>,
        certificate: Vec<ValidatorIndex>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidBlock {
    #[error("block height {got}, expected {expected}")]
    Height { expected: u64, got: u64 },
    #[error("parent digest does not match the local chain head")]
    Parent,
    #[error("block uses {used} gas, limit is {limit}")]
    GasLimit { used: u64, limit: u64 },
    #[error("block timestamp {got}, expected {expected}")]
    Timestamp { expected: SimTime, got: SimTime },
}

/// Why an incoming message had no effect.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("message for an earlier height or round")]
    Stale,
    #[error("pre-prepare not sent by the round's proposer")]
    WrongProposer,
    #[error("invalid proposal: {0}")]
    InvalidProposal(#[from] InvalidBlock),
    #[error("a proposal was already accepted in this round")]
    DuplicateProposal,
    #[error("proposal conflicts with the locked block")]
    LockConflict,
    #[error("sender already voted in this phase")]
    DuplicateVote,
    #[error("commit certificate is below quorum or malformed")]
    BadCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsensusError {
    #[error("validator {me} is not the proposer for height {height} round {round}")]
    NotProposer { me: ValidatorIndex, height: u64, round: u64 },
    #[error("already proposed in this round")]
    AlreadyProposed,
    #[error("proposal is for height {got}, current height is {expected}")]
    WrongHeight { expected: u64, got: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidatorConfig {
    pub index: ValidatorIndex,
    pub validators: usize,
    pub period: SimTime,
    pub round_timeout: SimTime,
    pub gas_limit: u64,
}

impl ValidatorConfig {
    /// Timeout defaults to twice the block period.
    pub fn new(index: ValidatorIndex, validators: usize, period: SimTime, gas_limit: u64) -> Self {
        ValidatorConfig {
            index,
            validators,
            period,
            round_timeout: period.checked_mul(2).expect("timeout overflow"),
            gas_limit,
        }
    }
}

/// One validator's consensus state.
#[derive(Debug, Clone)]
pub struct Validator {
    cfg: ValidatorConfig,
    height: u64,
    round: u64,
    phase: Phase,
    chain: Vec<Arc<Block>>,
    certificates: Vec<Vec<ValidatorIndex>>,
    accepted: Option<Arc<Block>>,
    locked: Option<Arc<Block>>,
    prepare_votes: BTreeMap<ValidatorIndex, Digest>,
    commit_votes: BTreeMap<ValidatorIndex, Digest>,
    commit_sent: bool,
    proposed: bool,
    seen_blocks: HashMap<Digest, Arc<Block>>,
    future: Vec<ConsensusMessage>,
    sync_pending: bool,
}

impl Validator {
    pub fn new(cfg: ValidatorConfig, genesis: Block) -> Self {
        assert!(cfg.index < cfg.validators, "index out of range");
        assert_eq!(genesis.height(), 0, "genesis must be height 0");
        Validator {
            cfg,
            height: 1,
            round: 0,
            phase: Phase::AwaitingProposal,
            chain: vec![Arc::new(genesis)],
            certificates: vec![Vec::new()],
            accepted: None,
            locked: None,
            prepare_votes: BTreeMap::new(),
            commit_votes: BTreeMap::new(),
            commit_sent: false,
            proposed: false,
            seen_blocks: HashMap::new(),
            future: Vec::new(),
            sync_pending: false,
        }
    }

    pub fn config(&self) -> &ValidatorConfig {
        &self.cfg
    }

    pub fn index(&self) -> ValidatorIndex {
        self.cfg.index
    }

    /// Height currently being decided (chain tip + 1).
    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn chain(&self) -> &[Arc<Block>] {
        &self.chain
    }

    pub fn head(&self) -> &Block {
        self.chain.last().expect("chain holds genesis")
    }

    pub fn locked_block(&self) -> Option<&Block> {
        self.locked.as_deref()
    }

    pub fn accepted_block(&self) -> Option<&Block> {
        self.accepted.as_deref()
    }

    pub fn prepare_count(&self, digest: &Digest) -> usize {
        self.prepare_votes.values().filter(|d| *d == digest).count()
    }

    pub fn commit_count(&self, digest: &Digest) -> usize {
        self.commit_votes.values().filter(|d| *d == digest).count()
    }

    pub fn is_proposer(&self) -> bool {
        select_proposer(self.height, self.round, self.cfg.validators) == self.cfg.index
    }

    fn quorum(&self) -> usize {
        quorum_size(self.cfg.validators)
    }

    /// Timestamp the next block must carry: the start of its block period.
    pub fn next_timestamp(&self) -> SimTime {
        let head = self.head();
        if head.height() == 0 {
            head.timestamp()
        } else {
            head.timestamp() + self.cfg.period
        }
    }

    /// End of the next block's period, when its proposal is due.
    pub fn seal_time(&self) -> SimTime {
        self.next_timestamp() + self.cfg.period
    }

    pub fn template(&self) -> BlockTemplate {
        BlockTemplate {
            height: self.height,
            parent: self.head().digest(),
            proposer: self.cfg.index,
            period_start: self.next_timestamp(),
        }
    }

    /// Arms the timers for height 1. Call once before delivering anything.
    pub fn start(&mut self, now: SimTime) -> Vec<Output> {
        let mut out = Vec::new();
        self.enter_round(now, &mut out);
        out
    }

    pub fn check_block(&self, block: &Block) -> Result<(), InvalidBlock> {
        if block.height() != self.height {
            return Err(InvalidBlock::Height { expected: self.height, got: block.height() });
        }
        if block.parent() != self.head().digest() {
            return Err(InvalidBlock::Parent);
        }
        if block.gas_used() > self.cfg.gas_limit {
            return Err(InvalidBlock::GasLimit { used: block.gas_used(), limit: self.cfg.gas_limit });
        }
        let expected = self.next_timestamp();
        if block.timestamp() != expected {
            return Err(InvalidBlock::Timestamp { expected, got: block.timestamp() });
        }
        Ok(())
    }

    fn valid_certificate(&self, cert: &[ValidatorIndex]) -> bool {
        let distinct: BTreeSet<_> = cert.iter().copied().collect();
        distinct.len() == cert.len()
            && distinct.len() >= self.quorum()
            && distinct.iter().all(|&i| i < self.cfg.validators)
    }

    // -- round bookkeeping ---------------------------------------------------

    fn reset_round_state(&mut self) {
        self.phase = Phase::AwaitingProposal;
        self.accepted = None;
        self.prepare_votes.clear();
        self.commit_votes.clear();
        self.commit_sent = false;
        self.proposed = false;
    }

    /// Arms timers for the current `(height, round)` and replays any
    /// buffered messages addressed to it.
    fn enter_round(&mut self, now: SimTime, out: &mut Vec<Output>) {
        let (h, r) = (self.height, self.round);
        out.push(Output::SetTimer {
            at: now + self.cfg.round_timeout,
            timer: TimerKind::RoundTimeout { height: h, round: r },
        });
        if self.is_proposer() {
            if r == 0 {
                let at = self.seal_time().max(now);
                out.push(Output::SetTimer { at, timer: TimerKind::Propose { height: h, round: r } });
            } else {
                self.request_proposal(now, out);
            }
        }
        let pending = std::mem::take(&mut self.future);
        let (ready, later): (Vec<_>, Vec<_>) =
            pending.into_iter().filter(|m| m.view() >= Some((h, r))).partition(|m| m.view() == Some((h, r)));
        self.future = later;
        for msg in ready {
            // replayed messages that fail validation are simply dropped
            if let Ok(more) = self.on_message(now, msg) {
                out.extend(more);
            }
        }
    }

    fn request_proposal(&mut self, now: SimTime, out: &mut Vec<Output>) {
        if let Some(locked) = self.locked.clone() {
            out.extend(self.broadcast_proposal(locked));
        } else {
            let _ = now;
            out.push(Output::BuildProposal { template: self.template(), round: self.round, cutoff: self.seal_time() });
        }
    }

    fn broadcast_proposal(&mut self, block: Arc<Block>) -> Vec<Output> {
        self.proposed = true;
        vec![Output::Broadcast(ConsensusMessage::new(
            self.cfg.index,
            Payload::PrePrepare { height: self.height, round: self.round, block },
        ))]
    }

    fn enter_height(&mut self, now: SimTime, out: &mut Vec<Output>) {
        self.height = self.chain.len() as u64;
        self.round = 0;
        self.locked = None;
        self.seen_blocks.clear();
        self.sync_pending = false;
        self.reset_round_state();
        out.push(Output::CancelTimers);
        self.enter_round(now, out);
    }

    fn append(&mut self, block: Arc<Block>, certificate: Vec<ValidatorIndex>) {
        debug_assert_eq!(block.parent(), self.head().digest());
        self.chain.push(block);
        self.certificates.push(certificate);
    }

    fn commit(&mut self, now: SimTime, block: Arc<Block>, certificate: Vec<ValidatorIndex>, out: &mut Vec<Output>) {
        self.phase = Phase::Committed;
        let height = block.height();
        let digest = block.digest();
        self.append(block.clone(), certificate.clone());
        out.push(Output::Committed { block, round: Some(self.round), certificate: certificate.clone() });
        out.push(Output::Broadcast(ConsensusMessage::new(
            self.cfg.index,
            Payload::Decided { height, digest, certificate },
        )));
        self.enter_height(now, out);
    }

    // -- proposer ------------------------------------------------------------

    /// Broadcasts `block` as this round's proposal.
    pub fn propose(&mut self, _now: SimTime, block: Block) -> Result<Vec<Output>, ConsensusError> {
        if !self.is_proposer() {
            return Err(ConsensusError::NotProposer { me: self.cfg.index, height: self.height, round: self.round });
        }
        if self.proposed {
            return Err(ConsensusError::AlreadyProposed);
        }
        if block.height() != self.height {
            return Err(ConsensusError::WrongHeight { expected: self.height, got: block.height() });
        }
        Ok(self.broadcast_proposal(Arc::new(block)))
    }

    // -- message handlers ----------------------------------------------------

    pub fn on_message(&mut self, now: SimTime, msg: ConsensusMessage) -> Result<Vec<Output>, Rejection> {
        if let Some(view) = msg.view() {
            let current = (self.height, self.round);
            if view < current {
                return Err(Rejection::Stale);
            }
            if view > current {
                self.future.push(msg);
                return Ok(Vec::new());
            }
        }
        let sender = msg.sender;
        match msg.payload {
            Payload::PrePrepare { block, .. } => self.on_pre_prepare(now, sender, block),
            Payload::Prepare { digest, .. } => self.on_prepare(now, sender, digest),
            Payload::Commit { digest, .. } => self.on_commit(now, sender, digest),
            Payload::Decided { height, digest, certificate } => {
                self.on_decided(now, sender, height, digest, certificate)
            }
            Payload::SyncRequest { from_height } => Ok(self.on_sync_request(sender, from_height)),
            Payload::SyncResponse { blocks } => self.on_sync_response(now, blocks),
        }
    }

    /// Handles a pre-prepare for the current view.
    pub fn on_pre_prepare(
        &mut self,
        now: SimTime,
        sender: ValidatorIndex,
        block: Arc<Block>,
    ) -> Result<Vec<Output>, Rejection> {
        if sender != select_proposer(self.height, self.round, self.cfg.validators) {
            return Err(Rejection::WrongProposer);
        }
        if self.phase != Phase::AwaitingProposal {
            return Err(Rejection::DuplicateProposal);
        }
        self.check_block(&block)?;
        if let Some(locked) = &self.locked {
            if locked.digest() != block.digest() {
                return Err(Rejection::LockConflict);
            }
        }
        let digest = block.digest();
        self.seen_blocks.insert(digest, block.clone());
        self.accepted = Some(block);
        self.phase = Phase::PrePrepared;
        let mut out = vec![Output::Broadcast(ConsensusMessage::new(
            self.cfg.index,
            Payload::Prepare { height: self.height, round: self.round, digest },
        ))];
        self.check_quorums(now, &mut out);
        Ok(out)
    }

    pub fn on_prepare(
        &mut self,
        now: SimTime,
        sender: ValidatorIndex,
        digest: Digest,
    ) -> Result<Vec<Output>, Rejection> {
        if sender >= self.cfg.validators || self.prepare_votes.contains_key(&sender) {
            return Err(Rejection::DuplicateVote);
        }
        self.prepare_votes.insert(sender, digest);
        let mut out = Vec::new();
        self.check_quorums(now, &mut out);
        Ok(out)
    }

    pub fn on_commit(
        &mut self,
        now: SimTime,
        sender: ValidatorIndex,
        digest: Digest,
    ) -> Result<Vec<Output>, Rejection> {
        if sender >= self.cfg.validators || self.commit_votes.contains_key(&sender) {
            return Err(Rejection::DuplicateVote);
        }
        self.commit_votes.insert(sender, digest);
        let mut out = Vec::new();
        self.check_quorums(now, &mut out);
        Ok(out)
    }

    fn send_commit(&mut self, digest: Digest, out: &mut Vec<Output>) {
        if !self.commit_sent {
            self.commit_sent = true;
            out.push(Output::Broadcast(ConsensusMessage::new(
                self.cfg.index,
                Payload::Commit { height: self.height, round: self.round, digest },
            )));
        }
    }

    fn check_quorums(&mut self, now: SimTime, out: &mut Vec<Output>) {
        let Some(block) = self.accepted.clone() else { return };
        let digest = block.digest();
        if self.phase == Phase::PrePrepared && self.prepare_count(&digest) >= self.quorum() {
            self.phase = Phase::Prepared;
            self.locked = Some(block.clone());
            self.send_commit(digest, out);
        }
        if matches!(self.phase, Phase::PrePrepared | Phase::Prepared) && self.commit_count(&digest) >= self.quorum() {
            self.send_commit(digest, out);
            let cert: Vec<ValidatorIndex> =
                self.commit_votes.iter().filter(|(_, d)| **d == digest).map(|(i, _)| *i).collect();
            self.commit(now, block, cert, out);
        }
    }

    fn request_sync(&mut self, from: ValidatorIndex, out: &mut Vec<Output>) {
        if !self.sync_pending && from != self.cfg.index {
            self.sync_pending = true;
            out.push(Output::Send {
                to: from,
                msg: ConsensusMessage::new(self.cfg.index, Payload::SyncRequest { from_height: self.height }),
            });
        }
    }

    fn on_decided(
        &mut self,
        now: SimTime,
        sender: ValidatorIndex,
        height: u64,
        digest: Digest,
        certificate: Vec<ValidatorIndex>,
    ) -> Result<Vec<Output>, Rejection> {
        if height < self.height {
            return Err(Rejection::Stale);
        }
        if !self.valid_certificate(&certificate) {
            return Err(Rejection::BadCertificate);
        }
        let mut out = Vec::new();
        match self.seen_blocks.get(&digest).cloned() {
            Some(block) if height == self.height && self.check_block(&block).is_ok() => {
                self.append(block.clone(), certificate.clone());
                out.push(Output::Committed { block, round: None, certificate });
                self.enter_height(now, &mut out);
            }
            _ => self.request_sync(sender, &mut out),
        }
        Ok(out)
    }

    fn on_sync_request(&self, sender: ValidatorIndex, from_height: u64) -> Vec<Output> {
        let from = from_height as usize;
        if from == 0 || from >= self.chain.len() || sender == self.cfg.index {
            return Vec::new();
        }
        let blocks = self.chain[from..].iter().cloned().zip(self.certificates[from..].iter().cloned()).collect();
        vec![Output::Send { to: sender, msg: ConsensusMessage::new(self.cfg.index, Payload::SyncResponse { blocks }) }]
    }

    fn on_sync_response(
        &mut self,
        now: SimTime,
        blocks: Vec<(Arc<Block>, Vec<ValidatorIndex>)>,
    ) -> Result<Vec<Output>, Rejection> {
        self.sync_pending = false;
        let mut out = Vec::new();
        let mut advanced = false;
        for (block, cert) in blocks {
            if block.height() < self.chain.len() as u64 {
                continue;
            }
            if !self.valid_certificate(&cert) {
                return Err(Rejection::BadCertificate);
            }
            if let Err(e) = self.check_block(&block) {
                if advanced {
                    break;
                }
                return Err(Rejection::InvalidProposal(e));
            }
            self.append(block.clone(), cert.clone());
            out.push(Output::Committed { block, round: None, certificate: cert });
            self.height = self.chain.len() as u64;
            advanced = true;
        }
        if advanced {
            self.enter_height(now, &mut out);
        }
        Ok(out)
    }

    // -- timers --------------------------------------------------------------

    pub fn on_timer(&mut self, now: SimTime, timer: TimerKind) -> Vec<Output> {
        match timer {
            TimerKind::Propose { height, round } => {
                let mut out = Vec::new();
                if (height, round) == (self.height, self.round)
                    && self.is_proposer()
                    && !self.proposed
                    && self.phase == Phase::AwaitingProposal
                {
                    self.request_proposal(now, &mut out);
                }
                out
            }
            TimerKind::RoundTimeout { height, round } => {
                if (height, round) == (self.height, self.round) {
                    self.on_round_timeout(now)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Moves to the next round. A block locked at *prepared* is kept.
    pub fn on_round_timeout(&mut self, now: SimTime) -> Vec<Output> {
        self.round += 1;
        self.sync_pending = false;
        self.reset_round_state();
        let mut out = Vec::new();
        self.enter_round(now, &mut out);
        out
    }
}

/// Misbehaviour of a faulty validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    /// Sends nothing.
    Silent,
    /// Sends conflicting proposals and votes to two disjoint halves of its
    /// peers.
    Equivocator,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultModelError {
    #[error("{faulty} faulty validators exceed the tolerance f = {f} for n = {n}")]
    TooManyFaults { faulty: usize, f: usize, n: usize },
    #[error("validator {0} is out of range")]
    OutOfRange(ValidatorIndex),
}

/// The set of Byzantine validators and how each misbehaves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultModel {
    byzantine: BTreeMap<ValidatorIndex, Behavior>,
}

impl FaultModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(
        n: usize,
        byzantine: impl IntoIterator<Item = (ValidatorIndex, Behavior)>,
    ) -> Result<Self, FaultModelError> {
        let byzantine: BTreeMap<_, _> = byzantine.into_iter().collect();
        if let Some((&i, _)) = byzantine.iter().find(|(&i, _)| i >= n) {
            return Err(FaultModelError::OutOfRange(i));
        }
        let f = fault_tolerance(n);
        if byzantine.len() > f {
            return Err(FaultModelError::TooManyFaults { faulty: byzantine.len(), f, n });
        }
        Ok(FaultModel { byzantine })
    }

    pub fn behavior(&self, v: ValidatorIndex) -> Option<Behavior> {
        self.byzantine.get(&v).copied()
    }

    pub fn is_honest(&self, v: ValidatorIndex) -> bool {
        !self.byzantine.contains_key(&v)
    }

    pub fn faulty(&self) -> impl Iterator<Item = (ValidatorIndex, Behavior)> + '_ {
        self.byzantine.iter().map(|(i, b)| (*i, *b))
    }

    pub fn len(&self) -> usize {
        self.byzantine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.byzantine.is_empty()
    }
}

/// Rewrites an equivocating validator's outgoing traffic.
///
/// Peers are split into two halves by index. The first half (and the
/// validator itself) sees the honest message; the second half sees a
/// conflicting one: an alternative block for pre-prepares, the alternative
/// digest for votes. Decision announcements and sync traffic are withheld.
#[derive(Debug, Clone)]
pub struct Equivocation {
    me: ValidatorIndex,
    first_half: Vec<ValidatorIndex>,
    second_half: Vec<ValidatorIndex>,
    alternatives: HashMap<Digest, Digest>,
}

impl Equivocation {
    pub fn new(me: ValidatorIndex, n: usize) -> Self {
        let peers: Vec<_> = (0..n).filter(|&i| i != me).collect();
        let split = peers.len().div_ceil(2);
        Equivocation {
            me,
            first_half: peers[..split].to_vec(),
            second_half: peers[split..].to_vec(),
            alternatives: HashMap::new(),
        }
    }

    fn alternative(&self, digest: Digest) -> Digest {
        self.alternatives.get(&digest).copied().unwrap_or_else(|| digest_of(&[b"equivocate", digest.as_bytes()]))
    }

    pub fn rewrite(&mut self, outputs: Vec<Output>) -> Vec<Output> {
        let mut out = Vec::with_capacity(outputs.len() * 4);
        for o in outputs {
            match o {
                Output::Broadcast(msg) => {
                    let twin = match &msg.payload {
                        Payload::PrePrepare { height, round, block } => {
                            let alt = block.with_extra(block.extra() ^ 0x5eed);
                            self.alternatives.insert(block.digest(), alt.digest());
                            Payload::PrePrepare { height: *height, round: *round, block: Arc::new(alt) }
                        }
                        Payload::Prepare { height, round, digest } => {
                            Payload::Prepare { height: *height, round: *round, digest: self.alternative(*digest) }
                        }
                        Payload::Commit { height, round, digest } => {
                            Payload::Commit { height: *height, round: *round, digest: self.alternative(*digest) }
                        }
                        _ => continue,
                    };
                    out.push(Output::Send { to: self.me, msg: msg.clone() });
                    for &to in &self.first_half {
                        out.push(Output::Send { to, msg: msg.clone() });
                    }
                    let twin = ConsensusMessage::new(self.me, twin);
                    for &to in &self.second_half {
                        out.push(Output::Send { to, msg: twin.clone() });
                    }
                }
                Output::Send { .. } => {}
                other => out.push(other),
            }
        }
        out
    }
}

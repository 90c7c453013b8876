//! The evidence log: a port of the custody contract's state machine.
//!
//! Each evidence entry records its creator, its current owner, a free-form
//! description and the full handover history (`taddr` / `ttime`, oldest
//! first). Three mutating primitives exist (create, transfer, remove) plus a
//! read-only lookup. Mutations arrive as [`Transaction`]s and are executed by
//! [`LedgerState::apply_transaction`], which never fails: a rejected command
//! leaves the state untouched and is reported in the [`Receipt`].
//!
//! Authorization mirrors the contract modifiers. Only the current owner may
//! transfer, only the creator may remove, and an id may not be created twice
//! while it exists. Removal deletes the entry outright, so the same id can be
//! created again afterwards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::SimTime;
use crate::types::{Address, EvidenceId};

/// Upper bound on the description length, in characters.
pub const MAX_DESCRIPTION_LEN: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
pub enum LedgerError {
    #[error("evidence {0} already exists")]
    EvidenceAlreadyExists(EvidenceId),
    #[error("the zero id is not a valid evidence id")]
    InvalidId,
    #[error("description is {len} characters, limit is {MAX_DESCRIPTION_LEN}")]
    DescriptionTooLong { len: usize },
    #[error("description length {0} outside 0..={MAX_DESCRIPTION_LEN}")]
    InvalidDescriptionLength(usize),
    #[error("sender is not the current owner")]
    NotOwner,
    #[error("sender is not the creator")]
    NotCreator,
    #[error("evidence not found")]
    EvidenceNotFound,
    #[error("the zero address is not a valid identity")]
    InvalidAddress,
}

pub type Result<T, E = LedgerError> = std::result::Result<T, E>;

// ---------------------------------------------------------------------------
// Cost model
// ---------------------------------------------------------------------------

/// Transaction type. `CreateEvidence` is parameterised by the description
/// length since its cost depends on nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TxKind {
    CreateEvidence { description_len: u16 },
    Transfer,
    RemoveEvidence,
}

impl TxKind {
    pub fn create(description_len: usize) -> Result<Self> {
        if description_len > MAX_DESCRIPTION_LEN {
            return Err(LedgerError::InvalidDescriptionLength(description_len));
        }
        Ok(TxKind::CreateEvidence { description_len: description_len as u16 })
    }

    pub fn label(&self) -> String {
        match self {
            TxKind::CreateEvidence { description_len } => format!("CreateEvidence({description_len})"),
            TxKind::Transfer => "Transfer".to_string(),
            TxKind::RemoveEvidence => "RemoveEvidence".to_string(),
        }
    }
}

/// Size in bytes and gas in units of one transaction type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxCost {
    pub size: u64,
    pub gas: u64,
}

/// Measured costs of the prototype contract.
pub const TRANSFER_COST: TxCost = TxCost { size: 174, gas: 80_502 };
pub const REMOVE_COST: TxCost = TxCost { size: 142, gas: 236_478 };
pub const CREATE_EMPTY_COST: TxCost = TxCost { size: 207, gas: 170_207 };
pub const CREATE_MAX_COST: TxCost = TxCost { size: 1233, gas: 897_367 };

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum CreateCosts {
    /// Rounded linear interpolation between the two anchors.
    Linear { empty: TxCost, full: TxCost },
    /// One entry per description length `0..=MAX_DESCRIPTION_LEN`.
    Table(Vec<TxCost>),
}

/// Per-type size and gas. The default reproduces the measured anchors and
/// interpolates `CreateEvidence(ℓ)` linearly in between.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    transfer: TxCost,
    remove: TxCost,
    create: CreateCosts,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            transfer: TRANSFER_COST,
            remove: REMOVE_COST,
            create: CreateCosts::Linear { empty: CREATE_EMPTY_COST, full: CREATE_MAX_COST },
        }
    }
}

fn interpolate(lo: u64, hi: u64, len: u64) -> u64 {
    let max = MAX_DESCRIPTION_LEN as u64;
    // round-half-up of lo + len * (hi - lo) / max, for hi >= lo
    debug_assert!(hi >= lo);
    lo + (len * (hi - lo) + max / 2) / max
}

impl CostModel {
    /// Replaces the `CreateEvidence(ℓ)` curve with an explicit table of
    /// `MAX_DESCRIPTION_LEN + 1` entries.
    pub fn with_create_table(mut self, table: Vec<TxCost>) -> Result<Self, CostTableError> {
        if table.len() != MAX_DESCRIPTION_LEN + 1 {
            return Err(CostTableError::WrongLength(table.len()));
        }
        if table.iter().any(|c| c.size == 0 || c.gas == 0) {
            return Err(CostTableError::NonPositive);
        }
        self.create = CreateCosts::Table(table);
        Ok(self)
    }

    pub fn cost(&self, kind: TxKind) -> Result<TxCost> {
        match kind {
            TxKind::Transfer => Ok(self.transfer),
            TxKind::RemoveEvidence => Ok(self.remove),
            TxKind::CreateEvidence { description_len } => {
                let len = description_len as usize;
                if len > MAX_DESCRIPTION_LEN {
                    return Err(LedgerError::InvalidDescriptionLength(len));
                }
                Ok(match &self.create {
                    CreateCosts::Linear { empty, full } => TxCost {
                        size: interpolate(empty.size, full.size, len as u64),
                        gas: interpolate(empty.gas, full.gas, len as u64),
                    },
                    CreateCosts::Table(t) => t[len],
                })
            }
        }
    }

    pub fn gas(&self, kind: TxKind) -> Result<u64> {
        self.cost(kind).map(|c| c.gas)
    }

    pub fn size(&self, kind: TxKind) -> Result<u64> {
        self.cost(kind).map(|c| c.size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostTableError {
    #[error("create cost table needs 1025 entries, got {0}")]
    WrongLength(usize),
    #[error("sizes and gas must be positive")]
    NonPositive,
}

/// Gas of `kind` under the default cost model.
pub fn tx_gas(kind: TxKind) -> Result<u64> {
    CostModel::default().gas(kind)
}

/// Size in bytes of `kind` under the default cost model.
pub fn tx_size(kind: TxKind) -> Result<u64> {
    CostModel::default().size(kind)
}

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Command {
    CreateEvidence { id: EvidenceId, description: String },
    Transfer { id: EvidenceId, new_owner: Address },
    RemoveEvidence { id: EvidenceId },
}

impl Command {
    pub fn id(&self) -> EvidenceId {
        match self {
            Command::CreateEvidence { id, .. } | Command::Transfer { id, .. } | Command::RemoveEvidence { id } => *id,
        }
    }

    pub fn kind(&self) -> Result<TxKind> {
        match self {
            Command::CreateEvidence { description, .. } => TxKind::create(description.chars().count()),
            Command::Transfer { .. } => Ok(TxKind::Transfer),
            Command::RemoveEvidence { .. } => Ok(TxKind::RemoveEvidence),
        }
    }
}

/// A ledger command with its issuer, issue time and modeled cost.
///
/// Gas and size are fixed at construction from the cost model, so a
/// `Transaction` always satisfies `gas == cost(kind).gas`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    seq: u64,
    issuer: Address,
    command: Command,
    issue_time: SimTime,
    kind: TxKind,
    gas: u64,
    size: u64,
}

impl Transaction {
    /// Builds a transaction priced by the default cost model. `seq` is a
    /// caller-assigned unique reference.
    pub fn new(seq: u64, issuer: Address, command: Command, issue_time: SimTime) -> Result<Self> {
        Self::with_model(&CostModel::default(), seq, issuer, command, issue_time)
    }

    pub fn with_model(
        model: &CostModel,
        seq: u64,
        issuer: Address,
        command: Command,
        issue_time: SimTime,
    ) -> Result<Self> {
        let kind = command.kind()?;
        let TxCost { size, gas } = model.cost(kind)?;
        Ok(Transaction { seq, issuer, command, issue_time, kind, gas, size })
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn issuer(&self) -> Address {
        self.issuer
    }

    pub fn command(&self) -> &Command {
        &self.command
    }

    pub fn issue_time(&self) -> SimTime {
        self.issue_time
    }

    pub fn kind(&self) -> TxKind {
        self.kind
    }

    pub fn gas(&self) -> u64 {
        self.gas
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Canonical byte encoding, used for block content hashing.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(96);
        out.extend_from_slice(&self.seq.to_be_bytes());
        out.extend_from_slice(self.issuer.as_bytes());
        out.extend_from_slice(&self.issue_time.as_nanos().to_be_bytes());
        match &self.command {
            Command::CreateEvidence { id, description } => {
                out.push(0);
                out.extend_from_slice(id.as_bytes());
                out.extend_from_slice(&(description.len() as u64).to_be_bytes());
                out.extend_from_slice(description.as_bytes());
            }
            Command::Transfer { id, new_owner } => {
                out.push(1);
                out.extend_from_slice(id.as_bytes());
                out.extend_from_slice(new_owner.as_bytes());
            }
            Command::RemoveEvidence { id } => {
                out.push(2);
                out.extend_from_slice(id.as_bytes());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxStatus {
    Succeeded,
    Reverted(LedgerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub tx_seq: u64,
    pub status: TxStatus,
    /// Always the transaction's modeled gas, reverted or not.
    pub gas_charged: u64,
}

impl Receipt {
    pub fn succeeded(&self) -> bool {
        self.status == TxStatus::Succeeded
    }
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// One custody record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    id: EvidenceId,
    creator: Address,
    owner: Address,
    description: String,
    taddr: Vec<Address>,
    ttime: Vec<u64>,
}

impl EvidenceEntry {
    pub fn id(&self) -> EvidenceId {
        self.id
    }

    pub fn creator(&self) -> Address {
        self.creator
    }

    pub fn owner(&self) -> Address {
        self.owner
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Holders in handover order, creator first and current owner last.
    pub fn taddr(&self) -> &[Address] {
        &self.taddr
    }

    /// Handover times in ledger seconds, parallel to [`taddr`](Self::taddr).
    pub fn ttime(&self) -> &[u64] {
        &self.ttime
    }

    pub fn history(&self) -> impl Iterator<Item = (Address, u64)> + '_ {
        self.taddr.iter().copied().zip(self.ttime.iter().copied())
    }

    /// Checks the structural invariants of a stored entry.
    pub fn check_invariants(&self) -> bool {
        !self.id.is_zero()
            && !self.taddr.is_empty()
            && self.taddr.len() == self.ttime.len()
            && self.taddr.first() == Some(&self.creator)
            && self.taddr.last() == Some(&self.owner)
            && self.ttime.windows(2).all(|w| w[0] <= w[1])
            && self.description.chars().count() <= MAX_DESCRIPTION_LEN
    }
}

/// All live evidence entries, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerState {
    evidences: BTreeMap<EvidenceId, EvidenceEntry>,
}

impl LedgerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.evidences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evidences.is_empty()
    }

    pub fn contains(&self, id: &EvidenceId) -> bool {
        self.evidences.contains_key(id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &EvidenceEntry> {
        self.evidences.values()
    }

    pub fn get_evidence(&self, id: &EvidenceId) -> Result<&EvidenceEntry> {
        self.evidences.get(id).ok_or(LedgerError::EvidenceNotFound)
    }

    pub fn create_evidence(&mut self, sender: Address, id: EvidenceId, description: &str, now: u64) -> Result<()> {
        if sender.is_zero() {
            return Err(LedgerError::InvalidAddress);
        }
        if id.is_zero() {
            return Err(LedgerError::InvalidId);
        }
        let len = description.chars().count();
        if len > MAX_DESCRIPTION_LEN {
            return Err(LedgerError::DescriptionTooLong { len });
        }
        if self.evidences.contains_key(&id) {
            return Err(LedgerError::EvidenceAlreadyExists(id));
        }
        self.evidences.insert(
            id,
            EvidenceEntry {
                id,
                creator: sender,
                owner: sender,
                description: description.to_owned(),
                taddr: vec![sender],
                ttime: vec![now],
            },
        );
        Ok(())
    }

    pub fn transfer(&mut self, sender: Address, id: EvidenceId, new_owner: Address, now: u64) -> Result<()> {
        let entry = self.evidences.get_mut(&id).ok_or(LedgerError::EvidenceNotFound)?;
        if entry.owner != sender {
            return Err(LedgerError::NotOwner);
        }
        if new_owner.is_zero() {
            return Err(LedgerError::InvalidAddress);
        }
        // ledger time never regresses within an entry's history
        let last = *entry.ttime.last().expect("entry has a creation time");
        entry.owner = new_owner;
        entry.taddr.push(new_owner);
        entry.ttime.push(now.max(last));
        Ok(())
    }

    pub fn remove_evidence(&mut self, sender: Address, id: EvidenceId) -> Result<()> {
        let entry = self.evidences.get(&id).ok_or(LedgerError::EvidenceNotFound)?;
        if entry.creator != sender {
            return Err(LedgerError::NotCreator);
        }
        self.evidences.remove(&id);
        Ok(())
    }

    /// Executes `tx` with `ledger_time` (the including block's timestamp,
    /// in seconds) as the handover time.
    pub fn apply_transaction(&mut self, tx: &Transaction, ledger_time: u64) -> Receipt {
        let outcome = match tx.command() {
            Command::CreateEvidence { id, description } => {
                self.create_evidence(tx.issuer(), *id, description, ledger_time)
            }
            Command::Transfer { id, new_owner } => self.transfer(tx.issuer(), *id, *new_owner, ledger_time),
            Command::RemoveEvidence { id } => self.remove_evidence(tx.issuer(), *id),
        };
        Receipt {
            tx_seq: tx.seq(),
            status: match outcome {
                Ok(()) => TxStatus::Succeeded,
                Err(e) => TxStatus::Reverted(e),
            },
            gas_charged: tx.gas(),
        }
    }

    /// Dry-run of `tx` against the current state.
    pub fn check_transaction(&self, tx: &Transaction) -> Result<()> {
        let mut scratch = LedgerState::new();
        let id = tx.command().id();
        if let Some(e) = self.evidences.get(&id) {
            scratch.evidences.insert(id, e.clone());
        }
        match scratch.apply_transaction(tx, u64::MAX).status {
            TxStatus::Succeeded => Ok(()),
            TxStatus::Reverted(e) => Err(e),
        }
    }

    pub fn check_invariants(&self) -> bool {
        self.evidences.iter().all(|(k, e)| *k == e.id && e.check_invariants())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Address {
        Address::from_name("alice")
    }
    fn b() -> Address {
        Address::from_name("bob")
    }
    fn c() -> Address {
        Address::from_name("carol")
    }
    fn h1() -> EvidenceId {
        EvidenceId::new([1u8; 32])
    }

    #[test]
    fn measured_anchors_are_exact() {
        assert_eq!(tx_gas(TxKind::Transfer), Ok(80_502));
        assert_eq!(tx_size(TxKind::Transfer), Ok(174));
        assert_eq!(tx_gas(TxKind::RemoveEvidence), Ok(236_478));
        assert_eq!(tx_size(TxKind::RemoveEvidence), Ok(142));
        assert_eq!(tx_gas(TxKind::create(0).unwrap()), Ok(170_207));
        assert_eq!(tx_size(TxKind::create(0).unwrap()), Ok(207));
        assert_eq!(tx_gas(TxKind::create(1024).unwrap()), Ok(897_367));
        assert_eq!(tx_size(TxKind::create(1024).unwrap()), Ok(1233));
    }

    #[test]
    fn midpoint_interpolation() {
        // 170207 + 512 * 727160 / 1024 = 170207 + 363580
        assert_eq!(tx_gas(TxKind::create(512).unwrap()), Ok(533_787));
        // 207 + 512 * 1026 / 1024 = 207 + 513
        assert_eq!(tx_size(TxKind::create(512).unwrap()), Ok(720));
    }

    #[test]
    fn interpolation_is_monotone() {
        let m = CostModel::default();
        let mut prev = m.cost(TxKind::create(0).unwrap()).unwrap();
        for len in 1..=MAX_DESCRIPTION_LEN {
            let c = m.cost(TxKind::create(len).unwrap()).unwrap();
            assert!(c.gas >= prev.gas && c.size >= prev.size, "len {len}");
            prev = c;
        }
    }

    #[test]
    fn oversized_description_rejected() {
        assert_eq!(TxKind::create(1025), Err(LedgerError::InvalidDescriptionLength(1025)));
        let bad = TxKind::CreateEvidence { description_len: 2000 };
        assert_eq!(tx_gas(bad), Err(LedgerError::InvalidDescriptionLength(2000)));
        let cmd = Command::CreateEvidence { id: h1(), description: "x".repeat(1025) };
        assert!(Transaction::new(0, a(), cmd, SimTime::ZERO).is_err());
    }

    #[test]
    fn custom_create_table() {
        let table: Vec<TxCost> = (0..=1024).map(|l| TxCost { size: 100 + l, gas: 1000 + 10 * l }).collect();
        let m = CostModel::default().with_create_table(table).unwrap();
        assert_eq!(m.gas(TxKind::create(3).unwrap()), Ok(1030));
        assert_eq!(m.gas(TxKind::Transfer), Ok(80_502));
        assert_eq!(CostModel::default().with_create_table(vec![]), Err(CostTableError::WrongLength(0)));
    }

    #[test]
    fn description_length_counts_characters() {
        let cmd = Command::CreateEvidence { id: h1(), description: "é".repeat(1024) };
        let tx = Transaction::new(0, a(), cmd, SimTime::ZERO).unwrap();
        assert_eq!(tx.gas(), 897_367);
    }

    #[test]
    fn create_first_entry() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "laptop disk image", 10).unwrap();
        let e = s.get_evidence(&h1()).unwrap();
        assert_eq!((e.creator(), e.owner()), (a(), a()));
        assert_eq!(e.taddr(), &[a()]);
        assert_eq!(e.ttime(), &[10]);
        assert!(s.check_invariants());
    }

    #[test]
    fn create_twice_fails() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "", 0).unwrap();
        assert_eq!(s.create_evidence(b(), h1(), "", 1), Err(LedgerError::EvidenceAlreadyExists(h1())));
    }

    #[test]
    fn create_zero_id_fails() {
        let mut s = LedgerState::new();
        assert_eq!(s.create_evidence(a(), EvidenceId::ZERO, "", 0), Err(LedgerError::InvalidId));
        assert!(s.is_empty());
    }

    #[test]
    fn create_checks_sender_and_length() {
        let mut s = LedgerState::new();
        assert_eq!(s.create_evidence(Address::ZERO, h1(), "", 0), Err(LedgerError::InvalidAddress));
        assert_eq!(
            s.create_evidence(a(), h1(), &"x".repeat(1025), 0),
            Err(LedgerError::DescriptionTooLong { len: 1025 })
        );
    }

    #[test]
    fn transfer_paths() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "", 0).unwrap();
        assert_eq!(s.transfer(b(), h1(), c(), 1), Err(LedgerError::NotOwner));
        s.transfer(a(), h1(), b(), 5).unwrap();
        let e = s.get_evidence(&h1()).unwrap();
        assert_eq!(e.owner(), b());
        assert_eq!(e.taddr(), &[a(), b()]);
        assert_eq!(s.transfer(a(), EvidenceId::new([9; 32]), b(), 0), Err(LedgerError::EvidenceNotFound));
        assert_eq!(s.transfer(b(), h1(), Address::ZERO, 6), Err(LedgerError::InvalidAddress));
    }

    #[test]
    fn three_holder_history() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "", 100).unwrap();
        s.transfer(a(), h1(), b(), 200).unwrap();
        s.transfer(b(), h1(), c(), 300).unwrap();
        let e = s.get_evidence(&h1()).unwrap();
        assert_eq!(e.taddr(), &[a(), b(), c()]);
        assert_eq!(e.ttime(), &[100, 200, 300]);
        assert_eq!(e.creator(), a());
    }

    #[test]
    fn remove_by_creator_only() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "", 0).unwrap();
        s.transfer(a(), h1(), b(), 1).unwrap();
        assert_eq!(s.remove_evidence(b(), h1()), Err(LedgerError::NotCreator));
        s.remove_evidence(a(), h1()).unwrap();
        assert_eq!(s.get_evidence(&h1()), Err(LedgerError::EvidenceNotFound));
        assert_eq!(s.remove_evidence(a(), h1()), Err(LedgerError::EvidenceNotFound));
        // map-delete semantics: the id is free again
        s.create_evidence(c(), h1(), "again", 2).unwrap();
        assert_eq!(s.get_evidence(&h1()).unwrap().creator(), c());
    }

    #[test]
    fn apply_reverts_keep_state_and_charge_gas() {
        let mut s = LedgerState::new();
        let create = |seq| {
            Transaction::new(seq, a(), Command::CreateEvidence { id: h1(), description: "d".into() }, SimTime::ZERO)
                .unwrap()
        };
        let r = s.apply_transaction(&create(0), 7);
        assert!(r.succeeded());
        let before = s.clone();
        let r = s.apply_transaction(&create(1), 8);
        assert_eq!(r.status, TxStatus::Reverted(LedgerError::EvidenceAlreadyExists(h1())));
        assert_eq!(r.gas_charged, tx_gas(TxKind::create(1).unwrap()).unwrap());
        assert_eq!(s, before);

        let steal = Transaction::new(2, b(), Command::Transfer { id: h1(), new_owner: b() }, SimTime::ZERO).unwrap();
        let r = s.apply_transaction(&steal, 9);
        assert_eq!(r.status, TxStatus::Reverted(LedgerError::NotOwner));
        assert_eq!(r.gas_charged, 80_502);
        assert_eq!(s, before);

        let give = Transaction::new(3, a(), Command::Transfer { id: h1(), new_owner: b() }, SimTime::ZERO).unwrap();
        assert!(s.apply_transaction(&give, 9).succeeded());
        assert_eq!(s.get_evidence(&h1()).unwrap().ttime(), &[7, 9]);
    }

    #[test]
    fn check_transaction_is_read_only() {
        let mut s = LedgerState::new();
        s.create_evidence(a(), h1(), "", 0).unwrap();
        let before = s.clone();
        let rm = Transaction::new(0, b(), Command::RemoveEvidence { id: h1() }, SimTime::ZERO).unwrap();
        assert_eq!(s.check_transaction(&rm), Err(LedgerError::NotCreator));
        let rm = Transaction::new(1, a(), Command::RemoveEvidence { id: h1() }, SimTime::ZERO).unwrap();
        assert_eq!(s.check_transaction(&rm), Ok(()));
        assert_eq!(s, before);
    }
}

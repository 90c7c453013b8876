//! Off-chain evidence database and the frontend workflow around it.
//!
//! Blobs are content addressed: the id is `sha256(blob ‖ nonce)` with the
//! nonce appended as 8 big-endian bytes. The frontend stores the blob, then
//! hands back the `CreateEvidence` transaction for the pipeline. Acquisition
//! is gated on the committed owner and re-verifies the hash. Discarding only
//! issues the removal; the blob is deleted once its receipt succeeds.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ledger::{Command, LedgerError, LedgerState, Receipt, Transaction};
use crate::time::SimTime;
use crate::types::{sha256, Address, EvidenceId};

const INDEX_FILE: &str = "index.tsv";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("evidence blob is empty")]
    EmptyEvidence,
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("stored blob does not hash to {0}")]
    IntegrityViolation(EvidenceId),
    #[error("no free id after {0} nonces")]
    IdCollision(u32),
    #[error("blob {0} is missing from the store")]
    BlobMissing(EvidenceId),
    #[error("malformed index line {line}: {reason}")]
    CorruptIndex { line: usize, reason: String },
    #[error("store i/o: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredEvidence {
    pub id: EvidenceId,
    pub nonce: u64,
    pub blob: Vec<u8>,
}

impl StoredEvidence {
    pub fn size(&self) -> u64 {
        self.blob.len() as u64
    }
}

pub trait IdHasher {
    fn hash(&self, blob: &[u8], nonce: u64) -> EvidenceId;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sha256Hasher;

impl IdHasher for Sha256Hasher {
    fn hash(&self, blob: &[u8], nonce: u64) -> EvidenceId {
        EvidenceId::new(sha256(&[blob, &nonce.to_be_bytes()]))
    }
}

pub fn generate_id(blob: &[u8], nonce: u64) -> Result<EvidenceId> {
    if blob.is_empty() {
        return Err(StoreError::EmptyEvidence);
    }
    Ok(Sha256Hasher.hash(blob, nonce))
}

pub trait BlobStore {
    fn put(&mut self, ev: StoredEvidence) -> Result<()>;
    fn get(&self, id: &EvidenceId) -> Result<Option<StoredEvidence>>;
    /// Returns whether the id was present.
    fn remove(&mut self, id: &EvidenceId) -> Result<bool>;
    fn contains(&self, id: &EvidenceId) -> bool;
    fn ids(&self) -> Vec<EvidenceId>;
}

#[derive(Debug, Clone, Default)]
pub struct MemStore {
    items: BTreeMap<EvidenceId, StoredEvidence>,
}

impl MemStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Direct mutable access, for tamper tests.
    pub fn blob_mut(&mut self, id: &EvidenceId) -> Option<&mut Vec<u8>> {
        self.items.get_mut(id).map(|e| &mut e.blob)
    }
}

impl BlobStore for MemStore {
    fn put(&mut self, ev: StoredEvidence) -> Result<()> {
        self.items.insert(ev.id, ev);
        Ok(())
    }

    fn get(&self, id: &EvidenceId) -> Result<Option<StoredEvidence>> {
        Ok(self.items.get(id).cloned())
    }

    fn remove(&mut self, id: &EvidenceId) -> Result<bool> {
        Ok(self.items.remove(id).is_some())
    }

    fn contains(&self, id: &EvidenceId) -> bool {
        self.items.contains_key(id)
    }

    fn ids(&self) -> Vec<EvidenceId> {
        self.items.keys().copied().collect()
    }
}

/// Directory backend: `<root>/<hex id>.bin` per blob and `<root>/index.tsv`
/// with `hexId<TAB>nonce<TAB>size` lines.
#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
    index: BTreeMap<EvidenceId, (u64, u64)>,
}

impl DirStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        let mut index = BTreeMap::new();
        match fs::read_to_string(root.join(INDEX_FILE)) {
            Ok(text) => {
                for (n, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let (id, nonce, size) =
                        parse_index_line(line).map_err(|reason| StoreError::CorruptIndex { line: n + 1, reason })?;
                    index.insert(id, (nonce, size));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(DirStore { root, index })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn blob_path(&self, id: &EvidenceId) -> PathBuf {
        self.root.join(format!("{}.bin", id.to_hex()))
    }

    fn write_index(&self) -> Result<()> {
        let tmp = self.root.join(format!("{INDEX_FILE}.tmp"));
        let mut f = fs::File::create(&tmp)?;
        for (id, (nonce, size)) in &self.index {
            writeln!(f, "{}\t{}\t{}", id.to_hex(), nonce, size)?;
        }
        f.sync_all()?;
        fs::rename(tmp, self.root.join(INDEX_FILE))?;
        Ok(())
    }
}

fn parse_index_line(line: &str) -> std::result::Result<(EvidenceId, u64, u64), String> {
    let mut parts = line.split('\t');
    let (Some(id), Some(nonce), Some(size), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err("expected 3 tab-separated fields".into());
    };
    let id = id.parse::<EvidenceId>().map_err(|e| e.to_string())?;
    let nonce = nonce.parse::<u64>().map_err(|e| e.to_string())?;
    let size = size.parse::<u64>().map_err(|e| e.to_string())?;
    Ok((id, nonce, size))
}

impl BlobStore for DirStore {
    fn put(&mut self, ev: StoredEvidence) -> Result<()> {
        fs::write(self.blob_path(&ev.id), &ev.blob)?;
        self.index.insert(ev.id, (ev.nonce, ev.size()));
        self.write_index()
    }

    fn get(&self, id: &EvidenceId) -> Result<Option<StoredEvidence>> {
        let Some(&(nonce, _)) = self.index.get(id) else { return Ok(None) };
        match fs::read(self.blob_path(id)) {
            Ok(blob) => Ok(Some(StoredEvidence { id: *id, nonce, blob })),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::BlobMissing(*id)),
            Err(e) => Err(e.into()),
        }
    }

    fn remove(&mut self, id: &EvidenceId) -> Result<bool> {
        if self.index.remove(id).is_none() {
            return Ok(false);
        }
        match fs::remove_file(self.blob_path(id)) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        self.write_index()?;
        Ok(true)
    }

    fn contains(&self, id: &EvidenceId) -> bool {
        self.index.contains_key(id)
    }

    fn ids(&self) -> Vec<EvidenceId> {
        self.index.keys().copied().collect()
    }
}

/// User-facing custody operations over a blob store.
///
/// Authorization reads the committed ledger passed in by the caller.
#[derive(Debug)]
pub struct Frontend<S, H = Sha256Hasher> {
    store: S,
    hasher: H,
    rng: ChaCha8Rng,
    max_attempts: u32,
    pending_discards: HashMap<u64, EvidenceId>,
}

impl<S: BlobStore> Frontend<S, Sha256Hasher> {
    pub fn new(store: S, seed: u64) -> Self {
        Frontend::with_hasher(store, Sha256Hasher, seed)
    }
}

impl<S: BlobStore, H: IdHasher> Frontend<S, H> {
    pub fn with_hasher(store: S, hasher: H, seed: u64) -> Self {
        Frontend {
            store,
            hasher,
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_attempts: 16,
            pending_discards: HashMap::new(),
        }
    }

    pub fn with_max_attempts(mut self, attempts: u32) -> Self {
        self.max_attempts = attempts.max(1);
        self
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut S {
        &mut self.store
    }

    pub fn into_store(self) -> S {
        self.store
    }

    pub fn pending_discards(&self) -> impl Iterator<Item = (u64, EvidenceId)> + '_ {
        self.pending_discards.iter().map(|(s, id)| (*s, *id))
    }

    /// Stores `blob` under a fresh id and returns the `CreateEvidence`
    /// transaction to submit.
    pub fn submit_evidence(
        &mut self,
        ledger: &LedgerState,
        creator: Address,
        blob: &[u8],
        description: &str,
        seq: u64,
        now: SimTime,
    ) -> Result<(EvidenceId, Transaction)> {
        if blob.is_empty() {
            return Err(StoreError::EmptyEvidence);
        }
        if creator.is_zero() {
            return Err(LedgerError::InvalidAddress.into());
        }
        for _ in 0..self.max_attempts {
            let nonce: u64 = self.rng.random();
            let id = self.hasher.hash(blob, nonce);
            if id.is_zero() || self.store.contains(&id) || ledger.contains(&id) {
                continue;
            }
            let tx = Transaction::new(
                seq,
                creator,
                Command::CreateEvidence { id, description: description.to_owned() },
                now,
            )?;
            self.store.put(StoredEvidence { id, nonce, blob: blob.to_vec() })?;
            return Ok((id, tx));
        }
        Err(StoreError::IdCollision(self.max_attempts))
    }

    /// Returns the blob if `requester` owns `id` in the committed ledger.
    pub fn acquire_evidence(&self, ledger: &LedgerState, requester: Address, id: &EvidenceId) -> Result<Vec<u8>> {
        let entry = ledger.get_evidence(id)?;
        if entry.owner() != requester {
            return Err(LedgerError::NotOwner.into());
        }
        let ev = self.store.get(id)?.ok_or(StoreError::BlobMissing(*id))?;
        if self.hasher.hash(&ev.blob, ev.nonce) != *id {
            return Err(StoreError::IntegrityViolation(*id));
        }
        Ok(ev.blob)
    }

    /// Returns the `RemoveEvidence` transaction; the blob stays until
    /// [`Frontend::on_receipt`] sees it succeed.
    pub fn discard_evidence(
        &mut self,
        ledger: &LedgerState,
        requester: Address,
        id: &EvidenceId,
        seq: u64,
        now: SimTime,
    ) -> Result<Transaction> {
        let entry = ledger.get_evidence(id)?;
        if entry.creator() != requester {
            return Err(LedgerError::NotCreator.into());
        }
        let tx = Transaction::new(seq, requester, Command::RemoveEvidence { id: *id }, now)?;
        self.pending_discards.insert(seq, *id);
        Ok(tx)
    }

    /// Applies the outcome of a committed transaction. Returns the id whose
    /// blob was deleted, if any.
    pub fn on_receipt(&mut self, receipt: &Receipt) -> Result<Option<EvidenceId>> {
        let Some(id) = self.pending_discards.remove(&receipt.tx_seq) else { return Ok(None) };
        if receipt.succeeded() && self.store.remove(&id)? {
            return Ok(Some(id));
        }
        Ok(None)
    }
}

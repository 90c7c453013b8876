//! `ledger` subcommands over a state directory holding `ledger.json` and a
//! blob store in `store/` (`<hex>.bin` blobs plus `index.tsv`).
//!
//! Each command is committed immediately, as if included in its own block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Subcommand};
use custody_core::store::Frontend;
use custody_core::{Address, BlobStore, Command, DirStore, EvidenceId, LedgerState, Receipt, Transaction, TxStatus};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{csv_out, sink};
use crate::Common;

const LEDGER_COLUMNS: &str = "\
Identities given to --as and --to are 40-hex-digit addresses or names; a name
maps to a fixed address derived from it.

Output columns of create, transfer, remove and discard:
  seq          sequence number of the committed transaction
  kind         transaction type
  id           evidence id, 64 hex digits
  status       `succeeded`, or the revert reason (the command then exits 1)
  gas_charged  gas of the transaction

Output columns of show, one row per custody step:
  id           evidence id
  creator      creator address
  owner        current owner address
  description  evidence description
  step         0 for creation, then one per transfer
  holder       holder from this step on
  time         ledger time of the step, seconds

acquire writes the raw evidence bytes to --out or stdout.";

#[derive(Debug, Args)]
#[command(after_help = LEDGER_COLUMNS)]
pub struct LedgerArgs {
    /// Directory holding the ledger and the evidence store
    #[arg(long, value_name = "DIR", default_value = "custody-state")]
    state: PathBuf,
    /// Identity issuing the command
    #[arg(long = "as", value_name = "IDENTITY", default_value = "admin")]
    identity: String,
    /// Ledger time in seconds; defaults to the wall clock
    #[arg(long, value_name = "SECONDS")]
    time: Option<u64>,
    #[command(subcommand)]
    op: LedgerOp,
}

#[derive(Debug, Subcommand)]
enum LedgerOp {
    /// Store a file as evidence and record it on the ledger
    Create {
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
        #[arg(long = "desc", value_name = "TEXT", default_value = "")]
        description: String,
    },
    /// Hand evidence over to a new owner
    Transfer {
        id: String,
        #[arg(long, value_name = "IDENTITY")]
        to: String,
    },
    /// Remove the ledger entry and its blob (creator only)
    Remove { id: String },
    /// Print the custody history of an item
    Show { id: String },
    /// Fetch the evidence bytes (current owner only)
    Acquire { id: String },
    /// Remove evidence through the frontend (creator only)
    Discard { id: String },
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct LedgerFile {
    next_seq: u64,
    state: LedgerState,
}

struct Workspace {
    path: PathBuf,
    file: LedgerFile,
    frontend: Frontend<DirStore>,
}

impl Workspace {
    fn open(dir: &Path, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join("ledger.json");
        let file = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Failed(format!("corrupt ledger {}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => LedgerFile::default(),
            Err(e) => return Err(e.into()),
        };
        let store = DirStore::open(dir.join("store"))?;
        // a fresh nonce stream per command
        let frontend = Frontend::new(store, seed ^ file.next_seq.rotate_left(32));
        Ok(Workspace { path, file, frontend })
    }

    fn save(&self) -> Result<(), CliError> {
        let tmp = self.path.with_extension("json.tmp");
        let json = serde_json::to_vec_pretty(&self.file).map_err(|e| CliError::Failed(e.to_string()))?;
        fs::write(&tmp, json)?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    fn take_seq(&mut self) -> u64 {
        let s = self.file.next_seq;
        self.file.next_seq += 1;
        s
    }

    fn commit(&mut self, tx: &Transaction, now: u64) -> Receipt {
        self.file.state.apply_transaction(tx, now)
    }
}

fn identity(s: &str) -> Address {
    match s.parse::<Address>() {
        Ok(a) if s.trim_start_matches("0x").len() == 40 => a,
        _ => Address::from_name(s),
    }
}

fn evidence_id(s: &str) -> Result<EvidenceId, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("bad evidence id `{s}`: {e}")))
}

fn wall_clock() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn status_str(r: &Receipt) -> String {
    match &r.status {
        TxStatus::Succeeded => "succeeded".into(),
        TxStatus::Reverted(e) => e.to_string(),
    }
}

fn report(tx: &Transaction, r: &Receipt, common: &Common) -> Result<(), CliError> {
    let mut w = csv_out(common.out.as_deref(), &["seq", "kind", "id", "status", "gas_charged"])?;
    w.write_record([
        tx.seq().to_string(),
        tx.kind().label(),
        tx.command().id().to_hex(),
        status_str(r),
        r.gas_charged.to_string(),
    ])?;
    w.flush()?;
    match &r.status {
        TxStatus::Succeeded => Ok(()),
        TxStatus::Reverted(e) => Err(CliError::Ledger(e.clone())),
    }
}

pub fn run(args: LedgerArgs, common: &Common) -> Result<(), CliError> {
    let seed = match &common.seed {
        Some(s) => s.parse().map_err(|_| CliError::Config(format!("`seed`: cannot parse `{s}`")))?,
        None => wall_clock(),
    };
    let me = identity(&args.identity);
    let now = args.time.unwrap_or_else(wall_clock);
    let mut ws = Workspace::open(&args.state, seed)?;
    match args.op {
        LedgerOp::Create { file, description } => {
            let blob = fs::read(&file).map_err(|e| CliError::Config(format!("cannot read {}: {e}", file.display())))?;
            let seq = ws.take_seq();
            let (id, tx) = ws.frontend.submit_evidence(
                &ws.file.state,
                me,
                &blob,
                &description,
                seq,
                custody_core::SimTime::from_secs(now),
            )?;
            let r = ws.commit(&tx, now);
            if !r.succeeded() {
                ws.frontend.store_mut().remove(&id)?;
            }
            ws.save()?;
            report(&tx, &r, common)
        }
        LedgerOp::Transfer { id, to } => {
            let id = evidence_id(&id)?;
            let seq = ws.take_seq();
            let tx = Transaction::new(seq, me, Command::Transfer { id, new_owner: identity(&to) }, sim_time(now))?;
            let r = ws.commit(&tx, now);
            ws.save()?;
            report(&tx, &r, common)
        }
        LedgerOp::Remove { id } => {
            let id = evidence_id(&id)?;
            let seq = ws.take_seq();
            let tx = Transaction::new(seq, me, Command::RemoveEvidence { id }, sim_time(now))?;
            let r = ws.commit(&tx, now);
            if r.succeeded() {
                ws.frontend.store_mut().remove(&id)?;
            }
            ws.save()?;
            report(&tx, &r, common)
        }
        LedgerOp::Discard { id } => {
            let id = evidence_id(&id)?;
            let seq = ws.take_seq();
            let tx = ws.frontend.discard_evidence(&ws.file.state, me, &id, seq, sim_time(now))?;
            let r = ws.commit(&tx, now);
            ws.frontend.on_receipt(&r)?;
            ws.save()?;
            report(&tx, &r, common)
        }
        LedgerOp::Show { id } => {
            let id = evidence_id(&id)?;
            let entry = ws.file.state.get_evidence(&id)?;
            let mut w =
                csv_out(common.out.as_deref(), &["id", "creator", "owner", "description", "step", "holder", "time"])?;
            for (step, (holder, t)) in entry.history().enumerate() {
                w.write_record([
                    entry.id().to_hex(),
                    entry.creator().to_hex(),
                    entry.owner().to_hex(),
                    entry.description().to_string(),
                    step.to_string(),
                    holder.to_hex(),
                    t.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        LedgerOp::Acquire { id } => {
            let id = evidence_id(&id)?;
            let blob = ws.frontend.acquire_evidence(&ws.file.state, me, &id)?;
            let mut out = sink(common.out.as_deref())?;
            out.write_all(&blob)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn sim_time(secs: u64) -> custody_core::SimTime {
    custody_core::SimTime::from_secs(secs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use custody_core::LedgerError;

    #[test]
    fn identities() {
        let hex = "00000000000000000000000000000000000000ff";
        assert_eq!(identity(hex).to_hex(), hex);
        assert_eq!(identity("alice"), Address::from_name("alice"));
        // short hex strings are names, not addresses
        assert_eq!(identity("beef"), Address::from_name("beef"));
    }

    #[test]
    fn ledger_file_round_trip() {
        let mut f = LedgerFile::default();
        f.state.create_evidence(Address::from_name("a"), EvidenceId::new([7; 32]), "d", 5).unwrap();
        f.next_seq = 3;
        let json = serde_json::to_string(&f).unwrap();
        let back: LedgerFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.state, f.state);
        assert_eq!(back.next_seq, 3);
        assert!(matches!(back.state.get_evidence(&EvidenceId::new([1; 32])), Err(LedgerError::EvidenceNotFound)));
    }
}

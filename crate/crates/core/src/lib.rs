//! Evidence chain-of-custody on a permissioned blockchain.
//!
//! The crate covers the custody ledger and its cost model, IBFT-style
//! consensus, a deterministic network simulator, block assembly, the
//! off-chain evidence store, closed-form capacity models and an experiment
//! driver tying them together.

pub mod analytics;
pub mod consensus;
pub mod experiment;
pub mod ledger;
pub mod pipeline;
pub mod sim;
pub mod store;
pub mod time;
pub mod types;

pub use analytics::{Catalog, ChainParams};
pub use consensus::{quorum_size, select_proposer, Behavior, FaultModel, MessageSizes, Validator};
pub use experiment::{run_experiment, ExperimentConfig, MetricsRow, RunResult, WorkloadSpec};
pub use ledger::{
    tx_gas, tx_size, Command, CostModel, EvidenceEntry, LedgerError, LedgerState, Receipt, Transaction, TxCost, TxKind,
    TxStatus,
};
pub use pipeline::{Block, BlockBuilder, Mempool, HEADER_SIZE};
pub use store::{BlobStore, DirStore, Frontend, MemStore, StoreError};
pub use time::SimTime;
pub use types::{Address, Digest, EvidenceId};

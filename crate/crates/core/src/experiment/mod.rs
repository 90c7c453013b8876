//! End-to-end chain simulations.
//!
//! [`run_experiment`] drives `n` validators through the discrete-event
//! engine. Clients hand every transaction to all validators at its issue
//! time; proposers fill blocks from their mempool when the block period
//! ends; committed blocks are applied to each validator's ledger. One
//! [`MetricsRow`] is produced per block of the reference honest chain.

pub mod workload;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use thiserror::Error;

pub use workload::{gen_workload, DescriptionDist, WorkloadError, WorkloadSpec};

use crate::analytics::ChainParams;
use crate::consensus::{
    fault_tolerance, Behavior, ConsensusMessage, Equivocation, FaultModel, FaultModelError, Output, Payload, TimerKind,
    Validator, ValidatorConfig,
};
use crate::ledger::{LedgerState, Transaction};
use crate::pipeline::{Block, BlockBuilder, Mempool, ValidatorIndex};
use crate::sim::{Action, EventId, LinkModel, Network, Sim, SimError, SimEvent};
use crate::time::SimTime;
use crate::types::Digest;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Faults(#[from] FaultModelError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub params: ChainParams,
    pub validators: usize,
    pub faults: Vec<(ValidatorIndex, Behavior)>,
    /// Fixed per-message latency added to transmission time.
    pub base_delay: SimTime,
    /// Upper bound of uniform extra latency per message.
    pub jitter: SimTime,
    pub workload: WorkloadSpec,
    pub clients: usize,
    /// Run length in block periods.
    pub periods: u64,
    pub seed: u64,
    /// Drop transactions that would revert instead of including them.
    pub reject_invalid: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ChainParams::default(),
            validators: 4,
            faults: Vec::new(),
            base_delay: SimTime::ZERO,
            jitter: SimTime::ZERO,
            workload: WorkloadSpec::Rate {
                creates: 1,
                transfers: 10,
                removes: 1,
                description: DescriptionDist::default(),
            },
            clients: 8,
            periods: 100,
            seed: 0,
            reject_invalid: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<FaultModel, ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.periods == 0 {
            return invalid("run length must be at least one period");
        }
        if self.params.period == SimTime::ZERO {
            return invalid("block period must be positive");
        }
        if self.params.bandwidth == 0 {
            return invalid("bandwidth must be positive");
        }
        if self.params.header_size == 0 {
            return invalid("header size must be positive");
        }
        if self.validators == 0 {
            return invalid("at least one validator is required");
        }
        if self.clients == 0 {
            return invalid("at least one client is required");
        }
        if !self.faults.is_empty() && self.validators != 3 * fault_tolerance(self.validators) + 1 {
            return Err(ConfigError::Invalid(format!(
                "{} validators is not of the form 3f+1, required with faulty validators",
                self.validators
            )));
        }
        self.workload.validate()?;
        Ok(FaultModel::new(self.validators, self.faults.iter().copied())?)
    }

    pub fn duration(&self) -> SimTime {
        self.params.period.checked_mul(self.periods).expect("run length overflow")
    }
}

/// Per-block measurements. Latencies are in seconds, sizes in bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub period_index: u64,
    pub height: u64,
    /// Gas issued by clients during the period.
    pub gas_rate: u64,
    pub tx_count: usize,
    pub mean_lb: f64,
    pub max_lb: f64,
    pub mean_lc: f64,
    pub block_size: u64,
    pub chain_size: u64,
    pub mempool_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub rows: Vec<MetricsRow>,
    /// Tip digest and height per honest validator.
    pub tips: BTreeMap<ValidatorIndex, (u64, Digest)>,
    /// Chain of the lowest-indexed honest validator.
    pub chain: Vec<Arc<Block>>,
    pub trace: Digest,
    pub issued: usize,
    pub committed_txs: usize,
    pub end: SimTime,
}

impl RunResult {
    /// Whether all honest validators hold the same chain.
    pub fn honest_agree(&self) -> bool {
        let mut it = self.tips.values();
        match it.next() {
            Some(first) => it.all(|t| t == first),
            None => true,
        }
    }

    pub fn height(&self) -> u64 {
        self.tips.values().map(|(h, _)| *h).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
enum Msg {
    Consensus(ConsensusMessage),
}

struct Node {
    validator: Validator,
    mempool: Mempool,
    ledger: LedgerState,
    timers: Vec<EventId>,
    behavior: Option<Behavior>,
    equivocation: Option<Equivocation>,
    /// (height, commit time, round, mempool depth after commit)
    commits: Vec<(u64, SimTime, Option<u64>, usize)>,
}

struct World {
    sim: Sim<Msg, TimerKind>,
    nodes: Vec<Node>,
    builder: BlockBuilder,
    sizes: crate::consensus::MessageSizes,
    /// First pre-prepare broadcast per (height, round).
    proposals: BTreeMap<(u64, u64), SimTime>,
}

impl World {
    fn handle(&mut self, v: ValidatorIndex, outputs: Vec<Output>) {
        let outputs = match self.nodes[v].equivocation.as_mut() {
            Some(eq) => eq.rewrite(outputs),
            None => outputs,
        };
        let now = self.sim.now();
        for out in outputs {
            match out {
                Output::Broadcast(msg) => {
                    self.note_proposal(&msg, now);
                    let size = msg.wire_size(&self.sizes);
                    self.sim.broadcast(v, Msg::Consensus(msg), size).expect("known node");
                }
                Output::Send { to, msg } => {
                    self.note_proposal(&msg, now);
                    let size = msg.wire_size(&self.sizes);
                    self.sim.send(v, to, Msg::Consensus(msg), size).expect("known node");
                }
                Output::CancelTimers => {
                    for id in self.nodes[v].timers.drain(..) {
                        self.sim.cancel(id);
                    }
                }
                Output::SetTimer { at, timer } => {
                    let id = self
                        .sim
                        .schedule(at.max(now), Action::Timer { owner: v, kind: timer })
                        .expect("not in the past");
                    self.nodes[v].timers.push(id);
                }
                Output::BuildProposal { template, cutoff, .. } => {
                    let node = &mut self.nodes[v];
                    let built = self.builder.build(&node.mempool, template, Some(cutoff), Some(&node.ledger));
                    node.mempool.discard(&built.rejected_seqs());
                    match node.validator.propose(now, built.block) {
                        Ok(more) => self.handle(v, more),
                        Err(e) => debug_assert!(false, "proposal refused: {e}"),
                    }
                }
                Output::Committed { block, round, .. } => {
                    let node = &mut self.nodes[v];
                    node.mempool.remove_committed(&block);
                    let t = block.timestamp().as_secs();
                    for tx in block.transactions() {
                        node.ledger.apply_transaction(tx, t);
                    }
                    node.commits.push((block.height(), now, round, node.mempool.len()));
                }
            }
        }
    }

    fn note_proposal(&mut self, msg: &ConsensusMessage, now: SimTime) {
        if let Payload::PrePrepare { height, round, .. } = msg.payload {
            self.proposals.entry((height, round)).or_insert(now);
        }
    }

    fn dispatch(&mut self, ev: SimEvent<Msg, TimerKind>) {
        let now = ev.fire_time;
        match ev.action {
            Action::Deliver { to, msg: Msg::Consensus(msg), .. } => {
                if self.nodes[to].behavior == Some(Behavior::Silent) {
                    return;
                }
                if let Ok(out) = self.nodes[to].validator.on_message(now, msg) {
                    self.handle(to, out);
                }
            }
            Action::Timer { owner, kind } => {
                if self.nodes[owner].behavior == Some(Behavior::Silent) {
                    return;
                }
                let out = self.nodes[owner].validator.on_timer(now, kind);
                self.handle(owner, out);
            }
            Action::IssueTx(tx) => {
                for node in self.nodes.iter_mut().filter(|n| n.behavior != Some(Behavior::Silent)) {
                    node.mempool.submit(tx.clone());
                }
            }
        }
    }
}

/// Runs one simulation. Identical configs give identical results.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult, ConfigError> {
    let faults = cfg.validate()?;
    let p = &cfg.params;
    let txs = gen_workload(&cfg.workload, cfg.seed, p.period, cfg.periods, cfg.clients)?;
    run_with_transactions(cfg, &faults, txs)
}

/// Runs `cfg` against an explicit transaction schedule.
pub fn run_with_schedule(cfg: &ExperimentConfig, txs: Vec<Transaction>) -> Result<RunResult, ConfigError> {
    let faults = cfg.validate()?;
    run_with_transactions(cfg, &faults, txs)
}

fn run_with_transactions(
    cfg: &ExperimentConfig,
    faults: &FaultModel,
    txs: Vec<Transaction>,
) -> Result<RunResult, ConfigError> {
    let p = &cfg.params;
    let n = cfg.validators;
    let link = LinkModel::new(p.bandwidth, cfg.base_delay)?.with_jitter(cfg.jitter);
    let mut network = Network::new(n, link);
    for (v, b) in faults.faulty() {
        if b == Behavior::Silent {
            network.mute(v);
        }
    }
    let genesis = Block::genesis(p.header_size);
    let nodes = (0..n)
        .map(|i| {
            let behavior = faults.behavior(i);
            Node {
                validator: Validator::new(ValidatorConfig::new(i, n, p.period, p.gas_limit), genesis.clone()),
                mempool: Mempool::new(),
                ledger: LedgerState::new(),
                timers: Vec::new(),
                behavior,
                equivocation: (behavior == Some(Behavior::Equivocator)).then(|| Equivocation::new(i, n)),
                commits: Vec::new(),
            }
        })
        .collect();
    let mut world = World {
        sim: Sim::new(network, cfg.seed),
        nodes,
        builder: BlockBuilder {
            gas_limit: p.gas_limit,
            header_size: p.header_size,
            reject_invalid: cfg.reject_invalid,
        },
        sizes: p.sizes,
        proposals: BTreeMap::new(),
    };

    let issued = txs.len();
    let mut gas_rate = vec![0u64; cfg.periods as usize + 1];
    for tx in txs {
        if let Some(g) = gas_rate.get_mut(tx.issue_time().period_index(p.period) as usize) {
            *g += tx.gas();
        }
        world.sim.schedule(tx.issue_time(), Action::IssueTx(tx))?;
    }
    for v in 0..n {
        if world.nodes[v].behavior != Some(Behavior::Silent) {
            let out = world.nodes[v].validator.start(SimTime::ZERO);
            world.handle(v, out);
        }
    }

    // half a period of slack lets the last block reach every honest node
    let end = cfg.duration() + SimTime::from_nanos(p.period.as_nanos() / 2);
    while let Some(ev) = world.sim.next_event(end) {
        world.dispatch(ev);
    }
    world.sim.advance_to(end);

    let honest: Vec<ValidatorIndex> = (0..n).filter(|&v| faults.is_honest(v)).collect();
    let tips = honest
        .iter()
        .map(|&v| {
            let head = world.nodes[v].validator.head();
            (v, (head.height(), head.digest()))
        })
        .collect();
    let reference = *honest.first().ok_or_else(|| ConfigError::Invalid("no honest validator".into()))?;
    let rows = metrics(&world, reference, &honest, p, &gas_rate);
    let committed_txs = rows.iter().map(|r| r.tx_count).sum();
    let chain = world.nodes[reference].validator.chain().to_vec();
    Ok(RunResult { rows, tips, chain, trace: world.sim.trace_digest(), issued, committed_txs, end })
}

/// Commit time, round and mempool depth by height.
type CommitLog = BTreeMap<u64, (SimTime, Option<u64>, usize)>;

fn metrics(
    world: &World,
    reference: ValidatorIndex,
    honest: &[ValidatorIndex],
    p: &ChainParams,
    gas_rate: &[u64],
) -> Vec<MetricsRow> {
    let chain = world.nodes[reference].validator.chain();
    let commit_info: Vec<CommitLog> =
        world.nodes.iter().map(|n| n.commits.iter().map(|&(h, t, r, d)| (h, (t, r, d))).collect()).collect();
    let mut chain_size = p.genesis_size;
    let mut rows = Vec::with_capacity(chain.len().saturating_sub(1));
    for block in chain.iter().skip(1) {
        let h = block.height();
        let ts = block.timestamp();
        let k = ts.period_index(p.period);
        let latencies: Vec<f64> = block
            .transactions()
            .iter()
            .map(|tx| (ts + p.period).as_secs_f64() - tx.issue_time().as_secs_f64())
            .collect();
        let (mean_lb, max_lb) = if latencies.is_empty() {
            (0.0, 0.0)
        } else {
            (latencies.iter().sum::<f64>() / latencies.len() as f64, latencies.iter().cloned().fold(0.0, f64::max))
        };
        let lcs: Vec<f64> = honest
            .iter()
            .filter_map(|&v| {
                let (t, round, _) = commit_info[v].get(&h)?;
                let proposed = world.proposals.get(&(h, (*round)?))?;
                Some(t.as_secs_f64() - proposed.as_secs_f64())
            })
            .collect();
        let mean_lc = if lcs.is_empty() { 0.0 } else { lcs.iter().sum::<f64>() / lcs.len() as f64 };
        chain_size += block.size();
        rows.push(MetricsRow {
            period_index: k,
            height: h,
            gas_rate: gas_rate.get(k as usize).copied().unwrap_or(0),
            tx_count: block.transactions().len(),
            mean_lb,
            max_lb,
            mean_lc,
            block_size: block.size(),
            chain_size,
            mempool_depth: commit_info[reference].get(&h).map(|c| c.2).unwrap_or(0),
        });
    }
    rows
}

/// Runs every config, concurrently when `parallel` is set. Results keep the
/// input order.
pub fn sweep(configs: &[ExperimentConfig], parallel: bool) -> Vec<Result<RunResult, ConfigError>> {
    if !parallel {
        return configs.iter().map(run_experiment).collect();
    }
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(configs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunResult, ConfigError>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                *slots[i].lock().expect("unpoisoned") = Some(run_experiment(cfg));
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("unpoisoned").expect("every slot filled")).collect()
}

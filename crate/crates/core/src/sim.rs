//! Deterministic discrete-event network simulation.
//!
//! A [`Sim`] owns a virtual clock, a priority queue of pending events and a
//! seeded RNG. Events fire in `(fire_time, sequence)` order where the
//! sequence number is assigned at insertion, so events scheduled for the same
//! instant run in the order they were scheduled. Given the same network, seed
//! and handler logic, every run produces the same trace.
//!
//! Links are point-to-point with a fixed bandwidth and base delay; a message
//! of `s` bytes takes `base_delay + s / R` to arrive. Delivery to oneself is
//! instantaneous.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::ledger::Transaction;
use crate::time::SimTime;
use crate::types::Digest;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event at {at} is before the current time {now}")]
    SchedulingInPast { at: SimTime, now: SimTime },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("link bandwidth must be positive")]
    ZeroBandwidth,
}

/// A directed link between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkModel {
    /// Bytes per second.
    bandwidth: u64,
    base_delay: SimTime,
    /// Upper bound of an extra uniformly drawn per-message delay.
    jitter: SimTime,
}

impl LinkModel {
    pub fn new(bandwidth: u64, base_delay: SimTime) -> Result<Self, SimError> {
        if bandwidth == 0 {
            return Err(SimError::ZeroBandwidth);
        }
        Ok(LinkModel { bandwidth, base_delay, jitter: SimTime::ZERO })
    }

    pub fn with_jitter(mut self, jitter: SimTime) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn bandwidth(&self) -> u64 {
        self.bandwidth
    }

    pub fn base_delay(&self) -> SimTime {
        self.base_delay
    }

    pub fn jitter(&self) -> SimTime {
        self.jitter
    }
}

/// `base_delay + size / bandwidth`, rounded to the nearest nanosecond.
/// Jitter is not included.
pub fn transmission_delay(size: u64, link: &LinkModel) -> SimTime {
    let bw = link.bandwidth as u128;
    let nanos = (size as u128 * 1_000_000_000 + bw / 2) / bw;
    link.base_delay + SimTime::from_nanos(u64::try_from(nanos).expect("delay overflow"))
}

/// Node set and link table.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: usize,
    default_link: LinkModel,
    overrides: HashMap<(NodeId, NodeId), LinkModel>,
    muted: BTreeSet<NodeId>,
}

impl Network {
    pub fn new(nodes: usize, default_link: LinkModel) -> Self {
        Network { nodes, default_link, overrides: HashMap::new(), muted: BTreeSet::new() }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn default_link(&self) -> LinkModel {
        self.default_link
    }

    pub fn set_link(&mut self, from: NodeId, to: NodeId, link: LinkModel) {
        self.overrides.insert((from, to), link);
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> LinkModel {
        self.overrides.get(&(from, to)).copied().unwrap_or(self.default_link)
    }

    /// A muted node's sends are dropped at the source.
    pub fn mute(&mut self, node: NodeId) {
        self.muted.insert(node);
    }

    pub fn is_muted(&self, node: NodeId) -> bool {
        self.muted.contains(&node)
    }

    fn check(&self, node: NodeId) -> Result<(), SimError> {
        if node < self.nodes {
            Ok(())
        } else {
            Err(SimError::UnknownNode(node))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action<M, K> {
    Deliver { from: NodeId, to: NodeId, msg: M },
    Timer { owner: NodeId, kind: K },
    IssueTx(Transaction),
}

impl<M, K> Action<M, K> {
    fn trace_tag(&self) -> [u8; 17] {
        let mut out = [0u8; 17];
        match self {
            Action::Deliver { from, to, .. } => {
                out[0] = 0;
                out[1..9].copy_from_slice(&(*from as u64).to_be_bytes());
                out[9..].copy_from_slice(&(*to as u64).to_be_bytes());
            }
            Action::Timer { owner, .. } => {
                out[0] = 1;
                out[1..9].copy_from_slice(&(*owner as u64).to_be_bytes());
            }
            Action::IssueTx(tx) => {
                out[0] = 2;
                out[1..9].copy_from_slice(&tx.seq().to_be_bytes());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u64);

#[derive(Debug, Clone)]
pub struct SimEvent<M, K> {
    pub fire_time: SimTime,
    pub sequence: u64,
    pub action: Action<M, K>,
}

struct Queued<M, K>(SimEvent<M, K>);

impl<M, K> PartialEq for Queued<M, K> {
    fn eq(&self, other: &Self) -> bool {
        self.0.sequence == other.0.sequence
    }
}

impl<M, K> Eq for Queued<M, K> {}

impl<M, K> PartialOrd for Queued<M, K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M, K> Ord for Queued<M, K> {
    // BinaryHeap is a max-heap; invert so the earliest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.fire_time, other.0.sequence).cmp(&(self.0.fire_time, self.0.sequence))
    }
}

/// The simulation engine. `M` is the message payload, `K` the timer kind.
pub struct Sim<M, K> {
    now: SimTime,
    next_sequence: u64,
    queue: BinaryHeap<Queued<M, K>>,
    live: HashSet<u64>,
    cancelled: HashSet<u64>,
    network: Network,
    rng: ChaCha8Rng,
    trace: Sha256,
    executed: u64,
}

impl<M: Clone, K> Sim<M, K> {
    pub fn new(network: Network, seed: u64) -> Self {
        Sim {
            now: SimTime::ZERO,
            next_sequence: 0,
            queue: BinaryHeap::new(),
            live: HashSet::new(),
            cancelled: HashSet::new(),
            network,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace: Sha256::new(),
            executed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.network
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Number of events still queued, cancelled ones excluded.
    pub fn pending(&self) -> usize {
        self.live.len()
    }

    pub fn executed(&self) -> u64 {
        self.executed
    }

    /// Running hash over every executed event's time, sequence and endpoints.
    pub fn trace_digest(&self) -> Digest {
        Digest::new(self.trace.clone().finalize().into())
    }

    pub fn schedule(&mut self, at: SimTime, action: Action<M, K>) -> Result<EventId, SimError> {
        if at < self.now {
            return Err(SimError::SchedulingInPast { at, now: self.now });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.live.insert(sequence);
        self.queue.push(Queued(SimEvent { fire_time: at, sequence, action }));
        Ok(EventId(sequence))
    }

    pub fn schedule_after(&mut self, delay: SimTime, action: Action<M, K>) -> EventId {
        let at = self.now + delay;
        self.schedule(at, action).expect("future event")
    }

    /// Cancels a pending event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if !self.live.remove(&id.0) {
            return false;
        }
        self.cancelled.insert(id.0)
    }

    fn sampled_delay(&mut self, size: u64, link: LinkModel) -> SimTime {
        let mut d = transmission_delay(size, &link);
        if link.jitter > SimTime::ZERO {
            d += SimTime::from_nanos(self.rng.random_range(0..=link.jitter.as_nanos()));
        }
        d
    }

    /// Point-to-point send. Returns whether a delivery was scheduled (false
    /// when the sender is muted).
    pub fn send(&mut self, from: NodeId, to: NodeId, msg: M, size: u64) -> Result<bool, SimError> {
        self.network.check(from)?;
        self.network.check(to)?;
        if self.network.is_muted(from) {
            return Ok(false);
        }
        let delay = if from == to {
            SimTime::ZERO
        } else {
            let link = self.network.link(from, to);
            self.sampled_delay(size, link)
        };
        self.schedule_after(delay, Action::Deliver { from, to, msg });
        Ok(true)
    }

    /// Sends `msg` to every node, the sender included. Returns the number of
    /// deliveries scheduled.
    pub fn broadcast(&mut self, from: NodeId, msg: M, size: u64) -> Result<usize, SimError> {
        self.network.check(from)?;
        if self.network.is_muted(from) {
            return Ok(0);
        }
        for to in 0..self.network.nodes {
            self.send(from, to, msg.clone(), size)?;
        }
        Ok(self.network.nodes)
    }

    /// Delivers a message from outside the node set (a client) to `to`
    /// over the default link. The delivery is reported with `from == to`.
    pub fn inject(&mut self, to: NodeId, msg: M, size: u64) -> Result<(), SimError> {
        self.network.check(to)?;
        let link = self.network.default_link;
        let delay = self.sampled_delay(size, link);
        self.schedule_after(delay, Action::Deliver { from: to, to, msg });
        Ok(())
    }

    /// Pops the next event due at or before `until`, advancing the clock to
    /// its fire time.
    pub fn next_event(&mut self, until: SimTime) -> Option<SimEvent<M, K>> {
        loop {
            let head = self.queue.peek()?;
            if head.0.fire_time > until {
                return None;
            }
            let Queued(ev) = self.queue.pop().expect("peeked");
            if self.cancelled.remove(&ev.sequence) {
                continue;
            }
            self.live.remove(&ev.sequence);
            debug_assert!(ev.fire_time >= self.now);
            self.now = ev.fire_time;
            self.executed += 1;
            self.trace.update(ev.fire_time.as_nanos().to_be_bytes());
            self.trace.update(ev.sequence.to_be_bytes());
            self.trace.update(ev.action.trace_tag());
            return Some(ev);
        }
    }

    /// Moves the clock forward without executing anything. Never moves it
    /// backwards.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }

    /// Executes every event with `fire_time <= t` in order, then sets the
    /// clock to `t`. Returns the number of events executed.
    pub fn run_until<F>(&mut self, t: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, SimEvent<M, K>),
    {
        let start = self.executed;
        while let Some(ev) = self.next_event(t) {
            handler(self, ev);
        }
        self.advance_to(t);
        self.executed - start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type TestSim = Sim<u32, u8>;

    fn net(n: usize) -> Network {
        Network::new(n, LinkModel::new(1_000_000, SimTime::ZERO).unwrap())
    }

    #[test]
    fn delay_formula() {
        let l = LinkModel::new(1_000_000, SimTime::ZERO).unwrap();
        assert_eq!(transmission_delay(0, &l), SimTime::ZERO);
        assert_eq!(transmission_delay(1_000_000, &l), SimTime::from_secs(1));
        // (2513 + 128 + 128) bytes at 1 MB/s
        let phases = transmission_delay(2257 + 256, &l) + transmission_delay(128, &l) + transmission_delay(128, &l);
        assert_eq!(phases, SimTime::from_nanos(2_769_000));
        let l = LinkModel::new(3, SimTime::from_millis(5)).unwrap();
        assert_eq!(transmission_delay(1, &l), SimTime::from_nanos(5_000_000 + 333_333_333));
        assert_eq!(LinkModel::new(0, SimTime::ZERO), Err(SimError::ZeroBandwidth));
    }

    #[test]
    fn schedule_at_now_runs_next() {
        let mut s = TestSim::new(net(1), 0);
        s.schedule(SimTime::from_secs(5), Action::Timer { owner: 0, kind: 1 }).unwrap();
        s.schedule(SimTime::ZERO, Action::Timer { owner: 0, kind: 2 }).unwrap();
        let ev = s.next_event(SimTime::MAX).unwrap();
        assert_eq!(ev.action, Action::Timer { owner: 0, kind: 2 });
    }

    #[test]
    fn equal_times_keep_insertion_order() {
        let mut s = TestSim::new(net(1), 0);
        for k in 0..5u8 {
            s.schedule(SimTime::from_secs(1), Action::Timer { owner: 0, kind: k }).unwrap();
        }
        let mut kinds = vec![];
        s.run_until(SimTime::from_secs(2), |_, ev| {
            if let Action::Timer { kind, .. } = ev.action {
                kinds.push(kind);
            }
        });
        assert_eq!(kinds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn past_scheduling_rejected() {
        let mut s = TestSim::new(net(1), 0);
        s.advance_to(SimTime::from_secs(10));
        let err = s.schedule(SimTime::from_secs(9), Action::Timer { owner: 0, kind: 0 });
        assert!(matches!(err, Err(SimError::SchedulingInPast { .. })));
    }

    #[test]
    fn run_until_on_empty_queue_only_advances() {
        let mut s = TestSim::new(net(1), 0);
        assert_eq!(s.run_until(SimTime::from_secs(3), |_, _| {}), 0);
        assert_eq!(s.now(), SimTime::from_secs(3));
        s.advance_to(SimTime::from_secs(1));
        assert_eq!(s.now(), SimTime::from_secs(3));
    }

    #[test]
    fn broadcast_counts_and_self_delivery() {
        let mut s = TestSim::new(net(4), 0);
        assert_eq!(s.broadcast(1, 7, 1000).unwrap(), 4);
        let mut arrivals = vec![];
        s.run_until(SimTime::from_secs(1), |sim, ev| {
            if let Action::Deliver { to, .. } = ev.action {
                arrivals.push((to, sim.now()));
            }
        });
        assert_eq!(arrivals[0], (1, SimTime::ZERO));
        assert!(arrivals[1..].iter().all(|&(_, t)| t == SimTime::from_millis(1)));
        assert_eq!(s.broadcast(9, 7, 1), Err(SimError::UnknownNode(9)));
    }

    #[test]
    fn muted_sender_sends_nothing() {
        let mut n = net(4);
        n.mute(2);
        let mut s = TestSim::new(n, 0);
        assert_eq!(s.broadcast(2, 1, 10).unwrap(), 0);
        assert_eq!(s.pending(), 0);
    }

    #[test]
    fn cancelled_events_do_not_fire() {
        let mut s = TestSim::new(net(1), 0);
        let id = s.schedule(SimTime::from_secs(1), Action::Timer { owner: 0, kind: 0 }).unwrap();
        s.schedule(SimTime::from_secs(2), Action::Timer { owner: 0, kind: 1 }).unwrap();
        assert!(s.cancel(id));
        assert!(!s.cancel(id));
        assert_eq!(s.pending(), 1);
        let mut fired = vec![];
        s.run_until(SimTime::from_secs(5), |_, ev| fired.push(ev.action));
        assert_eq!(fired, vec![Action::Timer { owner: 0, kind: 1 }]);
        assert!(!s.cancel(id));
    }

    #[test]
    fn heterogeneous_links_and_quorum_time() {
        // Node 0 broadcasts to 4 nodes over links of different speed; the
        // time at which 3 of 4 copies have arrived is the 3rd smallest delay.
        let mut n = net(4);
        n.set_link(0, 1, LinkModel::new(500_000, SimTime::ZERO).unwrap());
        n.set_link(0, 2, LinkModel::new(250_000, SimTime::ZERO).unwrap());
        n.set_link(0, 3, LinkModel::new(2_000_000, SimTime::ZERO).unwrap());
        let mut s = TestSim::new(n, 0);
        s.broadcast(0, 0, 1000).unwrap();
        let mut times = vec![];
        s.run_until(SimTime::from_secs(1), |sim, _| times.push(sim.now()));
        // self 0, node3 0.5ms, node1 2ms, node2 4ms
        assert_eq!(
            times,
            vec![SimTime::ZERO, SimTime::from_nanos(500_000), SimTime::from_millis(2), SimTime::from_millis(4)]
        );
        assert_eq!(times[2], SimTime::from_millis(2));
    }

    fn jittery_run(seed: u64) -> (Digest, Vec<(usize, SimTime)>) {
        let link = LinkModel::new(1_000_000, SimTime::ZERO).unwrap().with_jitter(SimTime::from_millis(3));
        let mut s = TestSim::new(Network::new(5, link), seed);
        for from in 0..5 {
            s.broadcast(from, from as u32, 200).unwrap();
        }
        let mut log = vec![];
        s.run_until(SimTime::from_secs(1), |sim, ev| {
            if let Action::Deliver { to, .. } = ev.action {
                log.push((to, sim.now()));
            }
        });
        (s.trace_digest(), log)
    }

    #[test]
    fn identical_seeds_identical_traces() {
        assert_eq!(jittery_run(7), jittery_run(7));
        assert_ne!(jittery_run(7).0, jittery_run(8).0);
    }
}

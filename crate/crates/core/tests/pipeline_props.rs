use custody_core::analytics::max_block_size_closed_form;
use custody_core::experiment::{run_experiment, DescriptionDist, ExperimentConfig, WorkloadSpec};
use custody_core::pipeline::{BlockBuilder, BlockTemplate, Mempool};
use custody_core::{Address, Catalog, ChainParams, Command, Digest, EvidenceId, SimTime, Transaction, HEADER_SIZE};
use proptest::prelude::*;

fn tx(seq: u64, kind: u8, len: usize) -> Transaction {
    let id = EvidenceId::new([seq as u8 | 1; 32]);
    let cmd = match kind % 3 {
        0 => Command::Transfer { id, new_owner: Address::from_index(2) },
        1 => Command::RemoveEvidence { id },
        _ => Command::CreateEvidence { id, description: "d".repeat(len) },
    };
    Transaction::new(seq, Address::from_index(1), cmd, SimTime::from_secs(seq)).unwrap()
}

fn template() -> BlockTemplate {
    BlockTemplate { height: 1, parent: Digest::ZERO, proposer: 0, period_start: SimTime::ZERO }
}

proptest! {
    #[test]
    fn gas_cap_and_fifo_prefix(
        kinds in prop::collection::vec((any::<u8>(), 0usize..=1024), 0..60),
        gas_limit in 0u64..5_000_000,
    ) {
        let mut pool = Mempool::new();
        for (i, (k, len)) in kinds.iter().enumerate() {
            pool.submit(tx(i as u64, *k, *len));
        }
        let built = BlockBuilder::new(gas_limit).build(&pool, template(), None, None);
        let b = &built.block;
        prop_assert!(b.gas_used() <= gas_limit);
        // included transactions are a prefix of the queue
        let pending: Vec<u64> = pool.pending().map(|t| t.seq()).collect();
        let included: Vec<u64> = b.transactions().iter().map(|t| t.seq()).collect();
        prop_assert_eq!(&pending[..included.len()], &included[..]);
        if included.len() < pending.len() {
            let next = pool.pending().nth(included.len()).unwrap();
            prop_assert!(b.gas_used() + next.gas() > gas_limit);
        }
    }

    #[test]
    fn transfer_only_blocks_reach_closed_form_size(k in 0u64..40, r in 0u64..80_502) {
        let g = k * 80_502 + r;
        let mut pool = Mempool::new();
        for i in 0..50 {
            pool.submit(tx(i, 0, 0));
        }
        let b = BlockBuilder::new(g).build(&pool, template(), None, None).block;
        prop_assert_eq!(b.size(), max_block_size_closed_form(g, &Catalog::default(), HEADER_SIZE));
    }
}

#[test]
fn under_capacity_every_tx_lands_in_its_period() {
    let cfg = ExperimentConfig {
        params: ChainParams { gas_limit: 20 * 897_367, ..ChainParams::default() },
        workload: WorkloadSpec::Rate {
            creates: 4,
            transfers: 10,
            removes: 2,
            description: DescriptionDist::Uniform { min: 0, max: 1024 },
        },
        periods: 30,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.committed_txs, r.issued);
    for row in &r.rows {
        assert!(row.max_lb <= 300.0, "{row:?}");
    }
    for block in r.chain.iter().skip(1) {
        for tx in block.transactions() {
            assert_eq!(
                tx.issue_time().period_index(cfg.params.period),
                block.timestamp().period_index(cfg.params.period)
            );
        }
    }
}

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use custody_core::{Address, Command, EvidenceId, LedgerState, SimTime, Transaction};

fn schedule(items: u64) -> Vec<Transaction> {
    let (a, b) = (Address::from_index(1), Address::from_index(2));
    let mut txs = Vec::new();
    for i in 0..items {
        let mut raw = [0u8; 32];
        raw[..8].copy_from_slice(&(i + 1).to_be_bytes());
        let id = EvidenceId::new(raw);
        let cmds = [
            (a, Command::CreateEvidence { id, description: "sample".into() }),
            (a, Command::Transfer { id, new_owner: b }),
            (b, Command::Transfer { id, new_owner: a }),
            (a, Command::RemoveEvidence { id }),
        ];
        for (who, cmd) in cmds {
            let seq = txs.len() as u64;
            txs.push(Transaction::new(seq, who, cmd, SimTime::ZERO).unwrap());
        }
    }
    txs
}

fn apply(c: &mut Criterion) {
    let txs = schedule(1000);
    c.bench_function("apply_4000_txs", |bench| {
        bench.iter_batched(
            LedgerState::new,
            |mut state| {
                for (t, tx) in txs.iter().enumerate() {
                    state.apply_transaction(tx, t as u64);
                }
                state
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, apply);
criterion_main!(benches);

mod common;

use common::naive_ledger::{NaiveLedger, Record};
use custody_core::{Address, Command, EvidenceId, LedgerState, SimTime, Transaction, TxStatus};
use proptest::prelude::*;

fn address(i: u8) -> Address {
    if i == 0 {
        Address::ZERO
    } else {
        Address::from_index(i as u64)
    }
}

fn id(i: u8) -> EvidenceId {
    if i == 0 {
        EvidenceId::ZERO
    } else {
        EvidenceId::new([i; 32])
    }
}

#[derive(Debug, Clone)]
enum Op {
    Create { sender: u8, id: u8, len: usize },
    Transfer { sender: u8, id: u8, to: u8 },
    Remove { sender: u8, id: u8 },
}

fn op() -> impl Strategy<Value = (Op, u64)> {
    let sender = prop_oneof![1 => Just(0u8), 8 => 1u8..4];
    let ident = prop_oneof![1 => Just(0u8), 8 => 1u8..6];
    let len = prop_oneof![Just(0usize), 1usize..40, 1020usize..1030];
    let op = prop_oneof![
        (sender.clone(), ident.clone(), len).prop_map(|(sender, id, len)| Op::Create { sender, id, len }),
        (sender.clone(), ident.clone(), sender.clone()).prop_map(|(sender, id, to)| Op::Transfer { sender, id, to }),
        (sender, ident).prop_map(|(sender, id)| Op::Remove { sender, id }),
    ];
    (op, 0u64..1_000)
}

fn to_tx(seq: u64, op: &Op) -> Option<Transaction> {
    let (sender, cmd) = match *op {
        Op::Create { sender, id: i, len } => {
            (sender, Command::CreateEvidence { id: id(i), description: "é".repeat(len) })
        }
        Op::Transfer { sender, id: i, to } => (sender, Command::Transfer { id: id(i), new_owner: address(to) }),
        Op::Remove { sender, id: i } => (sender, Command::RemoveEvidence { id: id(i) }),
    };
    // descriptions above the limit cannot be priced, hence never become transactions
    Transaction::new(seq, address(sender), cmd, SimTime::ZERO).ok()
}

fn snapshot(state: &LedgerState) -> Vec<Record> {
    state
        .entries()
        .map(|e| Record {
            id: e.id(),
            creator: e.creator(),
            owner: e.owner(),
            description: e.description().to_string(),
            history: e.history().collect(),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_naive_reference(ops in prop::collection::vec(op(), 0..=200)) {
        let mut state = LedgerState::new();
        let mut naive = NaiveLedger::default();
        for (seq, (op, now)) in ops.iter().enumerate() {
            let expected = match *op {
                Op::Create { sender, id: i, len } => naive.create(address(sender), id(i), &"é".repeat(len), *now),
                Op::Transfer { sender, id: i, to } => naive.transfer(address(sender), id(i), address(to), *now),
                Op::Remove { sender, id: i } => naive.remove(address(sender), id(i)),
            };
            match to_tx(seq as u64, op) {
                Some(tx) => {
                    let receipt = state.apply_transaction(&tx, *now);
                    let got = match receipt.status {
                        TxStatus::Succeeded => Ok(()),
                        TxStatus::Reverted(e) => Err(e),
                    };
                    prop_assert_eq!(got, expected);
                    prop_assert_eq!(receipt.gas_charged, tx.gas());
                }
                None => {
                    let Op::Create { sender, id: i, len } = *op else { unreachable!() };
                    prop_assert!(len > 1024);
                    let direct = state.create_evidence(address(sender), id(i), &"é".repeat(len), *now);
                    prop_assert_eq!(direct, expected);
                }
            }
            prop_assert_eq!(snapshot(&state), naive.sorted());
        }
    }

    #[test]
    fn invariants_and_revert_identity(ops in prop::collection::vec(op(), 0..=200)) {
        let mut state = LedgerState::new();
        for (seq, (op, now)) in ops.iter().enumerate() {
            let Some(tx) = to_tx(seq as u64, op) else { continue };
            let before = state.clone();
            let receipt = state.apply_transaction(&tx, *now);
            if !receipt.succeeded() {
                prop_assert_eq!(&state, &before);
            }
            prop_assert!(state.check_invariants());
            for e in state.entries() {
                prop_assert_eq!(e.taddr()[0], e.creator());
                prop_assert_eq!(*e.taddr().last().unwrap(), e.owner());
                prop_assert_eq!(e.taddr().len(), e.ttime().len());
                prop_assert!(e.ttime().windows(2).all(|w| w[0] <= w[1]));
            }
            // only the owner moves evidence, only the creator removes it
            match tx.command() {
                Command::Transfer { id, .. } if receipt.succeeded() => {
                    prop_assert_eq!(before.get_evidence(id).unwrap().owner(), tx.issuer());
                }
                Command::RemoveEvidence { id } if receipt.succeeded() => {
                    prop_assert_eq!(before.get_evidence(id).unwrap().creator(), tx.issuer());
                }
                _ => {}
            }
        }
    }
}

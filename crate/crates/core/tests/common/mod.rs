pub mod naive_ledger;

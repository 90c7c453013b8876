//! Reference custody ledger: a flat list of records searched linearly.

use custody_core::{Address, EvidenceId, LedgerError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: EvidenceId,
    pub creator: Address,
    pub owner: Address,
    pub description: String,
    pub history: Vec<(Address, u64)>,
}

#[derive(Debug, Clone, Default)]
pub struct NaiveLedger {
    pub records: Vec<Record>,
}

impl NaiveLedger {
    fn find(&self, id: EvidenceId) -> Option<usize> {
        self.records.iter().position(|r| r.id == id)
    }

    pub fn create(&mut self, sender: Address, id: EvidenceId, description: &str, now: u64) -> Result<(), LedgerError> {
        if sender == Address::ZERO {
            return Err(LedgerError::InvalidAddress);
        }
        if id == EvidenceId::ZERO {
            return Err(LedgerError::InvalidId);
        }
        let len = description.chars().count();
        if len > 1024 {
            return Err(LedgerError::DescriptionTooLong { len });
        }
        if self.find(id).is_some() {
            return Err(LedgerError::EvidenceAlreadyExists(id));
        }
        self.records.push(Record {
            id,
            creator: sender,
            owner: sender,
            description: description.to_string(),
            history: vec![(sender, now)],
        });
        Ok(())
    }

    pub fn transfer(&mut self, sender: Address, id: EvidenceId, to: Address, now: u64) -> Result<(), LedgerError> {
        let Some(i) = self.find(id) else { return Err(LedgerError::EvidenceNotFound) };
        let r = &mut self.records[i];
        if r.owner != sender {
            return Err(LedgerError::NotOwner);
        }
        if to == Address::ZERO {
            return Err(LedgerError::InvalidAddress);
        }
        let last = r.history.last().unwrap().1;
        r.owner = to;
        r.history.push((to, if now < last { last } else { now }));
        Ok(())
    }

    pub fn remove(&mut self, sender: Address, id: EvidenceId) -> Result<(), LedgerError> {
        let Some(i) = self.find(id) else { return Err(LedgerError::EvidenceNotFound) };
        if self.records[i].creator != sender {
            return Err(LedgerError::NotCreator);
        }
        self.records.remove(i);
        Ok(())
    }

    pub fn sorted(&self) -> Vec<Record> {
        let mut v = self.records.clone();
        v.sort_by_key(|r| r.id);
        v
    }
}

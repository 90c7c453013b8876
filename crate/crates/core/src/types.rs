//! Identifiers shared across the ledger, the store and the consensus engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseIdError {
    #[error("invalid hex: {0}")]
    Hex(#[from] hex::FromHexError),
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
}

macro_rules! fixed_bytes {
    ($(#[$meta:meta])* $name:ident, $len:expr) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(into = "String", try_from = "String")]
        pub struct $name([u8; $len]);

        impl $name {
            pub const LEN: usize = $len;
            pub const ZERO: $name = $name([0u8; $len]);

            pub const fn new(bytes: [u8; $len]) -> Self {
                $name(bytes)
            }

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn is_zero(&self) -> bool {
                self.0 == [0u8; $len]
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(0x{})", stringify!($name), self.to_hex())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl FromStr for $name {
            type Err = ParseIdError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let s = s.strip_prefix("0x").unwrap_or(s);
                let raw = hex::decode(s)?;
                let bytes: [u8; $len] = raw.as_slice().try_into().map_err(|_| {
                    ParseIdError::Length { expected: $len, actual: raw.len() }
                })?;
                Ok($name(bytes))
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.to_hex()
            }
        }

        impl TryFrom<String> for $name {
            type Error = ParseIdError;

            fn try_from(s: String) -> Result<Self, Self::Error> {
                s.parse()
            }
        }
    };
}

fixed_bytes!(
    /// A 20-byte entity identity. The zero address is never a valid identity.
    Address,
    20
);

fixed_bytes!(
    /// A 32-byte evidence identifier. The all-zero id marks "nonexistent".
    EvidenceId,
    32
);

fixed_bytes!(
    /// A 256-bit hash used for block and message digests.
    Digest,
    32
);

impl Address {
    /// Deterministic address for a human-readable name, e.g. `"alice"`.
    pub fn from_name(name: &str) -> Self {
        let h = sha256(&[b"address:", name.as_bytes()]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&h[..20]);
        Address(out)
    }

    /// Address for the `index`-th simulated entity.
    pub fn from_index(index: u64) -> Self {
        let mut out = [0u8; 20];
        out[12..].copy_from_slice(&(index + 1).to_be_bytes());
        Address(out)
    }
}

impl From<Digest> for EvidenceId {
    fn from(d: Digest) -> Self {
        EvidenceId(d.0)
    }
}

/// SHA-256 over the concatenation of `parts`.
pub fn sha256(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

pub fn digest_of(parts: &[&[u8]]) -> Digest {
    Digest(sha256(parts))
}

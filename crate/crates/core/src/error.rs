//! Crate-wide error type.

use crate::index::IndexKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Binary multi-index operation applied across the S0/S1 divide.
    #[error("multi-index kind mismatch: {0:?} vs {1:?}")]
    KindMismatch(IndexKind, IndexKind),

    /// Genus outside the supported range {0, 1}.
    #[error("unsupported genus {0} (supported: 0 and 1)")]
    UnsupportedGenus(i64),

    /// The requested bracket lives on an unstable moduli space.
    #[error("unstable moduli space: genus {genus}, {n} marked points (need 2g-2+n > 0)")]
    Unstable { genus: u8, n: u64 },

    /// Malformed argument (bad index, bad parse, violated precondition).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

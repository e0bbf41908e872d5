use thiserror::Error;

use crate::model::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("preference matrix is invalid: {0}")]
    InvalidMatrix(String),
    #[error("items {0} and {1} are tied (p = 1/2), no strict order exists")]
    NotStrictOrder(ItemId, ItemId),
    #[error("preference relation is cyclic")]
    CyclicPreference,
    #[error("cannot compare item {0} with itself")]
    IdenticalItems(ItemId),
    #[error("item {item} is out of range for {n} items")]
    ItemOutOfRange { item: ItemId, n: usize },
    #[error("k = {k} is out of range for a set of {n} items")]
    KOutOfRange { k: usize, n: usize },
    #[error("item set is empty")]
    EmptySet,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("comparison budget of {0} exceeds the 2^31 cap; tolerance too small")]
    BudgetTooLarge(f64),
    #[error("subset has wrong size: expected {expected}, got {actual}")]
    WrongSize { expected: usize, actual: usize },
    #[error("brute force is limited to {max} items, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("gap of item {0} is zero")]
    ZeroGap(ItemId),
    #[error("no comparisons recorded between items {0} and {1}")]
    MissingPair(ItemId, ItemId),
    #[error("could not draw an instance passing SST/STI after {0} attempts")]
    EnforceFailed(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

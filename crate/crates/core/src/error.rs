use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureIdError {
    #[error("feature name is empty")]
    Empty,
    #[error("feature name {name:?} contains {ch:?}; only [A-Za-z0-9_] is allowed")]
    InvalidChar { name: String, ch: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultisetError {
    #[error("multiplicity overflow (counts are limited to {})", u64::MAX)]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("multiplicity domain is empty")]
    Empty,
    #[error("multiplicity domain {{0}} is not allowed")]
    OnlyZero,
    #[error("progression step must be positive")]
    ZeroStep,
    #[error("range {start}..{end} is empty")]
    EmptyRange { start: u64, end: u64 },
    #[error("multiplicity domain spans more than {limit} values and cannot be normalized")]
    TooLarge { limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("expected a flat multiset, got rank {rank}")]
    NotFlat { rank: usize },
    #[error("unknown features: {}", .0.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(", "))]
    UnknownFeatures(Vec<crate::feature::FeatureId>),
    #[error("unknown group {}", crate::cfd::fmt_group(.0))]
    UnknownGroup(crate::cfd::Group),
    #[error("enumeration would produce {estimate} products, above the limit of {limit}")]
    Explosion { estimate: u128, limit: u64 },
    #[error(transparent)]
    Multiset(#[from] MultisetError),
}

//! Flat and hierarchical multiset semantics of cardinality-based feature
//! diagrams.

pub mod cfd;
pub mod compose;
pub mod domain;
pub mod enumerate;
pub mod error;
pub mod feature;
pub mod flat;
pub mod hier;
pub mod merge;
pub mod multiset;
pub mod random;
pub mod syntax;
pub mod treelike;

pub use cfd::{validate, Cfd, CfdError, CfdParts, Group, Validation, Violation, Warning};
pub use domain::{MultiplicityDomain, Term};
pub use error::{DomainError, FeatureIdError, MultisetError};
pub use feature::{fid, FeatureId};
pub use multiset::HMultiset;
pub use syntax::{cfd, emit_cfd, emit_mset, mset, parse_cfd, parse_cfd_checked, parse_mset, parse_mset_file, ParseDiagnostic, Severity};
pub use enumerate::DEFAULT_LIMIT;
pub use error::SemanticsError;
pub use compose::{compose, ComposeOp, ComposeReport};
pub use merge::{MergeError, MergeInput};

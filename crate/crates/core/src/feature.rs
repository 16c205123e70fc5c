use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::FeatureIdError;

/// A feature name. Features are the urelements of every multiset in this crate.
///
/// Names are non-empty and drawn from `[A-Za-z0-9_]`. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(Arc<str>);

impl FeatureId {
    pub fn new(name: &str) -> Result<Self, FeatureIdError> {
        if name.is_empty() {
            return Err(FeatureIdError::Empty);
        }
        if let Some(bad) = name.chars().find(|c| !is_ident_char(*c)) {
            return Err(FeatureIdError::InvalidChar {
                name: name.to_string(),
                ch: bad,
            });
        }
        Ok(FeatureId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for FeatureId {
    type Err = FeatureIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureId::new(s)
    }
}

impl Borrow<str> for FeatureId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl Serialize for FeatureId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for FeatureId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FeatureId::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for building feature ids from literals known to be valid.
///
/// Panics on an invalid name, so keep it to tests and fixed tables.
pub fn fid(name: &str) -> FeatureId {
    FeatureId::new(name).unwrap_or_else(|e| panic!("invalid feature name {name:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_validated() {
        assert!(FeatureId::new("Vehicle_2").is_ok());
        assert_eq!(FeatureId::new(""), Err(FeatureIdError::Empty));
        assert!(matches!(
            FeatureId::new("a-b"),
            Err(FeatureIdError::InvalidChar { ch: '-', .. })
        ));
    }

    #[test]
    fn equality_is_by_name() {
        assert_eq!(fid("Gear"), FeatureId::new("Gear").unwrap());
        assert_ne!(fid("Gear"), fid("gear"));
    }
}

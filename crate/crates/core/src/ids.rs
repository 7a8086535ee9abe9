use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid namespaced id {0:?}: expected \"namespace:local_id\" with both parts non-empty")]
pub struct IdError(pub String);

/// An identifier qualified by its source vocabulary, rendered as
/// `namespace:local_id` (for example `mesh:D000544` or `sdoh:poverty`).
///
/// Namespaces are stored lowercase. The local part keeps its case, except
/// where a vocabulary is case-insensitive by convention.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NamespacedId {
    namespace: String,
    local_id: String,
}

impl NamespacedId {
    pub fn new(namespace: impl AsRef<str>, local_id: impl Into<String>) -> Result<Self, IdError> {
        let namespace = namespace.as_ref().trim().to_ascii_lowercase();
        let local_id = local_id.into().trim().to_string();
        if namespace.is_empty() || local_id.is_empty() || namespace.contains(':') {
            return Err(IdError(format!("{namespace}:{local_id}")));
        }
        Ok(Self { namespace, local_id })
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    pub fn local_id(&self) -> &str {
        &self.local_id
    }

    pub fn sdoh_entity(surface: &str) -> Self {
        Self::new(ns::SDOH, normalize_surface(surface)).expect("non-empty surface")
    }

    pub fn sdoh_subtype(name: &str) -> Self {
        Self::new(ns::SDOH_SUBTYPE, name).expect("non-empty subtype")
    }

    pub fn sdoh_type(name: &str) -> Self {
        Self::new(ns::SDOH_TYPE, name).expect("non-empty type")
    }
}

/// Well-known namespace names.
pub mod ns {
    pub const MESH: &str = "mesh";
    pub const OMIM: &str = "omim";
    pub const NCBIGENE: &str = "ncbigene";
    pub const NCBITAXON: &str = "ncbitaxon";
    pub const MONDO: &str = "mondo";
    pub const DRUGBANK: &str = "drugbank";
    pub const UMLS: &str = "umls";
    pub const SDOH: &str = "sdoh";
    pub const SDOH_SUBTYPE: &str = "sdoh_subtype";
    pub const SDOH_TYPE: &str = "sdoh_type";
}

/// Lowercases and collapses internal whitespace.
pub fn normalize_surface(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl fmt::Display for NamespacedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.namespace, self.local_id)
    }
}

impl FromStr for NamespacedId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ns, local) = s.split_once(':').ok_or_else(|| IdError(s.to_string()))?;
        Self::new(ns, local).map_err(|_| IdError(s.to_string()))
    }
}

impl Serialize for NamespacedId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NamespacedId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

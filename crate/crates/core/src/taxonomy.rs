//! The SDoH type/subtype taxonomy (Healthy People 2030 by default).
//!
//! Taxonomy files are JSON objects mapping each type name to its list of
//! subtype names.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

static HP2030: &str = include_str!("../data/hp2030_v1.json");

/// Number of primary types in the Healthy People 2030 framework.
pub const EXPECTED_TYPE_COUNT: usize = 5;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid taxonomy JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdohType {
    pub name: String,
    pub subtypes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdohTaxonomy {
    types: Vec<SdohType>,
    by_subtype: HashMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TypeCount { found: usize },
    DuplicateSubtype(String),
    EmptyName,
    NoSubtypes(String),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TypeCount { found } => {
                write!(f, "type count != {EXPECTED_TYPE_COUNT} (found {found})")
            }
            Violation::DuplicateSubtype(s) => write!(f, "duplicate subtype {s:?}"),
            Violation::EmptyName => write!(f, "empty type or subtype name"),
            Violation::NoSubtypes(t) => write!(f, "type {t:?} has no subtypes"),
        }
    }
}

impl SdohTaxonomy {
    pub fn new(types: Vec<SdohType>) -> Self {
        let mut by_subtype = HashMap::new();
        for (ti, t) in types.iter().enumerate() {
            for (si, s) in t.subtypes.iter().enumerate() {
                by_subtype.entry(s.to_lowercase()).or_insert((ti, si));
            }
        }
        Self { types, by_subtype }
    }

    /// Parses the `{type: [subtypes...]}` JSON layout, keeping file order.
    pub fn from_json(json: &str) -> Result<Self, TaxonomyError> {
        let raw: serde_json::Map<String, serde_json::Value> = serde_json::from_str(json)?;
        let mut types = Vec::with_capacity(raw.len());
        for (name, subtypes) in raw {
            let subtypes: Vec<String> = serde_json::from_value(subtypes)?;
            types.push(SdohType { name, subtypes });
        }
        Ok(Self::new(types))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The bundled Healthy People 2030 taxonomy.
    pub fn healthy_people_2030() -> &'static SdohTaxonomy {
        static TAX: OnceLock<SdohTaxonomy> = OnceLock::new();
        TAX.get_or_init(|| SdohTaxonomy::from_json(HP2030).expect("bundled taxonomy parses"))
    }

    pub fn to_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .types
            .iter()
            .map(|t| (t.name.clone(), serde_json::json!(t.subtypes)))
            .collect();
        serde_json::to_string_pretty(&map).expect("taxonomy serializes")
    }

    pub fn types(&self) -> &[SdohType] {
        &self.types
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(|t| t.name.as_str())
    }

    pub fn subtype_count(&self) -> usize {
        self.types.iter().map(|t| t.subtypes.len()).sum()
    }

    pub fn subtypes_of(&self, type_name: &str) -> Option<&[String]> {
        self.types
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(type_name))
            .map(|t| t.subtypes.as_slice())
    }

    /// Canonical spelling of a type name, matched case-insensitively.
    pub fn canonical_type(&self, name: &str) -> Option<&str> {
        let name = name.trim();
        self.types
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
            .map(|t| t.name.as_str())
    }

    /// Case-insensitive exact lookup of a subtype; returns canonical
    /// `(type, subtype)` names.
    pub fn lookup_subtype(&self, name: &str) -> Option<(&str, &str)> {
        let &(ti, si) = self.by_subtype.get(&name.trim().to_lowercase())?;
        let t = &self.types[ti];
        Some((t.name.as_str(), t.subtypes[si].as_str()))
    }

    /// True when `subtype` is listed under `type_name`.
    pub fn is_valid_pair(&self, type_name: &str, subtype: &str) -> bool {
        matches!(self.lookup_subtype(subtype), Some((t, _)) if t == type_name)
    }
}

pub fn validate_taxonomy(t: &SdohTaxonomy) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if t.types.len() != EXPECTED_TYPE_COUNT {
        violations.push(Violation::TypeCount { found: t.types.len() });
    }
    let mut seen = std::collections::HashSet::new();
    for ty in &t.types {
        if ty.name.trim().is_empty() {
            violations.push(Violation::EmptyName);
        }
        if ty.subtypes.is_empty() {
            violations.push(Violation::NoSubtypes(ty.name.clone()));
        }
        for s in &ty.subtypes {
            if s.trim().is_empty() {
                violations.push(Violation::EmptyName);
            } else if !seen.insert(s.to_lowercase()) {
                violations.push(Violation::DuplicateSubtype(s.clone()));
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp() -> &'static SdohTaxonomy {
        SdohTaxonomy::healthy_people_2030()
    }

    #[test]
    fn bundled_taxonomy_shape() {
        let t = hp();
        assert_eq!(validate_taxonomy(t), Ok(()));
        assert_eq!(
            t.type_names().collect::<Vec<_>>(),
            [
                "Economic Stability",
                "Education Access and Quality",
                "Health Care Access and Quality",
                "Neighborhood and Built Environment",
                "Social and Community Context",
            ]
        );
        let counts: Vec<_> = t.types().iter().map(|t| t.subtypes.len()).collect();
        assert_eq!(counts, [4, 4, 3, 4, 4]);
        assert_eq!(t.subtype_count(), 19);
    }

    #[test]
    fn lookup() {
        let t = hp();
        assert_eq!(
            t.lookup_subtype("Food Insecurity"),
            Some(("Economic Stability", "Food Insecurity"))
        );
        assert_eq!(
            t.lookup_subtype("food insecurity"),
            Some(("Economic Stability", "Food Insecurity"))
        );
        assert_eq!(t.lookup_subtype("Astrophysics"), None);
        assert_eq!(t.lookup_subtype("Food"), None);
        assert!(t.is_valid_pair("Health Care Access and Quality", "Health Literacy"));
        assert!(!t.is_valid_pair("Economic Stability", "Health Literacy"));
    }

    #[test]
    fn lookup_matches_data_file_exactly() {
        let raw: serde_json::Map<String, serde_json::Value> = serde_json::from_str(HP2030).unwrap();
        let names: Vec<String> = raw
            .values()
            .flat_map(|v| v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_lowercase()))
            .collect();
        for n in &names {
            assert!(hp().lookup_subtype(&n.to_uppercase()).is_some());
        }
        for miss in ["", "employ", "poverty line", "crime", "housing"] {
            assert!(!names.contains(&miss.to_string()));
            assert!(hp().lookup_subtype(miss).is_none());
        }
    }

    #[test]
    fn four_types_violation() {
        let mut types = hp().types().to_vec();
        types.pop();
        let v = validate_taxonomy(&SdohTaxonomy::new(types)).unwrap_err();
        assert_eq!(v, [Violation::TypeCount { found: 4 }]);
        assert_eq!(v[0].to_string(), "type count != 5 (found 4)");
    }

    #[test]
    fn duplicate_subtype_violation() {
        let mut types = hp().types().to_vec();
        types[1].subtypes.push("Poverty".into());
        let v = validate_taxonomy(&SdohTaxonomy::new(types)).unwrap_err();
        assert_eq!(v, [Violation::DuplicateSubtype("Poverty".into())]);
    }

    #[test]
    fn json_round_trip_keeps_order() {
        let again = SdohTaxonomy::from_json(&hp().to_json()).unwrap();
        assert_eq!(&again, hp());
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Attribute, AttributeValue, GroupPair, RawCase};
use crate::error::{Error, Result};

pub const DEFAULT_MAPPING_TOML: &str = include_str!("../../mappings/default.toml");

const IGNORED: &str = "ignored";

/// What a present-but-unlisted raw value becomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unmapped {
    #[default]
    Missing,
    Ignored,
}

/// Raw-string vocabulary for one categorical protected attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub group0: String,
    pub group1: String,
    #[serde(default)]
    pub unmapped: Unmapped,
    #[serde(default)]
    pub notes: String,
    /// Normalized raw value → group label or "Ignored".
    #[serde(default)]
    pub values: BTreeMap<String, String>,
}

impl AttributeSpec {
    pub fn classify(&self, raw: Option<&str>) -> AttributeValue {
        let Some(raw) = raw.map(normalize).filter(|s| !s.is_empty()) else {
            return AttributeValue::Missing;
        };
        match self.values.get(&raw) {
            Some(target) if target.eq_ignore_ascii_case(IGNORED) => AttributeValue::Ignored,
            Some(target) => AttributeValue::Group(target.clone()),
            None => match self.unmapped {
                Unmapped::Missing => AttributeValue::Missing,
                Unmapped::Ignored => AttributeValue::Ignored,
            },
        }
    }

    fn normalized(self, name: &str) -> Result<Self> {
        if self.group0.trim().is_empty() || self.group1.trim().is_empty() {
            return Err(Error::Mapping(format!("{name}: group labels must be nonempty")));
        }
        if self.group0 == self.group1 {
            return Err(Error::Mapping(format!("{name}: group0 and group1 are both {:?}", self.group0)));
        }
        let mut values = BTreeMap::new();
        for (raw, target) in self.values {
            let target_ok = target == self.group0
                || target == self.group1
                || target.eq_ignore_ascii_case(IGNORED);
            if !target_ok {
                return Err(Error::Mapping(format!(
                    "{name}: value {raw:?} maps to {target:?}, expected {:?}, {:?} or \"Ignored\"",
                    self.group0, self.group1
                )));
            }
            let key = normalize(&raw);
            if let Some(prev) = values.insert(key.clone(), target.clone()) {
                if prev != target {
                    return Err(Error::Mapping(format!(
                        "{name}: raw value {key:?} is mapped to both {prev:?} and {target:?}"
                    )));
                }
            }
        }
        Ok(AttributeSpec { values, ..self })
    }
}

/// Age banding. Ages below `min_age` are ignored; `min_age..older_from`
/// is group1 (Adult) and `older_from..` is group0 (Older).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeSpec {
    pub group0: String,
    pub group1: String,
    pub min_age: u32,
    pub older_from: u32,
    #[serde(default)]
    pub notes: String,
}

impl AgeSpec {
    pub fn classify(&self, age_years: Option<u32>) -> AttributeValue {
        match age_years {
            None => AttributeValue::Missing,
            Some(age) if age < self.min_age => AttributeValue::Ignored,
            Some(age) if age < self.older_from => AttributeValue::Group(self.group1.clone()),
            Some(_) => AttributeValue::Group(self.group0.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub sex: AttributeSpec,
    pub age: AgeSpec,
    pub race: AttributeSpec,
    pub ses: AttributeSpec,
}

impl MappingSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: MappingSpec = toml::from_str(text).map_err(|e| Error::Mapping(e.to_string()))?;
        spec.validated()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validated(self) -> Result<Self> {
        if self.age.group0 == self.age.group1 {
            return Err(Error::Mapping("age: group0 and group1 must differ".into()));
        }
        if self.age.min_age > self.age.older_from {
            return Err(Error::Mapping(format!(
                "age: min_age {} exceeds older_from {}",
                self.age.min_age, self.age.older_from
            )));
        }
        Ok(MappingSpec {
            sex: self.sex.normalized("sex")?,
            age: self.age,
            race: self.race.normalized("race")?,
            ses: self.ses.normalized("ses")?,
        })
    }

    pub fn groups(&self, attribute: Attribute) -> GroupPair {
        let (g0, g1) = match attribute {
            Attribute::Sex => (&self.sex.group0, &self.sex.group1),
            Attribute::Age => (&self.age.group0, &self.age.group1),
            Attribute::Race => (&self.race.group0, &self.race.group1),
            Attribute::Ses => (&self.ses.group0, &self.ses.group1),
        };
        GroupPair::new(g0.clone(), g1.clone())
    }
}

impl Default for MappingSpec {
    fn default() -> Self {
        MappingSpec::from_toml_str(DEFAULT_MAPPING_TOML).expect("bundled mapping is valid")
    }
}

/// Which date ages are computed at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceDatePolicy {
    /// Each case's own review date.
    #[default]
    ReviewDate,
    /// One fixed date for every case.
    Fixed(NaiveDate),
}

impl ReferenceDatePolicy {
    pub fn date_for(self, raw: &RawCase) -> NaiveDate {
        match self {
            ReferenceDatePolicy::ReviewDate => raw.reference_date,
            ReferenceDatePolicy::Fixed(date) => date,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedAttributes {
    pub sex: AttributeValue,
    pub age_group: AttributeValue,
    pub race: AttributeValue,
    pub ses: AttributeValue,
}

pub fn derive_attributes(
    raw: &RawCase,
    mapping: &MappingSpec,
    policy: ReferenceDatePolicy,
) -> DerivedAttributes {
    let reference = policy.date_for(raw);
    let age = raw.birth_date.and_then(|birth| reference.years_since(birth));
    DerivedAttributes {
        sex: mapping.sex.classify(raw.sex_raw.as_deref()),
        age_group: mapping.age.classify(age),
        race: mapping.race.classify(raw.race_raw.as_deref()),
        ses: mapping.ses.classify(raw.payer_lob_raw.as_deref()),
    }
}

fn normalize(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

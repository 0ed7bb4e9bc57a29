//! Case ingestion, protected-attribute standardization and cohort diagnostics.
//!
//! A [`Cohort`] is an ordered set of [`DerivedCase`]s together with the group
//! labels used for every binary comparison. Cohorts produced by the loaders
//! are frozen: once frozen, appending or relabeling cases is rejected.

mod diagnostics;
mod io;
mod mapping;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use diagnostics::{
    describe, protocol_diagnostics, AttributeFrequencies, CohortDescription, FrequencyRow,
    ProtocolDiagnostics, ProtocolDistribution, ProtocolOverlap,
};
pub use io::{
    load_cohort, load_cohort_files, read_raw_cases, write_csv, write_jsonl, InputFormat, Loaded,
    Rejection,
};
pub use mapping::{
    derive_attributes, AgeSpec, AttributeSpec, DerivedAttributes, MappingSpec, ReferenceDatePolicy,
    Unmapped, DEFAULT_MAPPING_TOML,
};

/// The four protected attributes compared by the audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Sex,
    Age,
    Race,
    Ses,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [Attribute::Sex, Attribute::Age, Attribute::Race, Attribute::Ses];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Sex => "sex",
            Attribute::Age => "age",
            Attribute::Race => "race",
            Attribute::Ses => "ses",
        }
    }

    /// Label used in report tables ("Sex", "Age", "Race", "SES").
    pub fn title(self) -> &'static str {
        match self {
            Attribute::Sex => "Sex",
            Attribute::Age => "Age",
            Attribute::Race => "Race",
            Attribute::Ses => "SES",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sex" => Ok(Attribute::Sex),
            "age" | "age_group" => Ok(Attribute::Age),
            "race" | "race_ethnicity" => Ok(Attribute::Race),
            "ses" | "payer" | "payer_lob" => Ok(Attribute::Ses),
            _ => Err(Error::UnknownAttribute(s.to_string())),
        }
    }
}

/// Reviewer adjudication of the automated recommendation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReviewOutcome {
    CorrectApproval,
    FalseApproval,
    CorrectEscalation,
    UnnecessaryEscalation,
}

impl ReviewOutcome {
    pub const ALL: [ReviewOutcome; 4] = [
        ReviewOutcome::CorrectApproval,
        ReviewOutcome::FalseApproval,
        ReviewOutcome::CorrectEscalation,
        ReviewOutcome::UnnecessaryEscalation,
    ];

    /// A case counts as a model error when the automation approved something
    /// the reviewer escalated, or escalated something the reviewer approved.
    pub fn is_error(self) -> bool {
        matches!(
            self,
            ReviewOutcome::FalseApproval | ReviewOutcome::UnnecessaryEscalation
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReviewOutcome::CorrectApproval => "CorrectApproval",
            ReviewOutcome::FalseApproval => "FalseApproval",
            ReviewOutcome::CorrectEscalation => "CorrectEscalation",
            ReviewOutcome::UnnecessaryEscalation => "UnnecessaryEscalation",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ReviewOutcome::CorrectApproval => "Correct approval",
            ReviewOutcome::FalseApproval => "False approval",
            ReviewOutcome::CorrectEscalation => "Correct escalation",
            ReviewOutcome::UnnecessaryEscalation => "Unnecessary escalation",
        }
    }
}

impl fmt::Display for ReviewOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReviewOutcome {
    type Err = Error;

    /// Accepts the canonical names plus spaced, snake- or kebab-cased
    /// variants ("False approval", "false_approval", "incorrect approval").
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "correctapproval" => Ok(ReviewOutcome::CorrectApproval),
            "falseapproval" | "incorrectapproval" | "incorrectfalseapproval" => {
                Ok(ReviewOutcome::FalseApproval)
            }
            "correctescalation" => Ok(ReviewOutcome::CorrectEscalation),
            "unnecessaryescalation" => Ok(ReviewOutcome::UnnecessaryEscalation),
            _ => Err(Error::Input(format!("unknown review_outcome {s:?}"))),
        }
    }
}

/// One ingested case exactly as exported, before standardization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawCase {
    pub case_id: String,
    pub protocol_id: String,
    pub review_outcome: ReviewOutcome,
    pub sex_raw: Option<String>,
    pub birth_date: Option<NaiveDate>,
    /// Date the case was reviewed.
    pub reference_date: NaiveDate,
    pub race_raw: Option<String>,
    pub payer_lob_raw: Option<String>,
}

/// Standardized state of one protected attribute for one case.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttributeValue {
    Group(String),
    /// Present but deliberately excluded (e.g. Medicare for SES, age ≤ 21).
    Ignored,
    /// Absent or not recognised.
    Missing,
}

impl AttributeValue {
    pub fn group(&self) -> Option<&str> {
        match self {
            AttributeValue::Group(label) => Some(label),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedCase {
    pub case_id: String,
    pub protocol_id: String,
    pub outcome: ReviewOutcome,
    pub error: bool,
    pub sex: AttributeValue,
    pub age_group: AttributeValue,
    pub race: AttributeValue,
    pub ses: AttributeValue,
}

impl DerivedCase {
    pub fn from_raw(raw: &RawCase, mapping: &MappingSpec, policy: ReferenceDatePolicy) -> Self {
        let attrs = derive_attributes(raw, mapping, policy);
        DerivedCase {
            case_id: raw.case_id.clone(),
            protocol_id: raw.protocol_id.clone(),
            outcome: raw.review_outcome,
            error: raw.review_outcome.is_error(),
            sex: attrs.sex,
            age_group: attrs.age_group,
            race: attrs.race,
            ses: attrs.ses,
        }
    }

    pub fn attribute(&self, attribute: Attribute) -> &AttributeValue {
        match attribute {
            Attribute::Sex => &self.sex,
            Attribute::Age => &self.age_group,
            Attribute::Race => &self.race,
            Attribute::Ses => &self.ses,
        }
    }
}

/// Ordered pair of group labels for a binary comparison. Disparities are
/// always reported as `rate(group1) - rate(group0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupPair {
    pub group0: String,
    pub group1: String,
}

impl GroupPair {
    pub fn new(group0: impl Into<String>, group1: impl Into<String>) -> Self {
        GroupPair {
            group0: group0.into(),
            group1: group1.into(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        if label == self.group0 {
            Some(0)
        } else if label == self.group1 {
            Some(1)
        } else {
            None
        }
    }

    pub fn label(&self, index: usize) -> &str {
        if index == 0 {
            &self.group0
        } else {
            &self.group1
        }
    }

    pub fn swapped(&self) -> Self {
        GroupPair::new(self.group1.clone(), self.group0.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLabels(BTreeMap<Attribute, GroupPair>);

impl GroupLabels {
    pub fn get(&self, attribute: Attribute) -> &GroupPair {
        &self.0[&attribute]
    }

    pub fn with(mut self, attribute: Attribute, pair: GroupPair) -> Self {
        self.0.insert(attribute, pair);
        self
    }
}

impl From<&MappingSpec> for GroupLabels {
    fn from(mapping: &MappingSpec) -> Self {
        GroupLabels(
            Attribute::ALL
                .iter()
                .map(|&a| (a, mapping.groups(a)))
                .collect(),
        )
    }
}

impl Default for GroupLabels {
    fn default() -> Self {
        GroupLabels::from(&MappingSpec::default())
    }
}

#[derive(Clone, Debug)]
pub struct Cohort {
    cases: Vec<DerivedCase>,
    protocol_index: BTreeMap<String, Vec<usize>>,
    ids: HashSet<String>,
    labels: GroupLabels,
    frozen: bool,
}

impl Cohort {
    /// An empty, mutable cohort.
    pub fn new(labels: GroupLabels) -> Self {
        Cohort {
            cases: Vec::new(),
            protocol_index: BTreeMap::new(),
            ids: HashSet::new(),
            labels,
            frozen: false,
        }
    }

    pub fn from_cases(
        labels: GroupLabels,
        cases: impl IntoIterator<Item = DerivedCase>,
    ) -> Result<Self> {
        let mut cohort = Cohort::new(labels);
        for case in cases {
            cohort.push(case)?;
        }
        cohort.freeze();
        Ok(cohort)
    }

    pub fn push(&mut self, case: DerivedCase) -> Result<()> {
        if self.frozen {
            return Err(Error::Frozen("append"));
        }
        if case.case_id.is_empty() {
            return Err(Error::Input("empty case_id".into()));
        }
        if !self.ids.insert(case.case_id.clone()) {
            return Err(Error::DuplicateCaseId {
                case_id: case.case_id,
                row: self.cases.len() + 1,
            });
        }
        self.protocol_index
            .entry(case.protocol_id.clone())
            .or_default()
            .push(self.cases.len());
        self.cases.push(case);
        Ok(())
    }

    /// Replace the adjudication of an existing case.
    pub fn relabel(&mut self, case_id: &str, outcome: ReviewOutcome) -> Result<()> {
        if self.frozen {
            return Err(Error::Frozen("relabel"));
        }
        let case = self
            .cases
            .iter_mut()
            .find(|c| c.case_id == case_id)
            .ok_or_else(|| Error::Input(format!("no case with id {case_id:?}")))?;
        case.outcome = outcome;
        case.error = outcome.is_error();
        Ok(())
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn cases(&self) -> &[DerivedCase] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn labels(&self) -> &GroupLabels {
        &self.labels
    }

    pub fn groups(&self, attribute: Attribute) -> &GroupPair {
        self.labels.get(attribute)
    }

    /// Protocol id → positions of its cases, in cohort order.
    pub fn protocol_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.protocol_index
    }

    /// Index of the case's group for `attribute`, if it belongs to one of
    /// the two configured groups.
    pub fn group_of(&self, case: &DerivedCase, attribute: Attribute) -> Option<usize> {
        case.attribute(attribute)
            .group()
            .and_then(|label| self.labels.get(attribute).index_of(label))
    }

    /// Cases whose state for `attribute` is one of the two comparison
    /// groups, in their original order. The result is frozen.
    pub fn subcohort(&self, attribute: Attribute) -> Cohort {
        self.filtered(|c| self.group_of(c, attribute).is_some())
    }

    pub fn attribute_subcohort(&self, attribute: &str) -> Result<Cohort> {
        Ok(self.subcohort(attribute.parse()?))
    }

    /// Same cases with the comparison order of `attribute` reversed.
    pub fn with_swapped_groups(&self, attribute: Attribute) -> Cohort {
        let mut out = self.clone();
        let pair = out.labels.get(attribute).swapped();
        out.labels = out.labels.with(attribute, pair);
        out
    }

    pub(crate) fn filtered(&self, keep: impl Fn(&DerivedCase) -> bool) -> Cohort {
        let mut out = Cohort::new(self.labels.clone());
        for case in self.cases.iter().filter(|c| keep(c)) {
            out.protocol_index
                .entry(case.protocol_id.clone())
                .or_default()
                .push(out.cases.len());
            out.ids.insert(case.case_id.clone());
            out.cases.push(case.clone());
        }
        out.frozen = true;
        out
    }
}

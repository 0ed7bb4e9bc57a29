use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Attribute, AttributeValue, Cohort, ReviewOutcome};
use crate::numeric::{percent_one_decimal, quantile_sorted};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub category: String,
    pub count: usize,
    /// Percent of the whole cohort, rounded half-up to one decimal.
    pub percent: f64,
}

impl FrequencyRow {
    fn new(category: impl Into<String>, count: usize, total: usize) -> Self {
        FrequencyRow {
            category: category.into(),
            count,
            percent: percent_one_decimal(count, total),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeFrequencies {
    pub attribute: Attribute,
    /// group1, group0, Ignored, Missing, in that order.
    pub rows: Vec<FrequencyRow>,
}

impl AttributeFrequencies {
    pub fn count(&self, category: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.category == category).map(|r| r.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortDescription {
    pub total: usize,
    pub attributes: Vec<AttributeFrequencies>,
    pub outcomes: Vec<FrequencyRow>,
}

impl CohortDescription {
    pub fn attribute(&self, attribute: Attribute) -> &AttributeFrequencies {
        self.attributes
            .iter()
            .find(|a| a.attribute == attribute)
            .expect("every attribute is described")
    }
}

pub fn describe(cohort: &Cohort) -> CohortDescription {
    let total = cohort.len();
    let attributes = Attribute::ALL
        .iter()
        .map(|&attribute| {
            let pair = cohort.groups(attribute);
            let mut counts = [0usize; 4];
            for case in cohort.cases() {
                let slot = match case.attribute(attribute) {
                    AttributeValue::Ignored => 2,
                    AttributeValue::Missing => 3,
                    AttributeValue::Group(label) => match pair.index_of(label) {
                        Some(1) => 0,
                        Some(_) => 1,
                        // A label outside the configured pair cannot enter a comparison.
                        None => 2,
                    },
                };
                counts[slot] += 1;
            }
            let labels = [pair.group1.as_str(), pair.group0.as_str(), "Ignored", "Missing"];
            AttributeFrequencies {
                attribute,
                rows: labels
                    .iter()
                    .zip(counts)
                    .map(|(label, n)| FrequencyRow::new(*label, n, total))
                    .collect(),
            }
        })
        .collect();
    let outcomes = ReviewOutcome::ALL
        .iter()
        .map(|&o| {
            let n = cohort.cases().iter().filter(|c| c.outcome == o).count();
            FrequencyRow::new(o.title(), n, total)
        })
        .collect();
    CohortDescription {
        total,
        attributes,
        outcomes,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOverlap {
    pub attribute: Attribute,
    /// Protocols with at least one case from each comparison group.
    pub protocols_with_overlap: usize,
    /// Protocols with at least one case in either comparison group.
    pub valid_protocols: usize,
    /// `protocols_with_overlap / valid_protocols`, 0 when nothing is valid.
    pub overlap_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDistribution {
    pub distinct_protocols: usize,
    pub median_cases: f64,
    pub iqr: (f64, f64),
    /// Fraction of all cases falling in the five largest protocols.
    pub top5_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDiagnostics {
    pub overlap: ProtocolOverlap,
    pub distribution: ProtocolDistribution,
}

pub fn protocol_diagnostics(cohort: &Cohort, attribute: Attribute) -> ProtocolDiagnostics {
    let mut seen: BTreeMap<&str, [bool; 2]> = BTreeMap::new();
    for case in cohort.cases() {
        if let Some(g) = cohort.group_of(case, attribute) {
            seen.entry(case.protocol_id.as_str()).or_default()[g] = true;
        }
    }
    let valid_protocols = seen.len();
    let protocols_with_overlap = seen.values().filter(|s| s[0] && s[1]).count();
    let overlap_rate = if valid_protocols == 0 {
        0.0
    } else {
        protocols_with_overlap as f64 / valid_protocols as f64
    };
    ProtocolDiagnostics {
        overlap: ProtocolOverlap {
            attribute,
            protocols_with_overlap,
            valid_protocols,
            overlap_rate,
        },
        distribution: protocol_distribution(cohort),
    }
}

fn protocol_distribution(cohort: &Cohort) -> ProtocolDistribution {
    let mut sizes: Vec<f64> = cohort
        .protocol_index()
        .values()
        .map(|rows| rows.len() as f64)
        .collect();
    if sizes.is_empty() {
        return ProtocolDistribution {
            distinct_protocols: 0,
            median_cases: 0.0,
            iqr: (0.0, 0.0),
            top5_share: 0.0,
        };
    }
    sizes.sort_by(f64::total_cmp);
    let top5: f64 = sizes.iter().rev().take(5).sum();
    ProtocolDistribution {
        distinct_protocols: sizes.len(),
        median_cases: quantile_sorted(&sizes, 0.5),
        iqr: (quantile_sorted(&sizes, 0.25), quantile_sorted(&sizes, 0.75)),
        top5_share: top5 / cohort.len() as f64,
    }
}

//! Synthetic cohorts with a known, injected error-rate disparity.
//!
//! Cases are produced as raw records using vocabulary understood by the
//! default mapping, then derived through the normal ingestion path, so a
//! generated cohort can also be written out and reloaded.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use chrono::{Days, Months, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{
    Attribute, Cohort, DerivedCase, GroupLabels, MappingSpec, RawCase, ReferenceDatePolicy,
    ReviewOutcome,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub id: String,
    pub weight: f64,
    pub base_error_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeConfig {
    /// Share of group1 among cases that belong to either group.
    pub group1_share: f64,
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub ignored_rate: f64,
    /// Per-protocol override of `group1_share` (sampled allocation only).
    #[serde(default)]
    pub protocol_group1_share: BTreeMap<String, f64>,
}

impl AttributeConfig {
    pub fn new(group1_share: f64, missing_rate: f64, ignored_rate: f64) -> Self {
        AttributeConfig {
            group1_share,
            missing_rate,
            ignored_rate,
            protocol_group1_share: BTreeMap::new(),
        }
    }

    fn share_in(&self, protocol: &str) -> f64 {
        self.protocol_group1_share
            .get(protocol)
            .copied()
            .unwrap_or(self.group1_share)
    }
}

/// How protocol and attribute states are assigned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    /// Every case draws independently.
    #[default]
    Sampled,
    /// Counts are fixed by largest-remainder rounding of `rate × n` and
    /// then shuffled; only the error bits remain random.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_cases: usize,
    pub protocols: Vec<ProtocolSpec>,
    /// Attributes not listed are Missing for every case.
    #[serde(default)]
    pub attributes: BTreeMap<Attribute, AttributeConfig>,
    pub target_attribute: Attribute,
    /// Added to the error probability of `target_attribute`'s group1.
    pub injected_disparity: f64,
    pub seed: u64,
    #[serde(default)]
    pub allocation: Allocation,
}

impl SynthSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.protocols.is_empty() {
            return bad("at least one protocol is required".into());
        }
        let mut ids = HashSet::new();
        for p in &self.protocols {
            if !ids.insert(p.id.as_str()) {
                return bad(format!("protocol {:?} listed twice", p.id));
            }
            if !(0.0..=1.0).contains(&p.weight) || !(0.0..=1.0).contains(&p.base_error_rate) {
                return bad(format!("protocol {:?}: weight and base rate must lie in [0, 1]", p.id));
            }
            let shifted = p.base_error_rate + self.injected_disparity;
            if !(0.0..=1.0).contains(&shifted) {
                return bad(format!(
                    "protocol {:?}: base rate {} + disparity {} leaves [0, 1]",
                    p.id, p.base_error_rate, self.injected_disparity
                ));
            }
        }
        let total: f64 = self.protocols.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("protocol weights sum to {total}, not 1"));
        }
        for (attribute, cfg) in &self.attributes {
            let probs = [cfg.group1_share, cfg.missing_rate, cfg.ignored_rate];
            if probs.iter().chain(cfg.protocol_group1_share.values()).any(|p| !(0.0..=1.0).contains(p)) {
                return bad(format!("{attribute}: rates must lie in [0, 1]"));
            }
            if cfg.missing_rate + cfg.ignored_rate > 1.0 + 1e-12 {
                return bad(format!("{attribute}: missing + ignored rates exceed 1"));
            }
            if let Some(unknown) = cfg.protocol_group1_share.keys().find(|k| !ids.contains(k.as_str())) {
                return bad(format!("{attribute}: share override for unknown protocol {unknown:?}"));
            }
        }
        Ok(())
    }
}

/// Population disparity implied by the spec: the difference between the
/// expected error rates of the target attribute's two groups, averaging
/// over each group's own protocol mix.
pub fn true_delta(spec: &SynthSpec) -> f64 {
    let Some(cfg) = spec.attributes.get(&spec.target_attribute) else {
        return spec.injected_disparity;
    };
    let (mut w1, mut e1, mut w0, mut e0) = (0.0, 0.0, 0.0, 0.0);
    for p in &spec.protocols {
        let share = match spec.allocation {
            Allocation::Sampled => cfg.share_in(&p.id),
            Allocation::Exact => cfg.group1_share,
        };
        w1 += p.weight * share;
        e1 += p.weight * share * (p.base_error_rate + spec.injected_disparity);
        w0 += p.weight * (1.0 - share);
        e0 += p.weight * (1.0 - share) * p.base_error_rate;
    }
    if w1 == 0.0 || w0 == 0.0 {
        return spec.injected_disparity;
    }
    e1 / w1 - e0 / w0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Group0,
    Group1,
    Ignored,
    Missing,
}

/// Split `n` into integer counts proportional to `weights` (largest
/// remainder; ties to the earlier entry).
fn largest_remainder(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

fn state_weights(cfg: &AttributeConfig, share: f64) -> [f64; 4] {
    let grouped = (1.0 - cfg.missing_rate - cfg.ignored_rate).max(0.0);
    [grouped * (1.0 - share), grouped * share, cfg.ignored_rate, cfg.missing_rate]
}

fn sample_state(rng: &mut impl Rng, cfg: Option<&AttributeConfig>, protocol: &str) -> State {
    let Some(cfg) = cfg else {
        return State::Missing;
    };
    let u: f64 = rng.random();
    if u < cfg.missing_rate {
        State::Missing
    } else if u < cfg.missing_rate + cfg.ignored_rate {
        State::Ignored
    } else if rng.random::<f64>() < cfg.share_in(protocol) {
        State::Group1
    } else {
        State::Group0
    }
}

fn exact_states(rng: &mut impl Rng, cfg: Option<&AttributeConfig>, n: usize) -> Vec<State> {
    let Some(cfg) = cfg else {
        return vec![State::Missing; n];
    };
    let counts = largest_remainder(n, &state_weights(cfg, cfg.group1_share));
    let mut states: Vec<State> = [State::Group0, State::Group1, State::Ignored, State::Missing]
        .iter()
        .zip(counts)
        .flat_map(|(&s, c)| std::iter::repeat_n(s, c))
        .collect();
    states.shuffle(rng);
    states
}

fn reference_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date")
}

fn birth_date(rng: &mut impl Rng, reference: NaiveDate, age: u32) -> NaiveDate {
    reference
        .checked_sub_months(Months::new(12 * age))
        .and_then(|d| d.checked_sub_days(Days::new(rng.random_range(0..=360))))
        .expect("date in range")
}

fn raw_case(
    rng: &mut impl Rng,
    index: usize,
    protocol: &ProtocolSpec,
    states: [State; 4],
    target: Attribute,
    disparity: f64,
) -> RawCase {
    let reference_date = reference_start() + Days::new(rng.random_range(0..366));
    let [sex, age, race, ses] = states;
    let text = |state: State, g0: &str, g1: &str, ignored: &str| match state {
        State::Group0 => Some(g0.to_string()),
        State::Group1 => Some(g1.to_string()),
        State::Ignored => Some(ignored.to_string()),
        State::Missing => None,
    };
    let years = match age {
        State::Group0 => Some(rng.random_range(51..=89)),
        State::Group1 => Some(rng.random_range(22..=50)),
        State::Ignored => Some(rng.random_range(18..=21)),
        State::Missing => None,
    };
    let target_state = states[Attribute::ALL.iter().position(|&a| a == target).expect("known attribute")];
    let mut p_error = protocol.base_error_rate;
    if target_state == State::Group1 {
        p_error += disparity;
    }
    let error = rng.random::<f64>() < p_error;
    let coin = rng.random::<bool>();
    let review_outcome = match (error, coin) {
        (true, true) => ReviewOutcome::FalseApproval,
        (true, false) => ReviewOutcome::UnnecessaryEscalation,
        (false, true) => ReviewOutcome::CorrectApproval,
        (false, false) => ReviewOutcome::CorrectEscalation,
    };
    RawCase {
        case_id: format!("S{index:07}"),
        protocol_id: protocol.id.clone(),
        review_outcome,
        sex_raw: text(sex, "Male", "Female", "Other"),
        birth_date: years.map(|y| birth_date(rng, reference_date, y)),
        reference_date,
        race_raw: text(race, "White", "Black", "Declined"),
        payer_lob_raw: text(ses, "Commercial", "Medicaid", "Medicare"),
    }
}

/// Raw case records for `spec`; deterministic given the seed.
pub fn generate_raw(spec: &SynthSpec) -> Result<Vec<RawCase>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_cases;
    let configs: Vec<Option<&AttributeConfig>> =
        Attribute::ALL.iter().map(|a| spec.attributes.get(a)).collect();

    let protocol_of: Vec<usize> = match spec.allocation {
        Allocation::Sampled => {
            let cumulative: Vec<f64> = spec
                .protocols
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p.weight;
                    Some(*acc)
                })
                .collect();
            (0..n)
                .map(|_| {
                    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
                    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
                })
                .collect()
        }
        Allocation::Exact => {
            let weights: Vec<f64> = spec.protocols.iter().map(|p| p.weight).collect();
            let mut v: Vec<usize> = largest_remainder(n, &weights)
                .into_iter()
                .enumerate()
                .flat_map(|(i, c)| std::iter::repeat_n(i, c))
                .collect();
            v.shuffle(&mut rng);
            v
        }
    };

    let exact: Option<Vec<Vec<State>>> = (spec.allocation == Allocation::Exact)
        .then(|| configs.iter().map(|cfg| exact_states(&mut rng, *cfg, n)).collect());

    let mut cases = Vec::with_capacity(n);
    for (i, &p) in protocol_of.iter().enumerate() {
        let protocol = &spec.protocols[p];
        let states: [State; 4] = match &exact {
            Some(per_attr) => std::array::from_fn(|a| per_attr[a][i]),
            None => std::array::from_fn(|a| sample_state(&mut rng, configs[a], &protocol.id)),
        };
        cases.push(raw_case(
            &mut rng,
            i,
            protocol,
            states,
            spec.target_attribute,
            spec.injected_disparity,
        ));
    }
    Ok(cases)
}

/// Frozen cohort derived from [`generate_raw`] with the default mapping.
pub fn generate_cohort(spec: &SynthSpec) -> Result<Cohort> {
    let mapping = MappingSpec::default();
    let raw = generate_raw(spec)?;
    Cohort::from_cases(
        GroupLabels::from(&mapping),
        raw.iter()
            .map(|r| DerivedCase::from_raw(r, &mapping, ReferenceDatePolicy::ReviewDate)),
    )
}

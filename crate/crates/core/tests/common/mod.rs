//! Fixtures and oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pa_fairness::synth::{Allocation, AttributeConfig, ProtocolSpec, SynthSpec};
use pa_fairness::Attribute;

/// One published unadjusted comparison: rates in percent (one decimal),
/// group sizes, and the printed statistics.
pub struct PublishedUnadjusted {
    pub attribute: &'static str,
    pub rate1_pct: f64,
    pub n1: u64,
    pub rate0_pct: f64,
    pub n0: u64,
    pub z: f64,
    pub p: f64,
    pub ci_pp: (f64, f64),
    pub power: f64,
}

pub const PUBLISHED_UNADJUSTED: [PublishedUnadjusted; 4] = [
    PublishedUnadjusted { attribute: "sex", rate1_pct: 5.8, n1: 3961, rate0_pct: 6.3, n0: 2544, z: -0.91, p: 0.364, ci_pp: (-1.74, 0.65), power: 1.00 },
    PublishedUnadjusted { attribute: "age", rate1_pct: 5.8, n1: 2241, rate0_pct: 6.3, n0: 4545, z: -0.79, p: 0.429, ci_pp: (-1.69, 0.71), power: 1.00 },
    PublishedUnadjusted { attribute: "race", rate1_pct: 6.7, n1: 164, rate0_pct: 7.3, n0: 757, z: -0.26, p: 0.798, ci_pp: (-4.82, 3.68), power: 0.51 },
    PublishedUnadjusted { attribute: "ses", rate1_pct: 5.9, n1: 358, rate0_pct: 5.7, n0: 1571, z: 0.10, p: 0.920, ci_pp: (-2.55, 2.83), power: 0.88 },
];

/// A printed interval (pp) with its Evidence Ratio percent, strength label
/// and band column.
pub struct PublishedInterval {
    pub source: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub percent: f64,
    pub strength: &'static str,
    pub in_band: bool,
}

const fn iv(source: &'static str, lo: f64, hi: f64, percent: f64, strength: &'static str, in_band: bool) -> PublishedInterval {
    PublishedInterval { source, lo, hi, percent, strength, in_band }
}

const S: &str = "Strong evidence";
const M: &str = "Moderate evidence";
const W: &str = "Weak evidence";

pub const PUBLISHED_INTERVALS: [PublishedInterval; 40] = [
    // Protocol-adjusted
    iv("adjusted sex/race", -0.74, 1.69, 24.0, S, true),
    iv("adjusted sex/age", -0.64, 1.57, 22.0, S, true),
    iv("adjusted sex/ses", -1.11, 1.51, 26.0, S, true),
    iv("adjusted race/sex", -4.72, 5.50, 102.0, W, false),
    iv("adjusted race/age", -5.01, 5.69, 107.0, W, false),
    iv("adjusted race/ses", -5.79, 4.67, 105.0, W, false),
    iv("adjusted age/sex", -1.05, 1.45, 25.0, S, true),
    iv("adjusted age/race", -0.93, 1.57, 25.0, S, true),
    iv("adjusted age/ses", -1.24, 1.36, 26.0, S, true),
    iv("adjusted ses/sex", -2.79, 2.69, 55.0, M, true),
    iv("adjusted ses/race", -2.60, 2.31, 49.0, S, true),
    iv("adjusted ses/age", -3.02, 2.28, 53.0, M, true),
    // Single-factor sensitivity
    iv("sensitivity sex/protocol", -0.69, 1.66, 23.0, S, true),
    iv("sensitivity sex/race", -2.93, 3.67, 66.0, M, true),
    iv("sensitivity sex/age", -0.63, 1.88, 25.0, S, true),
    iv("sensitivity sex/ses", -1.16, 2.96, 41.0, S, true),
    iv("sensitivity race/protocol", -5.37, 4.80, 102.0, W, false),
    iv("sensitivity race/sex", -3.22, 4.72, 79.0, M, true),
    iv("sensitivity race/age", -3.54, 4.50, 80.0, W, true),
    iv("sensitivity race/ses", -12.16, 2.55, 147.0, W, false),
    iv("sensitivity age/protocol", -0.83, 1.60, 24.0, S, true),
    iv("sensitivity age/sex", -1.03, 1.49, 25.0, S, true),
    iv("sensitivity age/race", -1.12, 5.51, 66.0, M, false),
    iv("sensitivity age/ses", -2.18, 1.96, 41.0, S, true),
    iv("sensitivity ses/protocol", -2.97, 2.52, 55.0, M, true),
    iv("sensitivity ses/sex", -2.78, 2.29, 51.0, M, true),
    iv("sensitivity ses/race", -6.41, 8.92, 153.0, W, false),
    iv("sensitivity ses/age", -2.46, 3.10, 56.0, M, true),
    // Complete-case robustness
    iv("complete-case sex/race", -3.30, 3.94, 72.0, M, true),
    iv("complete-case sex/age", -0.60, 1.90, 25.0, S, true),
    iv("complete-case sex/ses", -1.71, 3.00, 47.0, S, true),
    iv("complete-case race/sex", -4.53, 5.19, 97.0, W, false),
    iv("complete-case race/age", -5.38, 5.08, 105.0, W, false),
    iv("complete-case race/ses", -12.70, 4.18, 169.0, W, false),
    iv("complete-case age/sex", -1.19, 1.21, 24.0, S, true),
    iv("complete-case age/race", -3.02, 5.47, 85.0, W, false),
    iv("complete-case age/ses", -3.61, 1.56, 52.0, M, true),
    iv("complete-case ses/sex", -3.70, 2.02, 57.0, M, true),
    iv("complete-case ses/race", -8.40, 12.65, 211.0, W, false),
    iv("complete-case ses/age", -2.76, 2.42, 52.0, M, true),
];

/// Per-attribute category counts of the published cohort, in the order
/// group1, group0, Ignored, Missing, with the printed percentages.
pub struct PublishedComposition {
    pub attribute: Attribute,
    pub counts: [usize; 4],
    pub percents: [f64; 4],
    /// Protocols with both groups present / protocols with any group case.
    pub overlap: (usize, usize),
}

pub const COHORT_SIZE: usize = 7166;

pub const PUBLISHED_COMPOSITION: [PublishedComposition; 4] = [
    PublishedComposition { attribute: Attribute::Sex, counts: [3961, 2544, 0, 661], percents: [55.3, 35.5, 0.0, 9.2], overlap: (27, 27) },
    PublishedComposition { attribute: Attribute::Age, counts: [2241, 4545, 248, 132], percents: [31.3, 63.4, 3.5, 1.8], overlap: (25, 27) },
    PublishedComposition { attribute: Attribute::Race, counts: [164, 757, 19, 6226], percents: [2.3, 10.6, 0.3, 86.9], overlap: (21, 24) },
    PublishedComposition { attribute: Attribute::Ses, counts: [358, 1571, 566, 4671], percents: [5.0, 21.9, 7.9, 65.2], overlap: (23, 26) },
];

/// Correct approval, false approval, correct escalation, unnecessary escalation.
pub const PUBLISHED_OUTCOMES: [(usize, f64); 4] = [(2901, 40.5), (230, 3.2), (3832, 53.5), (203, 2.8)];

/// 27 protocol sizes (ascending) with median 99, type-7 IQR 63 to 339 and
/// 4,500 of 7,166 cases (62.8%) in the five largest.
pub const PROTOCOL_SIZES: [usize; 27] = [
    12, 15, 18, 22, 30, 36, 63, 63, 65, 70, 75, 80, 90, 99, 110, 130, 160, 200, 250, 339, 339, 400,
    600, 700, 900, 1000, 1300,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Group1,
    Group0,
    Ignored,
    Missing,
}

fn take(out: &mut Vec<Slot>, slot: usize, left: &mut [usize; 4]) {
    const SLOTS: [Slot; 4] = [Slot::Group1, Slot::Group0, Slot::Ignored, Slot::Missing];
    assert!(left[slot] > 0, "allocation ran out of {:?}", SLOTS[slot]);
    left[slot] -= 1;
    out.push(SLOTS[slot]);
}

/// Assign attribute states to protocols so that exactly `valid` protocols
/// hold any comparison-group case and exactly `overlap` of them hold both
/// groups. `sizes` is in descending order.
fn allocate(sizes: &[usize], counts: [usize; 4], valid: usize, overlap: usize) -> Vec<Vec<Slot>> {
    let mut left = counts;
    let mut out: Vec<Vec<Slot>> = vec![Vec::new(); sizes.len()];
    for p in valid..sizes.len() {
        for _ in 0..sizes[p] {
            let s = if left[3] > 0 { 3 } else { 2 };
            take(&mut out[p], s, &mut left);
        }
    }
    for p in 0..valid {
        if p < overlap {
            take(&mut out[p], 0, &mut left);
        }
        take(&mut out[p], 1, &mut left);
    }
    for p in 0..overlap {
        while out[p].len() < sizes[p] && left[0] > 0 {
            take(&mut out[p], 0, &mut left);
        }
    }
    assert_eq!(left[0], 0, "group1 does not fit in the overlap protocols");
    for p in 0..valid {
        while out[p].len() < sizes[p] {
            let s = (1..4).find(|&s| left[s] > 0).expect("enough cases");
            take(&mut out[p], s, &mut left);
        }
    }
    assert_eq!(left, [0; 4]);
    out
}

/// CSV text for a 7,166-case cohort with the published composition,
/// protocol distribution and protocol overlap.
pub fn published_shape_csv() -> String {
    let mut sizes: Vec<usize> = PROTOCOL_SIZES.to_vec();
    sizes.reverse();
    let per_attr: Vec<Vec<Vec<Slot>>> = PUBLISHED_COMPOSITION
        .iter()
        .map(|c| allocate(&sizes, c.counts, c.overlap.1, c.overlap.0))
        .collect();

    let mut outcomes: Vec<&str> = Vec::with_capacity(COHORT_SIZE);
    for (name, (n, _)) in ["CorrectApproval", "FalseApproval", "CorrectEscalation", "UnnecessaryEscalation"]
        .iter()
        .zip(PUBLISHED_OUTCOMES)
    {
        outcomes.extend(std::iter::repeat_n(*name, n));
    }
    assert_eq!(outcomes.len(), COHORT_SIZE);

    let mut csv = String::from("case_id,protocol_id,review_outcome,sex,birth_date,reference_date,race,payer_lob\n");
    let mut i = 0usize;
    for (p, &size) in sizes.iter().enumerate() {
        for k in 0..size {
            let pick = |a: usize, values: [&'static str; 4]| match per_attr[a][p][k] {
                Slot::Group1 => values[0],
                Slot::Group0 => values[1],
                Slot::Ignored => values[2],
                Slot::Missing => values[3],
            };
            // 7919 is coprime with 7166, so this visits every outcome once.
            let outcome = outcomes[(i * 7919) % COHORT_SIZE];
            let _ = writeln!(
                csv,
                "C{i:05},PR{p:02},{outcome},{},{},2024-06-30,{},{}",
                pick(0, ["Female", "Male", "Other", ""]),
                pick(1, ["1989-03-15", "1959-01-01", "2006-01-01", ""]),
                pick(2, ["Black", "White", "Declined", ""]),
                pick(3, ["Medicaid", "Commercial", "Self-pay", ""]),
            );
            i += 1;
        }
    }
    csv
}

/// Minimize `f` with Nelder–Mead from `start`, restarting until a restart
/// no longer improves the value.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], scale: f64) -> (Vec<f64>, f64) {
    let mut best = start.to_vec();
    let mut best_value = f(&best);
    for _ in 0..50 {
        let (x, v) = nelder_mead_once(f, &best, scale, 20_000);
        let improved = best_value - v > 1e-13 * (1.0 + v.abs());
        if v < best_value {
            best = x;
            best_value = v;
        }
        if !improved {
            break;
        }
    }
    (best, best_value)
}

fn nelder_mead_once(f: &dyn Fn(&[f64]) -> f64, start: &[f64], scale: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < 1e-15 * (1.0 + values[0].abs()) && size < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let t = if fr < values[n] { 0.5 } else { -0.5 };
            let contracted = along(t);
            let fc = f(&contracted);
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let i = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[i].clone(), values[i])
}

/// Two protocols with different base rates; sex split 40/60 independently
/// of protocol, so the adjusted estimand equals the injected disparity.
pub fn coverage_spec(disparity: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_cases: 2000,
        protocols: vec![
            ProtocolSpec { id: "P1".into(), weight: 0.6, base_error_rate: 0.05 },
            ProtocolSpec { id: "P2".into(), weight: 0.4, base_error_rate: 0.09 },
        ],
        attributes: BTreeMap::from([(Attribute::Sex, AttributeConfig::new(0.4, 0.0, 0.0))]),
        target_attribute: Attribute::Sex,
        injected_disparity: disparity,
        seed,
        allocation: Allocation::Sampled,
    }
}

/// Three protocols, sex as the target and race as a covariate missing
/// completely at random with probability `race_missing`.
pub fn mcar_spec(n_cases: usize, race_missing: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_cases,
        protocols: vec![
            ProtocolSpec { id: "P1".into(), weight: 0.5, base_error_rate: 0.05 },
            ProtocolSpec { id: "P2".into(), weight: 0.3, base_error_rate: 0.08 },
            ProtocolSpec { id: "P3".into(), weight: 0.2, base_error_rate: 0.03 },
        ],
        attributes: BTreeMap::from([
            (Attribute::Sex, AttributeConfig::new(0.5, 0.0, 0.0)),
            (Attribute::Race, AttributeConfig::new(0.3, race_missing, 0.0)),
        ]),
        target_attribute: Attribute::Sex,
        injected_disparity: 0.01,
        seed,
        allocation: Allocation::Sampled,
    }
}

/// A small but complete cohort exercising every attribute, for CLI runs.
pub fn cli_spec_toml() -> &'static str {
    r#"n_cases = 3000
target_attribute = "sex"
injected_disparity = 0.0
seed = 7

[[protocols]]
id = "P1"
weight = 0.6
base_error_rate = 0.05

[[protocols]]
id = "P2"
weight = 0.4
base_error_rate = 0.08

[attributes.sex]
group1_share = 0.6
missing_rate = 0.1

[attributes.age]
group1_share = 0.35
ignored_rate = 0.03

[attributes.race]
group1_share = 0.3
missing_rate = 0.7

[attributes.ses]
group1_share = 0.25
missing_rate = 0.5
ignored_rate = 0.08
"#
}

pub fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
}

//! Unadjusted error-rate comparison: group rates, the two-proportion z
//! screen, Wald intervals, tolerance-band verdicts, Evidence Ratio and
//! achieved power.

use serde::{Deserialize, Serialize};

use crate::cohort::{Attribute, Cohort, GroupPair};
use crate::error::{Error, Result};
use crate::numeric::{normal_cdf, normal_quantile};

/// Achieved power at or above this is treated as adequate.
pub const POWER_THRESHOLD: f64 = 0.80;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionSummary {
    pub group_label: String,
    pub errors: u64,
    pub n: u64,
    pub rate: f64,
}

impl ProportionSummary {
    pub fn new(group_label: impl Into<String>, errors: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("proportion needs n >= 1".into()));
        }
        if errors > n {
            return Err(Error::Precondition(format!("{errors} errors exceed n = {n}")));
        }
        Ok(ProportionSummary {
            group_label: group_label.into(),
            errors,
            n,
            rate: errors as f64 / n as f64,
        })
    }

    /// Summary reconstructed from a published rate, with the error count
    /// rounded to the nearest whole case.
    pub fn from_rate(group_label: impl Into<String>, rate: f64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Precondition(format!("rate {rate} outside [0, 1]")));
        }
        Self::new(group_label, (rate * n as f64).round() as u64, n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceBand {
    /// Half-width of the band, as a fraction (0.05 = ±5 pp).
    pub delta: f64,
    pub alpha: f64,
}

impl Default for ToleranceBand {
    fn default() -> Self {
        ToleranceBand {
            delta: 0.05,
            alpha: 0.05,
        }
    }
}

impl ToleranceBand {
    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(ToleranceBand { delta, alpha })
    }

    /// Two-sided critical value `z_{1-alpha/2}`.
    pub fn z_critical(&self) -> f64 {
        normal_quantile(1.0 - self.alpha / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Equivalence,
    Inconclusive,
    NonEquivalence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceStrength {
    Strong,
    Moderate,
    Weak,
}

impl EvidenceStrength {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio < 0.50 {
            EvidenceStrength::Strong
        } else if ratio < 0.80 {
            EvidenceStrength::Moderate
        } else {
            EvidenceStrength::Weak
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EvidenceStrength::Strong => "Strong evidence",
            EvidenceStrength::Moderate => "Moderate evidence",
            EvidenceStrength::Weak => "Weak evidence",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        ConfidenceInterval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// The interval for the negated quantity.
    pub fn mirrored(&self) -> Self {
        ConfidenceInterval::new(-self.hi, -self.lo)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalVerdict {
    pub classification: Classification,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub evidence_ratio: f64,
    pub strength: EvidenceStrength,
}

impl IntervalVerdict {
    pub fn new(ci: ConfidenceInterval, band: &ToleranceBand) -> Self {
        let (evidence_ratio, strength) = evidence_ratio(ci, band);
        IntervalVerdict {
            classification: classify_tolerance(ci, band),
            ci_lo: ci.lo,
            ci_hi: ci.hi,
            evidence_ratio,
            strength,
        }
    }

    pub fn ci(&self) -> ConfidenceInterval {
        ConfidenceInterval::new(self.ci_lo, self.ci_hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p_value: f64,
}

/// Two-sided two-proportion z-test with pooled variance and no
/// continuity correction. Zero pooled variance (no errors at all, or only
/// errors) can only arise with identical rates and yields z = 0, p = 1.
pub fn two_prop_z(s0: &ProportionSummary, s1: &ProportionSummary) -> ZTest {
    let (n0, n1) = (s0.n as f64, s1.n as f64);
    let pooled = (s0.errors + s1.errors) as f64 / (n0 + n1);
    let var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n0);
    if var <= 0.0 {
        return ZTest { z: 0.0, p_value: 1.0 };
    }
    let z = (s1.rate - s0.rate) / var.sqrt();
    ZTest {
        z,
        p_value: (2.0 * normal_cdf(-z.abs())).min(1.0),
    }
}

/// Wald interval for `rate1 - rate0` with unpooled variance.
pub fn wald_ci_diff(s0: &ProportionSummary, s1: &ProportionSummary, alpha: f64) -> ConfidenceInterval {
    let (p0, p1) = (s0.rate, s1.rate);
    let se = (p1 * (1.0 - p1) / s1.n as f64 + p0 * (1.0 - p0) / s0.n as f64).sqrt();
    let half = normal_quantile(1.0 - alpha / 2.0) * se;
    let diff = p1 - p0;
    ConfidenceInterval::new(diff - half, diff + half)
}

pub fn classify_tolerance(ci: ConfidenceInterval, band: &ToleranceBand) -> Classification {
    let d = band.delta;
    if ci.lo >= -d && ci.hi <= d {
        Classification::Equivalence
    } else if ci.lo > d || ci.hi < -d {
        Classification::NonEquivalence
    } else {
        Classification::Inconclusive
    }
}

/// Interval width relative to the full band span `2·delta`.
pub fn evidence_ratio(ci: ConfidenceInterval, band: &ToleranceBand) -> (f64, EvidenceStrength) {
    let ratio = ci.width() / (2.0 * band.delta);
    (ratio, EvidenceStrength::from_ratio(ratio))
}

/// Power to detect a disparity of size `band.delta` above `baseline_rate`,
/// using the arcsine (Cohen's h) normal approximation.
pub fn power_two_prop(n0: u64, n1: u64, baseline_rate: f64, band: &ToleranceBand) -> Result<f64> {
    if n0 < 2 || n1 < 2 {
        return Err(Error::Precondition(format!(
            "power needs at least 2 cases per group (got {n0} and {n1})"
        )));
    }
    if !(baseline_rate > 0.0 && baseline_rate < 1.0) {
        return Err(Error::Precondition(format!(
            "baseline error rate {baseline_rate} must lie strictly between 0 and 1"
        )));
    }
    let alternative = baseline_rate + band.delta;
    if alternative >= 1.0 {
        return Err(Error::Precondition(format!(
            "baseline {baseline_rate} + delta {} reaches 1",
            band.delta
        )));
    }
    let h = 2.0 * alternative.sqrt().asin() - 2.0 * baseline_rate.sqrt().asin();
    let z_effect = h / (1.0 / n0 as f64 + 1.0 / n1 as f64).sqrt();
    let z_crit = band.z_critical();
    Ok(normal_cdf(z_effect - z_crit) + normal_cdf(-z_effect - z_crit))
}

/// Full unadjusted comparison for one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityResult {
    pub attribute: Attribute,
    pub groups: GroupPair,
    pub summaries: [ProportionSummary; 2],
    /// `rate1 - rate0`.
    pub delta: f64,
    pub z: f64,
    pub p_value: f64,
    pub verdict: IntervalVerdict,
    pub baseline_rate: f64,
    pub power: f64,
    /// Power below [`POWER_THRESHOLD`]; the comparison is then
    /// inconclusive whatever the interval says.
    pub underpowered: bool,
}

impl DisparityResult {
    pub fn conclusion(&self) -> Classification {
        if self.underpowered {
            Classification::Inconclusive
        } else {
            self.verdict.classification
        }
    }
}

/// Error counts for the two groups of `attribute`, in group order.
pub fn group_summaries(cohort: &Cohort, attribute: Attribute) -> Result<[ProportionSummary; 2]> {
    let pair = cohort.groups(attribute);
    let mut errors = [0u64; 2];
    let mut n = [0u64; 2];
    for case in cohort.cases() {
        if let Some(g) = cohort.group_of(case, attribute) {
            n[g] += 1;
            errors[g] += case.error as u64;
        }
    }
    for g in 0..2 {
        if n[g] == 0 {
            return Err(Error::EmptyGroup {
                attribute: attribute.name().into(),
                group: pair.label(g).into(),
            });
        }
    }
    Ok([
        ProportionSummary::new(pair.group0.clone(), errors[0], n[0])?,
        ProportionSummary::new(pair.group1.clone(), errors[1], n[1])?,
    ])
}

pub fn unadjusted_audit(cohort: &Cohort, attribute: Attribute, band: &ToleranceBand) -> Result<DisparityResult> {
    let [s0, s1] = group_summaries(cohort, attribute)?;
    let test = two_prop_z(&s0, &s1);
    let ci = wald_ci_diff(&s0, &s1, band.alpha);
    let baseline_rate = (s0.errors + s1.errors) as f64 / (s0.n + s1.n) as f64;
    let power = power_two_prop(s0.n, s1.n, baseline_rate, band)?;
    Ok(DisparityResult {
        attribute,
        groups: cohort.groups(attribute).clone(),
        delta: s1.rate - s0.rate,
        z: test.z,
        p_value: test.p_value,
        verdict: IntervalVerdict::new(ci, band),
        baseline_rate,
        power,
        underpowered: power < POWER_THRESHOLD,
        summaries: [s0, s1],
    })
}

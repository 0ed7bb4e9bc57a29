//! Protocol-adjusted disparity estimates with percentile bootstrap
//! intervals, plus the single-factor and complete-case variants.
//!
//! Resample `r` draws its cases from ChaCha stream `r` of the configured
//! seed; a degenerate draw is replaced by stream `r + (attempt << 32)`.
//! Deltas are stored by resample index, so serial and parallel runs give
//! bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohort::{Attribute, Cohort, GroupPair};
use crate::error::{Error, Result};
use crate::glm::{
    build_design, fit_grouped, standardize_grouped, BinomialData, Factor, IrlsControls,
    MissingPolicy, ModelSpec, Standardized,
};
use crate::numeric::quantile_sorted;
use crate::stats::{ConfidenceInterval, IntervalVerdict, ToleranceBand};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    pub max_discard_fraction: f64,
    /// Worker threads; `None` uses the global rayon pool. Has no effect on
    /// results.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 1000,
            seed: 20240101,
            max_discard_fraction: 0.05,
            threads: None,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_resamples < 100 {
            return Err(Error::Config(format!(
                "at least 100 bootstrap resamples are required, got {}",
                self.n_resamples
            )));
        }
        if !(0.0..1.0).contains(&self.max_discard_fraction) {
            return Err(Error::Config("max_discard_fraction must lie in [0, 1)".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    fn discard_cap(&self) -> usize {
        (self.max_discard_fraction * self.n_resamples as f64).floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjustedResult {
    pub attribute: Attribute,
    pub groups: GroupPair,
    /// Table label such as "Protocol + Race".
    pub adjustment_set: String,
    pub factors: Vec<Factor>,
    pub missing_policy: MissingPolicy,
    pub n_rows: usize,
    /// Rows removed because a covariate was unknown (complete-case only).
    pub dropped_rows: usize,
    pub p_adj_0: f64,
    pub p_adj_1: f64,
    pub adj_delta: f64,
    pub verdict: IntervalVerdict,
    pub n_resamples: usize,
    pub discarded_resamples: usize,
    /// Retained resamples whose fit needed the separation ridge.
    pub separation_events: usize,
    /// Median of the retained resample deltas.
    pub resample_median: f64,
    pub estimate_in_ci: bool,
}

impl AdjustedResult {
    pub fn ci(&self) -> ConfidenceInterval {
        self.verdict.ci()
    }
}

/// Adjusted delta for one dataset, or `None` when the fit is unusable.
/// A constant outcome has the limiting fit of all-zero (or all-one)
/// probabilities, so both standardized rates coincide.
fn adjusted_delta(data: &BinomialData, controls: &IrlsControls) -> Option<(Standardized, bool)> {
    let total = data.total_trials();
    let errors: f64 = data.successes.iter().sum();
    if errors == 0.0 || errors == total {
        let p = errors / total;
        return Some((
            Standardized {
                p_adj_0: p,
                p_adj_1: p,
                adj_delta: 0.0,
            },
            false,
        ));
    }
    let fit = fit_grouped(data, controls).ok()?;
    if !fit.converged {
        return None;
    }
    let std = standardize_grouped(&fit, data).ok()?;
    Some((std, fit.ridge_used > 0.0))
}

/// Both attribute groups present and every indicator column non-empty.
fn resample_is_complete(data: &BinomialData) -> bool {
    let total = data.total_trials();
    (1..data.n_cols()).all(|j| {
        let s: f64 = (0..data.n_patterns())
            .map(|k| data.trials[k] * data.pattern(k)[j])
            .sum();
        s > 0.0 && s < total
    })
}

struct Draw {
    delta: f64,
    discarded: usize,
    separated: bool,
}

fn draw_resample(
    base: &BinomialData,
    row_pattern: &[usize],
    outcome: &[f64],
    cfg: &BootstrapConfig,
    controls: &IrlsControls,
    index: usize,
) -> Result<Draw> {
    let n = row_pattern.len();
    let cap = cfg.discard_cap();
    for attempt in 0..=cap {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(((attempt as u64) << 32) | index as u64);
        let mut trials = vec![0.0; base.n_patterns()];
        let mut successes = vec![0.0; base.n_patterns()];
        for _ in 0..n {
            let i = rng.random_range(0..n as u32) as usize;
            trials[row_pattern[i]] += 1.0;
            successes[row_pattern[i]] += outcome[i];
        }
        let data = base.with_counts(trials, successes);
        if !resample_is_complete(&data) {
            continue;
        }
        if let Some((std, separated)) = adjusted_delta(&data, controls) {
            return Ok(Draw {
                delta: std.adj_delta,
                discarded: attempt,
                separated,
            });
        }
    }
    Err(Error::DiscardCapExceeded {
        discarded: cap + 1,
        requested: cfg.n_resamples,
        cap: 100.0 * cfg.max_discard_fraction,
    })
}

pub fn bootstrap_adjusted_delta(
    cohort: &Cohort,
    spec: &ModelSpec,
    cfg: &BootstrapConfig,
    band: &ToleranceBand,
) -> Result<AdjustedResult> {
    cfg.validate()?;
    let pair = cohort.groups(spec.attribute).clone();
    let design = build_design(cohort, spec)?;
    let a = design.attribute_column().expect("built designs carry the attribute");
    let in_group1 = (0..design.n_rows()).filter(|&i| design.row(i)[a] == 1.0).count();
    for (g, count) in [(0, design.n_rows() - in_group1), (1, in_group1)] {
        if count == 0 {
            return Err(Error::EmptyGroup {
                attribute: spec.attribute.name().into(),
                group: pair.label(g).into(),
            });
        }
    }
    let (base, row_pattern) = design.grouped();
    let controls = IrlsControls::default();
    let (point, _) = adjusted_delta(&base, &controls).ok_or(Error::NotConverged {
        iterations: controls.max_iter,
    })?;

    let run = || -> Result<Vec<Draw>> {
        (0..cfg.n_resamples)
            .into_par_iter()
            .map(|r| draw_resample(&base, &row_pattern, design.outcome(), cfg, &controls, r))
            .collect()
    };
    let draws = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    let discarded: usize = draws.iter().map(|d| d.discarded).sum();
    if discarded > cfg.discard_cap() {
        return Err(Error::DiscardCapExceeded {
            discarded,
            requested: cfg.n_resamples,
            cap: 100.0 * cfg.max_discard_fraction,
        });
    }
    let separation_events = draws.iter().filter(|d| d.separated).count();
    let mut deltas: Vec<f64> = draws.iter().map(|d| d.delta).collect();
    deltas.sort_by(f64::total_cmp);
    let tail = band.alpha / 2.0;
    let ci = ConfidenceInterval::new(
        quantile_sorted(&deltas, tail),
        quantile_sorted(&deltas, 1.0 - tail),
    );
    Ok(AdjustedResult {
        attribute: spec.attribute,
        groups: pair,
        adjustment_set: spec.adjustment_label(),
        factors: spec.factors().collect(),
        missing_policy: spec.missing_policy,
        n_rows: design.n_rows(),
        dropped_rows: design.dropped_rows(),
        p_adj_0: point.p_adj_0,
        p_adj_1: point.p_adj_1,
        adj_delta: point.adj_delta,
        verdict: IntervalVerdict::new(ci, band),
        n_resamples: cfg.n_resamples,
        discarded_resamples: discarded,
        separation_events,
        resample_median: quantile_sorted(&deltas, 0.5),
        estimate_in_ci: ci.contains(point.adj_delta),
    })
}

fn protocol_plus(attribute: Attribute, covariate: Attribute, policy: MissingPolicy) -> Result<ModelSpec> {
    if covariate == attribute {
        return Err(Error::Config(format!("covariate {covariate} equals the protected attribute")));
    }
    Ok(ModelSpec::new(attribute)
        .with_fixed_effect(Factor::Protocol)
        .with_covariate(Factor::Attribute(covariate))
        .with_missing_policy(policy))
}

/// Protocol fixed effects plus one other protected attribute as a
/// covariate, with `policy` deciding how unknown covariate values are kept.
pub fn adjusted_audit_with_policy(
    cohort: &Cohort,
    attribute: Attribute,
    covariate: Attribute,
    policy: MissingPolicy,
    cfg: &BootstrapConfig,
    band: &ToleranceBand,
) -> Result<AdjustedResult> {
    let spec = protocol_plus(attribute, covariate, policy)?;
    bootstrap_adjusted_delta(cohort, &spec, cfg, band)
}

/// "Protocol + covariate" adjustment keeping unknown covariate values as
/// their own level.
pub fn adjusted_audit(
    cohort: &Cohort,
    attribute: Attribute,
    covariate: Attribute,
    cfg: &BootstrapConfig,
    band: &ToleranceBand,
) -> Result<AdjustedResult> {
    adjusted_audit_with_policy(cohort, attribute, covariate, MissingPolicy::UnknownLevel, cfg, band)
}

/// Same as [`adjusted_audit`] but dropping cases whose covariate is unknown.
pub fn complete_case_robustness(
    cohort: &Cohort,
    attribute: Attribute,
    covariate: Attribute,
    cfg: &BootstrapConfig,
    band: &ToleranceBand,
) -> Result<AdjustedResult> {
    adjusted_audit_with_policy(cohort, attribute, covariate, MissingPolicy::CompleteCase, cfg, band)
}

/// Protected attribute plus a single control factor. Cases outside the
/// attribute's two groups are excluded; unknown control values are kept
/// as an explicit level.
pub fn single_factor_sensitivity(
    cohort: &Cohort,
    attribute: Attribute,
    control: Factor,
    cfg: &BootstrapConfig,
    band: &ToleranceBand,
) -> Result<AdjustedResult> {
    let spec = match control {
        Factor::Protocol => ModelSpec::new(attribute).with_fixed_effect(Factor::Protocol),
        Factor::Attribute(c) if c == attribute => {
            return Err(Error::Config(format!("control {c} equals the protected attribute")))
        }
        other => ModelSpec::new(attribute).with_covariate(other),
    };
    bootstrap_adjusted_delta(cohort, &spec, cfg, band)
}

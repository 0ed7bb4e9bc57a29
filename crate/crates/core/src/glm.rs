//! Logistic regression with categorical fixed effects, fitted by Newton /
//! IRLS, and marginal standardization of group error rates.
//!
//! All predictors here are categorical, so many cases share the same design
//! row. Fits run on the distinct rows with binomial counts; the likelihood,
//! score and estimates are identical to the per-case Bernoulli fit, and the
//! sort that groups rows makes every fit independent of case order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cohort::{Attribute, AttributeValue, Cohort, DerivedCase};
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";
pub const UNKNOWN_LEVEL: &str = "Unknown";

/// A categorical predictor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Protocol,
    #[serde(untagged)]
    Attribute(Attribute),
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Protocol => "protocol",
            Factor::Attribute(a) => a.name(),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Factor::Protocol => "Protocol",
            Factor::Attribute(a) => a.title(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("protocol") {
            Ok(Factor::Protocol)
        } else {
            Ok(Factor::Attribute(s.parse()?))
        }
    }
}

/// How covariate states outside the two comparison groups are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Missing and Ignored become an explicit "Unknown" level.
    #[default]
    #[serde(alias = "unknown")]
    UnknownLevel,
    /// Rows with a Missing or Ignored covariate are dropped.
    CompleteCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub attribute: Attribute,
    pub fixed_effect_factors: Vec<Factor>,
    pub covariates: Vec<Factor>,
    pub missing_policy: MissingPolicy,
}

impl ModelSpec {
    pub fn new(attribute: Attribute) -> Self {
        ModelSpec {
            attribute,
            fixed_effect_factors: Vec::new(),
            covariates: Vec::new(),
            missing_policy: MissingPolicy::UnknownLevel,
        }
    }

    pub fn with_fixed_effect(mut self, factor: Factor) -> Self {
        self.fixed_effect_factors.push(factor);
        self
    }

    pub fn with_covariate(mut self, factor: Factor) -> Self {
        self.covariates.push(factor);
        self
    }

    pub fn with_missing_policy(mut self, policy: MissingPolicy) -> Self {
        self.missing_policy = policy;
        self
    }

    pub fn factors(&self) -> impl Iterator<Item = Factor> + '_ {
        self.fixed_effect_factors.iter().chain(&self.covariates).copied()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for factor in self.factors() {
            if factor == Factor::Attribute(self.attribute) {
                return Err(Error::Config(format!(
                    "{} is the protected attribute and cannot also be adjusted for",
                    self.attribute
                )));
            }
            if seen.contains(&factor) {
                return Err(Error::Config(format!("factor {factor} listed twice")));
            }
            seen.push(factor);
        }
        Ok(())
    }

    /// Table label such as "Protocol + Race".
    pub fn adjustment_label(&self) -> String {
        let names: Vec<_> = self.factors().map(Factor::title).collect();
        if names.is_empty() {
            "None".into()
        } else {
            names.join(" + ")
        }
    }
}

/// Encoding of one categorical factor: the dropped reference level and
/// the levels that received indicator columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorLevels {
    pub factor: Factor,
    pub reference: String,
    pub levels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    columns: Vec<String>,
    /// Row-major, `n_rows × columns.len()`.
    values: Vec<f64>,
    outcome: Vec<f64>,
    attribute_column: Option<usize>,
    /// Column indices belonging to each categorical factor.
    blocks: Vec<Vec<usize>>,
    factors: Vec<FactorLevels>,
    dropped_rows: usize,
    warnings: Vec<String>,
}

fn factor_level(case: &DerivedCase, factor: Factor, policy: MissingPolicy) -> Option<String> {
    match factor {
        Factor::Protocol => Some(case.protocol_id.clone()),
        Factor::Attribute(a) => match case.attribute(a) {
            AttributeValue::Group(label) => Some(label.clone()),
            AttributeValue::Ignored | AttributeValue::Missing => match policy {
                MissingPolicy::UnknownLevel => Some(UNKNOWN_LEVEL.to_string()),
                MissingPolicy::CompleteCase => None,
            },
        },
    }
}

impl DesignMatrix {
    /// Design from explicit rows. The first column is expected to be the
    /// intercept; every other column is treated as its own block.
    pub fn from_rows(columns: Vec<String>, rows: &[Vec<f64>], outcome: Vec<f64>) -> Result<Self> {
        if rows.len() != outcome.len() {
            return Err(Error::Precondition(format!(
                "{} rows but {} outcomes",
                rows.len(),
                outcome.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let p = columns.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Precondition(format!("row {bad} has wrong width")));
        }
        if outcome.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Precondition("outcome must be 0/1".into()));
        }
        Ok(DesignMatrix {
            blocks: (1..p).map(|j| vec![j]).collect(),
            values: rows.concat(),
            outcome,
            attribute_column: (p > 1).then_some(1),
            columns,
            factors: Vec::new(),
            dropped_rows: 0,
            warnings: Vec::new(),
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.outcome.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn attribute_column(&self) -> Option<usize> {
        self.attribute_column
    }

    pub fn factors(&self) -> &[FactorLevels] {
        &self.factors
    }

    /// Rows removed by the complete-case policy.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Distinct rows with binomial counts, plus the pattern index of every
    /// original row.
    pub fn grouped(&self) -> (BinomialData, Vec<usize>) {
        let p = self.n_cols();
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by(|&a, &b| cmp_rows(self.row(a), self.row(b)));
        let mut x = Vec::new();
        let mut trials = Vec::new();
        let mut successes = Vec::new();
        let mut row_pattern = vec![0; self.n_rows()];
        for (pos, &i) in order.iter().enumerate() {
            let new_pattern =
                pos == 0 || cmp_rows(self.row(order[pos - 1]), self.row(i)) != Ordering::Equal;
            if new_pattern {
                x.extend_from_slice(self.row(i));
                trials.push(0.0);
                successes.push(0.0);
            }
            let k = trials.len() - 1;
            trials[k] += 1.0;
            successes[k] += self.outcome[i];
            row_pattern[i] = k;
        }
        debug_assert_eq!(x.len(), trials.len() * p);
        let data = BinomialData {
            columns: self.columns.clone(),
            x,
            trials,
            successes,
            blocks: self.blocks.clone(),
            attribute_column: self.attribute_column,
        };
        (data, row_pattern)
    }
}

fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Reference level = most frequent; ties go to the lexicographically
/// smallest label. Remaining levels are sorted.
fn encode_levels(factor: Factor, values: &[&str]) -> FactorLevels {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let reference = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(k, _)| k.to_string())
        .unwrap_or_default();
    let levels = counts
        .keys()
        .filter(|k| **k != reference)
        .map(|k| k.to_string())
        .collect();
    FactorLevels {
        factor,
        reference,
        levels,
    }
}

/// Build the design for `spec`. Cases outside the two comparison groups
/// of the protected attribute are skipped.
pub fn build_design(cohort: &Cohort, spec: &ModelSpec) -> Result<DesignMatrix> {
    spec.validate()?;
    let factors: Vec<Factor> = spec.factors().collect();
    let mut group = Vec::new();
    let mut levels: Vec<Vec<String>> = Vec::new();
    let mut outcome = Vec::new();
    let mut dropped_rows = 0;
    for case in cohort.cases() {
        let Some(g) = cohort.group_of(case, spec.attribute) else {
            continue;
        };
        let row_levels: Option<Vec<String>> = factors
            .iter()
            .map(|&f| factor_level(case, f, spec.missing_policy))
            .collect();
        match row_levels {
            Some(row_levels) => {
                group.push(g);
                levels.push(row_levels);
                outcome.push(case.error as u8 as f64);
            }
            None => dropped_rows += 1,
        }
    }
    if outcome.is_empty() {
        return Err(Error::EmptyDesign);
    }

    let pair = cohort.groups(spec.attribute);
    let mut columns = vec![
        INTERCEPT.to_string(),
        format!("{}[{}]", spec.attribute, pair.group1),
    ];
    let mut blocks = vec![vec![1]];
    let mut encodings = Vec::new();
    let mut warnings = Vec::new();
    let mut column_of: Vec<HashMap<String, usize>> = Vec::new();
    for (fi, &factor) in factors.iter().enumerate() {
        let values: Vec<&str> = levels.iter().map(|r| r[fi].as_str()).collect();
        let enc = encode_levels(factor, &values);
        if enc.levels.is_empty() {
            warnings.push(format!(
                "factor {factor} has a single level ({}) and contributes no columns",
                enc.reference
            ));
        }
        let mut map = HashMap::new();
        let mut block = Vec::new();
        for level in &enc.levels {
            map.insert(level.clone(), columns.len());
            block.push(columns.len());
            columns.push(format!("{factor}[{level}]"));
        }
        if !block.is_empty() {
            blocks.push(block);
        }
        column_of.push(map);
        encodings.push(enc);
    }

    let p = columns.len();
    let mut values = vec![0.0; outcome.len() * p];
    for (i, (g, row_levels)) in group.iter().zip(&levels).enumerate() {
        let row = &mut values[i * p..(i + 1) * p];
        row[0] = 1.0;
        row[1] = *g as f64;
        for (fi, level) in row_levels.iter().enumerate() {
            if let Some(&j) = column_of[fi].get(level) {
                row[j] = 1.0;
            }
        }
    }

    Ok(DesignMatrix {
        columns,
        values,
        outcome,
        attribute_column: Some(1),
        blocks,
        factors: encodings,
        dropped_rows,
        warnings,
    })
}

/// Distinct design rows with binomial outcome counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialData {
    pub columns: Vec<String>,
    /// Row-major, `n_patterns × columns.len()`.
    pub x: Vec<f64>,
    pub trials: Vec<f64>,
    pub successes: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    pub attribute_column: Option<usize>,
}

impl BinomialData {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_patterns(&self) -> usize {
        self.trials.len()
    }

    pub fn pattern(&self, k: usize) -> &[f64] {
        let p = self.n_cols();
        &self.x[k * p..(k + 1) * p]
    }

    pub fn total_trials(&self) -> f64 {
        self.trials.iter().sum()
    }

    /// Same patterns with new counts (used for resampling).
    pub fn with_counts(&self, trials: Vec<f64>, successes: Vec<f64>) -> Self {
        debug_assert_eq!(trials.len(), self.n_patterns());
        BinomialData {
            trials,
            successes,
            ..self.clone()
        }
    }

    /// Cells of each categorical factor (each level and the all-zero
    /// reference) whose outcome never varies, plus `(outcome)` when the
    /// outcome is constant overall.
    pub fn separation_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        let constant = |m: f64, y: f64| m > 0.0 && (y == 0.0 || y == m);
        let (m, y) = (self.total_trials(), self.successes.iter().sum());
        if constant(m, y) {
            flags.push("(outcome)".to_string());
            return flags;
        }
        for block in &self.blocks {
            let mut ref_m = 0.0;
            let mut ref_y = 0.0;
            for &j in block {
                let (mut mj, mut yj) = (0.0, 0.0);
                for k in 0..self.n_patterns() {
                    if self.pattern(k)[j] != 0.0 {
                        mj += self.trials[k];
                        yj += self.successes[k];
                    }
                }
                if constant(mj, yj) {
                    flags.push(self.columns[j].clone());
                }
            }
            for k in 0..self.n_patterns() {
                if block.iter().all(|&j| self.pattern(k)[j] == 0.0) {
                    ref_m += self.trials[k];
                    ref_y += self.successes[k];
                }
            }
            if constant(ref_m, ref_y) {
                let first = &self.columns[block[0]];
                let factor = first.split('[').next().unwrap_or(first);
                flags.push(format!("{factor}[reference]"));
            }
        }
        flags
    }

    fn linear_predictor(&self, k: usize, beta: &[f64]) -> f64 {
        self.pattern(k).iter().zip(beta).map(|(x, b)| x * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlsControls {
    pub max_iter: usize,
    /// Convergence when the largest coefficient change falls below this
    /// (or the Newton decrement is negligible next to the deviance).
    pub tol: f64,
    /// Ridge penalty `λ·Σβ²` on the non-intercept coefficients.
    pub ridge: f64,
    /// Penalty applied automatically when separation is detected or the
    /// unpenalized fit fails to converge. `None` disables it.
    pub auto_ridge: Option<f64>,
}

impl Default for IrlsControls {
    fn default() -> Self {
        IrlsControls {
            max_iter: 100,
            tol: 1e-8,
            ridge: 0.0,
            auto_ridge: Some(1e-6),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `-2·loglik` plus the ridge penalty, at the final coefficients.
    pub deviance: f64,
    pub ridge_used: f64,
    pub separation_flags: Vec<String>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|j| self.coefficients[j])
    }

    /// Probability for a positional design row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum())
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Penalized binomial log-likelihood `Σ[y·η - m·ln(1+e^η)] - λ·Σ_{j>0} β_j²`.
pub fn log_likelihood(data: &BinomialData, beta: &[f64], ridge: f64) -> f64 {
    let ll: f64 = (0..data.n_patterns())
        .map(|k| {
            let eta = data.linear_predictor(k, beta);
            data.successes[k] * eta - data.trials[k] * softplus(eta)
        })
        .sum();
    ll - ridge * beta.iter().skip(1).map(|b| b * b).sum::<f64>()
}

/// Gradient of [`log_likelihood`]: `Xᵀ(y - m·μ) - 2λβ` (intercept unpenalized).
pub fn score(data: &BinomialData, beta: &[f64], ridge: f64) -> Vec<f64> {
    let p = data.n_cols();
    let mut g = vec![0.0; p];
    for k in 0..data.n_patterns() {
        let mu = sigmoid(data.linear_predictor(k, beta));
        let r = data.successes[k] - data.trials[k] * mu;
        for (gj, xj) in g.iter_mut().zip(data.pattern(k)) {
            *gj += xj * r;
        }
    }
    for j in 1..p {
        g[j] -= 2.0 * ridge * beta[j];
    }
    g
}

/// Cholesky factor of a symmetric matrix (row-major, lower triangle used).
/// Returns the indices of pivots that collapse, i.e. columns that are
/// linear combinations of earlier ones.
fn cholesky(a: &[f64], p: usize, rel_tol: f64) -> std::result::Result<Vec<f64>, Vec<usize>> {
    let mut l = vec![0.0; p * p];
    let mut dependent = Vec::new();
    for j in 0..p {
        let diag = a[j * p + j];
        let s = diag - (0..j).map(|k| l[j * p + k] * l[j * p + k]).sum::<f64>();
        if !(s > rel_tol * diag.abs().max(f64::MIN_POSITIVE)) {
            dependent.push(j);
            continue;
        }
        let d = s.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let s = a[i * p + j] - (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum::<f64>();
            l[i * p + j] = s / d;
        }
    }
    if dependent.is_empty() {
        Ok(l)
    } else {
        Err(dependent)
    }
}

fn cholesky_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i * p + k] * y[k]).sum();
        y[i] = (y[i] - s) / l[i * p + i];
    }
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k * p + i] * y[k]).sum();
        y[i] = (y[i] - s) / l[i * p + i];
    }
    y
}

/// Weighted cross-product `Xᵀ diag(w) X`.
fn gram(data: &BinomialData, weights: impl Fn(usize) -> f64) -> Vec<f64> {
    let p = data.n_cols();
    let mut h = vec![0.0; p * p];
    for k in 0..data.n_patterns() {
        let w = weights(k);
        if w == 0.0 {
            continue;
        }
        let x = data.pattern(k);
        for i in 0..p {
            if x[i] == 0.0 {
                continue;
            }
            let wxi = w * x[i];
            for j in 0..=i {
                h[i * p + j] += wxi * x[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            h[j * p + i] = h[i * p + j];
        }
    }
    h
}

fn check_rank(data: &BinomialData) -> Result<()> {
    let p = data.n_cols();
    let g = gram(data, |k| data.trials[k]);
    cholesky(&g, p, 1e-10).map(|_| ()).map_err(|dependent| Error::RankDeficient {
        columns: dependent.into_iter().map(|j| data.columns[j].clone()).collect(),
    })
}

fn newton(data: &BinomialData, controls: &IrlsControls, ridge: f64) -> (Vec<f64>, bool, usize, f64) {
    let p = data.n_cols();
    let objective = |beta: &[f64]| -2.0 * log_likelihood(data, beta, ridge);
    let mut beta = vec![0.0; p];
    let mut current = objective(&beta);
    for iter in 1..=controls.max_iter {
        let g = score(data, &beta, ridge);
        let mut h = gram(data, |k| {
            let mu = sigmoid(data.linear_predictor(k, &beta));
            data.trials[k] * mu * (1.0 - mu)
        });
        for j in 1..p {
            h[j * p + j] += 2.0 * ridge;
        }
        let Ok(l) = cholesky(&h, p, 1e-14) else {
            return (beta, false, iter, current);
        };
        let step = cholesky_solve(&l, p, &g);
        // Newton decrement: the predicted objective decrease of a full
        // step. It stays meaningful along nearly flat (separated)
        // directions, where gradient rounding keeps |Δβ| above `tol`.
        let decrement: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let stalled = decrement <= 1e-12 * (current.abs() + 1.0);
        let mut t = 1.0;
        let mut candidate: Vec<f64>;
        let mut value;
        let mut halvings = 0;
        loop {
            candidate = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            value = objective(&candidate);
            if value <= current + 1e-12 * current.abs() || halvings >= 40 {
                break;
            }
            t *= 0.5;
            halvings += 1;
        }
        let change = step.iter().map(|s| (t * s).abs()).fold(0.0, f64::max);
        // Near the optimum the objective is flat to rounding, so a step that
        // ties within that noise is still taken.
        if value <= current + 1e-12 * current.abs() {
            beta = candidate;
            current = value;
        }
        if change < controls.tol || stalled {
            return (beta, true, iter, current);
        }
    }
    (beta, false, controls.max_iter, current)
}

/// Fit grouped binomial data.
pub fn fit_grouped(data: &BinomialData, controls: &IrlsControls) -> Result<FitResult> {
    let p = data.n_cols();
    if data.total_trials() < p as f64 {
        return Err(Error::Precondition(format!(
            "{} rows cannot identify {p} coefficients",
            data.total_trials()
        )));
    }
    check_rank(data)?;
    let mut flags = data.separation_flags();
    let mut ridge = controls.ridge;
    if !flags.is_empty() {
        if let Some(auto) = controls.auto_ridge {
            ridge = ridge.max(auto);
        }
    }
    let (mut beta, mut converged, mut iterations, mut deviance) = newton(data, controls, ridge);
    if !converged && ridge == 0.0 {
        if let Some(auto) = controls.auto_ridge {
            flags.push("(non-convergence)".into());
            ridge = auto;
            (beta, converged, iterations, deviance) = newton(data, controls, ridge);
        }
    }
    Ok(FitResult {
        columns: data.columns.clone(),
        coefficients: beta,
        converged,
        iterations,
        deviance,
        ridge_used: ridge,
        separation_flags: flags,
    })
}

pub fn fit_logistic_irls(design: &DesignMatrix, controls: &IrlsControls) -> Result<FitResult> {
    fit_grouped(&design.grouped().0, controls)
}

/// Probability for a named design row; every fitted column must be present.
pub fn predict_prob(fit: &FitResult, row: &BTreeMap<String, f64>) -> Result<f64> {
    let values = fit
        .columns
        .iter()
        .map(|c| row.get(c).copied().ok_or_else(|| Error::MissingColumn(c.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit.predict(&values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub p_adj_0: f64,
    pub p_adj_1: f64,
    pub adj_delta: f64,
}

/// Mean predicted error probability over all rows with the attribute
/// column set to 0 and to 1, everything else as observed.
pub fn standardize_grouped(fit: &FitResult, data: &BinomialData) -> Result<Standardized> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let a = data
        .attribute_column
        .ok_or_else(|| Error::Precondition("design has no attribute column".into()))?;
    let total = data.total_trials();
    let mut sums = [0.0; 2];
    let mut row = vec![0.0; data.n_cols()];
    for k in 0..data.n_patterns() {
        if data.trials[k] == 0.0 {
            continue;
        }
        row.copy_from_slice(data.pattern(k));
        for (g, sum) in sums.iter_mut().enumerate() {
            row[a] = g as f64;
            *sum += data.trials[k] * fit.predict(&row);
        }
    }
    let (p_adj_0, p_adj_1) = (sums[0] / total, sums[1] / total);
    Ok(Standardized {
        p_adj_0,
        p_adj_1,
        adj_delta: p_adj_1 - p_adj_0,
    })
}

pub fn marginal_standardization(fit: &FitResult, design: &DesignMatrix) -> Result<Standardized> {
    standardize_grouped(fit, &design.grouped().0)
}

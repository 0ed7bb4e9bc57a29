//! Audit orchestration and report emission.
//!
//! [`run`] loads the configured case files, executes the requested
//! analyses in a fixed order and writes `report.json`, `report.md` and
//! `rejects.log` into the output directory. The JSON document is the
//! source of truth; the Markdown tables are rendered from it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cohort::{
    describe, load_cohort_files, protocol_diagnostics, Attribute, Cohort, CohortDescription,
    MappingSpec, ProtocolDistribution, ProtocolOverlap, ReferenceDatePolicy, Rejection,
};
use crate::error::{Error, Result};
use crate::glm::{Factor, MissingPolicy};
use crate::inference::{
    adjusted_audit_with_policy, complete_case_robustness, single_factor_sensitivity,
    AdjustedResult, BootstrapConfig,
};
use crate::numeric::round_half_up;
use crate::stats::{unadjusted_audit, Classification, DisparityResult, IntervalVerdict, ToleranceBand};

/// Attribute order used by the adjusted, sensitivity and robustness tables.
pub const ADJUSTED_ORDER: [Attribute; 4] = [Attribute::Sex, Attribute::Race, Attribute::Age, Attribute::Ses];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Describe,
    Unadjusted,
    Adjusted,
    Sensitivity,
    Robustness,
}

impl Analysis {
    /// Execution order.
    pub const ALL: [Analysis; 5] = [
        Analysis::Describe,
        Analysis::Unadjusted,
        Analysis::Adjusted,
        Analysis::Sensitivity,
        Analysis::Robustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Describe => "describe",
            Analysis::Unadjusted => "unadjusted",
            Analysis::Adjusted => "adjusted",
            Analysis::Sensitivity => "sensitivity",
            Analysis::Robustness => "robustness",
        }
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown analysis {s:?} (expected describe, unadjusted, adjusted, sensitivity or robustness)"
                ))
            })
    }
}

/// Decimal places used in the Markdown tables. JSON values are never rounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rounding {
    /// Group error rates, in percent.
    pub rate_decimals: u32,
    /// Disparities and interval endpoints, in percentage points.
    pub delta_decimals: u32,
}

impl Default for Rounding {
    fn default() -> Self {
        Rounding {
            rate_decimals: 1,
            delta_decimals: 2,
        }
    }
}

/// Everything needed to run an audit. Loaded from a TOML file, with
/// command-line flags applied on top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// Attribute mapping file; the bundled mapping when absent.
    pub mapping: Option<PathBuf>,
    pub delta: f64,
    pub alpha: f64,
    pub resamples: usize,
    pub seed: u64,
    pub max_discard_fraction: f64,
    pub analyses: Vec<Analysis>,
    pub out: PathBuf,
    /// Treatment of unknown covariate values in the adjusted analysis.
    pub missing_policy: MissingPolicy,
    /// Compute ages at this date instead of each case's review date.
    pub reference_date: Option<NaiveDate>,
    pub rounding: Rounding,
    /// Bootstrap worker threads. Never changes results.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let boot = BootstrapConfig::default();
        let band = ToleranceBand::default();
        RunConfig {
            inputs: Vec::new(),
            mapping: None,
            delta: band.delta,
            alpha: band.alpha,
            resamples: boot.n_resamples,
            seed: boot.seed,
            max_discard_fraction: boot.max_discard_fraction,
            analyses: Analysis::ALL.to_vec(),
            out: PathBuf::from("audit-report"),
            missing_policy: MissingPolicy::UnknownLevel,
            reference_date: None,
            rounding: Rounding::default(),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.inputs.iter_mut().for_each(resolve);
        config.mapping.iter_mut().for_each(resolve);
        resolve(&mut config.out);
        Ok(config)
    }

    pub fn band(&self) -> Result<ToleranceBand> {
        ToleranceBand::new(self.delta, self.alpha)
    }

    pub fn bootstrap(&self) -> BootstrapConfig {
        BootstrapConfig {
            n_resamples: self.resamples,
            seed: self.seed,
            max_discard_fraction: self.max_discard_fraction,
            threads: self.threads,
        }
    }

    fn reference_policy(&self) -> ReferenceDatePolicy {
        self.reference_date
            .map_or(ReferenceDatePolicy::ReviewDate, ReferenceDatePolicy::Fixed)
    }

    /// Requested analyses, deduplicated, in execution order.
    pub fn ordered_analyses(&self) -> Vec<Analysis> {
        Analysis::ALL
            .into_iter()
            .filter(|a| self.analyses.contains(a))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.band()?;
        let needs_bootstrap = self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::Adjusted | Analysis::Sensitivity | Analysis::Robustness));
        if needs_bootstrap {
            self.bootstrap().validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.inputs.is_empty() {
            return Err(Error::Config("no input files given".into()));
        }
        for path in self.inputs.iter().chain(&self.mapping) {
            if !path.is_file() {
                return Err(Error::Config(format!("{} is not a readable file", path.display())));
            }
        }
        Ok(())
    }

    fn load_mapping(&self) -> Result<MappingSpec> {
        match &self.mapping {
            Some(path) => MappingSpec::from_path(path),
            None => Ok(MappingSpec::default()),
        }
    }

    /// Digest of every setting that can change a reported number. Input
    /// files and the mapping enter by content, so moving them or the
    /// output directory, or changing `threads`, leaves the hash unchanged.
    pub fn config_hash(&self, mapping: &MappingSpec, inputs: &[InputSummary]) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            inputs: Vec<&'a str>,
            mapping: &'a MappingSpec,
            delta: f64,
            alpha: f64,
            resamples: usize,
            seed: u64,
            max_discard_fraction: f64,
            analyses: Vec<Analysis>,
            missing_policy: MissingPolicy,
            reference_date: Option<NaiveDate>,
            rounding: Rounding,
        }
        let semantic = Semantic {
            inputs: inputs.iter().map(|i| i.sha256.as_str()).collect(),
            mapping,
            delta: self.delta,
            alpha: self.alpha,
            resamples: self.resamples,
            seed: self.seed,
            max_discard_fraction: self.max_discard_fraction,
            analyses: self.ordered_analyses(),
            missing_policy: self.missing_policy,
            reference_date: self.reference_date,
            rounding: self.rounding,
        };
        let bytes = serde_json::to_vec(&semantic).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSummary {
    pub file: String,
    pub sha256: String,
}

impl InputSummary {
    fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(InputSummary {
            file: path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Cases usable for one attribute's comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcohortSize {
    pub attribute: Attribute,
    pub group0: usize,
    pub group1: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub toolkit_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub delta: f64,
    pub alpha: f64,
    pub n_resamples: usize,
    pub missing_policy: MissingPolicy,
    pub analyses: Vec<Analysis>,
    pub rounding: Rounding,
    pub inputs: Vec<InputSummary>,
    pub cases_loaded: usize,
    pub cases_rejected: usize,
    pub subcohorts: Vec<SubcohortSize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        Failure {
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

/// One table row: a result, or the reason it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row<T> {
    pub attribute: Attribute,
    /// Adjustment set or control factor; empty for unadjusted rows.
    pub label: String,
    pub result: Option<T>,
    pub failure: Option<Failure>,
}

impl<T> Row<T> {
    fn from_result(attribute: Attribute, label: String, result: Result<T>) -> Self {
        match result {
            Ok(r) => Row {
                attribute,
                label,
                result: Some(r),
                failure: None,
            },
            Err(e) => Row {
                attribute,
                label,
                result: None,
                failure: Some(Failure::from(&e)),
            },
        }
    }
}

/// Blocks are `None` when their analysis was not requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metadata: Metadata,
    /// Cohort composition.
    pub cohort: Option<CohortDescription>,
    pub protocol_distribution: Option<ProtocolDistribution>,
    pub protocol_overlap: Option<Vec<ProtocolOverlap>>,
    pub unadjusted: Option<Vec<Row<DisparityResult>>>,
    /// Protocol plus one covariate, three rows per attribute.
    pub adjusted: Option<Vec<Row<AdjustedResult>>>,
    /// Single control factor, four rows per attribute.
    pub sensitivity: Option<Vec<Row<AdjustedResult>>>,
    /// As `adjusted`, dropping unknown covariate values.
    pub robustness: Option<Vec<Row<AdjustedResult>>>,
    pub rejections: Vec<Rejection>,
}

impl AuditReport {
    /// Exit status of the first failed row in table order, 0 when every
    /// row was computed.
    pub fn exit_code(&self) -> i32 {
        fn first<T>(rows: &Option<Vec<Row<T>>>) -> Option<i32> {
            rows.iter().flatten().find_map(|r| r.failure.as_ref().map(|f| f.exit_code))
        }
        first(&self.unadjusted)
            .or_else(|| first(&self.adjusted))
            .or_else(|| first(&self.sensitivity))
            .or_else(|| first(&self.robustness))
            .unwrap_or(0)
    }

    pub fn failures(&self) -> Vec<String> {
        fn collect<T>(out: &mut Vec<String>, table: &str, rows: &Option<Vec<Row<T>>>) {
            for row in rows.iter().flatten() {
                if let Some(f) = &row.failure {
                    let label = if row.label.is_empty() { String::new() } else { format!(" / {}", row.label) };
                    out.push(format!("{table}: {}{label}: {}", row.attribute.title(), f.message));
                }
            }
        }
        let mut out = Vec::new();
        collect(&mut out, "unadjusted", &self.unadjusted);
        collect(&mut out, "adjusted", &self.adjusted);
        collect(&mut out, "sensitivity", &self.sensitivity);
        collect(&mut out, "robustness", &self.robustness);
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("report.json: {e}")))
    }
}

fn other_attributes(attribute: Attribute) -> impl Iterator<Item = Attribute> {
    ADJUSTED_ORDER.into_iter().filter(move |&a| a != attribute)
}

fn subcohort_sizes(cohort: &Cohort) -> Vec<SubcohortSize> {
    Attribute::ALL
        .iter()
        .map(|&attribute| {
            let mut n = [0usize; 2];
            for case in cohort.cases() {
                if let Some(g) = cohort.group_of(case, attribute) {
                    n[g] += 1;
                }
            }
            SubcohortSize {
                attribute,
                group0: n[0],
                group1: n[1],
                total: n[0] + n[1],
            }
        })
        .collect()
}

/// Run the analyses of `config` against an already loaded cohort.
pub fn audit_cohort(
    config: &RunConfig,
    cohort: &Cohort,
    metadata: Metadata,
    rejections: Vec<Rejection>,
) -> Result<AuditReport> {
    let band = config.band()?;
    let boot = config.bootstrap();
    let mut report = AuditReport {
        metadata,
        cohort: None,
        protocol_distribution: None,
        protocol_overlap: None,
        unadjusted: None,
        adjusted: None,
        sensitivity: None,
        robustness: None,
        rejections,
    };
    for analysis in config.ordered_analyses() {
        match analysis {
            Analysis::Describe => {
                report.cohort = Some(describe(cohort));
                let diagnostics: Vec<_> = Attribute::ALL
                    .iter()
                    .map(|&a| protocol_diagnostics(cohort, a))
                    .collect();
                report.protocol_distribution = diagnostics.first().map(|d| d.distribution.clone());
                report.protocol_overlap = Some(diagnostics.into_iter().map(|d| d.overlap).collect());
            }
            Analysis::Unadjusted => {
                report.unadjusted = Some(
                    Attribute::ALL
                        .iter()
                        .map(|&a| Row::from_result(a, String::new(), unadjusted_audit(cohort, a, &band)))
                        .collect(),
                );
            }
            Analysis::Adjusted | Analysis::Robustness => {
                let policy = if analysis == Analysis::Adjusted {
                    config.missing_policy
                } else {
                    MissingPolicy::CompleteCase
                };
                let mut rows = Vec::new();
                for attribute in ADJUSTED_ORDER {
                    for covariate in other_attributes(attribute) {
                        let label = format!("Protocol + {}", covariate.title());
                        let result = if policy == MissingPolicy::CompleteCase {
                            complete_case_robustness(cohort, attribute, covariate, &boot, &band)
                        } else {
                            adjusted_audit_with_policy(cohort, attribute, covariate, policy, &boot, &band)
                        };
                        rows.push(Row::from_result(attribute, label, result));
                    }
                }
                if analysis == Analysis::Adjusted {
                    report.adjusted = Some(rows);
                } else {
                    report.robustness = Some(rows);
                }
            }
            Analysis::Sensitivity => {
                let mut rows = Vec::new();
                for attribute in ADJUSTED_ORDER {
                    let controls = std::iter::once(Factor::Protocol)
                        .chain(other_attributes(attribute).map(Factor::Attribute));
                    for control in controls {
                        let result = single_factor_sensitivity(cohort, attribute, control, &boot, &band);
                        rows.push(Row::from_result(attribute, control.title().to_string(), result));
                    }
                }
                report.sensitivity = Some(rows);
            }
        }
    }
    Ok(report)
}

/// Load inputs and run every requested analysis, without writing files.
pub fn execute(config: &RunConfig) -> Result<AuditReport> {
    config.validate()?;
    let mapping = config.load_mapping()?;
    let inputs = config
        .inputs
        .iter()
        .map(|p| InputSummary::read(p))
        .collect::<Result<Vec<_>>>()?;
    let loaded = load_cohort_files(&config.inputs, &mapping, config.reference_policy())?;
    let metadata = Metadata {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.config_hash(&mapping, &inputs),
        seed: config.seed,
        delta: config.delta,
        alpha: config.alpha,
        n_resamples: config.resamples,
        missing_policy: config.missing_policy,
        analyses: config.ordered_analyses(),
        rounding: config.rounding,
        inputs,
        cases_loaded: loaded.cohort.len(),
        cases_rejected: loaded.rejections.len(),
        subcohorts: subcohort_sizes(&loaded.cohort),
    };
    audit_cohort(config, &loaded.cohort, metadata, loaded.rejections)
}

/// Write `report.json`, `report.md` and `rejects.log` into `dir`.
pub fn write_outputs(report: &AuditReport, dir: &Path) -> Result<()> {
    let io = |path: PathBuf| move |source| Error::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let json = dir.join("report.json");
    std::fs::write(&json, report.to_json()).map_err(io(json.clone()))?;
    let md = dir.join("report.md");
    std::fs::write(&md, emit_markdown(report)).map_err(io(md.clone()))?;
    let log = dir.join("rejects.log");
    let lines: String = report.rejections.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(&log, lines).map_err(io(log.clone()))?;
    Ok(())
}

/// [`execute`] followed by [`write_outputs`] into `config.out`. Rows that
/// could not be computed are recorded in the report; see
/// [`AuditReport::exit_code`].
pub fn run(config: &RunConfig) -> Result<AuditReport> {
    let report = execute(config)?;
    write_outputs(&report, &config.out)?;
    Ok(report)
}

fn fixed(x: f64, decimals: u32) -> String {
    let r = round_half_up(x, decimals);
    // Never print "-0.00".
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.*}", decimals as usize)
}

fn signed(x: f64, decimals: u32) -> String {
    let text = fixed(x, decimals);
    if text.starts_with('-') || text.trim_start_matches(['0', '.']).is_empty() {
        text
    } else {
        format!("+{text}")
    }
}

fn pp(x: f64) -> f64 {
    100.0 * x
}

fn ci_text(verdict: &IntervalVerdict, decimals: u32) -> String {
    format!("[{}, {}]", fixed(pp(verdict.ci_lo), decimals), fixed(pp(verdict.ci_hi), decimals))
}

/// "24% (Strong evidence)".
pub fn evidence_text(verdict: &IntervalVerdict) -> String {
    format!(
        "{}% ({})",
        fixed(100.0 * verdict.evidence_ratio, 0),
        verdict.strength.label()
    )
}

/// Band column: "Yes" only when the interval lies inside the band.
pub fn band_text(verdict: &IntervalVerdict) -> &'static str {
    if verdict.classification == Classification::Equivalence {
        "Yes"
    } else {
        "No"
    }
}

fn classification_text(c: Classification) -> &'static str {
    match c {
        Classification::Equivalence => "Equivalence",
        Classification::Inconclusive => "Inconclusive",
        Classification::NonEquivalence => "Non-equivalence",
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    out.push_str(&line(&header.iter().map(|_| "---".to_string()).collect::<Vec<_>>()));
    for row in rows {
        out.push_str(&line(row));
    }
    out.push('\n');
}

fn failed_cells(failure: &Option<Failure>, width: usize) -> Vec<String> {
    let message = failure.as_ref().map_or("not computed", |f| f.message.as_str());
    let mut cells = vec![format!("not computed: {message}")];
    cells.resize(width, String::new());
    cells
}

fn adjusted_table(out: &mut String, rows: &[Row<AdjustedResult>], label: &str, rounding: Rounding, with_counts: bool) {
    let mut header = vec!["Attribute", label];
    if with_counts {
        header.extend(["Cases used", "Cases dropped"]);
    }
    header.extend(["Adj. Δ (pp)", "95% CI (pp)", "CI ∈ δ", "Evidence ratio (strength)"]);
    let d = rounding.delta_decimals;
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let mut cells = vec![row.attribute.title().to_string(), row.label.clone()];
            match &row.result {
                Some(r) => {
                    if with_counts {
                        cells.push(r.n_rows.to_string());
                        cells.push(r.dropped_rows.to_string());
                    }
                    cells.push(signed(pp(r.adj_delta), d));
                    cells.push(ci_text(&r.verdict, d));
                    cells.push(band_text(&r.verdict).to_string());
                    cells.push(evidence_text(&r.verdict));
                }
                None => cells.extend(failed_cells(&row.failure, header.len() - 2)),
            }
            cells
        })
        .collect();
    table(out, &header, &body);
}

/// Human-readable rendering of `report` as Markdown tables.
pub fn emit_markdown(report: &AuditReport) -> String {
    let m = &report.metadata;
    let rounding = m.rounding;
    let (r_dec, d_dec) = (rounding.rate_decimals, rounding.delta_decimals);
    let mut out = String::new();
    out.push_str("# Prior-authorization fairness audit\n\n");
    let _ = writeln!(out, "- Toolkit version: {}", m.toolkit_version);
    let _ = writeln!(out, "- Config hash: `{}`", m.config_hash);
    let _ = writeln!(out, "- Seed: {}", m.seed);
    let _ = writeln!(
        out,
        "- Tolerance band: ±{} pp, α = {}, bootstrap resamples: {}",
        fixed(pp(m.delta), d_dec),
        m.alpha,
        m.n_resamples
    );
    let inputs: Vec<&str> = m.inputs.iter().map(|i| i.file.as_str()).collect();
    let _ = writeln!(out, "- Inputs: {}", inputs.join(", "));
    let _ = writeln!(out, "- Cases loaded: {}, rejected: {}", m.cases_loaded, m.cases_rejected);
    let sizes: Vec<String> = m
        .subcohorts
        .iter()
        .map(|s| format!("{} {}", s.attribute.title(), s.total))
        .collect();
    let _ = writeln!(out, "- Cases per comparison: {}", sizes.join(", "));
    out.push('\n');

    if let Some(rows) = &report.unadjusted {
        out.push_str("## Unadjusted error rates\n\n");
        let header = [
            "Attribute",
            "Groups (1, 0)",
            "Error rate % (1, 0)",
            "n (1, 0)",
            "Δ (pp)",
            "z, p",
            "95% CI (pp)",
            "CI ∈ δ",
            "Evidence ratio (strength)",
            "Power",
            "Conclusion",
        ];
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.attribute.title().to_string()];
                match &row.result {
                    Some(r) => {
                        let [s0, s1] = &r.summaries;
                        let conclusion = if r.underpowered {
                            format!("{} (underpowered)", classification_text(r.conclusion()))
                        } else {
                            classification_text(r.conclusion()).to_string()
                        };
                        cells.extend([
                            format!("{}, {}", r.groups.group1, r.groups.group0),
                            format!("{}, {}", fixed(pp(s1.rate), r_dec), fixed(pp(s0.rate), r_dec)),
                            format!("{}, {}", s1.n, s0.n),
                            signed(pp(r.delta), d_dec),
                            format!("{}, {}", signed(r.z, 2), fixed(r.p_value, 3)),
                            ci_text(&r.verdict, d_dec),
                            band_text(&r.verdict).to_string(),
                            evidence_text(&r.verdict),
                            fixed(r.power, 2),
                            conclusion,
                        ]);
                    }
                    None => cells.extend(failed_cells(&row.failure, header.len() - 1)),
                }
                cells
            })
            .collect();
        table(&mut out, &header, &body);
    }

    if let Some(rows) = &report.adjusted {
        out.push_str("## Adjusted error-rate disparities\n\n");
        adjusted_table(&mut out, rows, "Adjustment set", rounding, false);
    }

    if let Some(d) = &report.cohort {
        out.push_str("## Cohort composition\n\n");
        let mut body = Vec::new();
        for f in &d.attributes {
            for r in &f.rows {
                body.push(vec![
                    f.attribute.title().to_string(),
                    r.category.clone(),
                    format!("{} ({}%)", r.count, fixed(r.percent, 1)),
                ]);
            }
        }
        table(&mut out, &["Attribute", "Category", "Frequency (%)"], &body);
        let body: Vec<Vec<String>> = d
            .outcomes
            .iter()
            .map(|r| vec![r.category.clone(), format!("{} ({}%)", r.count, fixed(r.percent, 1))])
            .collect();
        table(&mut out, &["Review outcome", "Frequency (%)"], &body);
    }

    if let Some(p) = &report.protocol_distribution {
        out.push_str("## Protocol distribution\n\n");
        let body = vec![
            vec!["Distinct protocols".to_string(), p.distinct_protocols.to_string()],
            vec!["Median cases per protocol".to_string(), fixed(p.median_cases, 1)],
            vec!["IQR of cases per protocol".to_string(), format!("{}–{}", fixed(p.iqr.0, 1), fixed(p.iqr.1, 1))],
            vec!["Cases in top 5 protocols".to_string(), format!("{}%", fixed(pp(p.top5_share), 1))],
        ];
        table(&mut out, &["Statistic", "Value"], &body);
    }

    if let Some(rows) = &report.protocol_overlap {
        out.push_str("## Protocol overlap\n\n");
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|o| {
                vec![
                    o.attribute.title().to_string(),
                    o.protocols_with_overlap.to_string(),
                    o.valid_protocols.to_string(),
                    format!("{}%", fixed(pp(o.overlap_rate), 1)),
                ]
            })
            .collect();
        table(
            &mut out,
            &["Attribute", "Protocols with overlap", "Valid protocols", "Overlap rate"],
            &body,
        );
    }

    if let Some(rows) = &report.sensitivity {
        out.push_str("## Single-factor sensitivity\n\n");
        adjusted_table(&mut out, rows, "Control", rounding, false);
    }

    if let Some(rows) = &report.robustness {
        out.push_str("## Complete-case robustness\n\n");
        adjusted_table(&mut out, rows, "Adjustment set", rounding, true);
    }

    if !report.rejections.is_empty() && report.cohort.is_some() {
        let _ = writeln!(
            out,
            "{} input records were rejected; see rejects.log.\n",
            report.rejections.len()
        );
    }
    out
}

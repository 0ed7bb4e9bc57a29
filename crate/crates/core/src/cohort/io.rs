use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Cohort, DerivedCase, GroupLabels, MappingSpec, RawCase, ReferenceDatePolicy};
use crate::error::{Error, Result};

const COLUMNS: [&str; 8] = [
    "case_id",
    "protocol_id",
    "review_outcome",
    "sex",
    "birth_date",
    "reference_date",
    "race",
    "payer_lob",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("csv") => Ok(InputFormat::Csv),
            Some("jsonl") | Some("ndjson") => Ok(InputFormat::Jsonl),
            _ => Err(Error::Input(format!(
                "{}: cannot infer format (expected .csv, .jsonl or .ndjson)",
                path.display()
            ))),
        }
    }
}

/// A record that could not be turned into a case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub row: usize,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.reason)
    }
}

#[derive(Debug)]
pub struct Loaded {
    pub cohort: Cohort,
    pub rejections: Vec<Rejection>,
}

/// On-disk shape shared by the CSV and JSONL formats. Empty strings and
/// nulls both mean "absent".
#[derive(Debug, Default, Serialize, Deserialize)]
struct CaseRecord {
    case_id: Option<String>,
    protocol_id: Option<String>,
    review_outcome: Option<String>,
    #[serde(default)]
    sex: Option<String>,
    #[serde(default)]
    birth_date: Option<String>,
    #[serde(default)]
    reference_date: Option<String>,
    #[serde(default)]
    race: Option<String>,
    #[serde(default)]
    payer_lob: Option<String>,
}

impl From<&RawCase> for CaseRecord {
    fn from(raw: &RawCase) -> Self {
        CaseRecord {
            case_id: Some(raw.case_id.clone()),
            protocol_id: Some(raw.protocol_id.clone()),
            review_outcome: Some(raw.review_outcome.as_str().to_string()),
            sex: raw.sex_raw.clone(),
            birth_date: raw.birth_date.map(|d| d.to_string()),
            reference_date: Some(raw.reference_date.to_string()),
            race: raw.race_raw.clone(),
            payer_lob: raw.payer_lob_raw.clone(),
        }
    }
}

fn present(field: Option<String>) -> Option<String> {
    field.filter(|s| !s.trim().is_empty())
}

fn parse_date(field: &str, value: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(value.trim(), "%Y-%m-%d")
        .map_err(|_| format!("bad {field} {value:?} (expected YYYY-MM-DD)"))
}

impl TryFrom<CaseRecord> for RawCase {
    type Error = String;

    fn try_from(rec: CaseRecord) -> std::result::Result<Self, String> {
        let case_id = present(rec.case_id).ok_or("empty case_id")?.trim().to_string();
        let protocol_id = present(rec.protocol_id)
            .ok_or("empty protocol_id")?
            .trim()
            .to_string();
        let outcome_text = present(rec.review_outcome).ok_or("empty review_outcome")?;
        let review_outcome = outcome_text
            .parse()
            .map_err(|_: Error| format!("unknown review_outcome {outcome_text:?}"))?;
        let reference_date = parse_date(
            "reference_date",
            &present(rec.reference_date).ok_or("empty reference_date")?,
        )?;
        let birth_date = present(rec.birth_date)
            .map(|s| parse_date("birth_date", &s))
            .transpose()?;
        if let Some(birth) = birth_date {
            if birth > reference_date {
                return Err(format!(
                    "birth_date {birth} is after reference_date {reference_date}"
                ));
            }
        }
        Ok(RawCase {
            case_id,
            protocol_id,
            review_outcome,
            sex_raw: present(rec.sex),
            birth_date,
            reference_date,
            race_raw: present(rec.race),
            payer_lob_raw: present(rec.payer_lob),
        })
    }
}

/// Parse every record; malformed ones are collected as rejections rather
/// than aborting the read.
pub fn read_raw_cases<R: Read>(
    reader: R,
    format: InputFormat,
) -> Result<(Vec<(usize, RawCase)>, Vec<Rejection>)> {
    let mut cases = Vec::new();
    let mut rejections = Vec::new();
    let mut accept = |row: usize, rec: std::result::Result<CaseRecord, String>| {
        match rec.and_then(RawCase::try_from) {
            Ok(raw) => cases.push((row, raw)),
            Err(reason) => rejections.push(Rejection { row, reason }),
        }
    };
    match format {
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(reader);
            let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
            for required in ["case_id", "protocol_id", "review_outcome", "reference_date"] {
                if !headers.iter().any(|h| h == required) {
                    return Err(Error::Input(format!("CSV header lacks column {required:?}")));
                }
            }
            for (i, rec) in rdr.deserialize::<CaseRecord>().enumerate() {
                accept(i + 1, rec.map_err(|e| format!("unparseable record: {e}")));
            }
        }
        InputFormat::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line = line.map_err(|e| Error::Input(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                accept(
                    i + 1,
                    serde_json::from_str(&line).map_err(|e| format!("unparseable record: {e}")),
                );
            }
        }
    }
    Ok((cases, rejections))
}

fn derive_into(
    cohort: &mut Cohort,
    cases: Vec<(usize, RawCase)>,
    mapping: &MappingSpec,
    policy: ReferenceDatePolicy,
) -> Result<()> {
    for (row, raw) in cases {
        let derived = DerivedCase::from_raw(&raw, mapping, policy);
        cohort.push(derived).map_err(|e| match e {
            Error::DuplicateCaseId { case_id, .. } => Error::DuplicateCaseId { case_id, row },
            other => other,
        })?;
    }
    Ok(())
}

pub fn load_cohort<R: Read>(
    reader: R,
    format: InputFormat,
    mapping: &MappingSpec,
    policy: ReferenceDatePolicy,
) -> Result<Loaded> {
    let (cases, rejections) = read_raw_cases(reader, format)?;
    let mut cohort = Cohort::new(GroupLabels::from(mapping));
    derive_into(&mut cohort, cases, mapping, policy)?;
    cohort.freeze();
    Ok(Loaded { cohort, rejections })
}

/// Load and concatenate several case files. Case ids must be unique across
/// all of them; rejection reasons are prefixed with the file name when
/// more than one file is read.
pub fn load_cohort_files(
    paths: &[PathBuf],
    mapping: &MappingSpec,
    policy: ReferenceDatePolicy,
) -> Result<Loaded> {
    let mut cohort = Cohort::new(GroupLabels::from(mapping));
    let mut rejections = Vec::new();
    for path in paths {
        let format = InputFormat::from_path(path)?;
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let (cases, rejected) = read_raw_cases(file, format)?;
        derive_into(&mut cohort, cases, mapping, policy)?;
        rejections.extend(rejected.into_iter().map(|r| {
            if paths.len() > 1 {
                Rejection {
                    row: r.row,
                    reason: format!("{}: {}", file_label(path), r.reason),
                }
            } else {
                r
            }
        }));
    }
    cohort.freeze();
    Ok(Loaded { cohort, rejections })
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn write_csv<W: Write>(cases: &[RawCase], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS).map_err(|e| Error::Input(e.to_string()))?;
    for raw in cases {
        let rec = CaseRecord::from(raw);
        let field = |v: &Option<String>| v.clone().unwrap_or_default();
        wtr.write_record([
            field(&rec.case_id),
            field(&rec.protocol_id),
            field(&rec.review_outcome),
            field(&rec.sex),
            field(&rec.birth_date),
            field(&rec.reference_date),
            field(&rec.race),
            field(&rec.payer_lob),
        ])
        .map_err(|e| Error::Input(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Input(e.to_string()))
}

pub fn write_jsonl<W: Write>(cases: &[RawCase], mut writer: W) -> Result<()> {
    for raw in cases {
        let line = serde_json::to_string(&CaseRecord::from(raw)).map_err(|e| Error::Input(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| Error::Input(e.to_string()))?;
    }
    Ok(())
}

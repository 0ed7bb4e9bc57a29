//! The whole pipeline as the command-line tool runs it: generate a case
//! file, audit it from a configuration, and write the report files.
//!
//! ```text
//! cargo run --release --example full_audit [output-dir]
//! ```

use std::fs::File;
use std::path::PathBuf;

use pa_fairness::cohort::write_csv;
use pa_fairness::report::{self, RunConfig};
use pa_fairness::synth::{generate_raw, SynthSpec};

fn main() -> pa_fairness::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("pa-fairness-example"));
    std::fs::create_dir_all(&dir).map_err(|source| pa_fairness::Error::Io { path: dir.clone(), source })?;

    let spec = SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?;
    let cases = dir.join("cases.csv");
    let file = File::create(&cases).map_err(|source| pa_fairness::Error::Io { path: cases.clone(), source })?;
    write_csv(&generate_raw(&spec)?, file)?;

    let mut config = RunConfig::from_toml_str(include_str!("data/audit.toml"))?;
    config.inputs = vec![cases];
    config.resamples = 300;
    config.out = dir.join("audit-report");
    let report = report::run(&config)?;

    for failure in report.failures() {
        eprintln!("warning: {failure}");
    }
    println!("config hash {}", report.metadata.config_hash);
    println!("report written to {}", config.out.display());
    print!("{}", report::emit_markdown(&report));
    std::process::exit(report.exit_code());
}

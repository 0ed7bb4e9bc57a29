//! Load a case file and print composition and protocol diagnostics.
//!
//! ```text
//! cargo run --example describe_cohort -- cases.csv [more.jsonl ...]
//! ```
//!
//! Without arguments a synthetic cohort is described instead.

use std::path::PathBuf;

use pa_fairness::cohort::{describe, load_cohort_files, protocol_diagnostics, MappingSpec, ReferenceDatePolicy};
use pa_fairness::synth::{generate_cohort, SynthSpec};
use pa_fairness::Attribute;

fn main() -> pa_fairness::Result<()> {
    let paths: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let cohort = if paths.is_empty() {
        generate_cohort(&SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?)?
    } else {
        let loaded = load_cohort_files(&paths, &MappingSpec::default(), ReferenceDatePolicy::ReviewDate)?;
        for r in &loaded.rejections {
            eprintln!("rejected row {}: {}", r.row, r.reason);
        }
        loaded.cohort
    };

    let d = describe(&cohort);
    println!("{} cases", d.total);
    for freq in &d.attributes {
        println!("\n{}", freq.attribute.title());
        for row in &freq.rows {
            println!("  {:<12} {:>6} {:>6.1}%", row.category, row.count, row.percent);
        }
    }
    println!("\nReview outcome");
    for row in &d.outcomes {
        println!("  {:<22} {:>6} {:>6.1}%", row.category, row.count, row.percent);
    }

    let dist = protocol_diagnostics(&cohort, Attribute::Sex).distribution;
    println!(
        "\n{} protocols, median {} cases (IQR {}–{}), top five hold {:.1}%",
        dist.distinct_protocols,
        dist.median_cases,
        dist.iqr.0,
        dist.iqr.1,
        100.0 * dist.top5_share
    );
    for attribute in Attribute::ALL {
        let o = protocol_diagnostics(&cohort, attribute).overlap;
        println!(
            "  {:<5} overlap in {}/{} protocols ({:.0}%)",
            attribute.name(),
            o.protocols_with_overlap,
            o.valid_protocols,
            100.0 * o.overlap_rate
        );
    }
    Ok(())
}

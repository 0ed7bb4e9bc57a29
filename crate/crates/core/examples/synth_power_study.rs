//! How often does the unadjusted analysis reach each verdict as the cohort
//! grows? Useful for sizing an audit before collecting data.

use std::collections::BTreeMap;

use pa_fairness::stats::{unadjusted_audit, ToleranceBand};
use pa_fairness::synth::{generate_cohort, SynthSpec};
use pa_fairness::Attribute;

fn main() -> pa_fairness::Result<()> {
    let base = SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?;
    let band = ToleranceBand::default();
    let replicates = 200;
    println!("{:>7} {:>8} {:>11} {:>13} {:>16}", "cases", "power", "equivalent", "inconclusive", "non-equivalent");
    for n_cases in [250, 500, 1000, 2000, 4000] {
        let mut verdicts: BTreeMap<String, usize> = BTreeMap::new();
        let mut power = 0.0;
        for rep in 0..replicates {
            let spec = SynthSpec { n_cases, seed: 1000 + rep, ..base.clone() };
            let r = unadjusted_audit(&generate_cohort(&spec)?, Attribute::Sex, &band)?;
            power += r.power / replicates as f64;
            *verdicts.entry(format!("{:?}", r.conclusion())).or_default() += 1;
        }
        let share = |k: &str| 100.0 * *verdicts.get(k).unwrap_or(&0) as f64 / replicates as f64;
        println!(
            "{n_cases:>7} {power:>8.2} {:>10.0}% {:>12.0}% {:>15.0}%",
            share("Equivalence"),
            share("Inconclusive"),
            share("NonEquivalence")
        );
    }
    Ok(())
}

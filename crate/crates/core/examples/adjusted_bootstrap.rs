//! Protocol-adjusted disparity for sex with each other attribute as a
//! covariate, with percentile bootstrap intervals.

use pa_fairness::inference::{adjusted_audit, BootstrapConfig};
use pa_fairness::report::ADJUSTED_ORDER;
use pa_fairness::stats::ToleranceBand;
use pa_fairness::synth::{generate_cohort, true_delta, SynthSpec};
use pa_fairness::Attribute;

fn main() -> pa_fairness::Result<()> {
    let spec = SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?;
    let cohort = generate_cohort(&spec)?;
    let band = ToleranceBand::default();
    let cfg = BootstrapConfig { n_resamples: 500, ..BootstrapConfig::default() };
    println!("population difference for sex: {:+.2} pp", 100.0 * true_delta(&spec));

    for covariate in ADJUSTED_ORDER.into_iter().filter(|&a| a != Attribute::Sex) {
        let r = adjusted_audit(&cohort, Attribute::Sex, covariate, &cfg, &band)?;
        println!(
            "{:<16} {:+.2} pp  CI [{:+.2}, {:+.2}]  {:?}, evidence {:.0}% ({}), {} discarded",
            r.adjustment_set,
            100.0 * r.adj_delta,
            100.0 * r.verdict.ci_lo,
            100.0 * r.verdict.ci_hi,
            r.verdict.classification,
            100.0 * r.verdict.evidence_ratio,
            r.verdict.strength.label(),
            r.discarded_resamples,
        );
    }
    Ok(())
}

//! Unadjusted error-rate comparison for every protected attribute of a
//! synthetic cohort, followed by the same statistics computed by hand from
//! two group summaries.

use pa_fairness::stats::{
    classify_tolerance, evidence_ratio, power_two_prop, two_prop_z, unadjusted_audit, wald_ci_diff,
    ProportionSummary, ToleranceBand,
};
use pa_fairness::synth::{generate_cohort, SynthSpec};
use pa_fairness::Attribute;

fn main() -> pa_fairness::Result<()> {
    let spec = SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?;
    let cohort = generate_cohort(&spec)?;
    let band = ToleranceBand::default();

    println!("{:<5} {:>14} {:>14} {:>8} {:>7} {:>18} {:>6}  verdict", "attr", "group 0", "group 1", "Δ (pp)", "p", "95% CI (pp)", "power");
    for attribute in Attribute::ALL {
        let r = unadjusted_audit(&cohort, attribute, &band)?;
        let [s0, s1] = &r.summaries;
        println!(
            "{:<5} {:>14} {:>14} {:>+8.2} {:>7.3} {:>18} {:>6.2}  {:?}{}",
            attribute.name(),
            format!("{} {:.1}%", s0.group_label, 100.0 * s0.rate),
            format!("{} {:.1}%", s1.group_label, 100.0 * s1.rate),
            100.0 * r.delta,
            r.p_value,
            format!("[{:+.2}, {:+.2}]", 100.0 * r.verdict.ci_lo, 100.0 * r.verdict.ci_hi),
            r.power,
            r.conclusion(),
            if r.underpowered { " (underpowered)" } else { "" },
        );
    }

    // The building blocks, applied to two summaries directly.
    let s0 = ProportionSummary::new("Male", 55, 1100)?;
    let s1 = ProportionSummary::new("Female", 98, 1400)?;
    let test = two_prop_z(&s0, &s1);
    let ci = wald_ci_diff(&s0, &s1, band.alpha);
    let (ratio, strength) = evidence_ratio(ci, &band);
    let baseline = (s0.errors + s1.errors) as f64 / (s0.n + s1.n) as f64;
    println!(
        "\nhand-built: z = {:.3}, p = {:.4}, CI [{:+.4}, {:+.4}], {:?}, evidence {:.0}% ({}), power {:.3}",
        test.z,
        test.p_value,
        ci.lo,
        ci.hi,
        classify_tolerance(ci, &band),
        100.0 * ratio,
        strength.label(),
        power_two_prop(s0.n, s1.n, baseline, &band)?,
    );
    Ok(())
}

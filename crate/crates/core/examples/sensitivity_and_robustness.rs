//! Single-factor sensitivity for every attribute, then the complete-case
//! check: how much do the adjusted estimates move when cases with an
//! unknown covariate are dropped instead of kept as their own level?

use pa_fairness::glm::Factor;
use pa_fairness::inference::{adjusted_audit, complete_case_robustness, single_factor_sensitivity, BootstrapConfig};
use pa_fairness::report::ADJUSTED_ORDER;
use pa_fairness::stats::ToleranceBand;
use pa_fairness::synth::{generate_cohort, SynthSpec};

fn pp(x: f64) -> String {
    format!("{:+.2}", 100.0 * x)
}

fn main() -> pa_fairness::Result<()> {
    let spec = SynthSpec::from_toml_str(include_str!("data/synth_spec.toml"))?;
    let cohort = generate_cohort(&spec)?;
    let band = ToleranceBand::default();
    let cfg = BootstrapConfig { n_resamples: 200, ..BootstrapConfig::default() };

    println!("sensitivity: one control at a time");
    for attribute in ADJUSTED_ORDER {
        let controls = std::iter::once(Factor::Protocol)
            .chain(ADJUSTED_ORDER.into_iter().filter(|&a| a != attribute).map(Factor::Attribute));
        let estimates: Vec<String> = controls
            .map(|c| match single_factor_sensitivity(&cohort, attribute, c, &cfg, &band) {
                Ok(r) => format!("{} {}", c.title(), pp(r.adj_delta)),
                Err(e) => format!("{} failed ({e})", c.title()),
            })
            .collect();
        println!("  {:<5} {}", attribute.name(), estimates.join(", "));
    }

    println!("\nrobustness: unknown level vs complete case");
    for attribute in ADJUSTED_ORDER {
        for covariate in ADJUSTED_ORDER.into_iter().filter(|&a| a != attribute) {
            let kept = adjusted_audit(&cohort, attribute, covariate, &cfg, &band);
            let dropped = complete_case_robustness(&cohort, attribute, covariate, &cfg, &band);
            match (kept, dropped) {
                (Ok(k), Ok(d)) => println!(
                    "  {:<5} {:<16} {} vs {}  (width {:.2} vs {:.2} pp, {} cases dropped)",
                    attribute.name(),
                    k.adjustment_set,
                    pp(k.adj_delta),
                    pp(d.adj_delta),
                    100.0 * k.ci().width(),
                    100.0 * d.ci().width(),
                    d.dropped_rows
                ),
                (k, d) => println!(
                    "  {:<5} + {}: {}",
                    attribute.name(),
                    covariate.name(),
                    k.err().or(d.err()).map(|e| e.to_string()).unwrap_or_default()
                ),
            }
        }
    }
    Ok(())
}

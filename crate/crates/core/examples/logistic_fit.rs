//! Fit a logistic model from an explicit design and standardize it.
//!
//! Two protocols with different base rates and a group mix that differs
//! between them: the raw rate difference mixes protocol and group, the
//! protocol-adjusted difference does not.

use pa_fairness::glm::{fit_logistic_irls, marginal_standardization, DesignMatrix, IrlsControls};

fn main() -> pa_fairness::Result<()> {
    // (protocol, group, cases, errors)
    let cells = [(0.0, 0.0, 800, 40), (0.0, 1.0, 200, 12), (1.0, 0.0, 200, 20), (1.0, 1.0, 800, 96)];
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (protocol, group, n, errors) in cells {
        for i in 0..n {
            // Columns: intercept, attribute indicator, protocol dummy.
            rows.push(vec![1.0, group, protocol]);
            y.push(if i < errors { 1.0 } else { 0.0 });
        }
    }
    let columns = vec!["(Intercept)".into(), "A".into(), "protocol[P2]".into()];
    let design = DesignMatrix::from_rows(columns, &rows, y)?;
    let fit = fit_logistic_irls(&design, &IrlsControls::default())?;
    println!("converged in {} iterations, deviance {:.3}", fit.iterations, fit.deviance);
    for (name, b) in fit.columns.iter().zip(&fit.coefficients) {
        println!("  {name:<12} {b:+.4}  (odds ratio {:.3})", b.exp());
    }

    let std = marginal_standardization(&fit, &design)?;
    let raw = 108.0 / 1000.0 - 60.0 / 1000.0;
    println!("raw difference      {:+.2} pp", 100.0 * raw);
    println!(
        "adjusted difference {:+.2} pp  ({:.2}% vs {:.2}%)",
        100.0 * std.adj_delta,
        100.0 * std.p_adj_1,
        100.0 * std.p_adj_0
    );
    Ok(())
}

//! Expectiles and asymmetric correlations of a skewed sample.
//!
//! ```text
//! cargo run --example expectiles
//! ```

use hidetify::stats::{asymmetric_correlation, asymmetric_moments, empirical_expectile};

fn main() -> hidetify::Result<()> {
    // Right-skewed response: a few large values.
    let y = [0.2, 0.4, 0.5, 0.7, 0.9, 1.1, 1.3, 2.0, 4.5, 9.0];
    let x = [1.0, 1.2, 0.8, 1.5, 1.9, 2.1, 2.0, 2.8, 3.1, 5.5];

    println!(
        "{:>5} {:>10} {:>10} {:>10}",
        "tau", "expectile", "sigma", "corr(x,y)"
    );
    for tau in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let m = asymmetric_moments(&y, tau)?;
        let r = asymmetric_correlation(&x, &y, tau)?;
        println!(
            "{tau:>5.2} {:>10.4} {:>10.4} {r:>10.4}",
            m.mu_tau, m.sigma_tau
        );
    }

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    println!(
        "mean {mean:.4}, 0.5-expectile {:.4}",
        empirical_expectile(&y, 0.5)?
    );
    Ok(())
}

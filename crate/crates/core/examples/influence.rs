//! Leave-one-out and random-subset influence of every row in a small sample
//! with one planted outlier.

use hidetify::influence::{asym_him, subset_scores, SubsetFamily};
use hidetify::simgen::generate_clean;
use hidetify::{DataMatrix, ExpectileSequence};

fn main() -> hidetify::Result<()> {
    let clean = generate_clean(40, 30, 11)?.data;
    let mut y = clean.response().to_vec();
    y[7] += 12.0;
    let values: Vec<f64> = clean.columns().flatten().copied().collect();
    let data = DataMatrix::new(clean.n(), clean.p(), values, y)?;

    let taus = ExpectileSequence::default();
    let pool: Vec<usize> = (0..data.n()).collect();
    let mut rows = Vec::new();
    for k in 0..data.n() {
        let him = asym_him(&data, k, &taus)?;
        let family = SubsetFamily::draw(&pool, k, 5, 20, k as u64)?;
        let (t_min, t_max) = subset_scores(&data, &family, &taus)?;
        rows.push((k, him, t_min, t_max));
    }
    rows.sort_by(|a, b| b.3.statistic.total_cmp(&a.3.statistic));

    println!(
        "{:>4} {:>10} {:>9} {:>9} {:>9} {:>9}",
        "row", "asymHIM", "T_min", "p_min", "T_max", "p_max"
    );
    for (k, him, lo, hi) in rows.iter().take(6) {
        println!(
            "{k:>4} {him:>10.5} {:>9.3} {:>9.2e} {:>9.3} {:>9.2e}",
            lo.statistic, lo.p_value, hi.statistic, hi.p_value
        );
    }
    Ok(())
}

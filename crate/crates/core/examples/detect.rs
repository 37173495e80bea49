//! Run every detector on a CSV dataset and print the rows each one flags.
//!
//! ```text
//! cargo run --release --example detect -- path/to/data.csv
//! ```
//!
//! Without an argument a contaminated sample is generated in memory.

use std::path::Path;

use hidetify::io::{read_dataset_file, ResponseSelector};
use hidetify::simgen::{contaminate, generate_clean, ContaminationModel, ContaminationSpec};
use hidetify::{Detector, RammParams};

fn main() -> hidetify::Result<()> {
    let (data, truth) = match std::env::args().nth(1) {
        Some(path) => {
            let loaded = read_dataset_file(Path::new(&path), &ResponseSelector::default(), true)?;
            println!("{path}: n = {}, p = {}", loaded.data.n(), loaded.data.p());
            (loaded.data, None)
        }
        None => {
            let clean = generate_clean(100, 150, 3)?;
            let sample = contaminate(
                &clean,
                &ContaminationSpec::new(ContaminationModel::Swamping, 10.0, 3),
            )?;
            (sample.data, Some(sample.truth))
        }
    };
    if let Some(t) = &truth {
        println!("planted: {t:?}");
    }

    let params = RammParams::default().with_seed(42);
    for detector in Detector::ALL {
        let result = detector.run(&data, &params)?;
        println!(
            "{:>8}: {} rows in {} iteration(s) {:?}",
            detector.name(),
            result.influential.len(),
            result.iterations_used,
            result.influential
        );
    }
    Ok(())
}

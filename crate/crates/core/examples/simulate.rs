//! A small Monte Carlo benchmark of the four detectors under each
//! contamination model, summarised as mean detection rates.

use hidetify::downstream::{simulate_detection, summarize, SimulationConfig};
use hidetify::simgen::{ContaminationModel, ContaminationSpec};
use hidetify::{Detector, RammParams};

fn main() -> hidetify::Result<()> {
    for model in ContaminationModel::ALL {
        let config = SimulationConfig {
            n: 80,
            p: 100,
            contamination: ContaminationSpec::new(model, 10.0, 0),
            replications: 4,
            seed: 1,
            params: RammParams::default(),
        };
        let records = simulate_detection(&config, &Detector::ALL)?;
        println!("model {}", model.label());
        for s in summarize(&records) {
            println!("  {:>8} {:>8} mean {:.3}", s.method, s.metric, s.mean);
        }
    }
    Ok(())
}

//! Detection of influential observations in high-dimensional linear
//! regression using expectile-based asymmetric correlations.
//!
//! The building blocks are layered:
//!
//! - [`stats`]: empirical expectiles and asymmetric correlations;
//! - [`influence`]: leave-one-out and random-subset influence measures;
//! - [`ramm`]: the Min/Max/Validation multiple-deletion procedure;
//! - [`detector`]: the four detectors built from these pieces;
//! - [`simgen`]: contaminated data generators and detection metrics;
//! - [`downstream`]: lasso fits on cleaned data and Monte Carlo benchmarks;
//! - [`io`] and [`cli`]: CSV formats and the command-line front end.
//!
//! ```
//! use hidetify::{simgen, Detector, RammParams};
//!
//! let clean = simgen::generate_clean(40, 30, 1).unwrap();
//! let spec = simgen::ContaminationSpec::new(simgen::ContaminationModel::Masking, 10.0, 2);
//! let sample = simgen::contaminate(&clean, &spec).unwrap();
//! let result = Detector::AsymHim.run(&sample.data, &RammParams::default()).unwrap();
//! assert!(result.influential.len() <= 40);
//! ```

pub mod chisq;
pub mod cli;
pub mod data;
pub mod detector;
pub mod downstream;
pub mod error;
pub mod influence;
pub mod io;
pub mod ramm;
pub mod seed;
pub mod simgen;
pub mod stats;

pub use data::DataMatrix;
pub use detector::Detector;
pub use error::{HidetifyError, Result};
pub use ramm::{DetectionResult, RammParams};
pub use stats::ExpectileSequence;

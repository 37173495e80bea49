use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::ramm::{self, DetectionResult, RammParams};
use crate::stats::ExpectileSequence;

/// The four detectors compared throughout the crate.
///
/// `Mip` and `Him` are the symmetric (`τ = 0.5`) reductions of `AsymMip` and
/// `AsymHim`: they run the same code with the level sequence replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    /// Min/Max/Validation multiple deletion over the configured levels.
    #[serde(rename = "asymMIP")]
    AsymMip,
    #[serde(rename = "MIP")]
    Mip,
    /// Single leave-one-out test over the configured levels.
    #[serde(rename = "asymHIM")]
    AsymHim,
    #[serde(rename = "HIM")]
    Him,
}

impl Detector {
    pub const ALL: [Detector; 4] = [
        Detector::AsymMip,
        Detector::Mip,
        Detector::AsymHim,
        Detector::Him,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Detector::AsymMip => "asymMIP",
            Detector::Mip => "MIP",
            Detector::AsymHim => "asymHIM",
            Detector::Him => "HIM",
        }
    }

    /// The parameters actually used: symmetric detectors force `τ = 0.5`.
    pub fn effective_params(self, params: &RammParams) -> RammParams {
        match self {
            Detector::AsymMip | Detector::AsymHim => params.clone(),
            Detector::Mip | Detector::Him => {
                params.clone().with_taus(ExpectileSequence::symmetric())
            }
        }
    }

    pub fn run(self, data: &DataMatrix, params: &RammParams) -> Result<DetectionResult> {
        let params = self.effective_params(params);
        match self {
            Detector::AsymMip | Detector::Mip => ramm::detect(data, &params),
            Detector::AsymHim | Detector::Him => ramm::single_detection(data, &params),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = HidetifyError;

    fn from_str(s: &str) -> Result<Self> {
        Detector::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                HidetifyError::InvalidParameter(format!(
                    "unknown detector {s:?} (expected asymMIP, MIP, asymHIM or HIM)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for d in Detector::ALL {
            assert_eq!(d.name().parse::<Detector>().unwrap(), d);
        }
        assert_eq!("asymmip".parse::<Detector>().unwrap(), Detector::AsymMip);
        assert!("cook".parse::<Detector>().is_err());
    }

    #[test]
    fn symmetric_detectors_use_half_level() {
        let p = RammParams::default();
        assert_eq!(
            Detector::Mip.effective_params(&p).taus,
            ExpectileSequence::symmetric()
        );
        assert_eq!(Detector::AsymHim.effective_params(&p).taus, p.taus);
    }
}

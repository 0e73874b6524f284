//! JSON documents for differentials. Complex numbers are `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qd::{Chart, Pole, QuadDifferential};

pub type Pair = [f64; 2];

pub fn to_complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    /// Location of the pole.
    pub z: Pair,
    /// Laurent coefficients `c_{-k}, ..., c_{-1}`.
    pub laurent: Vec<Pair>,
}

/// `q(z) = Σ_poles Σ_m c_{-m} (z - p)^{-m} + Σ_n r_n z^n`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialSpec {
    pub chart: Chart,
    #[serde(default)]
    pub poles: Vec<PoleSpec>,
    /// Ascending coefficients of the polynomial part.
    #[serde(default)]
    pub regular: Vec<Pair>,
    #[serde(default)]
    pub description: String,
}

impl DifferentialSpec {
    pub fn build(&self) -> Result<QuadDifferential> {
        let poles = self
            .poles
            .iter()
            .map(|p| Pole {
                location: to_complex(p.z),
                laurent: p.laurent.iter().copied().map(to_complex).collect(),
            })
            .collect();
        QuadDifferential::new(
            self.chart,
            poles,
            self.regular.iter().copied().map(to_complex).collect(),
            self.description.clone(),
        )
    }
}

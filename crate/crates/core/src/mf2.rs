//! Coordinates on measured foliations with centers, and the map from
//! prescribed data to residues.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qd::Residue;

/// `6g - 6 + 3n`, for `2g - 2 + n > 0`.
pub fn dimension(genus: u32, centers: u32) -> Result<u32> {
    let (g, n) = (genus as i64, centers as i64);
    if 2 * g - 2 + n <= 0 {
        return Err(Error::InvalidInput(format!(
            "need 2g - 2 + n > 0, got g = {genus}, n = {centers}"
        )));
    }
    Ok((6 * g - 6 + 3 * n) as u32)
}

/// Measure and twist along one interior pants curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveCoordinate {
    pub measure: f64,
    pub twist: f64,
}

/// Dehn–Thurston-style data: `3g - 3 + n` (measure, twist) pairs and one
/// linking-loop measure per center. Tuples are stored as given; zero measure
/// with nonzero twist is not identified with zero twist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoords", deny_unknown_fields)]
pub struct Mf2Coords {
    genus: u32,
    centers: u32,
    interior_curves: Vec<CurveCoordinate>,
    center_measures: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoords {
    genus: u32,
    centers: u32,
    interior_curves: Vec<CurveCoordinate>,
    center_measures: Vec<f64>,
}

impl TryFrom<RawCoords> for Mf2Coords {
    type Error = Error;
    fn try_from(raw: RawCoords) -> Result<Self> {
        Self::new(raw.genus, raw.centers, raw.interior_curves, raw.center_measures)
    }
}

impl Mf2Coords {
    pub fn new(
        genus: u32,
        centers: u32,
        interior_curves: Vec<CurveCoordinate>,
        center_measures: Vec<f64>,
    ) -> Result<Self> {
        dimension(genus, centers)?;
        let curves = 3 * genus as usize + centers as usize - 3;
        if interior_curves.len() != curves {
            return Err(Error::InvalidInput(format!(
                "expected {curves} interior curves, got {}",
                interior_curves.len()
            )));
        }
        if center_measures.len() != centers as usize {
            return Err(Error::InvalidInput(format!(
                "expected {centers} center measures, got {}",
                center_measures.len()
            )));
        }
        let finite_nonneg = |m: f64| m >= 0.0 && m.is_finite();
        if !interior_curves
            .iter()
            .all(|c| finite_nonneg(c.measure) && c.twist.is_finite())
            || !center_measures.iter().copied().all(finite_nonneg)
        {
            return Err(Error::InvalidInput("measures must be finite and nonnegative".into()));
        }
        Ok(Self {
            genus,
            centers,
            interior_curves,
            center_measures,
        })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn centers(&self) -> u32 {
        self.centers
    }

    pub fn interior_curves(&self) -> &[CurveCoordinate] {
        &self.interior_curves
    }

    pub fn center_measures(&self) -> &[f64] {
        &self.center_measures
    }

    /// Number of real parameters, `2(3g - 3 + n) + n`.
    pub fn parameter_count(&self) -> usize {
        2 * self.interior_curves.len() + self.center_measures.len()
    }

    pub fn dimension(&self) -> u32 {
        dimension(self.genus, self.centers).expect("validated")
    }
}

/// Residue with `Re a = τ/2π` and `Im a = c` when `τ = 0`, `Im a = ln c` otherwise.
pub fn prescribe_residue(tau: f64, c: f64) -> Result<Residue> {
    if !(tau >= 0.0 && tau.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need tau >= 0 and c > 0, got tau = {tau}, c = {c}"
        )));
    }
    let re = tau / (2.0 * PI);
    let im = if tau == 0.0 { c } else { c.ln() };
    Residue::new(Complex64::new(re, im))
}

/// Inverse of [`prescribe_residue`].
pub fn residue_to_prescription(a: &Residue) -> (f64, f64) {
    let v = a.value();
    let tau = 2.0 * PI * v.re;
    (tau, if v.re == 0.0 { v.im } else { v.im.exp() })
}

/// `(2π|a|, Arg a)`.
pub fn end_params_from_residue(a: &Residue) -> (f64, f64) {
    (a.circumference(), a.angle_alpha())
}

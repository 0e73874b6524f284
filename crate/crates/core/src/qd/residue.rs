use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sense of spiralling at a pole with `Re(a) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    None,
    Positive,
    Negative,
}

/// Shape of the foliation in a sink neighborhood of a double pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterKind {
    Closed,
    Radial,
    SpiralPositive,
    SpiralNegative,
}

/// Complex residue at a double pole, normalized so that `Re(a) > 0`, or
/// `Re(a) = 0` and `Im(a) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    a: Complex64,
}

impl Residue {
    /// Accepts `a` only if it already satisfies the sign convention.
    pub fn new(a: Complex64) -> Result<Self> {
        if !a.is_finite() || a.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("residue must be finite and nonzero, got {a}")));
        }
        if a.re < 0.0 || (a.re == 0.0 && a.im <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "residue {a} violates the sign convention (Re > 0, or Re = 0 and Im > 0)"
            )));
        }
        Ok(Self { a })
    }

    /// Picks the conventional square root of the leading coefficient `a^2`.
    pub fn from_square(a_squared: Complex64) -> Result<Self> {
        let root = snap(a_squared.sqrt());
        let a = if root.re < 0.0 || (root.re == 0.0 && root.im < 0.0) {
            -root
        } else {
            root
        };
        Self::new(a)
    }

    /// From end parameters `(R, alpha)`: `a = (R / 2pi) e^{i alpha}`.
    pub fn from_end_params(circumference: f64, alpha: f64) -> Result<Self> {
        if !(circumference > 0.0) || !(-FRAC_PI_2..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::InvalidInput(format!(
                "end parameters need R > 0 and alpha in [-pi/2, pi/2], got ({circumference}, {alpha})"
            )));
        }
        // angles within rounding of -pi/2 are the same closed center as +pi/2
        let modulus = circumference / (2.0 * std::f64::consts::PI);
        if alpha.cos() <= 4.0 * f64::EPSILON {
            return Self::new(Complex64::new(0.0, modulus));
        }
        Self::new(Complex64::from_polar(modulus, alpha))
    }

    pub fn value(&self) -> Complex64 {
        self.a
    }

    pub fn real_part(&self) -> f64 {
        self.a.re
    }

    /// `Arg(a)`, in `[-pi/2, pi/2]` under the convention.
    pub fn angle_alpha(&self) -> f64 {
        if self.a.re == 0.0 {
            FRAC_PI_2
        } else {
            self.a.arg()
        }
    }

    pub fn handedness(&self) -> Handedness {
        if self.a.re > 0.0 && self.a.im > 0.0 {
            Handedness::Positive
        } else if self.a.re > 0.0 && self.a.im < 0.0 {
            Handedness::Negative
        } else {
            Handedness::None
        }
    }

    /// Circumference `2 pi |a|` of the flat cylinder around the pole.
    pub fn circumference(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.a.norm()
    }

    /// Transverse measure of a loop linking the pole, `2 pi Re(a)`.
    pub fn loop_measure(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.a.re
    }
}

/// Rounds components that are negligible relative to the modulus to zero, so
/// that exactly imaginary or exactly real residues survive floating point.
fn snap(a: Complex64) -> Complex64 {
    let tol = 4.0 * f64::EPSILON * a.norm();
    Complex64::new(
        if a.re.abs() <= tol { 0.0 } else { a.re },
        if a.im.abs() <= tol { 0.0 } else { a.im },
    )
}

/// Spiral handedness follows the sign of `Im(a)`.
pub fn classify_center(r: &Residue) -> CenterKind {
    let a = r.value();
    if a.re == 0.0 {
        CenterKind::Closed
    } else if a.im == 0.0 {
        CenterKind::Radial
    } else if a.im > 0.0 {
        CenterKind::SpiralPositive
    } else {
        CenterKind::SpiralNegative
    }
}

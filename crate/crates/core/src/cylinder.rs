//! Model cylindrical ends: the affine collapsing maps
//! `(x, θ) ↦ θ cos α + x sin α` on a flat cylinder of circumference `R`, their
//! energies, transverse measures and Hopf differentials, and the length–area
//! lower bound for equivariant maps of an annulus into a tree.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Foliation angle in `[-π/2, π/2]` with `±π/2` identified (stored as `π/2`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FoliationAngle(f64);

impl FoliationAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::InvalidInput(format!(
                "foliation angle must lie in [-pi/2, pi/2], got {alpha}"
            )));
        }
        Ok(Self(if alpha == -FRAC_PI_2 { FRAC_PI_2 } else { alpha }))
    }

    pub fn closed() -> Self {
        Self(FRAC_PI_2)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The closed-center angle `±π/2`.
    pub fn is_closed(self) -> bool {
        self.0 == FRAC_PI_2
    }

    /// `cos α`, exactly zero for a closed center.
    pub fn cos(self) -> f64 {
        if self.is_closed() {
            0.0
        } else {
            self.0.cos()
        }
    }

    pub fn sin(self) -> f64 {
        if self.is_closed() {
            1.0
        } else {
            self.0.sin()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Circle { circumference: f64 },
    Ray,
}

/// A model end `C_R` with foliation angle `α`, optionally truncated at length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEnd {
    pub circumference: f64,
    pub angle: FoliationAngle,
    /// `None` for the half-infinite end.
    pub length: Option<f64>,
}

impl ModelEnd {
    pub fn new(circumference: f64, alpha: f64, length: Option<f64>) -> Result<Self> {
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "circumference must be positive, got {circumference}"
            )));
        }
        if let Some(l) = length {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "truncation length must be finite and nonnegative, got {l}"
                )));
            }
        }
        Ok(Self {
            circumference,
            angle: FoliationAngle::new(alpha)?,
            length,
        })
    }

    pub fn target_kind(&self) -> TargetKind {
        if self.angle.is_closed() {
            TargetKind::Ray
        } else {
            TargetKind::Circle {
                circumference: self.circumference * self.angle.cos(),
            }
        }
    }

    /// Lift to the universal cover, equivariant under `θ ↦ θ + R` with target
    /// translation `R cos α`.
    pub fn lift(&self, x: f64, theta: f64) -> f64 {
        if self.angle.is_closed() {
            x
        } else {
            theta * self.angle.cos() + x * self.angle.sin()
        }
    }

    /// Value in the target: reduced modulo `R cos α` for a circle target.
    pub fn eval(&self, x: f64, theta: f64) -> f64 {
        match self.target_kind() {
            TargetKind::Ray => x,
            TargetKind::Circle { circumference } => self.lift(x, theta).rem_euclid(circumference),
        }
    }

    /// Seam offset of the lift across one turn of the cylinder.
    pub fn seam_offset(&self) -> f64 {
        self.circumference * self.angle.cos()
    }

    pub fn energy(&self) -> Option<f64> {
        self.length
            .map(|l| model_energy(self.circumference, self.angle.value(), l))
    }

    /// `(R cos α, L |sin α|)` transverse measures; the longitude is measured
    /// in the universal cover.
    pub fn transverse(&self) -> Option<(f64, f64)> {
        self.length.map(|l| {
            (
                self.circumference * self.angle.cos(),
                l * self.angle.sin().abs(),
            )
        })
    }

    pub fn hopf(&self) -> Complex64 {
        model_hopf(self.angle.value())
    }

    pub fn modulus(&self) -> Option<f64> {
        self.length.map(|l| l / self.circumference)
    }
}

/// Model map value reduced into the target.
pub fn model_map_eval(circumference: f64, alpha: f64, x: f64, theta: f64) -> Result<f64> {
    Ok(ModelEnd::new(circumference, alpha, None)?.eval(x, theta))
}

/// Unreduced lift of the model map.
pub fn model_map_lift(circumference: f64, alpha: f64, x: f64, theta: f64) -> Result<f64> {
    Ok(ModelEnd::new(circumference, alpha, None)?.lift(x, theta))
}

/// Energy `RL/2` of the model map on `C_R(L)`, independent of `α`.
pub fn model_energy(circumference: f64, _alpha: f64, length: f64) -> f64 {
    0.5 * circumference * length
}

pub fn model_transverse(circumference: f64, alpha: f64, length: f64) -> Result<(f64, f64)> {
    let end = ModelEnd::new(circumference, alpha, Some(length))?;
    Ok(end.transverse().expect("finite length"))
}

/// Length–area lower bound `M (C^2 + τ^2 / M^2) / 2` on the energy of an
/// equivariant map of an annulus of modulus `M` whose meridians have image
/// length at least `C` and whose longitudes have image length at least `τ`.
pub fn length_area_bound(modulus: f64, meridian: f64, longitude: f64) -> Result<f64> {
    if !(modulus > 0.0) {
        return Err(Error::InvalidInput(format!("modulus must be positive, got {modulus}")));
    }
    Ok(0.5 * modulus * (meridian * meridian + longitude * longitude / (modulus * modulus)))
}

/// Constant coefficient `e^{2iα}` of the Hopf differential of the model map in
/// the cylinder coordinate `ω = x + iθ`.
pub fn model_hopf(alpha: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * alpha)
}

/// Distance `x |sin α1 - sin α2|` between lifted images of `(x, θ)`.
pub fn model_divergence(alpha1: f64, alpha2: f64, x: f64) -> f64 {
    x * (alpha1.sin() - alpha2.sin()).abs()
}

/// Two model lifts stay a bounded distance apart exactly when their angles agree
/// (with `±π/2` identified).
pub fn models_bounded_apart(alpha1: f64, alpha2: f64) -> Result<bool> {
    Ok(FoliationAngle::new(alpha1)? == FoliationAngle::new(alpha2)?)
}

/// Deviation of the collapsing values of `(a^2 + c1 e^{-ω}) dω^2` along the
/// longitude `θ = 0` from the model `Im(a ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndDeviation {
    /// `sup_x |Im ∫_0^x sqrt(q) - Im(a x)|` over the sampled range.
    pub sup: f64,
    /// Deviation at the far end of the range.
    pub at_end: f64,
    /// Variation of the deviation over the second half of the range.
    pub tail_variation: f64,
}

pub fn perturbed_end_deviation(
    a: Complex64,
    c1: Complex64,
    x_max: f64,
    samples: usize,
) -> Result<EndDeviation> {
    if !(x_max > 0.0) || samples < 2 {
        return Err(Error::InvalidInput("need x_max > 0 and at least 2 samples".into()));
    }
    let q = |x: f64| a * a + c1 * (-x).exp();
    let h = x_max / samples as f64;
    // Roots aligned from the far end, where sqrt(q) ≈ a, back to x = 0.
    let mut roots = vec![Complex64::new(0.0, 0.0); samples + 1];
    let mut reference = a;
    for k in (0..=samples).rev() {
        let r = q(k as f64 * h).sqrt();
        if r.norm() < 1e-12 {
            return Err(Error::BranchAmbiguity {
                re: k as f64 * h,
                im: 0.0,
                distance: r.norm(),
            });
        }
        let r = crate::qd::quadrature::align_root(r, reference);
        roots[k] = r;
        reference = r;
    }
    // Gauss–Legendre 5-point per sample interval.
    const XG: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WG5: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let mut integral = Complex64::new(0.0, 0.0);
    let mut deviations = Vec::with_capacity(samples + 1);
    deviations.push(0.0);
    for k in 0..samples {
        let lo = k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in XG.iter().zip(WG5.iter()) {
            let r = crate::qd::quadrature::align_root(q(mid + 0.5 * h * x).sqrt(), roots[k]);
            acc += r * *w;
        }
        integral += acc * (0.5 * h);
        let x = (k + 1) as f64 * h;
        deviations.push(integral.im - (a * x).im);
    }
    let sup = deviations.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let at_end = *deviations.last().expect("nonempty");
    let half = deviations.len() / 2;
    let tail = &deviations[half..];
    let tail_variation = tail.iter().fold(f64::NEG_INFINITY, |m, d| m.max(*d))
        - tail.iter().fold(f64::INFINITY, |m, d| m.min(*d));
    Ok(EndDeviation {
        sup,
        at_end,
        tail_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    #[test]
    fn model_map_examples() {
        assert_eq!(model_map_eval(2.0 * PI, 0.0, 3.0, 1.25).unwrap(), 1.25);
        assert_eq!(model_map_eval(2.0 * PI, FRAC_PI_2, 3.0, 1.25).unwrap(), 3.0);
        assert_eq!(model_map_eval(2.0 * PI, -FRAC_PI_2, 3.0, 1.25).unwrap(), 3.0);
        let lift = model_map_lift(2.0 * PI, FRAC_PI_4, 1.0, 0.0).unwrap();
        assert!((lift - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_examples() {
        assert!((model_energy(2.0 * PI, 0.3, 5.0) - 5.0 * PI).abs() < 1e-14);
        assert_eq!(model_energy(3.0, 0.1, 0.0), 0.0);
        assert_eq!(model_energy(1.0, FRAC_PI_3, 1.0), 0.5);
    }

    #[test]
    fn energy_matches_quadrature_of_the_energy_integral() {
        // (1/2) ∫∫ (h_x^2 + h_θ^2) by a tensor Gauss rule on finite differences of the lift
        let end = ModelEnd::new(1.0, FRAC_PI_3, Some(1.0)).unwrap();
        let n = 16;
        let eps = 1e-5;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                let t = (j as f64 + 0.5) / n as f64;
                let hx = (end.lift(x + eps, t) - end.lift(x - eps, t)) / (2.0 * eps);
                let ht = (end.lift(x, t + eps) - end.lift(x, t - eps)) / (2.0 * eps);
                total += 0.5 * (hx * hx + ht * ht) / (n * n) as f64;
            }
        }
        assert!((total - 0.5).abs() < 1e-10, "{total}");
    }

    #[test]
    fn transverse_examples() {
        assert_eq!(model_transverse(2.0, 0.0, 3.0).unwrap(), (2.0, 0.0));
        assert_eq!(model_transverse(2.0, FRAC_PI_2, 3.0).unwrap(), (0.0, 3.0));
        let (m, l) = model_transverse(2.0, FRAC_PI_6, 3.0).unwrap();
        assert!((m - 3f64.sqrt()).abs() < 1e-15 && (l - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(length_area_bound(2.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(length_area_bound(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hopf_examples() {
        assert!((model_hopf(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((model_hopf(FRAC_PI_2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((model_hopf(FRAC_PI_4) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(model_divergence(0.4, 0.4, 100.0), 0.0);
        assert!((model_divergence(0.0, FRAC_PI_6, 10.0) - 5.0).abs() < 1e-14);
        assert!(models_bounded_apart(0.4, 0.4).unwrap());
        assert!(!models_bounded_apart(0.4, 0.5).unwrap());
        assert!(models_bounded_apart(FRAC_PI_2, -FRAC_PI_2).unwrap());
    }

    #[test]
    fn target_kind_follows_angle() {
        assert_eq!(ModelEnd::new(1.0, FRAC_PI_2, None).unwrap().target_kind(), TargetKind::Ray);
        assert_eq!(
            ModelEnd::new(2.0, 0.0, None).unwrap().target_kind(),
            TargetKind::Circle { circumference: 2.0 }
        );
    }

    #[test]
    fn exponential_perturbation_stays_bounded() {
        let a = Complex64::new(1.0, 1.0);
        let dev = perturbed_end_deviation(a, Complex64::new(0.8, -0.3), 20.0, 400).unwrap();
        // reported constant; the deviation settles
        eprintln!("sup |collapsing - model| on [0, 20] = {:.6e}", dev.sup);
        assert!(dev.sup.is_finite() && dev.sup < 1.0);
        assert!(dev.tail_variation < 1e-4);
        let none = perturbed_end_deviation(a, Complex64::new(0.0, 0.0), 20.0, 100).unwrap();
        assert!(none.sup < 1e-12);
    }

    proptest! {
        #[test]
        fn residue_round_trip_reproduces_meridian(re in 0.0f64..10.0, im in -10.0f64..10.0) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let r = crate::qd::Residue::new(Complex64::new(re, im)).unwrap();
            let end = ModelEnd::new(r.circumference(), r.angle_alpha(), Some(1.0)).unwrap();
            let (meridian, _) = end.transverse().unwrap();
            prop_assert!((meridian - r.loop_measure()).abs() <= 1e-12 * (1.0 + meridian));
            let back = crate::qd::Residue::from_end_params(r.circumference(), r.angle_alpha()).unwrap();
            prop_assert!((back.value() - r.value()).norm() <= 1e-12 * (1.0 + r.value().norm()));
        }

        #[test]
        fn bound_equals_model_energy(r in 0.1f64..20.0, alpha in -FRAC_PI_2..FRAC_PI_2, l in 0.01f64..50.0) {
            let end = ModelEnd::new(r, alpha, Some(l)).unwrap();
            let (c, tau) = end.transverse().unwrap();
            let bound = length_area_bound(l / r, c, tau).unwrap();
            let energy = end.energy().unwrap();
            prop_assert!((bound - energy).abs() <= 1e-12 * energy.max(1.0));
        }

        #[test]
        fn hopf_unit_modulus(alpha in -FRAC_PI_2..FRAC_PI_2) {
            let h = model_hopf(alpha);
            prop_assert!((h.norm() - 1.0).abs() < 1e-15);
            let diff = (h.arg() - 2.0 * alpha).rem_euclid(2.0 * PI);
            prop_assert!(diff < 1e-12 || (2.0 * PI - diff) < 1e-12);
        }

        #[test]
        fn lift_is_equivariant(r in 0.1f64..20.0, alpha in -FRAC_PI_2..FRAC_PI_2, x in 0.0f64..10.0, t in -10.0f64..10.0) {
            let end = ModelEnd::new(r, alpha, None).unwrap();
            let jump = end.lift(x, t + r) - end.lift(x, t);
            prop_assert!((jump - r * end.angle.cos()).abs() <= 1e-12 * (1.0 + r + t.abs()));
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::residue::Residue;
use crate::error::{Error, Result};

/// Relative tolerance used to decide that a Taylor coefficient vanishes.
const ZERO_COEFF_TOL: f64 = 1e-10;

/// Planar chart on which a differential is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Closed unit disk.
    Disk,
    Annulus { r_in: f64, r_out: f64 },
    Plane,
}

impl Chart {
    pub fn validate(&self) -> Result<()> {
        if let Chart::Annulus { r_in, r_out } = *self {
            if !(r_in >= 0.0 && r_out > r_in && r_out.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "chart: annulus radii must satisfy 0 <= r_in < r_out, got ({r_in}, {r_out})"
                )));
            }
        }
        Ok(())
    }

    /// Membership in the closure of the chart, with a small slack.
    pub fn contains_closure(&self, z: Complex64) -> bool {
        let slack = 1e-12;
        match *self {
            Chart::Disk => z.norm() <= 1.0 + slack,
            Chart::Annulus { r_in, r_out } => {
                let r = z.norm();
                r >= r_in - slack && r <= r_out + slack
            }
            Chart::Plane => z.is_finite(),
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Chart::Disk => z.norm() < 1.0,
            Chart::Annulus { r_in, r_out } => {
                let r = z.norm();
                r > r_in && r < r_out
            }
            Chart::Plane => z.is_finite(),
        }
    }

    /// Euclidean radius of the chart about the origin, if bounded.
    pub fn outer_radius(&self) -> Option<f64> {
        match *self {
            Chart::Disk => Some(1.0),
            Chart::Annulus { r_out, .. } => Some(r_out),
            Chart::Plane => None,
        }
    }
}

/// A pole with its principal part `c_{-k}/(z-p)^k + ... + c_{-1}/(z-p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    /// `laurent[0] = c_{-k}` down to `laurent[k-1] = c_{-1}`.
    pub laurent: Vec<Complex64>,
}

impl Pole {
    pub fn order(&self) -> usize {
        self.laurent.len()
    }

    fn tail(&self, z: Complex64) -> Complex64 {
        let w = (z - self.location).inv();
        // c_{-k} w^k + ... + c_{-1} w, by Horner in w
        self.laurent
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| (acc + c) * w)
    }
}

/// Kind of an isolated singular point of the differential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Pole,
    Zero,
}

/// A meromorphic quadratic differential `q(z) dz^2` on a planar chart, given by
/// a polynomial regular part plus the principal parts at its poles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadDifferential {
    chart: Chart,
    poles: Vec<Pole>,
    regular: Poly,
    description: String,
    zeros: Vec<Complex64>,
}

impl QuadDifferential {
    pub fn new(
        chart: Chart,
        poles: Vec<Pole>,
        regular: Vec<Complex64>,
        description: impl Into<String>,
    ) -> Result<Self> {
        chart.validate()?;
        for (idx, pole) in poles.iter().enumerate() {
            if !pole.location.is_finite() {
                return Err(Error::InvalidInput(format!("poles[{idx}].z: not finite")));
            }
            if !chart.contains_closure(pole.location) {
                return Err(Error::InvalidInput(format!(
                    "poles[{idx}].z: location {} lies outside the chart",
                    pole.location
                )));
            }
            match pole.laurent.first() {
                None => {
                    return Err(Error::InvalidInput(format!("poles[{idx}].laurent: empty")));
                }
                Some(lead) if lead.norm() == 0.0 => {
                    return Err(Error::InvalidInput(format!(
                        "poles[{idx}].laurent: leading coefficient is zero"
                    )));
                }
                _ => {}
            }
            if pole.laurent.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("poles[{idx}].laurent: not finite")));
            }
            for (jdx, other) in poles.iter().enumerate().take(idx) {
                if other.location == pole.location {
                    return Err(Error::InvalidInput(format!(
                        "poles[{idx}].z: coincides with poles[{jdx}]"
                    )));
                }
            }
        }
        if regular.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("regular: not finite".into()));
        }
        let regular = Poly::new(regular);
        let mut q = Self {
            chart,
            poles,
            regular,
            description: description.into(),
            zeros: Vec::new(),
        };
        let numerator = q.numerator();
        if numerator.trimmed(1e-14).is_zero() {
            return Err(Error::InvalidInput("differential is identically zero".into()));
        }
        q.zeros = numerator.roots();
        Ok(q)
    }

    /// `c dz^2` for a constant `c` on the plane.
    pub fn constant(c: Complex64) -> Result<Self> {
        Self::new(Chart::Plane, Vec::new(), vec![c], "constant")
    }

    /// `(a^2 / z^2) dz^2` on the unit disk.
    pub fn pure_pole(a: Complex64) -> Result<Self> {
        Self::new(
            Chart::Disk,
            vec![Pole {
                location: Complex64::new(0.0, 0.0),
                laurent: vec![a * a, Complex64::new(0.0, 0.0)],
            }],
            Vec::new(),
            "pure double pole",
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn regular_part(&self) -> &[Complex64] {
        &self.regular.coeffs
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Zeros of `q` in the plane (with multiplicity), whether or not inside the chart.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// Poles and zeros that matter for the chart's closure.
    pub fn singularities(&self) -> Vec<(Complex64, SingularKind)> {
        let mut out: Vec<_> = self
            .poles
            .iter()
            .map(|p| (p.location, SingularKind::Pole))
            .collect();
        for z in &self.zeros {
            if self.chart.contains_closure(*z) || self.chart == Chart::Plane {
                out.push((*z, SingularKind::Zero));
            }
        }
        out
    }

    /// Distance from `z` to the nearest pole or zero, with its kind.
    pub fn nearest_singularity(&self, z: Complex64) -> Option<(f64, Complex64, SingularKind)> {
        self.poles
            .iter()
            .map(|p| ((z - p.location).norm(), p.location, SingularKind::Pole))
            .chain(
                self.zeros
                    .iter()
                    .map(|w| ((z - w).norm(), *w, SingularKind::Zero)),
            )
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.regular.eval(z) + self.poles.iter().map(|p| p.tail(z)).sum::<Complex64>()
    }

    /// `q = N / D` with `D = prod (z - p)^k`.
    fn numerator(&self) -> Poly {
        let denominators: Vec<Poly> = self
            .poles
            .iter()
            .map(|p| Poly::linear_power(p.location, p.order()))
            .collect();
        let full = denominators.iter().fold(Poly::one(), |acc, d| acc.mul(d));
        let mut n = self.regular.mul(&full);
        for (idx, pole) in self.poles.iter().enumerate() {
            let others = denominators
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .fold(Poly::one(), |acc, (_, d)| acc.mul(d));
            let k = pole.order();
            for (pos, c) in pole.laurent.iter().enumerate() {
                // c_{-j} with j = k - pos contributes c (z-p)^{k-j} * others
                let j = k - pos;
                let term = Poly::linear_power(pole.location, k - j).mul(&others).scale(*c);
                n = n.add(&term);
            }
        }
        n
    }

    fn declared_pole(&self, p: Complex64) -> Option<&Pole> {
        self.poles
            .iter()
            .find(|pole| (pole.location - p).norm() <= 1e-12 * (1.0 + pole.location.norm()))
    }

    /// Order of `q` at `p`: `k > 0` for a pole of order `k`, `0` at a regular
    /// nonvanishing point and `-m` at a zero of order `m`.
    pub fn pole_order(&self, p: Complex64) -> Result<i32> {
        if !self.chart.contains_closure(p) {
            return Err(Error::OutsideChart { re: p.re, im: p.im });
        }
        if let Some(pole) = self.declared_pole(p) {
            return Ok(pole.order() as i32);
        }
        let taylor = self.numerator().taylor_at(p);
        let scale = taylor.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let order = taylor
            .iter()
            .position(|c| c.norm() > ZERO_COEFF_TOL * scale)
            .unwrap_or(0);
        Ok(-(order as i32))
    }

    /// Leading Laurent coefficient `c_{-k}` of a declared pole.
    pub fn leading_coefficient(&self, p: Complex64) -> Option<Complex64> {
        self.declared_pole(p).map(|pole| pole.laurent[0])
    }

    /// Residue at a double pole.
    pub fn residue(&self, p: Complex64) -> Result<Residue> {
        let order = self.pole_order(p)?;
        if order != 2 {
            return Err(Error::UnsupportedOrder { order });
        }
        let lead = self
            .leading_coefficient(p)
            .expect("order-2 points are declared poles");
        Residue::from_square(lead)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn order_of_double_pole() {
        let q = QuadDifferential::pure_pole(c(1.0, 0.0)).unwrap();
        assert_eq!(q.pole_order(c(0.0, 0.0)).unwrap(), 2);
        assert_eq!(q.pole_order(c(0.5, 0.0)).unwrap(), 0);
    }

    #[test]
    fn order_of_simple_zero() {
        let q = QuadDifferential::new(Chart::Disk, vec![], vec![c(0.0, 0.0), c(1.0, 0.0)], "z")
            .unwrap();
        assert_eq!(q.pole_order(c(0.0, 0.0)).unwrap(), -1);
        assert_eq!(q.zeros().len(), 1);
    }

    #[test]
    fn order_of_triple_pole() {
        // (z - 1)/z^3 = -1/z^3 + 1/z^2
        let q = QuadDifferential::new(
            Chart::Disk,
            vec![Pole {
                location: c(0.0, 0.0),
                laurent: vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            }],
            vec![],
            "(z-1)/z^3",
        )
        .unwrap();
        assert_eq!(q.pole_order(c(0.0, 0.0)).unwrap(), 3);
        // the zero at z = 1 sits on the disk boundary
        assert_eq!(q.pole_order(c(1.0, 0.0)).unwrap(), -1);
        assert!((q.eval(c(0.5, 0.0)) - c(-4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_zero_detected() {
        let q = QuadDifferential::new(
            Chart::Plane,
            vec![],
            vec![c(0.25, 0.0), c(-1.0, 0.0), c(1.0, 0.0)],
            "(z-1/2)^2",
        )
        .unwrap();
        assert_eq!(q.pole_order(c(0.5, 0.0)).unwrap(), -2);
    }

    #[test]
    fn outside_chart_is_domain_error() {
        let q = QuadDifferential::pure_pole(c(1.0, 0.0)).unwrap();
        assert!(matches!(
            q.pole_order(c(2.0, 0.0)),
            Err(Error::OutsideChart { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let zero_lead = QuadDifferential::new(
            Chart::Disk,
            vec![Pole {
                location: c(0.0, 0.0),
                laurent: vec![c(0.0, 0.0), c(1.0, 0.0)],
            }],
            vec![],
            "",
        );
        assert!(zero_lead.is_err());
        assert!(QuadDifferential::new(Chart::Plane, vec![], vec![], "").is_err());
        let outside = QuadDifferential::new(
            Chart::Disk,
            vec![Pole {
                location: c(3.0, 0.0),
                laurent: vec![c(1.0, 0.0)],
            }],
            vec![],
            "",
        );
        assert!(outside.is_err());
    }

    #[test]
    fn residue_requires_order_two() {
        let q = QuadDifferential::new(
            Chart::Disk,
            vec![Pole {
                location: c(0.0, 0.0),
                laurent: vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            }],
            vec![],
            "",
        )
        .unwrap();
        assert_eq!(
            q.residue(c(0.0, 0.0)),
            Err(Error::UnsupportedOrder { order: 3 })
        );
    }
}

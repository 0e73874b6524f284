//! Dense complex polynomials in ascending coefficient order.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    /// `coeffs[k]` multiplies `z^k`.
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim_exact();
        p
    }

    pub fn one() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0)])
    }

    /// `(z - root)^power`
    pub fn linear_power(root: Complex64, power: usize) -> Self {
        let factor = Poly::new(vec![-root, Complex64::new(1.0, 0.0)]);
        (0..power).fold(Poly::one(), |acc, _| acc.mul(&factor))
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
    }

    /// Drops leading coefficients that are negligible relative to the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Coefficients of the same polynomial expanded around `center`.
    pub fn taylor_at(&self, center: Complex64) -> Vec<Complex64> {
        // repeated synthetic division
        let mut c = self.coeffs.clone();
        let n = c.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let next = c[j + 1];
                c[j] += center * next;
            }
        }
        c
    }

    /// All complex roots (with multiplicity) by Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.trimmed(1e-14);
        let Some(deg) = p.degree() else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        let lead = p.coeffs[deg];
        let monic = p.scale(lead.inv());
        let dp = monic.derivative();
        // Cauchy bound for the initial circle.
        let radius = 1.0
            + monic.coeffs[..deg]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..deg)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
                Complex64::from_polar(0.5 * radius, angle)
            })
            .collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for k in 0..deg {
                let pz = monic.eval(z[k]);
                if pz.norm() == 0.0 {
                    continue;
                }
                let ratio = pz / dp.eval(z[k]);
                let repulsion: Complex64 = (0..deg)
                    .filter(|&j| j != k)
                    .map(|j| (z[k] - z[j]).inv())
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[k] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        // Polish each root with Newton steps on the original polynomial.
        for r in z.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = monic.eval(*r) / d;
                if !step.is_finite() {
                    break;
                }
                *r -= step;
            }
        }
        z
    }
}

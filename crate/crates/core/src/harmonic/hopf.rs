use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridMap;
use crate::tree::TreePoint;

/// Hopf differential `-4 (h_ω)^2` at interior nodes, in the cylinder
/// coordinate `ω = x + iθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfField {
    pub nodes: Vec<(usize, usize)>,
    pub values: Vec<Complex64>,
}

impl HopfField {
    pub fn mean(&self) -> Option<Complex64> {
        if self.values.is_empty() {
            return None;
        }
        Some(self.values.iter().sum::<Complex64>() / self.values.len() as f64)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        self.nodes
            .binary_search(&(i, j))
            .ok()
            .map(|k| self.values[k])
    }

    /// The same field as a coefficient of `dz^2` in the chart.
    pub fn in_chart(&self, m: &GridMap) -> Vec<(Complex64, Complex64)> {
        let s = m.spec();
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), &v)| {
                let d = s.coordinate_derivative(i, j);
                (s.position(i, j), v * d * d)
            })
            .collect()
    }
}

/// Real coordinates of the 5-point stencil at `(i, j)`: centre, x-, x+, θ-, θ+.
/// For tree targets the five values must lie on one edge; otherwise `None`.
fn stencil(m: &GridMap, i: usize, j: usize) -> Option<[f64; 5]> {
    let pts = [
        m.value(i, j),
        m.value(i - 1, j),
        m.value(i + 1, j),
        m.theta_neighbour(i, j, -1),
        m.theta_neighbour(i, j, 1),
    ];
    if let TreePoint::Real(_) = pts[0] {
        let mut out = [0.0; 5];
        for (o, p) in out.iter_mut().zip(pts) {
            *o = p.real()?;
        }
        return Some(out);
    }
    let (_, offsets) = m.target().common_edge(&pts)?;
    Some([offsets[0], offsets[1], offsets[2], offsets[3], offsets[4]])
}

/// Central differences `h_ω = (h_x - i h_θ)/2` and `-4 h_ω^2` at every interior
/// node. Nodes whose stencil straddles a vertex of a tree target (the fold
/// locus) are left out.
pub fn hopf_extract(m: &GridMap) -> HopfField {
    let s = m.spec();
    let (hx, ht) = (s.hx(), s.htheta());
    let mut nodes = vec![];
    let mut values = vec![];
    for i in 1..s.nx() {
        for j in 0..s.ntheta() {
            if let Some([_, xm, xp, tm, tp]) = stencil(m, i, j) {
                let h_omega = Complex64::new((xp - xm) / (2.0 * hx), -(tp - tm) / (2.0 * ht)) * 0.5;
                nodes.push((i, j));
                values.push(-4.0 * h_omega * h_omega);
            }
        }
    }
    HopfField { nodes, values }
}

/// Discrete `∂_ω̄ H = (H_x + i H_θ)/2` of an extracted field at nodes whose
/// neighbours are all in the field, as an area-weighted L2 norm.
pub fn cauchy_riemann_residual(m: &GridMap, field: &HopfField) -> f64 {
    let s = m.spec();
    let n = s.ntheta();
    let (hx, ht) = (s.hx(), s.htheta());
    let mut total = 0.0;
    for &(i, j) in &field.nodes {
        let at = |i: usize, j: usize| field.get(i, j);
        let (Some(xm), Some(xp), Some(tm), Some(tp)) = (
            at(i - 1, j),
            at(i + 1, j),
            at(i, (j + n - 1) % n),
            at(i, (j + 1) % n),
        ) else {
            continue;
        };
        let d = ((xp - xm) / (2.0 * hx) + Complex64::i() * (tp - tm) / (2.0 * ht)) * 0.5;
        total += d.norm_sqr() * hx * ht;
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::{model_hopf, ModelEnd};
    use crate::harmonic::boundary::model_lifts;
    use crate::harmonic::grid::{Geometry, GridSpec};
    use crate::tree::MetricTree;
    use std::f64::consts::PI;

    #[test]
    fn model_hopf_is_constant() {
        for alpha in [0.0, 0.3, -1.1, PI / 2.0] {
            let end = ModelEnd::new(3.0, alpha, None).unwrap();
            let spec = GridSpec::cylinder(12, 10, 2.0, 3.0).unwrap();
            let m = GridMap::from_lifts(spec, model_lifts(&spec, &end), end.seam_offset()).unwrap();
            let h = hopf_extract(&m);
            assert_eq!(h.values.len(), 11 * 10);
            for v in &h.values {
                assert!((v - model_hopf(alpha)).norm() < 1e-12, "{v}");
            }
            assert!(cauchy_riemann_residual(&m, &h) < 1e-12);
        }
    }

    #[test]
    fn imaginary_part_has_unit_hopf() {
        // h = Im z on the flat cylinder is θ, i.e. the model with α = 0
        let spec = GridSpec::cylinder(8, 8, 1.0, 1.0).unwrap();
        let lifts: Vec<f64> = (0..spec.node_count()).map(|k| spec.position(k / 8, k % 8).im).collect();
        let m = GridMap::from_lifts(spec, lifts, 1.0).unwrap();
        for v in hopf_extract(&m).values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn chart_conversion_on_round_grid() {
        // h = Im log z = -θ on the annulus: Hopf coefficient of dz^2 is 1/z^2
        let spec = GridSpec::new(8, 16, Geometry::RoundAnnulus { r_in: 0.25, r_out: 1.0 }).unwrap();
        let lifts: Vec<f64> = (0..spec.node_count()).map(|k| -spec.theta(k % 16)).collect();
        let m = GridMap::from_lifts(spec, lifts, -2.0 * PI).unwrap();
        for (z, v) in hopf_extract(&m).in_chart(&m) {
            assert!((v - (z * z).inv()).norm() < 1e-12 * (z * z).inv().norm());
        }
    }

    #[test]
    fn fold_nodes_are_excluded() {
        let spec = GridSpec::cylinder(4, 4, 1.0, 1.0).unwrap();
        let tripod = MetricTree::tripod([1.0; 3]).unwrap();
        let values: Vec<_> = (0..spec.node_count())
            .map(|k| tripod.point(if k % 4 < 2 { 0 } else { 1 }, 0.1 + 0.1 * (k / 4) as f64).unwrap())
            .collect();
        let m = GridMap::new(spec, tripod, values, 0.0).unwrap();
        assert!(hopf_extract(&m).values.is_empty());
    }
}

//! Boundary-data generators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::cylinder::ModelEnd;
use crate::error::{Error, Result};
use crate::tree::{MetricTree, TreePoint};

/// Model lifts along row `i`.
pub fn model_row(spec: &GridSpec, end: &ModelEnd, i: usize) -> Vec<f64> {
    (0..spec.ntheta())
        .map(|j| end.lift(spec.x(i), spec.theta(j)))
        .collect()
}

/// Model lifts at every node.
pub fn model_lifts(spec: &GridSpec, end: &ModelEnd) -> Vec<f64> {
    (0..spec.rows()).flat_map(|i| model_row(spec, end, i)).collect()
}

/// One Fourier mode `amplitude · sin(2π k θ / R + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Periodic perturbation of boundary lifts: a constant shift plus modes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
}

impl Perturbation {
    pub fn eval(&self, theta: f64, circumference: f64) -> f64 {
        self.shift
            + self
                .modes
                .iter()
                .map(|m| m.amplitude * (2.0 * PI * m.k as f64 * theta / circumference + m.phase).sin())
                .sum::<f64>()
    }

    pub fn apply(&self, spec: &GridSpec, row: &mut [f64]) {
        for (j, v) in row.iter_mut().enumerate() {
            *v += self.eval(spec.theta(j), spec.circumference());
        }
    }

    /// `sup |perturbation|` over the grid's θ samples.
    pub fn sup_on(&self, spec: &GridSpec) -> f64 {
        (0..spec.ntheta())
            .map(|j| self.eval(spec.theta(j), spec.circumference()).abs())
            .fold(0.0, f64::max)
    }
}

/// Folds `Im((2/3) e^{3iφ/2})` onto a tripod: the boundary point at angle `φ`
/// in sector `k` (`2πk/3 ≤ φ < 2π(k+1)/3`) goes to ray `k` at distance
/// `(2/3)|sin(3φ/2)|`. This is the leaf-space image of the unit circle under
/// the horizontal foliation of `z dz^2`.
pub fn tripod_fold_row(spec: &GridSpec, tripod: &MetricTree) -> Result<Vec<TreePoint>> {
    if tripod.edges().len() != 3 || tripod.edges().iter().any(|e| e.u != 0 || e.length < 2.0 / 3.0) {
        return Err(Error::InvalidInput(
            "fold data needs a tripod with rays of length >= 2/3 from vertex 0".into(),
        ));
    }
    (0..spec.ntheta())
        .map(|j| {
            let z = spec.position(0, j);
            let (ray, distance) = fold_point(z.arg());
            tripod.point(ray, distance.min(tripod.edges()[ray].length))
        })
        .collect()
}

/// Sector index and distance from the tripod vertex for `r e^{iφ}` at `r = 1`.
pub(crate) fn fold_point(phi: f64) -> (usize, f64) {
    let phi = phi.rem_euclid(2.0 * PI);
    let ray = ((phi / (2.0 * PI / 3.0)).floor() as usize).min(2);
    (ray, (2.0 / 3.0) * (1.5 * phi).sin().abs())
}

/// Named generator for one boundary row of a solve problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryGenerator {
    Constant {
        value: f64,
    },
    /// Model lifts for `α` on the grid's circumference, optionally perturbed.
    Model {
        alpha: f64,
        #[serde(default)]
        perturbation: Perturbation,
    },
    /// Explicit values, one per column.
    Values {
        values: Vec<f64>,
    },
}

impl BoundaryGenerator {
    pub fn row(&self, spec: &GridSpec, i: usize) -> Result<Vec<f64>> {
        match self {
            BoundaryGenerator::Constant { value } => Ok(vec![*value; spec.ntheta()]),
            BoundaryGenerator::Model {
                alpha,
                perturbation,
            } => {
                let end = ModelEnd::new(spec.circumference(), *alpha, None)?;
                let mut row = model_row(spec, &end, i);
                perturbation.apply(spec, &mut row);
                Ok(row)
            }
            BoundaryGenerator::Values { values } => {
                if values.len() != spec.ntheta() {
                    return Err(Error::InvalidInput(format!(
                        "explicit boundary row has {} values, grid has {} columns",
                        values.len(),
                        spec.ntheta()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::grid::Geometry;

    #[test]
    fn fold_values() {
        assert_eq!(fold_point(0.0), (0, 0.0));
        let (ray, d) = fold_point(PI / 3.0);
        assert_eq!(ray, 0);
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
        let (ray, d) = fold_point(PI);
        assert_eq!(ray, 1);
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
        let (ray, d) = fold_point(-PI / 3.0);
        assert_eq!(ray, 2);
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fold_row_on_disk() {
        let spec = GridSpec::new(6, 6, Geometry::UnitDiskPolar { depth: 2.0 }).unwrap();
        let tripod = MetricTree::tripod([1.0; 3]).unwrap();
        let row = tripod_fold_row(&spec, &tripod).unwrap();
        // j = 0 is φ = 0, the separatrix: the vertex
        assert!(tripod.distance(row[0], tripod.vertex_point(0).unwrap()).unwrap() < 1e-15);
        assert!(tripod_fold_row(&spec, &MetricTree::tripod([0.5; 3]).unwrap()).is_err());
    }

    #[test]
    fn generator_json() {
        let g: BoundaryGenerator = serde_json::from_str(
            r#"{"generator": "model", "alpha": 0.0, "perturbation": {"modes": [{"k": 1, "amplitude": 0.5}]}}"#,
        )
        .unwrap();
        let spec = GridSpec::cylinder(4, 4, 1.0, 2.0 * PI).unwrap();
        let row = g.row(&spec, 0).unwrap();
        assert!((row[1] - (PI / 2.0 + 0.5)).abs() < 1e-15);
        assert!(serde_json::from_str::<BoundaryGenerator>(r#"{"generator": "nope"}"#).is_err());
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{MetricTree, TreePoint};

/// Conformal shape of the domain. Every geometry is discretized in cylinder
/// coordinates `ω = x + iθ`, with rows at constant `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    FlatCylinder { length: f64, circumference: f64 },
    /// `z = r_out e^{-ω}`, so `x = ln(r_out/|z|)` and `θ` turns clockwise.
    RoundAnnulus { r_in: f64, r_out: f64 },
    /// `z = e^{-ω}` on `e^{-depth} ≤ |z| ≤ 1`. The inner row carries no
    /// boundary data; the puncture itself is never a node.
    UnitDiskPolar { depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec")]
pub struct GridSpec {
    nx: usize,
    ntheta: usize,
    geometry: Geometry,
}

#[derive(Deserialize)]
struct RawGridSpec {
    nx: usize,
    ntheta: usize,
    geometry: Geometry,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;
    fn try_from(raw: RawGridSpec) -> Result<Self> {
        Self::new(raw.nx, raw.ntheta, raw.geometry)
    }
}

pub const MIN_GRID: usize = 4;

impl GridSpec {
    pub fn new(nx: usize, ntheta: usize, geometry: Geometry) -> Result<Self> {
        if nx < MIN_GRID || ntheta < MIN_GRID {
            return Err(Error::InvalidInput(format!(
                "grid needs nx, ntheta >= {MIN_GRID}, got {nx} x {ntheta}"
            )));
        }
        Self::unchecked(nx, ntheta, geometry)
    }

    /// Skips the minimum-size rule, for hand-sized examples.
    pub(crate) fn unchecked(nx: usize, ntheta: usize, geometry: Geometry) -> Result<Self> {
        let ok = match geometry {
            Geometry::FlatCylinder {
                length,
                circumference,
            } => length > 0.0 && circumference > 0.0 && length.is_finite() && circumference.is_finite(),
            Geometry::RoundAnnulus { r_in, r_out } => r_in > 0.0 && r_out > r_in && r_out.is_finite(),
            Geometry::UnitDiskPolar { depth } => depth > 0.0 && depth.is_finite(),
        };
        if !ok || nx == 0 || ntheta == 0 {
            return Err(Error::InvalidInput(format!("invalid grid geometry {geometry:?}")));
        }
        Ok(Self { nx, ntheta, geometry })
    }

    pub fn cylinder(nx: usize, ntheta: usize, length: f64, circumference: f64) -> Result<Self> {
        Self::new(nx, ntheta, Geometry::FlatCylinder { length, circumference })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn rows(&self) -> usize {
        self.nx + 1
    }

    pub fn node_count(&self) -> usize {
        self.rows() * self.ntheta
    }

    pub fn length(&self) -> f64 {
        match self.geometry {
            Geometry::FlatCylinder { length, .. } => length,
            Geometry::RoundAnnulus { r_in, r_out } => (r_out / r_in).ln(),
            Geometry::UnitDiskPolar { depth } => depth,
        }
    }

    pub fn circumference(&self) -> f64 {
        match self.geometry {
            Geometry::FlatCylinder { circumference, .. } => circumference,
            _ => 2.0 * PI,
        }
    }

    pub fn modulus(&self) -> f64 {
        self.length() / self.circumference()
    }

    pub fn hx(&self) -> f64 {
        self.length() / self.nx as f64
    }

    pub fn htheta(&self) -> f64 {
        self.circumference() / self.ntheta as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.htheta()
    }

    /// Whether the last row is a free (natural) boundary.
    pub fn inner_row_free(&self) -> bool {
        matches!(self.geometry, Geometry::UnitDiskPolar { .. })
    }

    pub fn is_fixed_row(&self, i: usize) -> bool {
        i == 0 || (i == self.nx && !self.inner_row_free())
    }

    /// Node position in the chart.
    pub fn position(&self, i: usize, j: usize) -> Complex64 {
        let omega = Complex64::new(self.x(i), self.theta(j));
        match self.geometry {
            Geometry::FlatCylinder { .. } => omega,
            Geometry::RoundAnnulus { r_out, .. } => (-omega).exp() * r_out,
            Geometry::UnitDiskPolar { .. } => (-omega).exp(),
        }
    }

    /// `dω/dz` at a node; converts a cylinder-coordinate quadratic coefficient
    /// to the chart by multiplying with its square.
    pub fn coordinate_derivative(&self, i: usize, j: usize) -> Complex64 {
        match self.geometry {
            Geometry::FlatCylinder { .. } => Complex64::new(1.0, 0.0),
            _ => -self.position(i, j).inv(),
        }
    }

    /// Weight of x-edges (between rows).
    pub fn x_weight(&self) -> f64 {
        self.htheta() / self.hx()
    }

    /// Weight of θ-edges in row `i`, halved on the first and last rows.
    pub fn theta_weight(&self, i: usize) -> f64 {
        let w = self.hx() / self.htheta();
        if i == 0 || i == self.nx {
            0.5 * w
        } else {
            w
        }
    }

    /// Grid refined by `factor` in both directions.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.nx * factor, self.ntheta * factor, self.geometry)
    }
}

/// A map from grid nodes into a target. Line targets store lifts; the value
/// at `(i, j + ntheta)` is `value(i, j) + seam`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    spec: GridSpec,
    target: MetricTree,
    values: Vec<TreePoint>,
    seam: f64,
}

impl GridMap {
    pub fn new(spec: GridSpec, target: MetricTree, values: Vec<TreePoint>, seam: f64) -> Result<Self> {
        if values.len() != spec.node_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} node values, got {}",
                spec.node_count(),
                values.len()
            )));
        }
        if target.is_finite() && seam != 0.0 {
            return Err(Error::InvalidInput("finite tree targets take no seam offset".into()));
        }
        if !seam.is_finite() {
            return Err(Error::InvalidInput("seam offset must be finite".into()));
        }
        for v in &values {
            target.check(*v)?;
        }
        Ok(Self {
            spec,
            target,
            values,
            seam,
        })
    }

    pub fn from_lifts(spec: GridSpec, lifts: Vec<f64>, seam: f64) -> Result<Self> {
        let target = if seam == 0.0 {
            MetricTree::line()
        } else {
            MetricTree::periodic_line(seam.abs())?
        };
        Self::new(spec, target, lifts.into_iter().map(TreePoint::Real).collect(), seam)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn target(&self) -> &MetricTree {
        &self.target
    }

    pub fn seam(&self) -> f64 {
        self.seam
    }

    pub fn values(&self) -> &[TreePoint] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> TreePoint {
        self.values[self.spec.index(i, j)]
    }

    pub fn lift(&self, i: usize, j: usize) -> Option<f64> {
        self.value(i, j).real()
    }

    pub fn lifts(&self) -> Option<Vec<f64>> {
        self.values.iter().map(|v| v.real()).collect()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [TreePoint] {
        &mut self.values
    }

    /// Value of the θ-neighbour of `(i, j)` in direction `step = ±1`,
    /// shifted across the seam.
    pub(crate) fn theta_neighbour(&self, i: usize, j: usize, step: isize) -> TreePoint {
        let n = self.spec.ntheta as isize;
        let jj = j as isize + step;
        let v = self.value(i, jj.rem_euclid(n) as usize);
        let shift = if jj >= n {
            self.seam
        } else if jj < 0 {
            -self.seam
        } else {
            0.0
        };
        match v {
            TreePoint::Real(x) => TreePoint::Real(x + shift),
            p => p,
        }
    }

    fn theta_edge(&self, i: usize, j: usize) -> f64 {
        self.target
            .distance_unchecked(self.value(i, j), self.theta_neighbour(i, j, 1))
    }

    fn x_edge(&self, i: usize, j: usize) -> f64 {
        self.target.distance_unchecked(self.value(i, j), self.value(i + 1, j))
    }

    /// Energy of the edges between rows `first..=last`, with θ-edges of the two
    /// end rows at half weight. Adjacent windows add up to the total.
    pub fn energy_in_rows(&self, first: usize, last: usize) -> f64 {
        let s = &self.spec;
        let last = last.min(s.nx);
        let mut total = 0.0;
        let wx = s.x_weight();
        let wt = s.hx() / s.htheta();
        for i in first..=last {
            let w = if i == first || i == last { 0.5 * wt } else { wt };
            let row: f64 = (0..s.ntheta).map(|j| self.theta_edge(i, j).powi(2)).sum();
            total += w * row;
            if i < last {
                let row: f64 = (0..s.ntheta).map(|j| self.x_edge(i, j).powi(2)).sum();
                total += wx * row;
            }
        }
        0.5 * total
    }
}

/// `(1/2) Σ w d^2` over grid edges with conformal weights `hθ/hx` on x-edges
/// and `hx/hθ` on θ-edges (half on the first and last rows).
pub fn discrete_energy(m: &GridMap) -> f64 {
    m.energy_in_rows(0, m.spec.nx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcMeasures {
    /// Image length of each row circle.
    pub meridians: Vec<f64>,
    /// Image length of each column segment.
    pub longitudes: Vec<f64>,
}

impl ArcMeasures {
    pub fn min_meridian(&self) -> f64 {
        self.meridians.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn longitude_band(&self) -> (f64, f64) {
        self.longitudes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)))
    }
}

pub fn measure_arcs(m: &GridMap) -> ArcMeasures {
    let s = &m.spec;
    let meridians = (0..=s.nx)
        .map(|i| (0..s.ntheta).map(|j| m.theta_edge(i, j)).sum())
        .collect();
    let longitudes = (0..s.ntheta)
        .map(|j| (0..s.nx).map(|i| m.x_edge(i, j)).sum())
        .collect();
    ArcMeasures {
        meridians,
        longitudes,
    }
}

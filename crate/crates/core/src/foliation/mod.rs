//! Horizontal foliation of a quadratic differential: line field, leaf
//! tracing, collapsing values and SVG portraits.

mod svg;
mod trace;

pub use svg::{emit_svg, SvgOptions};
pub use trace::{
    horizontal_drift, trace_leaf, trace_leaves, Direction, LeafOptions, LeafTrace, Termination,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qd::{integrate_sqrt, QuadDifferential, QuadratureOptions};

/// Points closer than this to a pole or zero count as singular inputs.
const SINGULAR_INPUT: f64 = 1e-12;

pub(crate) fn check_regular(q: &QuadDifferential, z: Complex64) -> Result<Complex64> {
    let value = q.eval(z);
    let near = q
        .nearest_singularity(z)
        .is_some_and(|(d, _, _)| d <= SINGULAR_INPUT);
    if near || !value.is_finite() || value.norm() == 0.0 {
        return Err(Error::SingularPoint { re: z.re, im: z.im });
    }
    Ok(value)
}

/// Angle `θ ∈ [0, π)` of the horizontal line at `z`: `q(z) e^{2iθ} > 0`.
pub fn direction_field(q: &QuadDifferential, z: Complex64) -> Result<f64> {
    let value = check_regular(q, z)?;
    let theta = (-0.5 * value.arg()).rem_euclid(PI);
    Ok(if theta >= PI { 0.0 } else { theta })
}

/// `Im ∫ sqrt(q) dz` along the straight segment from `base` to `z`, starting
/// from the principal root at `base`.
pub fn collapsing_value(q: &QuadDifferential, z: Complex64, base: Complex64) -> Result<f64> {
    collapsing_value_along(q, &[base, z], None)
}

/// Collapsing value along an explicit polyline, with an optional branch at its
/// first vertex.
pub fn collapsing_value_along(
    q: &QuadDifferential,
    path: &[Complex64],
    base_root: Option<Complex64>,
) -> Result<f64> {
    let chart = q.chart();
    for w in path.windows(2) {
        if !segment_in_chart(chart, w[0], w[1]) {
            return Err(Error::ChartTopology(format!(
                "segment {} -> {} leaves the chart",
                w[0], w[1]
            )));
        }
    }
    if let Some(&z) = path.first() {
        if !chart.contains_closure(z) {
            return Err(Error::ChartTopology(format!("{z} is outside the chart")));
        }
    }
    match integrate_sqrt(q, path, base_root, &QuadratureOptions::default()) {
        Ok(r) => Ok(r.value.im),
        Err(Error::BranchAmbiguity { re, im, distance }) => Err(Error::ChartTopology(format!(
            "path passes within {distance:.3e} of the singular point {re}+{im}i"
        ))),
        Err(e) => Err(e),
    }
}

fn segment_in_chart(chart: crate::qd::Chart, a: Complex64, b: Complex64) -> bool {
    use crate::qd::Chart;
    if !chart.contains_closure(a) || !chart.contains_closure(b) {
        return false;
    }
    match chart {
        Chart::Plane | Chart::Disk => true,
        Chart::Annulus { r_in, .. } => {
            let d = b - a;
            let len2 = d.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                ((-a * d.conj()).re / len2).clamp(0.0, 1.0)
            };
            (a + d * t).norm() >= r_in * (1.0 - 1e-12)
        }
    }
}

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_regular;
use crate::error::{Error, Result};
use crate::qd::quadrature::align_root;
use crate::qd::{integrate_sqrt, QuadDifferential, QuadratureOptions, SingularKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxLength,
    PoleCapture,
    ZeroProximity,
    ChartBoundary,
}

/// Orientation of a leaf relative to the initial direction with positive real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafOptions {
    /// Flat-metric length of each step.
    pub step: f64,
    pub max_flat_length: f64,
    pub direction: Direction,
    pub capture_radius: f64,
    pub zero_radius: f64,
}

impl Default for LeafOptions {
    fn default() -> Self {
        Self {
            step: 1e-2,
            max_flat_length: 10.0,
            direction: Direction::Forward,
            capture_radius: 1e-3,
            zero_radius: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafTrace {
    pub points: Vec<Complex64>,
    pub terminated_by: Termination,
    pub arc_length_flat: f64,
}

/// Unit-flat-speed horizontal velocity `1/sqrt(q)`, branch aligned with `reference`.
fn velocity(q: &QuadDifferential, z: Complex64, reference: Complex64) -> Complex64 {
    align_root(q.eval(z).sqrt().inv(), reference)
}

/// Integrates `dz/ds = 1/sqrt(q(z))` by classical RK4 in the flat arc length `s`,
/// keeping the branch continuous.
pub fn trace_leaf(q: &QuadDifferential, z0: Complex64, opts: &LeafOptions) -> Result<LeafTrace> {
    if !(opts.step > 0.0) || !(opts.max_flat_length >= 0.0) {
        return Err(Error::InvalidInput("leaf step must be positive and max length nonnegative".into()));
    }
    let v0 = check_regular(q, z0)?.sqrt().inv();
    let mut heading = if v0.re > 0.0 || (v0.re == 0.0 && v0.im > 0.0) {
        v0
    } else {
        -v0
    };
    if opts.direction == Direction::Backward {
        heading = -heading;
    }
    let chart = q.chart();
    let mut z = z0;
    let mut points = vec![z0];
    let mut travelled = 0.0;
    // steps shortened near singular points do not count against the budget
    let max_steps = (opts.max_flat_length / opts.step).ceil() as usize + 100_000;
    for _ in 0..max_steps {
        if let Some(stop) = stop_reason(q, z, opts) {
            return Ok(LeafTrace {
                points,
                terminated_by: stop,
                arc_length_flat: travelled,
            });
        }
        if travelled >= opts.max_flat_length {
            break;
        }
        let k1 = velocity(q, z, heading);
        // near a singular point the chart step is capped at half its distance
        let room = q
            .nearest_singularity(z)
            .map_or(f64::INFINITY, |(d, _, _)| 0.5 * d / k1.norm());
        let h = opts.step.min(room).min(opts.max_flat_length - travelled);
        let k2 = velocity(q, z + k1 * (0.5 * h), k1);
        let k3 = velocity(q, z + k2 * (0.5 * h), k2);
        let k4 = velocity(q, z + k3 * h, k3);
        let next = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !next.is_finite() || !chart.contains(next) {
            return Ok(LeafTrace {
                points,
                terminated_by: Termination::ChartBoundary,
                arc_length_flat: travelled,
            });
        }
        heading = k4;
        z = next;
        travelled += h;
        points.push(z);
    }
    let terminated_by = stop_reason(q, z, opts).unwrap_or(Termination::MaxLength);
    Ok(LeafTrace {
        points,
        terminated_by,
        arc_length_flat: travelled,
    })
}

fn stop_reason(q: &QuadDifferential, z: Complex64, opts: &LeafOptions) -> Option<Termination> {
    let mut reason = None;
    for (s, kind) in q.singularities() {
        let d = (z - s).norm();
        match kind {
            SingularKind::Pole if d <= opts.capture_radius => return Some(Termination::PoleCapture),
            SingularKind::Zero if d <= opts.zero_radius => reason = Some(Termination::ZeroProximity),
            _ => {}
        }
    }
    reason
}

/// Traces one leaf per seed in parallel, in seed order.
pub fn trace_leaves(
    q: &QuadDifferential,
    seeds: &[Complex64],
    opts: &LeafOptions,
) -> Vec<Result<LeafTrace>> {
    seeds.par_iter().map(|&z| trace_leaf(q, z, opts)).collect()
}

/// `max_k |Im ∫ sqrt(q) dz|` from the first point to the `k`-th along the trace.
/// A horizontal leaf has zero drift.
pub fn horizontal_drift(q: &QuadDifferential, trace: &LeafTrace) -> Result<f64> {
    let opts = QuadratureOptions {
        abs_tol: 1e-13,
        proximity: 1e-9,
        ..Default::default()
    };
    let mut root = None;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut drift: f64 = 0.0;
    for w in trace.points.windows(2) {
        let r = integrate_sqrt(q, w, root, &opts)?;
        acc += r.value;
        root = Some(r.end_root);
        drift = drift.max(acc.im.abs());
    }
    Ok(drift)
}

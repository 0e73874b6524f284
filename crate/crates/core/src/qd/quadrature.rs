//! Integration of `sqrt(q) dz` along polylines with a continuously tracked
//! branch of the square root.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use super::differential::QuadDifferential;
use crate::error::{Error, Result};

/// Minimum allowed distance (chart units) between a path and a pole or zero.
pub const SINGULAR_PROXIMITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_panels: usize,
    pub proximity: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_panels: 1 << 20,
            proximity: SINGULAR_PROXIMITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathIntegral {
    /// `∫ sqrt(q) dz` along the path.
    pub value: Complex64,
    /// `∫ |sqrt(q)| |dz|`, the length in the flat metric.
    pub flat_length: f64,
    /// Branch of `sqrt(q)` reached at the end of the path.
    pub end_root: Complex64,
    pub panels: usize,
}

/// Picks the root `±r` closer to `reference`.
#[inline]
pub fn align_root(r: Complex64, reference: Complex64) -> Complex64 {
    if (r * reference.conj()).re < 0.0 {
        -r
    } else {
        r
    }
}

// Gauss–Kronrod 7/15 on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment<'a> {
    q: &'a QuadDifferential,
    start: Complex64,
    delta: Complex64,
}

impl Segment<'_> {
    fn point(&self, t: f64) -> Complex64 {
        self.start + self.delta * t
    }

    fn root(&self, t: f64, reference: Complex64) -> Complex64 {
        align_root(self.q.eval(self.point(t)).sqrt(), reference)
    }

    /// Kronrod and Gauss estimates of (∫ sqrt(q) dz, ∫ |sqrt(q)||dz|) over [a, b].
    fn gk15(&self, a: f64, b: f64, reference: Complex64) -> (Complex64, Complex64, f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let scale = self.delta * half;
        let abs_scale = self.delta.norm() * half;
        let mut k_val = Complex64::new(0.0, 0.0);
        let mut g_val = Complex64::new(0.0, 0.0);
        let mut k_len = 0.0;
        let mut g_len = 0.0;
        for (idx, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
            let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
            for &sign in nodes {
                let r = self.root(mid + sign * x * half, reference);
                k_val += r * w;
                k_len += r.norm() * w;
                if idx % 2 == 1 {
                    let wg = WG[idx / 2];
                    g_val += r * wg;
                    g_len += r.norm() * wg;
                }
            }
        }
        (k_val * scale, g_val * scale, k_len * abs_scale, g_len * abs_scale)
    }
}

fn check_proximity(q: &QuadDifferential, a: Complex64, b: Complex64, min_dist: f64) -> Result<()> {
    let d = b - a;
    let len2 = d.norm_sqr();
    let singular = q
        .poles()
        .iter()
        .map(|p| p.location)
        .chain(q.zeros().iter().copied());
    for s in singular {
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((s - a) * d.conj()).re / len2).clamp(0.0, 1.0)
        };
        let dist = (a + d * t - s).norm();
        if dist < min_dist {
            return Err(Error::BranchAmbiguity {
                re: s.re,
                im: s.im,
                distance: dist,
            });
        }
    }
    Ok(())
}

/// Integrates `sqrt(q) dz` along a polyline. The branch at the first vertex is
/// `initial_root` when given (sign-aligned to it), else the principal root.
pub fn integrate_sqrt(
    q: &QuadDifferential,
    path: &[Complex64],
    initial_root: Option<Complex64>,
    opts: &QuadratureOptions,
) -> Result<PathIntegral> {
    if path.is_empty() {
        return Err(Error::InvalidInput("path needs at least one point".into()));
    }
    let first = q.eval(path[0]).sqrt();
    let mut root = match initial_root {
        Some(r) => align_root(first, r),
        None => first,
    };
    let segments = path.len().saturating_sub(1).max(1);
    let mut total = Complex64::new(0.0, 0.0);
    let mut flat = 0.0;
    let mut panels = 0usize;

    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        check_proximity(q, a, b, opts.proximity)?;
        let seg = Segment { q, start: a, delta: b - a };
        let local_tol = opts.abs_tol / segments as f64;

        // March along the segment so that the root turns by less than pi/4 per step.
        let mut t: f64 = 0.0;
        let mut dt: f64 = 1.0 / 16.0;
        while t < 1.0 {
            let t1 = (t + dt).min(1.0);
            let next = seg.root(t1, root);
            if (next / root).arg().abs() >= FRAC_PI_4 {
                dt *= 0.5;
                if dt < 1e-14 {
                    return Err(Error::Accuracy { limit: opts.max_panels });
                }
                continue;
            }
            // adaptive Gauss–Kronrod on [t, t1]
            let mut stack = vec![(t, t1, root)];
            while let Some((lo, hi, reference)) = stack.pop() {
                panels += 1;
                if panels > opts.max_panels {
                    return Err(Error::Accuracy { limit: opts.max_panels });
                }
                let (kv, gv, kl, gl) = seg.gk15(lo, hi, reference);
                let err = (kv - gv).norm() + (kl - gl).abs();
                if err <= local_tol * (hi - lo) || hi - lo < 1e-13 {
                    total += kv;
                    flat += kl;
                } else {
                    let mid = 0.5 * (lo + hi);
                    let mid_root = seg.root(mid, reference);
                    stack.push((mid, hi, mid_root));
                    stack.push((lo, mid, reference));
                }
            }
            root = next;
            t = t1;
            dt = (dt * 2.0).min(1.0);
        }
    }
    Ok(PathIntegral {
        value: total,
        flat_length: flat,
        end_root: root,
        panels,
    })
}

//! Dirichlet problem for lifts into the line: the weighted 5-point Laplacian
//! with twisted-periodic coupling, solved by conjugate gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridMap, GridSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSolveOptions {
    /// Stop when the residual falls below this fraction of the initial one.
    pub rel_tol: f64,
    /// `None` picks a cap proportional to the grid size.
    pub max_iterations: Option<usize>,
}

impl Default for LineSolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub initial_residual: f64,
}

struct Laplacian<'a> {
    spec: &'a GridSpec,
}

impl Laplacian<'_> {
    /// Energy gradient `Σ w (u_n - u_nbr)` at unknown nodes, zero on fixed rows.
    fn gradient(&self, u: &[f64], seam: f64, out: &mut [f64]) {
        let s = self.spec;
        let nt = s.ntheta();
        let nx = s.nx();
        let wx = s.x_weight();
        out.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            if s.is_fixed_row(i) {
                row.fill(0.0);
                return;
            }
            let wt = s.theta_weight(i);
            let base = i * nt;
            for (j, slot) in row.iter_mut().enumerate() {
                let c = u[base + j];
                let (left, left_shift) = if j == 0 { (nt - 1, -seam) } else { (j - 1, 0.0) };
                let (right, right_shift) = if j + 1 == nt { (0, seam) } else { (j + 1, 0.0) };
                let mut acc = wt * (2.0 * c - (u[base + left] + left_shift) - (u[base + right] + right_shift));
                if i > 0 {
                    acc += wx * (c - u[base - nt + j]);
                }
                if i < nx {
                    acc += wx * (c - u[base + nt + j]);
                }
                *slot = acc;
            }
        });
    }
}

/// Partial sums over fixed chunks, added in order, so the result does not
/// depend on the thread schedule.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Minimizes the discrete energy among lifts with the given boundary rows and
/// seam offset. `inner` is required exactly when the inner row is fixed.
pub fn solve_line(spec: &GridSpec, outer: &[f64], inner: Option<&[f64]>, seam: f64) -> Result<GridMap> {
    solve_line_with(spec, outer, inner, seam, &LineSolveOptions::default()).map(|(m, _)| m)
}

pub fn solve_line_with(
    spec: &GridSpec,
    outer: &[f64],
    inner: Option<&[f64]>,
    seam: f64,
    opts: &LineSolveOptions,
) -> Result<(GridMap, LineSolveStats)> {
    let nt = spec.ntheta();
    let nx = spec.nx();
    if outer.len() != nt || inner.is_some_and(|r| r.len() != nt) {
        return Err(Error::InvalidInput(format!("boundary rows must have {nt} values")));
    }
    if inner.is_some() == spec.inner_row_free() {
        return Err(Error::InvalidInput(if spec.inner_row_free() {
            "this geometry has a free inner row; pass no inner data".into()
        } else {
            "inner boundary row is required".into()
        }));
    }
    if outer.iter().chain(inner.unwrap_or(&[])).any(|v| !v.is_finite()) || !seam.is_finite() {
        return Err(Error::InvalidInput("boundary data must be finite".into()));
    }
    // Linear interpolation between the rows solves the θ-mean exactly, so the
    // Krylov space only has to resolve the decaying modes.
    let mut u = vec![0.0; spec.node_count()];
    for i in 0..=nx {
        let t = i as f64 / nx as f64;
        for j in 0..nt {
            u[i * nt + j] = match inner {
                Some(inner) => (1.0 - t) * outer[j] + t * inner[j],
                None => outer[j],
            };
        }
    }
    let op = Laplacian { spec };
    let mut r = vec![0.0; u.len()];
    op.gradient(&u, seam, &mut r);
    r.par_iter_mut().for_each(|x| *x = -*x);
    let initial = dot(&r, &r).sqrt();
    // Scale of the individual edge terms, for data where the guess is already exact.
    let load = {
        let spread = outer
            .iter()
            .chain(inner.unwrap_or(&[]))
            .fold(0.0f64, |m, v| m.max(v.abs()))
            + seam.abs();
        spread * (spec.x_weight() + spec.theta_weight(1)) * (u.len() as f64).sqrt()
    };
    let target = (opts.rel_tol * initial).max(1e-15 * load);
    let cap = opts.max_iterations.unwrap_or(20 * (nx + nt) + 1000);

    let mut iterations = 0;
    let mut rr = initial * initial;
    if initial > target {
        let mut p = r.clone();
        let mut ap = vec![0.0; u.len()];
        loop {
            if iterations >= cap {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: rr.sqrt(),
                    tolerance: target,
                });
            }
            op.gradient(&p, 0.0, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let step = rr / pap;
            u.par_iter_mut().zip(p.par_iter()).for_each(|(x, d)| *x += step * d);
            r.par_iter_mut().zip(ap.par_iter()).for_each(|(x, d)| *x -= step * d);
            iterations += 1;
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= target {
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            p.par_iter_mut().zip(r.par_iter()).for_each(|(x, d)| *x = d + beta * *x);
        }
    }
    // true residual, guarding against drift in the recurrence
    op.gradient(&u, seam, &mut r);
    let residual = dot(&r, &r).sqrt();
    if residual > 10.0 * target.max(1e-13 * load) {
        return Err(Error::NoConvergence {
            iterations,
            residual,
            tolerance: target,
        });
    }
    let map = GridMap::from_lifts(*spec, u, seam)?;
    Ok((
        map,
        LineSolveStats {
            iterations,
            residual,
            initial_residual: initial,
        },
    ))
}

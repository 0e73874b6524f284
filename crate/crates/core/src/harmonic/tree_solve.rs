//! Dirichlet problem for maps into a metric tree: nonlinear Gauss–Seidel with
//! exact barycenter updates.

use serde::{Deserialize, Serialize};

use super::grid::{discrete_energy, GridMap, GridSpec};
use crate::error::{Error, Result};
use crate::tree::{MetricTree, TreePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSolveOptions {
    /// Stop once no node moves farther than this in a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor in `[1, 2)`. It is applied only where the old
    /// value, the barycenter and the extrapolated point share one edge, where
    /// the node objective is an exact quadratic; elsewhere plain Gauss–Seidel.
    pub relaxation: f64,
    /// Seam offset for line targets; must be zero for finite trees.
    pub seam: f64,
}

impl Default for TreeSolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_sweeps: 1_000_000,
            relaxation: 1.0,
            seam: 0.0,
        }
    }
}

impl TreeSolveOptions {
    /// Relaxation factor `2 / (1 + π/n)` for an `n`-node-wide grid.
    pub fn with_standard_relaxation(mut self, spec: &GridSpec) -> Self {
        let n = spec.nx().max(spec.ntheta()) as f64;
        self.relaxation = 2.0 / (1.0 + std::f64::consts::PI / n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSolveStats {
    pub sweeps: usize,
    pub last_movement: f64,
    /// Energy after each sweep; non-increasing.
    pub energies: Vec<f64>,
}

/// Solves for the energy minimizer with fixed boundary rows. `initial`, if
/// given, supplies a full starting map (boundary rows are overwritten).
pub fn solve_tree(
    spec: &GridSpec,
    outer: &[TreePoint],
    inner: Option<&[TreePoint]>,
    target: &MetricTree,
    initial: Option<&[TreePoint]>,
    opts: &TreeSolveOptions,
) -> Result<(GridMap, TreeSolveStats)> {
    let nt = spec.ntheta();
    let nx = spec.nx();
    if outer.len() != nt || inner.is_some_and(|r| r.len() != nt) {
        return Err(Error::InvalidInput(format!("boundary rows must have {nt} values")));
    }
    if inner.is_some() == spec.inner_row_free() {
        return Err(Error::InvalidInput("inner boundary data must match the geometry".into()));
    }
    if !(1.0..2.0).contains(&opts.relaxation) || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidInput("relaxation must lie in [1, 2), tolerance > 0".into()));
    }
    let mut values = match initial {
        Some(v) if v.len() == spec.node_count() => v.to_vec(),
        Some(_) => return Err(Error::InvalidInput("initial map has the wrong size".into())),
        None => {
            let mut v = Vec::with_capacity(spec.node_count());
            for _ in 0..=nx {
                v.extend_from_slice(outer);
            }
            v
        }
    };
    values[..nt].copy_from_slice(outer);
    if let Some(inner) = inner {
        values[nx * nt..].copy_from_slice(inner);
    }
    let mut map = GridMap::new(*spec, target.clone(), values, opts.seam)?;

    let wx = spec.x_weight();
    let free_rows: Vec<usize> = (0..=nx).filter(|&i| !spec.is_fixed_row(i)).collect();
    let mut energy = discrete_energy(&map);
    let mut energies = vec![energy];
    let mut neighbours: Vec<(TreePoint, f64)> = Vec::with_capacity(4);
    for sweep in 0..opts.max_sweeps {
        let forward = sweep % 2 == 0;
        let mut movement: f64 = 0.0;
        for r in 0..free_rows.len() {
            let i = if forward { free_rows[r] } else { free_rows[free_rows.len() - 1 - r] };
            let wt = spec.theta_weight(i);
            for c in 0..nt {
                let j = if forward { c } else { nt - 1 - c };
                neighbours.clear();
                neighbours.push((map.theta_neighbour(i, j, -1), wt));
                neighbours.push((map.theta_neighbour(i, j, 1), wt));
                if i > 0 {
                    neighbours.push((map.value(i - 1, j), wx));
                }
                if i < nx {
                    neighbours.push((map.value(i + 1, j), wx));
                }
                let old = map.value(i, j);
                let bary = target.barycenter_unchecked(&neighbours);
                let new = relax(target, old, bary, opts.relaxation);
                movement = movement.max(target.distance_unchecked(old, new));
                map.values_mut()[spec.index(i, j)] = new;
            }
        }
        let next = discrete_energy(&map);
        if next > energy + 1e-11 * energy.max(1.0) {
            return Err(Error::EnergyIncrease {
                sweep,
                before: energy,
                after: next,
            });
        }
        energy = next;
        energies.push(energy);
        if movement < opts.tolerance {
            return Ok((
                map,
                TreeSolveStats {
                    sweeps: sweep + 1,
                    last_movement: movement,
                    energies,
                },
            ));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_sweeps,
        residual: f64::NAN,
        tolerance: opts.tolerance,
    })
}

fn relax(target: &MetricTree, old: TreePoint, bary: TreePoint, omega: f64) -> TreePoint {
    if omega == 1.0 {
        return bary;
    }
    match (old, bary) {
        (TreePoint::Real(a), TreePoint::Real(b)) => TreePoint::Real(a + omega * (b - a)),
        _ => match target.common_edge(&[old, bary]) {
            Some((edge, offsets)) => {
                let s = offsets[0] + omega * (offsets[1] - offsets[0]);
                let len = target.edges()[edge].length;
                if (0.0..=len).contains(&s) {
                    TreePoint::OnEdge { edge, offset: s }
                } else {
                    bary
                }
            }
            None => bary,
        },
    }
}

/// Interpolates a solved map onto a finer grid of the same geometry, using
/// tree barycenters of the bilinear weights. Serves as a starting guess.
pub fn prolong(coarse: &GridMap, fine: &GridSpec) -> Result<Vec<TreePoint>> {
    let cs = coarse.spec();
    if cs.geometry() != fine.geometry() {
        return Err(Error::InvalidInput("prolongation needs the same geometry".into()));
    }
    let target = coarse.target();
    let (fx, ft) = (
        fine.nx() as f64 / cs.nx() as f64,
        fine.ntheta() as f64 / cs.ntheta() as f64,
    );
    let mut out = Vec::with_capacity(fine.node_count());
    let mut pts = Vec::with_capacity(4);
    for i in 0..=fine.nx() {
        let xi = i as f64 / fx;
        let i0 = (xi.floor() as usize).min(cs.nx() - 1);
        let tx = xi - i0 as f64;
        for j in 0..fine.ntheta() {
            let tj = j as f64 / ft;
            let j0 = tj.floor() as usize;
            let ty = tj - j0 as f64;
            pts.clear();
            let right = |row: usize| coarse.theta_neighbour(row, j0 % cs.ntheta(), 1);
            for (p, w) in [
                (coarse.value(i0, j0), (1.0 - tx) * (1.0 - ty)),
                (right(i0), (1.0 - tx) * ty),
                (coarse.value(i0 + 1, j0), tx * (1.0 - ty)),
                (right(i0 + 1), tx * ty),
            ] {
                if w > 0.0 {
                    pts.push((p, w));
                }
            }
            out.push(target.barycenter_unchecked(&pts));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::line::solve_line;

    #[test]
    fn single_ray_matches_line_solve() {
        let spec = GridSpec::cylinder(10, 8, 2.0, 2.0).unwrap();
        let tripod = MetricTree::tripod([10.0, 10.0, 10.0]).unwrap();
        let outer: Vec<f64> = (0..8).map(|j| 2.0 + (j as f64).sin()).collect();
        let inner: Vec<f64> = (0..8).map(|j| 4.0 + 0.5 * (j as f64 * 0.7).cos()).collect();
        let on_ray = |v: &[f64]| -> Vec<TreePoint> {
            v.iter().map(|&x| tripod.point(1, x).unwrap()).collect()
        };
        let opts = TreeSolveOptions {
            tolerance: 1e-12,
            ..Default::default()
        }
        .with_standard_relaxation(&spec);
        let (tree_map, stats) = solve_tree(&spec, &on_ray(&outer), Some(&on_ray(&inner)), &tripod, None, &opts).unwrap();
        let line_map = solve_line(&spec, &outer, Some(&inner), 0.0).unwrap();
        for (a, b) in tree_map.values().iter().zip(line_map.values()) {
            let TreePoint::OnEdge { edge, offset } = *a else { panic!() };
            assert_eq!(edge, 1);
            assert!((offset - b.real().unwrap()).abs() < 1e-9);
        }
        assert!(stats.energies.windows(2).all(|w| w[1] <= w[0] + 1e-11 * w[0].max(1.0)));
    }

    #[test]
    fn line_target_with_seam() {
        let spec = GridSpec::cylinder(8, 8, 1.0, 1.0).unwrap();
        let outer: Vec<f64> = (0..8).map(|j| 0.25 * j as f64).collect();
        let inner: Vec<f64> = outer.iter().map(|v| v + 1.0).collect();
        let pts = |v: &[f64]| v.iter().map(|&x| TreePoint::Real(x)).collect::<Vec<_>>();
        let opts = TreeSolveOptions {
            tolerance: 1e-12,
            seam: 2.0,
            relaxation: 1.5,
            ..Default::default()
        };
        let target = MetricTree::periodic_line(2.0).unwrap();
        let (m, _) = solve_tree(&spec, &pts(&outer), Some(&pts(&inner)), &target, None, &opts).unwrap();
        let line = solve_line(&spec, &outer, Some(&inner), 2.0).unwrap();
        for (a, b) in m.values().iter().zip(line.values()) {
            assert!((a.real().unwrap() - b.real().unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_cap_is_an_error() {
        let spec = GridSpec::cylinder(8, 8, 1.0, 1.0).unwrap();
        let tripod = MetricTree::tripod([1.0; 3]).unwrap();
        let outer = vec![tripod.point(0, 1.0).unwrap(); 8];
        let inner = vec![tripod.point(2, 1.0).unwrap(); 8];
        let opts = TreeSolveOptions {
            max_sweeps: 2,
            ..Default::default()
        };
        assert!(matches!(
            solve_tree(&spec, &outer, Some(&inner), &tripod, None, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn prolongation_keeps_affine_lifts() {
        let spec = GridSpec::cylinder(4, 4, 1.0, 1.0).unwrap();
        let lifts: Vec<f64> = (0..spec.node_count())
            .map(|k| 0.3 * spec.x(k / 4) + 0.5 * spec.theta(k % 4))
            .collect();
        let m = GridMap::from_lifts(spec, lifts, 0.5).unwrap();
        let fine = spec.refined(2).unwrap();
        let p = prolong(&m, &fine).unwrap();
        for i in 0..=fine.nx() {
            for j in 0..fine.ntheta() {
                let exact = 0.3 * fine.x(i) + 0.5 * fine.theta(j);
                assert!((p[fine.index(i, j)].real().unwrap() - exact).abs() < 1e-14);
            }
        }
    }
}

//! `solve`: one Dirichlet problem from a JSON document.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qdpole::cylinder::length_area_bound;
use qdpole::harmonic::boundary::{tripod_fold_row, BoundaryGenerator, Perturbation};
use qdpole::harmonic::{
    cauchy_riemann_residual, discrete_energy, hopf_extract, measure_arcs, solve_line_with, solve_tree,
    GridMap, GridSpec, LineSolveOptions, TreeSolveOptions,
};
use qdpole::io::{to_pair, Pair};
use qdpole::tree::{MetricTree, TreePoint, TreeSpec};

use crate::manifest::Manifest;
use crate::output::{config_error, emit_json, float, sibling, Failure, Table};
use crate::SolveArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Boundary {
    Constant {
        value: f64,
    },
    Model {
        alpha: f64,
        #[serde(default)]
        perturbation: Perturbation,
    },
    Values {
        values: Vec<f64>,
    },
    /// Folded boundary data of `z dz^2` on the unit circle; tripod targets only.
    TripodFold,
    /// Explicit target points, one per column.
    Points {
        points: Vec<TreePoint>,
    },
}

fn default_target() -> TreeSpec {
    TreeSpec::Line
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub grid: GridSpec,
    #[serde(default = "default_target")]
    pub target: TreeSpec,
    pub outer: Boundary,
    /// Required unless the grid's inner row is free.
    #[serde(default)]
    pub inner: Option<Boundary>,
    /// Lift offset across the seam `θ = C`; zero for finite trees.
    #[serde(default)]
    pub seam: f64,
    /// Relative residual (line targets) or per-sweep movement (trees).
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    /// Over-relaxation for tree targets; standard value by default.
    #[serde(default)]
    pub relaxation: Option<f64>,
}

impl Boundary {
    fn real_row(&self, spec: &GridSpec, i: usize) -> Result<Vec<f64>, Failure> {
        let generator = match self {
            Boundary::Constant { value } => BoundaryGenerator::Constant { value: *value },
            Boundary::Model { alpha, perturbation } => BoundaryGenerator::Model {
                alpha: *alpha,
                perturbation: perturbation.clone(),
            },
            Boundary::Values { values } => BoundaryGenerator::Values { values: values.clone() },
            Boundary::Points { points } => {
                return points
                    .iter()
                    .map(|p| p.real().ok_or_else(|| config_error("line targets need real boundary points")))
                    .collect::<Result<Vec<_>, _>>()
                    .and_then(|row| check_len(row, spec));
            }
            Boundary::TripodFold => return Err(config_error("tripod_fold needs a finite tree target")),
        };
        Ok(generator.row(spec, i)?)
    }

    fn tree_row(&self, spec: &GridSpec, tree: &MetricTree) -> Result<Vec<TreePoint>, Failure> {
        match self {
            Boundary::TripodFold => Ok(tripod_fold_row(spec, tree)?),
            Boundary::Points { points } => {
                for p in points {
                    tree.check(*p)?;
                }
                check_len(points.clone(), spec)
            }
            _ => Err(config_error(
                "finite tree targets need `tripod_fold` or `points` boundary generators",
            )),
        }
    }
}

fn check_len<T>(row: Vec<T>, spec: &GridSpec) -> Result<Vec<T>, Failure> {
    if row.len() != spec.ntheta() {
        return Err(config_error(format!(
            "boundary row has {} entries, grid has {} columns",
            row.len(),
            spec.ntheta()
        )));
    }
    Ok(row)
}

#[derive(Serialize)]
struct Arcs {
    min_meridian: f64,
    longitude_lo: f64,
    longitude_hi: f64,
}

#[derive(Serialize)]
struct Hopf {
    interior_nodes: usize,
    mean: Option<Pair>,
    cauchy_riemann_residual: f64,
}

#[derive(Serialize)]
struct Candidates {
    count: usize,
    /// Smallest `E(candidate) - E(solution)`.
    min_excess: Option<f64>,
}

#[derive(Serialize)]
struct SolveReport {
    energy: f64,
    nodes: usize,
    /// CG iterations or Gauss–Seidel sweeps.
    iterations: usize,
    final_residual: f64,
    arcs: Arcs,
    /// Present when both boundary rows carry data.
    length_area_bound: Option<f64>,
    hopf: Hopf,
    candidates: Candidates,
    values_csv: String,
    hopf_csv: String,
}

fn validate_problem(p: &Problem, spec: &GridSpec) -> Result<(), Failure> {
    match (spec.inner_row_free(), &p.inner) {
        (true, Some(_)) => return Err(config_error("`inner` must be omitted: the grid's inner row is free")),
        (false, None) => return Err(config_error("`inner` is required for this grid")),
        _ => {}
    }
    if let Some(t) = p.tolerance {
        if !(t > 0.0) {
            return Err(config_error(format!("`tolerance` must be positive, got {t}")));
        }
    }
    if !p.seam.is_finite() {
        return Err(config_error("`seam` must be finite"));
    }
    Ok(())
}

pub fn solve(args: &SolveArgs, seed: u64, m: &mut Manifest) -> Result<(), Failure> {
    let problem: Problem = crate::output::read_json(&args.input, m)?;
    let spec = problem.grid;
    validate_problem(&problem, &spec)?;
    let tree = MetricTree::from_spec(&problem.target)?;

    let (map, iterations, final_residual) = if tree.is_finite() {
        if problem.seam != 0.0 {
            return Err(config_error("finite tree targets need `seam` = 0"));
        }
        let outer = problem.outer.tree_row(&spec, &tree)?;
        let inner = problem.inner.as_ref().map(|b| b.tree_row(&spec, &tree)).transpose()?;
        let mut opts = TreeSolveOptions::default().with_standard_relaxation(&spec);
        if let Some(t) = problem.tolerance {
            opts.tolerance = t;
        }
        if let Some(n) = problem.max_iterations {
            opts.max_sweeps = n;
        }
        if let Some(w) = problem.relaxation {
            opts.relaxation = w;
        }
        let (map, stats) = solve_tree(&spec, &outer, inner.as_deref(), &tree, None, &opts)?;
        m.check(
            "energy non-increasing across sweeps",
            stats.energies.windows(2).all(|w| w[1] <= w[0] + 1e-11 * w[0].max(1.0)),
        );
        (map, stats.sweeps, stats.last_movement)
    } else {
        if let TreeSpec::PeriodicLine { period } = problem.target {
            let turns = problem.seam / period;
            if (turns - turns.round()).abs() > 1e-9 * turns.abs().max(1.0) {
                return Err(config_error(format!(
                    "`seam` {} is not a multiple of the period {period}",
                    problem.seam
                )));
            }
        }
        let outer = problem.outer.real_row(&spec, 0)?;
        let inner = problem.inner.as_ref().map(|b| b.real_row(&spec, spec.nx())).transpose()?;
        let mut opts = LineSolveOptions::default();
        if let Some(t) = problem.tolerance {
            opts.rel_tol = t;
        }
        opts.max_iterations = problem.max_iterations.or(opts.max_iterations);
        let (map, stats) = solve_line_with(&spec, &outer, inner.as_deref(), problem.seam, &opts)?;
        check_maximum_principle(&map, m);
        (map, stats.iterations, stats.residual)
    };

    let energy = discrete_energy(&map);
    let a = measure_arcs(&map);
    let (longitude_lo, longitude_hi) = a.longitude_band();
    let arcs = Arcs {
        min_meridian: a.min_meridian(),
        longitude_lo,
        longitude_hi,
    };
    let bound = if spec.inner_row_free() {
        None
    } else {
        let b = length_area_bound(spec.modulus(), arcs.min_meridian, arcs.longitude_lo)?;
        m.check_at_most("length-area bound (bound - energy)", b - energy, 1e-6);
        Some(b)
    };

    let field = hopf_extract(&map);
    let hopf = Hopf {
        interior_nodes: field.nodes.len(),
        mean: field.mean().map(to_pair),
        cauchy_riemann_residual: cauchy_riemann_residual(&map, &field),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_excess: Option<f64> = None;
    for _ in 0..args.candidates {
        let c = candidate(&map, &mut rng)?;
        let excess = discrete_energy(&c) - energy;
        min_excess = Some(min_excess.map_or(excess, |e| e.min(excess)));
    }
    if let Some(e) = min_excess {
        m.check_at_most("solution beats random competitors (E - E_candidate)", -e, 1e-9 * energy.max(1.0));
    }

    let values_path = sibling(&args.output, "values", "csv");
    let hopf_path = sibling(&args.output, "hopf", "csv");
    write_values(&map, &values_path)?;
    write_hopf(&map, &field, &hopf_path)?;
    m.outputs.push(values_path.display().to_string());
    m.outputs.push(hopf_path.display().to_string());

    let report = SolveReport {
        energy,
        nodes: spec.node_count(),
        iterations,
        final_residual,
        arcs,
        length_area_bound: bound,
        hopf,
        candidates: Candidates {
            count: args.candidates,
            min_excess,
        },
        values_csv: values_path.display().to_string(),
        hopf_csv: hopf_path.display().to_string(),
    };
    emit_json(&report, m, Some(&args.output))
}

/// Interior lifts, with the seam ramp removed, stay within the range of the
/// Dirichlet rows.
fn check_maximum_principle(map: &GridMap, m: &mut Manifest) {
    let s = map.spec();
    let ramp = |i: usize, j: usize| map.lift(i, j).expect("line target") - map.seam() * s.theta(j) / s.circumference();
    let fixed: Vec<f64> = (0..s.rows())
        .filter(|&i| s.is_fixed_row(i))
        .flat_map(|i| (0..s.ntheta()).map(move |j| (i, j)))
        .map(|(i, j)| ramp(i, j))
        .collect();
    let lo = fixed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fixed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + lo.abs().max(hi.abs());
    let mut excess: f64 = 0.0;
    for i in (0..s.rows()).filter(|&i| !s.is_fixed_row(i)) {
        for j in 0..s.ntheta() {
            let v = ramp(i, j);
            excess = excess.max(lo - v).max(v - hi);
        }
    }
    m.check_at_most("maximum principle (overshoot / scale)", excess / scale, 1e-9);
}

/// The solution with every free node nudged at random.
fn candidate(map: &GridMap, rng: &mut ChaCha8Rng) -> Result<GridMap, Failure> {
    let s = map.spec();
    let tree = map.target();
    let mut values = map.values().to_vec();
    let (lo, hi) = values
        .iter()
        .filter_map(|p| p.real())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let amplitude = if lo.is_finite() { 1e-2 * (hi - lo).max(1.0) } else { 0.0 };
    for i in (0..s.rows()).filter(|&i| !s.is_fixed_row(i)) {
        for j in 0..s.ntheta() {
            let k = s.index(i, j);
            values[k] = match values[k] {
                TreePoint::Real(v) => TreePoint::Real(v + amplitude * rng.gen_range(-1.0..1.0)),
                TreePoint::OnEdge { edge, offset } => {
                    let len = tree.edges()[edge].length;
                    let moved = (offset + 1e-2 * len * rng.gen_range(-1.0..1.0)).clamp(0.0, len);
                    TreePoint::OnEdge { edge, offset: moved }
                }
            };
        }
    }
    Ok(GridMap::new(*s, tree.clone(), values, map.seam())?)
}

fn node_fields(s: &GridSpec, i: usize, j: usize) -> Vec<String> {
    let z = s.position(i, j);
    vec![
        i.to_string(),
        j.to_string(),
        float(s.x(i)),
        float(s.theta(j)),
        float(z.re),
        float(z.im),
    ]
}

fn write_values(map: &GridMap, path: &Path) -> Result<(), Failure> {
    let s = map.spec();
    let finite = map.target().is_finite();
    let mut header = vec!["i", "j", "x", "theta", "z_re", "z_im"];
    header.extend(if finite { &["edge", "offset"][..] } else { &["value"][..] });
    let mut t = Table::new(&header)?;
    for i in 0..s.rows() {
        for j in 0..s.ntheta() {
            let mut row = node_fields(s, i, j);
            match map.value(i, j) {
                TreePoint::Real(v) => row.push(float(v)),
                TreePoint::OnEdge { edge, offset } => {
                    row.push(edge.to_string());
                    row.push(float(offset));
                }
            }
            t.row(&row)?;
        }
    }
    t.write(path)
}

fn write_hopf(map: &GridMap, field: &qdpole::harmonic::HopfField, path: &Path) -> Result<(), Failure> {
    let s = map.spec();
    let mut t = Table::new(&[
        "i",
        "j",
        "x",
        "theta",
        "z_re",
        "z_im",
        "hopf_re",
        "hopf_im",
        "chart_hopf_re",
        "chart_hopf_im",
    ])?;
    for ((&(i, j), v), (_, chart)) in field.nodes.iter().zip(&field.values).zip(field.in_chart(map)) {
        let mut row = node_fields(s, i, j);
        row.extend([v.re, v.im, chart.re, chart.im].map(float));
        t.row(&row)?;
    }
    t.write(path)
}

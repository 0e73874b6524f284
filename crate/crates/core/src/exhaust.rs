//! Exhaustion experiment: harmonic maps on flat cylinders of growing modulus
//! with fixed perturbed data on the outer end and model data on the inner end,
//! plus the pole-order probe and residue recovery.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::ModelEnd;
use crate::error::{Error, Result};
use crate::harmonic::boundary::{model_row, Perturbation};
use crate::harmonic::{
    discrete_energy, hopf_extract, measure_arcs, solve_line, Geometry, GridMap, GridSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionConfig {
    pub circumference: f64,
    pub alpha: f64,
    /// Added to the model data on the outer boundary.
    pub perturbation: Perturbation,
    /// Strictly increasing, each at least 1 (the window modulus).
    pub moduli: Vec<f64>,
    /// Columns; rows are `modulus * ntheta` so cells are square.
    pub ntheta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionRow {
    pub modulus: f64,
    pub nx: usize,
    pub total_energy: f64,
    /// `total_energy - R^2 M / 2`.
    pub energy_excess: f64,
    /// Energy of the modulus-1 window at the outer boundary.
    pub window_energy: f64,
    /// `E(h0) + R^2 (M - 1)/2`: the window solve glued to the model map.
    pub candidate_bound: f64,
    pub sup_model_distance: f64,
    pub boundary_model_distance: f64,
    pub min_meridian: f64,
    pub longitude_lo: f64,
    pub longitude_hi: f64,
    /// Mean Hopf coefficient over the inner half of the cylinder.
    pub hopf_mean: Complex64,
    /// `max - min` of the lifted values.
    pub image_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub config: ExhaustionConfig,
    /// Energy of the harmonic map on the window alone, with model data on its inner end.
    pub window_solve_energy: f64,
    pub rows: Vec<ExhaustionRow>,
}

/// Fitted constants and the boundedness verdicts of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionVerdict {
    /// Least-squares slope of each column against the row index.
    pub excess_slope: f64,
    pub distance_slope: f64,
    pub excess_bound: f64,
    pub distance_bound: f64,
    /// `(max - min)/max` of the window energies.
    pub window_variation: f64,
    /// Smallest `K` with `total >= R^2 M / 2 - K` on every row.
    pub lower_constant: f64,
    pub bounded_excess: bool,
    pub bounded_distance: bool,
    pub window_stable: bool,
    pub candidate_bound_holds: bool,
    pub maximum_principle_holds: bool,
    pub energy_monotone: bool,
}

fn validate(cfg: &ExhaustionConfig) -> Result<ModelEnd> {
    if cfg.moduli.is_empty() || cfg.moduli.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("moduli must be nonempty and strictly increasing".into()));
    }
    if cfg.moduli[0] < 1.0 {
        return Err(Error::InvalidInput("moduli must be at least the window modulus 1".into()));
    }
    if cfg.ntheta < crate::harmonic::MIN_GRID {
        return Err(Error::InvalidInput("ntheta too small".into()));
    }
    ModelEnd::new(cfg.circumference, cfg.alpha, None)
}

fn rows_for(modulus: f64, ntheta: usize) -> Result<usize> {
    let nx = modulus * ntheta as f64;
    if (nx - nx.round()).abs() > 1e-9 * nx {
        return Err(Error::InvalidInput(format!(
            "modulus {modulus} times {ntheta} columns is not a whole number of rows"
        )));
    }
    Ok(nx.round() as usize)
}

fn solve_cylinder(cfg: &ExhaustionConfig, end: &ModelEnd, modulus: f64) -> Result<GridMap> {
    let nx = rows_for(modulus, cfg.ntheta)?;
    let length = modulus * cfg.circumference;
    let spec = GridSpec::cylinder(nx, cfg.ntheta, length, cfg.circumference)?;
    let mut outer = model_row(&spec, end, 0);
    cfg.perturbation.apply(&spec, &mut outer);
    let inner = model_row(&spec, end, nx);
    solve_line(&spec, &outer, Some(&inner), end.seam_offset())
}

fn summarize(m: &GridMap, end: &ModelEnd, window_solve_energy: f64) -> ExhaustionRow {
    let s = m.spec();
    let r = s.circumference();
    let modulus = s.modulus();
    let total = discrete_energy(m);
    let mut sup: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=s.nx() {
        for j in 0..s.ntheta() {
            let v = m.lift(i, j).expect("line solve stores lifts");
            let d = (v - end.lift(s.x(i), s.theta(j))).abs();
            sup = sup.max(d);
            if s.is_fixed_row(i) {
                boundary = boundary.max(d);
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let arcs = measure_arcs(m);
    let (longitude_lo, longitude_hi) = arcs.longitude_band();
    let hopf = hopf_extract(m);
    let inner_half: Vec<Complex64> = hopf
        .nodes
        .iter()
        .zip(&hopf.values)
        .filter(|((i, _), _)| 2 * i >= s.nx())
        .map(|(_, v)| *v)
        .collect();
    let hopf_mean = inner_half.iter().sum::<Complex64>() / inner_half.len().max(1) as f64;
    ExhaustionRow {
        modulus,
        nx: s.nx(),
        total_energy: total,
        energy_excess: total - 0.5 * r * r * modulus,
        window_energy: m.energy_in_rows(0, s.ntheta()),
        candidate_bound: window_solve_energy + 0.5 * r * r * (modulus - 1.0),
        sup_model_distance: sup,
        boundary_model_distance: boundary,
        min_meridian: arcs.min_meridian(),
        longitude_lo,
        longitude_hi,
        hopf_mean,
        image_diameter: hi - lo,
    }
}

/// Runs one solve per modulus (in parallel) and tabulates the report rows.
pub fn run_exhaustion(cfg: &ExhaustionConfig) -> Result<ExhaustionReport> {
    let end = validate(cfg)?;
    let window = solve_cylinder(cfg, &end, 1.0)?;
    let window_solve_energy = discrete_energy(&window);
    let rows = cfg
        .moduli
        .par_iter()
        .map(|&m| solve_cylinder(cfg, &end, m).map(|map| summarize(&map, &end, window_solve_energy)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExhaustionReport {
        config: cfg.clone(),
        window_solve_energy,
        rows,
    })
}

/// Least-squares slope of `values` against their index.
pub fn index_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in values.iter().enumerate() {
        let dx = k as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// A column counts as bounded when its fitted slope is at most 1% of its magnitude.
fn bounded_column(values: &[f64]) -> (f64, f64, bool) {
    let slope = index_slope(values);
    let magnitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (slope, magnitude, slope <= 0.01 * magnitude + 1e-9)
}

impl ExhaustionReport {
    pub fn verdict(&self) -> ExhaustionVerdict {
        let col = |f: fn(&ExhaustionRow) -> f64| self.rows.iter().map(f).collect::<Vec<_>>();
        let (excess_slope, excess_bound, bounded_excess) = bounded_column(&col(|r| r.energy_excess));
        let (distance_slope, distance_bound, bounded_distance) =
            bounded_column(&col(|r| r.sup_model_distance));
        let windows = col(|r| r.window_energy);
        let wmax = windows.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        let wmin = windows.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let window_variation = if wmax > 0.0 { (wmax - wmin) / wmax } else { 0.0 };
        let lower_constant = self
            .rows
            .iter()
            .map(|r| -r.energy_excess)
            .fold(f64::NEG_INFINITY, f64::max);
        ExhaustionVerdict {
            excess_slope,
            distance_slope,
            excess_bound,
            distance_bound,
            window_variation,
            lower_constant,
            bounded_excess,
            bounded_distance,
            window_stable: window_variation < 0.05,
            candidate_bound_holds: self
                .rows
                .iter()
                .all(|r| r.total_energy <= r.candidate_bound + 1e-6),
            maximum_principle_holds: self
                .rows
                .iter()
                .all(|r| r.sup_model_distance <= r.boundary_model_distance + 1e-9),
            energy_monotone: self
                .rows
                .windows(2)
                .all(|w| w[1].total_energy >= w[0].total_energy - 1e-9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Linear,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub k: u32,
    pub classification: GrowthClass,
    /// Slope of energy vs modulus (linear) or of log-energy vs modulus (exponential).
    pub fitted_rate: f64,
    /// `R^2/2` for `k = 2`, `2π(k - 2)` otherwise.
    pub expected_rate: f64,
    pub linear_residual: f64,
    pub log_residual: f64,
    pub energies: Vec<(f64, f64)>,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Harmonic maps on the round annulus `e^{-2πM} ≤ |z| ≤ 1` with the exact
/// collapsing values of `(R/2π)^2 z^{-k} dz^2` on both boundary circles. The
/// growth of the energy in the modulus identifies the pole order.
pub fn pole_order_probe(k: u32, moduli: &[f64], circumference: f64, ntheta: usize) -> Result<ProbeResult> {
    if !matches!(k, 2 | 4 | 6) {
        return Err(Error::InvalidInput(format!("probe order must be 2, 4 or 6, got {k}")));
    }
    if moduli.len() < 3 || moduli.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidInput("probe needs at least 3 positive moduli".into()));
    }
    if !(circumference > 0.0) {
        return Err(Error::InvalidInput("circumference must be positive".into()));
    }
    let c = circumference / (2.0 * PI);
    // z = e^{-ω}: k = 2 gives Im(c log z) = -cθ; otherwise
    // Im(c z^{1-k/2}/(1-k/2)) = c e^{(k/2-1)x} sin((k/2-1)θ)/(1-k/2)
    let collapsing = |x: f64, theta: f64| -> f64 {
        if k == 2 {
            -c * theta
        } else {
            let p = k as f64 / 2.0 - 1.0;
            -c * (p * x).exp() * (p * theta).sin() / p
        }
    };
    let seam = if k == 2 { -circumference } else { 0.0 };
    let energies = moduli
        .par_iter()
        .map(|&m| {
            let nx = rows_for(m, ntheta)?;
            let spec = GridSpec::new(
                nx,
                ntheta,
                Geometry::RoundAnnulus {
                    r_in: (-2.0 * PI * m).exp(),
                    r_out: 1.0,
                },
            )?;
            let row = |i: usize| -> Vec<f64> {
                (0..ntheta).map(|j| collapsing(spec.x(i), spec.theta(j))).collect()
            };
            let map = solve_line(&spec, &row(0), Some(&row(nx)), seam)?;
            Ok((m, discrete_energy(&map)))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = energies.iter().map(|e| e.0).collect();
    let ys: Vec<f64> = energies.iter().map(|e| e.1).collect();
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (lin_slope, _, lin_rms) = fit_line(&xs, &ys);
    let (log_slope, _, log_rms) = fit_line(&xs, &logs);
    let y_scale = (ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64).sqrt();
    let linear_residual = lin_rms / y_scale;
    let log_residual = log_rms;
    let (classification, fitted_rate, best) = if linear_residual <= log_residual {
        (GrowthClass::Linear, lin_slope, linear_residual)
    } else {
        (GrowthClass::Exponential, log_slope, log_residual)
    };
    if !(best <= 1e-2) {
        return Err(Error::Inconclusive(format!(
            "neither fit is clean: linear residual {linear_residual:.3e}, log residual {log_residual:.3e}"
        )));
    }
    Ok(ProbeResult {
        k,
        classification,
        fitted_rate,
        expected_rate: if k == 2 {
            0.5 * circumference * circumference
        } else {
            2.0 * PI * (k as f64 - 2.0)
        },
        linear_residual,
        log_residual,
        energies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub recovered: Complex64,
    pub expected: Complex64,
    pub relative_error: f64,
}

/// Recovers the residue from the report's stabilized columns: `Re a` from the
/// minimal meridian measure and `α` from the Hopf argument, or, for a closed
/// center, `|a|` from the image diameter per modulus.
pub fn residue_recovery(report: &ExhaustionReport, circumference: f64, alpha: f64) -> Result<Recovery> {
    let end = ModelEnd::new(circumference, alpha, None)?;
    let expected = crate::qd::Residue::from_end_params(circumference, alpha)?.value();
    let rows = &report.rows;
    if rows.len() < 2 {
        return Err(Error::Recovery("need at least two rows to judge stabilization".into()));
    }
    let (last, prev) = (&rows[rows.len() - 1], &rows[rows.len() - 2]);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let recovered = if end.angle.is_closed() {
        let ratio = |r: &ExhaustionRow| r.image_diameter / r.modulus;
        if rel(ratio(last), ratio(prev)) > 0.05 {
            return Err(Error::Recovery(format!(
                "diameter/modulus not stabilized: {} then {}",
                ratio(prev),
                ratio(last)
            )));
        }
        Complex64::new(0.0, ratio(last) / (2.0 * PI))
    } else {
        if rel(last.min_meridian, prev.min_meridian) > 1e-3 {
            return Err(Error::Recovery("meridian measure not stabilized".into()));
        }
        let angle = |r: &ExhaustionRow| 0.5 * r.hopf_mean.arg();
        if (angle(last) - angle(prev)).abs() > 1e-2 {
            return Err(Error::Recovery("Hopf argument not stabilized".into()));
        }
        let re = last.min_meridian / (2.0 * PI);
        Complex64::new(re, re * angle(last).tan())
    };
    let relative_error = (recovered - expected).norm() / expected.norm();
    if relative_error > 0.02 {
        return Err(Error::Recovery(format!(
            "recovered {recovered} is {:.2}% away from {expected}",
            100.0 * relative_error
        )));
    }
    Ok(Recovery {
        recovered,
        expected,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::boundary::Mode;

    fn config(perturbation: Perturbation, moduli: Vec<f64>) -> ExhaustionConfig {
        ExhaustionConfig {
            circumference: 2.0 * PI,
            alpha: 0.3,
            perturbation,
            moduli,
            ntheta: 16,
        }
    }

    #[test]
    fn model_data_has_no_excess() {
        let report = run_exhaustion(&config(Perturbation::default(), vec![1.0, 2.0, 4.0])).unwrap();
        for row in &report.rows {
            assert!(row.energy_excess.abs() < 1e-6);
            assert!(row.sup_model_distance < 1e-9);
        }
    }

    #[test]
    fn single_modulus() {
        let report = run_exhaustion(&config(Perturbation::default(), vec![2.0])).unwrap();
        assert_eq!(report.rows.len(), 1);
    }

    #[test]
    fn bad_moduli() {
        assert!(run_exhaustion(&config(Perturbation::default(), vec![])).is_err());
        assert!(run_exhaustion(&config(Perturbation::default(), vec![2.0, 2.0])).is_err());
        assert!(run_exhaustion(&config(Perturbation::default(), vec![0.5])).is_err());
        assert!(run_exhaustion(&config(Perturbation::default(), vec![1.03])).is_err());
    }

    #[test]
    fn perturbed_rows_obey_bounds() {
        let p = Perturbation {
            shift: 0.4,
            modes: vec![Mode { k: 1, amplitude: 0.5, phase: 0.2 }],
        };
        let report = run_exhaustion(&config(p, vec![1.0, 2.0, 4.0, 8.0])).unwrap();
        let v = report.verdict();
        assert!(v.candidate_bound_holds && v.maximum_principle_holds && v.energy_monotone);
        // at modulus 1 the row is the window solve itself
        assert!((report.rows[0].total_energy - report.window_solve_energy).abs() < 1e-9);
        assert!(report.rows.iter().all(|r| r.energy_excess >= -v.lower_constant - 1e-12));
    }

    #[test]
    fn slope_helper() {
        assert!((index_slope(&[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
        assert_eq!(index_slope(&[4.0]), 0.0);
    }

    #[test]
    fn probe_rejects_odd_orders() {
        assert!(pole_order_probe(3, &[0.5, 1.0, 1.5], 2.0 * PI, 16).is_err());
    }
}

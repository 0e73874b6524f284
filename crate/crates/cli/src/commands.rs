//! Subcommands other than `solve`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qdpole::cylinder::{length_area_bound, ModelEnd, TargetKind};
use qdpole::exhaust::{pole_order_probe, residue_recovery, run_exhaustion, ExhaustionConfig, GrowthClass};
use qdpole::foliation::{emit_svg, horizontal_drift, trace_leaves, Direction, LeafOptions, SvgOptions, Termination};
use qdpole::harmonic::boundary::{Mode, Perturbation};
use qdpole::io::{to_pair, DifferentialSpec, Pair};
use qdpole::mf2::{end_params_from_residue, prescribe_residue, residue_to_prescription, Mf2Coords};
use qdpole::qd::{classify_center, loop_transverse_measure_by_contour, CenterKind, Chart, Handedness};
use qdpole::Complex64;

use crate::manifest::Manifest;
use crate::output::{config_error, emit_json, read_json, sibling, sidecar, write_file, float, document, Failure, Table};
use crate::{AnalyzeArgs, BoundArgs, CoordsArgs, ExhaustArgs, ModelArgs, PrescribeArgs, ProbeArgs, TraceArgs, TraceDirection};

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be positive and finite, got {v}")))
    }
}

#[derive(Serialize)]
struct PoleSummary {
    z: Pair,
    order: i32,
}

#[derive(Serialize)]
struct Analysis {
    pole: Pair,
    order: i32,
    residue: Option<Pair>,
    #[serde(rename = "R")]
    circumference: Option<f64>,
    alpha: Option<f64>,
    handedness: Option<Handedness>,
    center: Option<CenterKind>,
    /// `2π Re a`.
    transverse_measure: Option<f64>,
    /// The same measure by contour quadrature.
    contour_measure: Option<f64>,
    poles: Vec<PoleSummary>,
    zeros: Vec<Pair>,
}

pub fn analyze(args: &AnalyzeArgs, m: &mut Manifest) -> Result<(), Failure> {
    let spec: DifferentialSpec = read_json(&args.input, m)?;
    let q = spec.build()?;
    let poles = q.poles();
    let p = poles
        .get(args.pole)
        .ok_or_else(|| config_error(format!("pole index {} out of range ({} poles)", args.pole, poles.len())))?
        .location;
    let order = q.pole_order(p)?;
    let mut out = Analysis {
        pole: to_pair(p),
        order,
        residue: None,
        circumference: None,
        alpha: None,
        handedness: None,
        center: None,
        transverse_measure: None,
        contour_measure: None,
        poles: poles
            .iter()
            .map(|pole| {
                Ok(PoleSummary {
                    z: to_pair(pole.location),
                    order: q.pole_order(pole.location)?,
                })
            })
            .collect::<Result<_, qdpole::Error>>()?,
        zeros: q.zeros().iter().copied().map(to_pair).collect(),
    };
    if order == 2 {
        let a = q.residue(p)?;
        let contour = loop_transverse_measure_by_contour(&q, p, None, args.vertices)?;
        out.residue = Some(to_pair(a.value()));
        out.circumference = Some(a.circumference());
        out.alpha = Some(a.angle_alpha());
        out.handedness = Some(a.handedness());
        out.center = Some(classify_center(&a));
        out.transverse_measure = Some(a.loop_measure());
        out.contour_measure = Some(contour);
        m.check_at_most("contour measure equals 2π Re a", (contour - a.loop_measure()).abs(), 1e-8);
    }
    emit_json(&out, m, args.output.as_deref())
}

#[derive(Serialize)]
struct TraceSummary {
    leaves: usize,
    /// Seeds or directions that could not be traced, with the reason.
    skipped: Vec<String>,
    terminations: BTreeMap<&'static str, usize>,
    max_drift: f64,
    total_flat_length: f64,
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::MaxLength => "max_length",
        Termination::PoleCapture => "pole_capture",
        Termination::ZeroProximity => "zero_proximity",
        Termination::ChartBoundary => "chart_boundary",
    }
}

/// Drift allowed per unit flat length: RK4 at the default step is far below it.
const DRIFT_PER_LENGTH: f64 = 1e-6;

pub fn trace(args: &TraceArgs, m: &mut Manifest) -> Result<(), Failure> {
    positive("--step", args.step)?;
    positive("--max-len", args.max_len)?;
    positive("--width", args.width)?;
    if args.seeds == 0 {
        return Err(config_error("--seeds must be at least 1"));
    }
    let spec: DifferentialSpec = read_json(&args.input, m)?;
    let q = spec.build()?;
    let center = match q.poles() {
        [] => Complex64::new(0.0, 0.0),
        poles => {
            poles
                .get(args.pole)
                .ok_or_else(|| config_error(format!("pole index {} out of range", args.pole)))?
                .location
        }
    };
    let radius = match args.seed_radius {
        Some(r) => {
            positive("--seed-radius", r)?;
            r
        }
        None => match q.chart() {
            Chart::Disk => 0.5 * (1.0 - center.norm()).max(0.0),
            Chart::Annulus { r_in, r_out } => {
                if center.norm() == 0.0 {
                    0.5 * (r_in + r_out)
                } else {
                    0.5 * (r_out - center.norm()).min(center.norm() - r_in).max(0.0)
                }
            }
            Chart::Plane => 1.0,
        },
    };
    positive("seed circle radius", radius)?;
    let seeds: Vec<Complex64> = (0..args.seeds)
        .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / args.seeds as f64))
        .collect();
    let directions: &[Direction] = match args.direction {
        TraceDirection::Forward => &[Direction::Forward],
        TraceDirection::Backward => &[Direction::Backward],
        TraceDirection::Both => &[Direction::Forward, Direction::Backward],
    };

    let mut traces = Vec::new();
    let mut summary = TraceSummary {
        leaves: 0,
        skipped: Vec::new(),
        terminations: BTreeMap::new(),
        max_drift: 0.0,
        total_flat_length: 0.0,
    };
    let mut worst_drift_ratio: f64 = 0.0;
    for &direction in directions {
        let opts = LeafOptions {
            step: args.step,
            max_flat_length: args.max_len,
            direction,
            ..LeafOptions::default()
        };
        for (seed, result) in seeds.iter().zip(trace_leaves(&q, &seeds, &opts)) {
            match result {
                Ok(t) => {
                    let drift = horizontal_drift(&q, &t)?;
                    summary.max_drift = summary.max_drift.max(drift);
                    worst_drift_ratio = worst_drift_ratio.max(drift / (1.0 + t.arc_length_flat));
                    summary.total_flat_length += t.arc_length_flat;
                    *summary.terminations.entry(termination_name(t.terminated_by)).or_default() += 1;
                    summary.leaves += 1;
                    traces.push(t);
                }
                Err(e) => summary.skipped.push(format!("seed {seed} ({direction:?}): {e}")),
            }
        }
    }
    m.check_at_most("leaves stay horizontal (drift per unit length)", worst_drift_ratio, DRIFT_PER_LENGTH);
    m.check("at least one leaf traced", summary.leaves > 0);

    let svg = emit_svg(
        &traces,
        &q.singularities(),
        &SvgOptions {
            width: args.width,
            ..SvgOptions::default()
        },
    );
    write_file(&args.output, &svg)?;
    write_sidecar(&args.output, &summary, m)
}

/// Writes `<out>.manifest.json` holding the summary and the manifest.
fn write_sidecar<T: Serialize>(out: &Path, summary: &T, m: &mut Manifest) -> Result<(), Failure> {
    let path = sidecar(out);
    m.outputs.push(out.display().to_string());
    m.outputs.push(path.display().to_string());
    write_file(&path, &document(&serde_json::json!({ "summary": summary }), m)?)
}

#[derive(Serialize)]
struct ModelReport {
    #[serde(rename = "R")]
    circumference: f64,
    alpha: f64,
    #[serde(rename = "L")]
    length: f64,
    modulus: f64,
    energy: f64,
    /// `(R cos α, |L sin α|)`.
    transverse: (f64, f64),
    hopf: Pair,
    /// Circumference of the target circle; `null` for a ray.
    target_circumference: Option<f64>,
    seam_offset: f64,
    length_area_bound: f64,
}

pub fn model(args: &ModelArgs, m: &mut Manifest) -> Result<(), Failure> {
    let end = ModelEnd::new(args.circumference, args.alpha, Some(args.length))?;
    let energy = end.energy().expect("finite length");
    let transverse = end.transverse().expect("finite length");
    let modulus = end.modulus().expect("finite length");
    let bound = length_area_bound(modulus, transverse.0, transverse.1)?;
    m.check_at_most("length-area bound attained", (bound - energy).abs() / energy, 1e-12);
    let out = ModelReport {
        circumference: args.circumference,
        alpha: args.alpha,
        length: args.length,
        modulus,
        energy,
        transverse,
        hopf: to_pair(end.hopf()),
        target_circumference: match end.target_kind() {
            TargetKind::Circle { circumference } => Some(circumference),
            TargetKind::Ray => None,
        },
        seam_offset: end.seam_offset(),
        length_area_bound: bound,
    };
    emit_json(&out, m, args.output.as_deref())
}

pub fn bound(args: &BoundArgs, m: &mut Manifest) -> Result<(), Failure> {
    if !(args.meridian >= 0.0 && args.longitude >= 0.0) {
        return Err(config_error("C and tau must be nonnegative"));
    }
    let b = length_area_bound(args.modulus, args.meridian, args.longitude)?;
    emit_json(
        &serde_json::json!({
            "M": args.modulus,
            "C": args.meridian,
            "tau": args.longitude,
            "bound": b,
        }),
        m,
        args.output.as_deref(),
    )
}

/// Shift and three modes drawn from the run seed.
fn random_perturbation(seed: u64) -> Perturbation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Perturbation {
        shift: rng.gen_range(-0.5..0.5),
        modes: (1..=3)
            .map(|k| Mode {
                k,
                amplitude: rng.gen_range(-0.5..0.5) / k as f64,
                phase: rng.gen_range(0.0..2.0 * PI),
            })
            .collect(),
    }
}

fn parse_perturbation(raw: &str, seed: u64, m: &mut Manifest) -> Result<Perturbation, Failure> {
    match raw.trim() {
        "random" => Ok(random_perturbation(seed)),
        "none" => Ok(Perturbation::default()),
        s if s.starts_with('{') => {
            let mut de = serde_json::Deserializer::from_str(s);
            serde_path_to_error::deserialize(&mut de)
                .map_err(|e| config_error(format!("--perturbation: at `{}`: {}", e.path(), e.inner())))
        }
        path => read_json(Path::new(path), m),
    }
}

const EXHAUST_COLUMNS: [&str; 14] = [
    "modulus",
    "nx",
    "total_energy",
    "energy_excess",
    "window_energy",
    "candidate_bound",
    "sup_model_distance",
    "boundary_model_distance",
    "min_meridian",
    "longitude_lo",
    "longitude_hi",
    "hopf_mean_re",
    "hopf_mean_im",
    "image_diameter",
];

pub fn exhaust(args: &ExhaustArgs, seed: u64, m: &mut Manifest) -> Result<(), Failure> {
    let perturbation = parse_perturbation(&args.perturbation, seed, m)?;
    let cfg = ExhaustionConfig {
        circumference: args.circumference,
        alpha: args.alpha,
        perturbation,
        moduli: args.moduli.clone(),
        ntheta: args.ntheta,
    };
    let report = run_exhaustion(&cfg)?;
    let v = report.verdict();
    let recovery = residue_recovery(&report, args.circumference, args.alpha);

    let mut table = Table::new(&EXHAUST_COLUMNS)?;
    for r in &report.rows {
        let mut row = vec![float(r.modulus), r.nx.to_string()];
        row.extend(
            [
                r.total_energy,
                r.energy_excess,
                r.window_energy,
                r.candidate_bound,
                r.sup_model_distance,
                r.boundary_model_distance,
                r.min_meridian,
                r.longitude_lo,
                r.longitude_hi,
                r.hopf_mean.re,
                r.hopf_mean.im,
                r.image_diameter,
            ]
            .map(float),
        );
        table.row(&row)?;
    }

    m.check("bounded energy excess", v.bounded_excess);
    m.check("bounded distance to the model map", v.bounded_distance);
    m.check_at_most("window energy variation", v.window_variation, 0.05);
    m.check("candidate upper bound", v.candidate_bound_holds);
    m.check("maximum principle for the model distance", v.maximum_principle_holds);
    m.check("energy non-decreasing in the modulus", v.energy_monotone);
    let (recovered, recovery_error) = match &recovery {
        Ok(r) => {
            m.check_at_most("residue recovered", r.relative_error, 0.02);
            (Some(to_pair(r.recovered)), Some(r.relative_error))
        }
        Err(e) => {
            m.check(&format!("residue recovered ({e})"), false);
            (None, None)
        }
    };
    let expected = qdpole::qd::Residue::from_end_params(args.circumference, args.alpha)?;

    table.write(&args.output)?;
    let verdict_path = args
        .verdict
        .clone()
        .unwrap_or_else(|| sibling(&args.output, "verdict", "json"));
    m.outputs.push(verdict_path.display().to_string());
    let payload = serde_json::json!({
        "bounded_excess": v.bounded_excess,
        "bounded_distance": v.bounded_distance,
        "recovered_residue": recovered,
        "expected_residue": to_pair(expected.value()),
        "recovery_relative_error": recovery_error,
        "window_solve_energy": report.window_solve_energy,
        "perturbation": cfg.perturbation,
        "verdict": v,
    });
    write_sidecar(&args.output, &payload, m)?;
    write_file(&verdict_path, &document(&payload, m)?)
}

pub fn probe(args: &ProbeArgs, m: &mut Manifest) -> Result<(), Failure> {
    let r = pole_order_probe(args.k, &args.moduli, args.circumference, args.ntheta)?;
    let expected_class = if args.k == 2 { GrowthClass::Linear } else { GrowthClass::Exponential };
    m.check("growth class matches the pole order", r.classification == expected_class);
    let tol = if args.k == 2 { 0.05 } else { 0.10 };
    m.check_at_most(
        "fitted rate matches the expected rate",
        (r.fitted_rate - r.expected_rate).abs() / r.expected_rate,
        tol,
    );
    emit_json(&r, m, args.output.as_deref())
}

pub fn coords(args: &CoordsArgs, m: &mut Manifest) -> Result<(), Failure> {
    let c: Mf2Coords = read_json(&args.input, m)?;
    m.check("parameter count equals dimension", c.parameter_count() == c.dimension() as usize);
    emit_json(
        &serde_json::json!({
            "genus": c.genus(),
            "centers": c.centers(),
            "dimension": c.dimension(),
            "parameter_count": c.parameter_count(),
        }),
        m,
        args.output.as_deref(),
    )
}

#[derive(Serialize)]
struct Prescribed {
    tau: f64,
    c: f64,
    residue: Pair,
    #[serde(rename = "R")]
    circumference: f64,
    alpha: f64,
    center: CenterKind,
}

pub fn prescribe(args: &PrescribeArgs, m: &mut Manifest) -> Result<(), Failure> {
    if args.tau.len() != args.c.len() {
        return Err(config_error(format!(
            "--tau has {} values but --c has {}",
            args.tau.len(),
            args.c.len()
        )));
    }
    let mut worst: f64 = 0.0;
    let mut residues = Vec::with_capacity(args.tau.len());
    for (&tau, &c) in args.tau.iter().zip(&args.c) {
        let a = prescribe_residue(tau, c)?;
        let (t2, c2) = residue_to_prescription(&a);
        worst = worst.max((t2 - tau).abs() / (1.0 + tau)).max((c2 - c).abs() / c);
        let (circumference, alpha) = end_params_from_residue(&a);
        residues.push(Prescribed {
            tau,
            c,
            residue: to_pair(a.value()),
            circumference,
            alpha,
            center: classify_center(&a),
        });
    }
    m.check_at_most("prescription round trip", worst, 1e-12);
    emit_json(&serde_json::json!({ "residues": residues }), m, args.output.as_deref())
}

//! Traced leaves near a double pole spiral in the sense given by the sign of
//! `Im a`: counter-clockwise inward for a positive residue.

use num_complex::Complex64;
use qdpole::foliation::{trace_leaf, Direction, LeafOptions, Termination};
use qdpole::io::DifferentialSpec;
use qdpole::qd::{classify_center, CenterKind, Handedness};

/// Total change of `arg z` along a polyline, unwrapped.
fn winding(points: &[Complex64]) -> f64 {
    points.windows(2).map(|w| (w[1] / w[0]).arg()).sum()
}

fn differential(a: Complex64) -> DifferentialSpec {
    let a2 = a * a;
    serde_json::from_str(&format!(
        r#"{{"chart": "disk", "poles": [{{"z": [0, 0], "laurent": [[{}, {}], [0, 0]]}}]}}"#,
        a2.re, a2.im
    ))
    .unwrap()
}

#[test]
fn spiral_sense_follows_handedness() {
    for (a, kind) in [
        (Complex64::new(1.0, 1.0), CenterKind::SpiralPositive),
        (Complex64::new(1.0, -1.0), CenterKind::SpiralNegative),
        (Complex64::new(0.5, 2.0), CenterKind::SpiralPositive),
    ] {
        let q = differential(a).build().unwrap();
        let r = q.residue(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(classify_center(&r), kind);
        let opts = LeafOptions {
            max_flat_length: 200.0,
            ..LeafOptions::default()
        };
        // Whichever direction reaches the pole is the inward one.
        let inward = [Direction::Forward, Direction::Backward]
            .into_iter()
            .map(|direction| trace_leaf(&q, Complex64::new(0.5, 0.0), &LeafOptions { direction, ..opts }).unwrap())
            .find(|t| t.terminated_by == Termination::PoleCapture)
            .expect("one direction reaches the pole");
        let turn = winding(&inward.points);
        // Im(a log z) = Re a · φ + Im a · ln r is constant on leaves.
        let end = *inward.points.last().unwrap();
        let expected = -(a.im / a.re) * (end.norm() / 0.5).ln();
        assert!((turn - expected).abs() < 1e-3 * expected.abs(), "a = {a}: {turn} vs {expected}");
        match r.handedness() {
            Handedness::Positive => assert!(turn > 0.0),
            Handedness::Negative => assert!(turn < 0.0),
            Handedness::None => unreachable!(),
        }
    }
}

#[test]
fn radial_and_closed_centers() {
    let q = differential(Complex64::new(2.0, 0.0)).build().unwrap();
    let r = q.residue(Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(classify_center(&r), CenterKind::Radial);
    let t = trace_leaf(&q, Complex64::new(0.5, 0.0), &LeafOptions::default()).unwrap();
    assert!(winding(&t.points).abs() < 1e-9);

    let q = differential(Complex64::new(0.0, 1.0)).build().unwrap();
    let r = q.residue(Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(classify_center(&r), CenterKind::Closed);
    let t = trace_leaf(&q, Complex64::new(0.5, 0.0), &LeafOptions::default()).unwrap();
    assert!(t.points.iter().all(|z| (z.norm() - 0.5).abs() < 1e-9));
}

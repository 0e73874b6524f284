use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::differential::QuadDifferential;
use super::quadrature::{integrate_sqrt, QuadratureOptions};
use crate::error::{Error, Result};

/// Horizontal, vertical and flat lengths of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcLengths {
    pub horizontal: f64,
    pub vertical: f64,
    pub length: f64,
}

/// `l_h = |Re ∫ sqrt(q) dz|`, `l_v = |Im ∫ sqrt(q) dz|`. The reported length is
/// `sqrt(l_h^2 + l_v^2)` when the path is a flat geodesic (its flat length equals
/// the modulus of its period) and the flat length otherwise.
pub fn arc_lengths(q: &QuadDifferential, path: &[Complex64]) -> Result<ArcLengths> {
    arc_lengths_with(q, path, &QuadratureOptions::default())
}

pub fn arc_lengths_with(
    q: &QuadDifferential,
    path: &[Complex64],
    opts: &QuadratureOptions,
) -> Result<ArcLengths> {
    let integral = integrate_sqrt(q, path, None, opts)?;
    let horizontal = integral.value.re.abs();
    let vertical = integral.value.im.abs();
    let chord = integral.value.norm();
    let geodesic = (integral.flat_length - chord).abs() <= 1e-8 * (1.0 + integral.flat_length);
    Ok(ArcLengths {
        horizontal,
        vertical,
        length: if geodesic { chord } else { integral.flat_length },
    })
}

/// `2 pi Re(Res(p))` for a double pole `p`.
pub fn loop_transverse_measure(q: &QuadDifferential, p: Complex64) -> Result<f64> {
    Ok(q.residue(p)?.loop_measure())
}

/// Same quantity by contour integration of `|Im ∮ sqrt(q) dz|` over a regular
/// polygon around `p`. The default radius stays inside the chart and at half the
/// distance to every other pole or zero.
pub fn loop_transverse_measure_by_contour(
    q: &QuadDifferential,
    p: Complex64,
    radius: Option<f64>,
    vertices: usize,
) -> Result<f64> {
    let order = q.pole_order(p)?;
    if order != 2 {
        return Err(Error::UnsupportedOrder { order });
    }
    let radius = match radius {
        Some(r) => r,
        None => linking_radius(q, p),
    };
    if !(radius > 0.0) || vertices < 3 {
        return Err(Error::InvalidInput("contour needs radius > 0 and >= 3 vertices".into()));
    }
    let loop_path: Vec<Complex64> = (0..=vertices)
        .map(|k| p + Complex64::from_polar(radius, 2.0 * PI * k as f64 / vertices as f64))
        .collect();
    let integral = integrate_sqrt(q, &loop_path, None, &QuadratureOptions::default())?;
    Ok(integral.value.im.abs())
}

fn linking_radius(q: &QuadDifferential, p: Complex64) -> f64 {
    let mut r = 0.5_f64;
    for pole in q.poles() {
        if pole.location != p {
            r = r.min(0.5 * (pole.location - p).norm());
        }
    }
    for z in q.zeros() {
        r = r.min(0.5 * (z - p).norm());
    }
    if let Some(outer) = q.chart().outer_radius() {
        let room = outer - p.norm();
        if room > 0.0 {
            r = r.min(0.5 * room);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_lengths() {
        let q = QuadDifferential::constant(c(1.0, 0.0)).unwrap();
        let l = arc_lengths(&q, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!((l.horizontal, l.vertical), (1.0, 0.0));
        assert!((l.length - 1.0).abs() < 1e-14);
        let l = arc_lengths(&q, &[c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(l.horizontal.abs() < 1e-15);
        assert!((l.vertical - 1.0).abs() < 1e-14 && (l.length - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quarter_circle_around_double_pole() {
        // oracle: ∫ dz/z over the quarter arc is i pi/2; the arc is approximated
        // by a fine polyline and compared to the exact polygon integral Σ log(z_{k+1}/z_k)
        let q = QuadDifferential::pure_pole(c(1.0, 0.0)).unwrap();
        let n = 400;
        let path: Vec<_> = (0..=n)
            .map(|k| Complex64::from_polar(1.0, FRAC_PI_2 * k as f64 / n as f64))
            .collect();
        let exact: Complex64 = path.windows(2).map(|w| (w[1] / w[0]).ln()).sum();
        assert!((exact - c(0.0, FRAC_PI_2)).norm() < 1e-14);
        let l = arc_lengths(&q, &path).unwrap();
        assert!(l.horizontal < 1e-10);
        assert!((l.vertical - FRAC_PI_2).abs() < 1e-10);
        // polyline chords are not flat geodesics, but its flat length converges to pi/2
        assert!((l.length - FRAC_PI_2).abs() < 1e-5);
    }

    #[test]
    fn loop_measure_formula_and_contour() {
        for a in [c(1.0, 0.0), c(0.0, 1.0), c(3.0, 4.0)] {
            let q = QuadDifferential::pure_pole(a).unwrap();
            let formula = loop_transverse_measure(&q, c(0.0, 0.0)).unwrap();
            let contour = loop_transverse_measure_by_contour(&q, c(0.0, 0.0), None, 64).unwrap();
            assert!((formula - 2.0 * PI * a.re).abs() < 1e-12);
            assert!((formula - contour).abs() < 1e-8, "{a}: {formula} vs {contour}");
        }
    }

    #[test]
    fn lower_order_terms_do_not_change_loop_measure() {
        // (a^2/z^2 + c1/z + c0) with the zeros kept away from the contour
        let a = c(0.7, -0.4);
        let q = QuadDifferential::new(
            crate::qd::differential::Chart::Disk,
            vec![crate::qd::differential::Pole {
                location: c(0.0, 0.0),
                laurent: vec![a * a, c(0.05, 0.02)],
            }],
            vec![c(0.03, 0.0)],
            "",
        )
        .unwrap();
        let contour = loop_transverse_measure_by_contour(&q, c(0.0, 0.0), None, 64).unwrap();
        assert!((contour - 2.0 * PI * 0.7).abs() < 1e-8);
    }
}

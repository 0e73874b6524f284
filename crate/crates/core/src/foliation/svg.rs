use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LeafTrace;
use crate::qd::SingularKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgOptions {
    /// Pixel width; the height follows the aspect ratio.
    pub width: f64,
    pub stroke: String,
    pub stroke_width: f64,
    pub marker_radius: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 800.0,
            stroke: "#1f4e79".into(),
            stroke_width: 0.002,
            marker_radius: 0.01,
        }
    }
}

/// Renders traces as SVG paths and singular points as markers. The chart's
/// imaginary axis points up. Marker sizes and stroke widths are relative to
/// the larger side of the view box.
pub fn emit_svg(
    traces: &[LeafTrace],
    singular: &[(Complex64, SingularKind)],
    opts: &SvgOptions,
) -> String {
    let to_svg = |z: Complex64| (z.re, -z.im);
    let all = traces
        .iter()
        .flat_map(|t| t.points.iter().copied())
        .chain(singular.iter().map(|s| s.0))
        .filter(|z| z.is_finite());
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in all {
        let (x, y) = to_svg(z);
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let (x0, y0, w, h) = if lo.0.is_finite() {
        let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
        let pw = (hi.0 - lo.0).max(1e-3 * span);
        let ph = (hi.1 - lo.1).max(1e-3 * span);
        (lo.0 - 0.05 * pw, lo.1 - 0.05 * ph, 1.1 * pw, 1.1 * ph)
    } else {
        (-1.0, -1.0, 2.0, 2.0)
    };
    let scale = w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}" width="{}" height="{}">"#,
        opts.width,
        opts.width * h / w
    );
    for t in traces {
        let mut d = String::new();
        for (k, z) in t.points.iter().enumerate() {
            let (x, y) = to_svg(*z);
            let _ = write!(d, "{}{x:.9} {y:.9}", if k == 0 { "M" } else { " L" });
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            opts.stroke,
            opts.stroke_width * scale
        );
    }
    for (z, kind) in singular {
        let (x, y) = to_svg(*z);
        let fill = match kind {
            SingularKind::Pole => "#c0392b",
            SingularKind::Zero => "#27ae60",
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.9}" cy="{y:.9}" r="{}" fill="{fill}"/>"#,
            opts.marker_radius * scale
        );
    }
    out.push_str("</svg>\n");
    out
}

//! Meromorphic quadratic differentials on planar charts: evaluation, pole
//! orders, residues, arc lengths and transverse measures.

pub mod differential;
pub mod lengths;
pub mod poly;
pub mod quadrature;
pub mod residue;

pub use differential::{Chart, Pole, QuadDifferential, SingularKind};
pub use lengths::{arc_lengths, loop_transverse_measure, loop_transverse_measure_by_contour, ArcLengths};
pub use quadrature::{integrate_sqrt, PathIntegral, QuadratureOptions};
pub use residue::{classify_center, CenterKind, Handedness, Residue};

//! Discrete harmonic maps from cylinder, annulus and disk grids into lines and
//! metric trees.
//!
//! Nodes sit at `(x_i, θ_j)` with `i = 0..=nx` and `j = 0..ntheta`, periodic in
//! `θ`. Row 0 always carries Dirichlet data. The last row carries Dirichlet data
//! too, except on the polar disk grid where it is a free boundary.

pub mod boundary;
mod grid;
mod hopf;
mod line;
mod tree_solve;

pub use grid::{discrete_energy, measure_arcs, ArcMeasures, Geometry, GridMap, GridSpec, MIN_GRID};
pub use hopf::{cauchy_riemann_residual, hopf_extract, HopfField};
pub use line::{solve_line, solve_line_with, LineSolveOptions, LineSolveStats};
pub use tree_solve::{prolong, solve_tree, TreeSolveOptions, TreeSolveStats};

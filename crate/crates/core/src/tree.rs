//! Harmonic-map targets: the real line, the line with a twisted period (the
//! universal cover of a circle target), and finite metric trees.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Line,
    /// The line covering a circle of circumference `period`.
    PeriodicLine { period: f64 },
    FiniteTree,
}

/// JSON description of a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    Line,
    PeriodicLine { period: f64 },
    FiniteTree { edges: Vec<(usize, usize, f64)> },
}

/// A point of a target. Points of finite trees are an edge and the distance
/// from the edge's first endpoint `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreePoint {
    Real(f64),
    OnEdge { edge: usize, offset: f64 },
}

impl TreePoint {
    pub fn real(self) -> Option<f64> {
        match self {
            TreePoint::Real(x) => Some(x),
            TreePoint::OnEdge { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTree {
    kind: TreeKind,
    vertex_count: usize,
    edges: Vec<Edge>,
    /// All-pairs vertex distances; empty for line kinds.
    vertex_distance: Vec<Vec<f64>>,
}

impl MetricTree {
    pub fn line() -> Self {
        Self {
            kind: TreeKind::Line,
            vertex_count: 0,
            edges: vec![],
            vertex_distance: vec![],
        }
    }

    pub fn periodic_line(period: f64) -> Result<Self> {
        if !(period >= 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be finite and >= 0, got {period}")));
        }
        Ok(Self {
            kind: TreeKind::PeriodicLine { period },
            ..Self::line()
        })
    }

    /// Builds a finite tree from `(u, v, length)` edges on vertices `0..n`.
    pub fn finite_tree(edges: &[(usize, usize, f64)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidInput("finite tree needs at least one edge".into()));
        }
        let vertex_count = edges.iter().map(|&(u, v, _)| u.max(v)).max().unwrap_or(0) + 1;
        if edges.len() + 1 != vertex_count {
            return Err(Error::InvalidInput(format!(
                "{} edges on {} vertices cannot form a tree",
                edges.len(),
                vertex_count
            )));
        }
        let mut adjacency = vec![vec![]; vertex_count];
        for (id, &(u, v, length)) in edges.iter().enumerate() {
            if !(length > 0.0 && length.is_finite()) {
                return Err(Error::InvalidInput(format!("edge {id} has non-positive length {length}")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("edge {id} is a loop")));
            }
            adjacency[u].push((v, length));
            adjacency[v].push((u, length));
        }
        let mut vertex_distance = vec![vec![f64::INFINITY; vertex_count]; vertex_count];
        for (source, row) in vertex_distance.iter_mut().enumerate() {
            row[source] = 0.0;
            let mut queue = VecDeque::from([source]);
            while let Some(x) = queue.pop_front() {
                for &(y, len) in &adjacency[x] {
                    if row[y].is_infinite() {
                        row[y] = row[x] + len;
                        queue.push_back(y);
                    }
                }
            }
            if row.iter().any(|d| d.is_infinite()) {
                return Err(Error::InvalidInput("finite tree edges are not connected".into()));
            }
        }
        Ok(Self {
            kind: TreeKind::FiniteTree,
            vertex_count,
            edges: edges
                .iter()
                .map(|&(u, v, length)| Edge { u, v, length })
                .collect(),
            vertex_distance,
        })
    }

    /// Three rays glued at vertex 0; edge `k` runs from 0 to `k + 1`.
    pub fn tripod(lengths: [f64; 3]) -> Result<Self> {
        Self::finite_tree(&[(0, 1, lengths[0]), (0, 2, lengths[1]), (0, 3, lengths[2])])
    }

    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        match spec {
            TreeSpec::Line => Ok(Self::line()),
            TreeSpec::PeriodicLine { period } => Self::periodic_line(*period),
            TreeSpec::FiniteTree { edges } => Self::finite_tree(edges),
        }
    }

    pub fn to_spec(&self) -> TreeSpec {
        match self.kind {
            TreeKind::Line => TreeSpec::Line,
            TreeKind::PeriodicLine { period } => TreeSpec::PeriodicLine { period },
            TreeKind::FiniteTree => TreeSpec::FiniteTree {
                edges: self.edges.iter().map(|e| (e.u, e.v, e.length)).collect(),
            },
        }
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        self.kind == TreeKind::FiniteTree
    }

    /// Translation of the lift across one turn; zero except for periodic lines.
    pub fn period(&self) -> f64 {
        match self.kind {
            TreeKind::PeriodicLine { period } => period,
            _ => 0.0,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Validated point on an edge.
    pub fn point(&self, edge: usize, offset: f64) -> Result<TreePoint> {
        let p = TreePoint::OnEdge { edge, offset };
        self.check(p)?;
        Ok(p)
    }

    /// Some point representing vertex `v`.
    pub fn vertex_point(&self, v: usize) -> Result<TreePoint> {
        let (id, e) = self
            .edges
            .iter()
            .enumerate()
            .find(|(_, e)| e.u == v || e.v == v)
            .ok_or(Error::MismatchedTree)?;
        Ok(TreePoint::OnEdge {
            edge: id,
            offset: if e.u == v { 0.0 } else { e.length },
        })
    }

    pub fn check(&self, p: TreePoint) -> Result<()> {
        match (self.kind, p) {
            (TreeKind::FiniteTree, TreePoint::OnEdge { edge, offset }) => {
                let e = self.edges.get(edge).ok_or(Error::MismatchedTree)?;
                if (0.0..=e.length).contains(&offset) {
                    Ok(())
                } else {
                    Err(Error::MismatchedTree)
                }
            }
            (TreeKind::FiniteTree, TreePoint::Real(_)) | (_, TreePoint::OnEdge { .. }) => {
                Err(Error::MismatchedTree)
            }
            (_, TreePoint::Real(x)) if x.is_finite() => Ok(()),
            _ => Err(Error::MismatchedTree),
        }
    }

    fn to_vertex(&self, x: usize, edge: usize, offset: f64) -> f64 {
        let e = self.edges[edge];
        (self.vertex_distance[x][e.u] + offset).min(self.vertex_distance[x][e.v] + e.length - offset)
    }

    /// Geodesic distance. Points of line kinds are compared as lifts.
    pub fn distance(&self, p: TreePoint, q: TreePoint) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: TreePoint, q: TreePoint) -> f64 {
        match (p, q) {
            (TreePoint::Real(a), TreePoint::Real(b)) => (a - b).abs(),
            (
                TreePoint::OnEdge { edge: e1, offset: s1 },
                TreePoint::OnEdge { edge: e2, offset: s2 },
            ) => {
                if e1 == e2 {
                    return (s1 - s2).abs();
                }
                let a = self.edges[e1];
                (s1 + self.to_vertex(a.u, e2, s2)).min(a.length - s1 + self.to_vertex(a.v, e2, s2))
            }
            _ => f64::NAN,
        }
    }

    /// Minimizer of `Σ w_i d(·, p_i)^2`.
    pub fn barycenter(&self, points: &[(TreePoint, f64)]) -> Result<TreePoint> {
        if points.is_empty() {
            return Err(Error::InvalidInput("barycenter of an empty set".into()));
        }
        for &(p, w) in points {
            self.check(p)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("barycenter weight must be positive, got {w}")));
            }
        }
        Ok(self.barycenter_unchecked(points))
    }

    pub(crate) fn barycenter_unchecked(&self, points: &[(TreePoint, f64)]) -> TreePoint {
        if !self.is_finite() {
            let (sum, total) = points.iter().fold((0.0, 0.0), |(s, t), &(p, w)| {
                (s + w * p.real().unwrap_or(f64::NAN), t + w)
            });
            return TreePoint::Real(sum / total);
        }
        let mut best: Option<(f64, usize, f64)> = None;
        let mut coords = Vec::with_capacity(points.len());
        for (id, e) in self.edges.iter().enumerate() {
            coords.clear();
            coords.extend(points.iter().map(|&(p, w)| (self.edge_coordinate(id, p), w)));
            let (sum, total) = coords.iter().fold((0.0, 0.0), |(s, t), &(c, w)| (s + w * c, t + w));
            let s = (sum / total).clamp(0.0, e.length);
            let objective: f64 = coords.iter().map(|&(c, w)| w * (s - c) * (s - c)).sum();
            match best {
                Some((b, _, _)) if objective >= b - 1e-14 * (1.0 + b) => {}
                _ => best = Some((objective, id, s)),
            }
        }
        let (_, edge, offset) = best.expect("finite tree has edges");
        TreePoint::OnEdge { edge, offset }
    }

    /// Signed coordinate `c` of `p` relative to edge `id`, such that the
    /// distance from the point at offset `s` on that edge to `p` is `|s - c|`.
    pub(crate) fn edge_coordinate(&self, id: usize, p: TreePoint) -> f64 {
        let TreePoint::OnEdge { edge, offset } = p else {
            return f64::NAN;
        };
        if edge == id {
            return offset;
        }
        let e = self.edges[id];
        let du = self.to_vertex(e.u, edge, offset);
        let dv = self.to_vertex(e.v, edge, offset);
        if du <= dv {
            -du
        } else {
            e.length + dv
        }
    }

    /// If every point lies on one edge, returns that edge and the offsets.
    pub fn common_edge(&self, points: &[TreePoint]) -> Option<(usize, Vec<f64>)> {
        if !self.is_finite() || points.is_empty() {
            return None;
        }
        let tol = 1e-12;
        'edges: for (id, e) in self.edges.iter().enumerate() {
            let mut offsets = Vec::with_capacity(points.len());
            for &p in points {
                let c = self.edge_coordinate(id, p);
                if c < -tol || c > e.length + tol {
                    continue 'edges;
                }
                offsets.push(c.clamp(0.0, e.length));
            }
            return Some((id, offsets));
        }
        None
    }
}

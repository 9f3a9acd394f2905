//! Finite quadrilateral lattices, their diagonal graphs B and W, and file I/O.
//!
//! Faces are stored in a normalized cyclic order `(z1, z2, z3, z4)`: the
//! signed shoelace area is negative (clockwise with the y axis pointing up),
//! `z1, z3` carry color [`Color::B`] and `z2, z4` carry [`Color::W`]. With
//! that order the admittance `i(z2 - z4)/(z1 - z3)` has positive real part
//! and is a positive real on orthogonal faces. The boundary cycle is stored
//! counterclockwise, starting at its smallest vertex index.

mod build;
mod eccentricity;
mod io;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, norm, signed_area, Point};

pub use build::{build_perturbed_lattice, build_square_lattice, tikhomirov_lattice, Domain};
pub use eccentricity::{eccentricity, EccentricityReport};
pub use io::{load, read_lattice, save, write_lattice};
pub use validate::{validate, ValidationReport, Violation};

/// |cos| of the angle between the diagonals below which a face counts as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    B,
    W,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::B => Color::W,
            Color::W => Color::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Orthogonal,
    General,
}

impl LatticeKind {
    pub fn is_orthogonal(self) -> bool {
        !matches!(self, LatticeKind::General)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Orthogonal => "orthogonal",
            LatticeKind::General => "general",
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeKind::Square),
            "orthogonal" => Ok(LatticeKind::Orthogonal),
            "general" => Ok(LatticeKind::General),
            other => Err(Error::InvalidInput(format!("unknown lattice kind `{other}`"))),
        }
    }
}

/// A quadrilateral face with its cached (unsigned) area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    v: [usize; 4],
    area: f64,
}

impl Face {
    pub fn vertices(&self) -> [usize; 4] {
        self.v
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// The same face listed starting from position `k`.
    pub fn rotated(&self, k: usize) -> [usize; 4] {
        [self.v[k % 4], self.v[(k + 1) % 4], self.v[(k + 2) % 4], self.v[(k + 3) % 4]]
    }
}

/// Unvalidated lattice data, as read from a file or produced by a builder.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeData {
    pub points: Vec<Point>,
    pub faces: Vec<[usize; 4]>,
    pub boundary: Vec<usize>,
    pub kind: Option<LatticeKind>,
}

/// A validated finite quadrilateral lattice. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadLattice {
    points: Vec<Point>,
    faces: Vec<Face>,
    boundary: Vec<usize>,
    color: Vec<Color>,
    on_boundary: Vec<bool>,
    h: f64,
    kind: LatticeKind,
}

impl QuadLattice {
    /// Validates and normalizes raw data. The kind is inferred from geometry.
    pub fn new(points: Vec<Point>, faces: Vec<[usize; 4]>, boundary: Vec<usize>) -> Result<Self> {
        Self::from_data(LatticeData { points, faces, boundary, kind: None })
    }

    /// Builds a lattice from faces alone; the boundary cycle is traced from edges used once.
    pub fn from_faces(points: Vec<Point>, faces: Vec<[usize; 4]>) -> Result<Self> {
        let oriented: Vec<[usize; 4]> = faces.iter().map(|f| orient_clockwise(&points, *f)).collect();
        let boundary = trace_boundary(&oriented).map_err(|m| Error::InvalidInput(m))?;
        Self::new(points, faces, boundary)
    }

    pub fn from_data(data: LatticeData) -> Result<Self> {
        let report = validate::validate_data(&data);
        if !report.is_ok() {
            return Err(Error::Validation(report));
        }
        Ok(Self::normalize(data))
    }

    fn normalize(data: LatticeData) -> Self {
        let LatticeData { points, faces, boundary, .. } = data;
        let mut faces: Vec<[usize; 4]> = faces.iter().map(|f| orient_clockwise(&points, *f)).collect();
        let color = two_color(points.len(), &faces).expect("validated lattice is bipartite");
        for f in faces.iter_mut() {
            if color[f[0]] == Color::W {
                f.rotate_left(1);
            }
        }
        let boundary = normalize_boundary(&points, boundary);
        let mut on_boundary = vec![false; points.len()];
        for &b in &boundary {
            on_boundary[b] = true;
        }
        let faces: Vec<Face> = faces.into_iter().map(|v| Face { v, area: quad_area(&points, v).abs() }).collect();
        let mut max_edge: f64 = 0.0;
        for f in &faces {
            for k in 0..4 {
                max_edge = max_edge.max(points[f.v[k]].dist(points[f.v[(k + 1) % 4]]));
            }
        }
        let kind = infer_kind(&points, faces.iter().map(|f| f.v));
        QuadLattice { points, faces, boundary, color, on_boundary, h: 2.0 * max_edge, kind }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> Point {
        self.points[v]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_points(&self, f: usize) -> [Point; 4] {
        self.faces[f].v.map(|v| self.points[v])
    }

    /// Boundary cycle, counterclockwise.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn colors(&self) -> &[Color] {
        &self.color
    }

    pub fn color(&self, v: usize) -> Color {
        self.color[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&v| !self.on_boundary[v]).collect()
    }

    pub fn vertices_of_color(&self, c: Color) -> Vec<usize> {
        (0..self.points.len()).filter(|&v| self.color[v] == c).collect()
    }

    /// Boundary vertices of color `c`, in counterclockwise boundary order.
    pub fn boundary_of_color(&self, c: Color) -> Vec<usize> {
        self.boundary.iter().copied().filter(|&v| self.color[v] == c).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Twice the maximal edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn max_edge(&self) -> f64 {
        0.5 * self.h
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn is_orthogonal(&self) -> bool {
        self.kind.is_orthogonal()
    }

    /// Raw data view, suitable for re-validation or serialization.
    pub fn to_data(&self) -> LatticeData {
        LatticeData {
            points: self.points.clone(),
            faces: self.faces.iter().map(|f| f.v).collect(),
            boundary: self.boundary.clone(),
            kind: Some(self.kind),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate_data(&self.to_data())
    }

    /// Per-vertex coloring; see [`bipartition`].
    pub fn bipartition(&self) -> Vec<Color> {
        self.color.clone()
    }

    /// Max |value| over the lattice, or 1 when the function vanishes.
    pub fn scale_of(values: &[f64]) -> f64 {
        let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// Boundary sub-path from `from` to `to` along the stored orientation, endpoints included.
    pub fn boundary_arc(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        let pos = |v: usize| self.boundary.iter().position(|&b| b == v).ok_or(Error::NotOnBoundary(v));
        let i = pos(from)?;
        let j = pos(to)?;
        let n = self.boundary.len();
        let len = (j + n - i) % n + 1;
        Ok((0..len).map(|k| self.boundary[(i + k) % n]).collect())
    }
}

/// Two-coloring of a validated lattice; vertex 0 is always in B.
pub fn bipartition(lattice: &QuadLattice) -> Vec<Color> {
    lattice.bipartition()
}

/// Boundary sub-path between two boundary vertices.
pub fn boundary_arcs(lattice: &QuadLattice, from: usize, to: usize) -> Result<Vec<usize>> {
    lattice.boundary_arc(from, to)
}

/// Signed area as half the cross product of the diagonals, which only uses
/// coordinate differences and so keeps full relative precision on small faces.
pub(crate) fn quad_area(points: &[Point], f: [usize; 4]) -> f64 {
    let q = f.map(|v| points[v]);
    0.5 * cross(q[2].sub(q[0]), q[3].sub(q[1]))
}

pub(crate) fn orient_clockwise(points: &[Point], f: [usize; 4]) -> [usize; 4] {
    if quad_area(points, f) > 0.0 {
        [f[0], f[3], f[2], f[1]]
    } else {
        f
    }
}

/// |cos| of the angle between the two diagonals of a face.
pub(crate) fn diagonal_cos(q: [Point; 4]) -> f64 {
    let d1 = q[2].sub(q[0]);
    let d2 = q[3].sub(q[1]);
    dot(d1, d2).abs() / (norm(d1) * norm(d2))
}

pub(crate) fn face_is_square(q: [Point; 4]) -> bool {
    let d1 = norm(q[2].sub(q[0]));
    let d2 = norm(q[3].sub(q[1]));
    let m1 = q[0].midpoint(q[2]);
    let m2 = q[1].midpoint(q[3]);
    diagonal_cos(q) <= ORTHOGONAL_TOL
        && (d1 - d2).abs() <= ORTHOGONAL_TOL * d1.max(d2)
        && m1.dist(m2) <= ORTHOGONAL_TOL * d1.max(d2)
}

pub(crate) fn infer_kind(points: &[Point], faces: impl Iterator<Item = [usize; 4]> + Clone) -> LatticeKind {
    let quads = faces.map(|f| f.map(|v| points[v]));
    if quads.clone().all(|q| diagonal_cos(q) <= ORTHOGONAL_TOL) {
        if quads.clone().all(face_is_square) {
            LatticeKind::Square
        } else {
            LatticeKind::Orthogonal
        }
    } else {
        LatticeKind::General
    }
}

/// Two-colors the vertex graph formed by face sides; vertex 0 (or the
/// smallest vertex of each component) gets B. Returns the offending vertex on conflict.
pub(crate) fn two_color(n: usize, faces: &[[usize; 4]]) -> std::result::Result<Vec<Color>, usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for f in faces {
        for k in 0..4 {
            let (a, b) = (f[k], f[(k + 1) % 4]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut color: Vec<Option<Color>> = vec![None; n];
    let mut stack = Vec::new();
    for s in 0..n {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(Color::B);
        stack.push(s);
        while let Some(a) = stack.pop() {
            let ca = color[a].unwrap();
            for &b in &adj[a] {
                match color[b] {
                    None => {
                        color[b] = Some(ca.other());
                        stack.push(b);
                    }
                    Some(cb) if cb == ca => return Err(b),
                    _ => {}
                }
            }
        }
    }
    Ok(color.into_iter().map(|c| c.unwrap_or(Color::B)).collect())
}

/// Traces the boundary from clockwise faces; returns it counterclockwise starting at its minimum.
pub(crate) fn trace_boundary(oriented: &[[usize; 4]]) -> std::result::Result<Vec<usize>, String> {
    let mut uses: HashMap<(usize, usize), u32> = HashMap::new();
    for f in oriented {
        for k in 0..4 {
            let (a, b) = (f[k], f[(k + 1) % 4]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for f in oriented {
        for k in 0..4 {
            let (a, b) = (f[k], f[(k + 1) % 4]);
            if uses[&(a.min(b), a.max(b))] == 1 && next.insert(a, b).is_some() {
                return Err(format!("boundary pinches at vertex {a}"));
            }
        }
    }
    if next.is_empty() {
        return Err("no boundary edges".into());
    }
    let start = *next.keys().min().unwrap();
    let mut cycle = vec![start];
    let mut cur = next[&start];
    while cur != start {
        if cycle.len() > next.len() {
            return Err("boundary does not close".into());
        }
        cycle.push(cur);
        cur = *next.get(&cur).ok_or_else(|| format!("boundary breaks at vertex {cur}"))?;
    }
    if cycle.len() != next.len() {
        return Err(format!(
            "boundary has more than one cycle ({} of {} boundary edges traced)",
            cycle.len(),
            next.len()
        ));
    }
    // clockwise faces trace the outer boundary clockwise
    cycle[1..].reverse();
    Ok(cycle)
}

fn normalize_boundary(points: &[Point], mut boundary: Vec<usize>) -> Vec<usize> {
    let pts: Vec<Point> = boundary.iter().map(|&v| points[v]).collect();
    if signed_area(&pts) < 0.0 {
        boundary.reverse();
    }
    let k = boundary.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap_or(0);
    boundary.rotate_left(k);
    boundary
}

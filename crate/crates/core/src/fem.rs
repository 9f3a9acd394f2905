//! Linear finite elements with cotangent weights on Delaunay triangulations,
//! and the circumcenter construction of the equivalent orthogonal kite lattice.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_at, circumcenter, cross, signed_area, Point};
use crate::lattice::QuadLattice;
use crate::solver::{self, DirichletProblem, SolveOptions};
use crate::sparse::CsrMatrix;

/// A triangulated polygon with counterclockwise triangles and a counterclockwise boundary cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationFile {
    points: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    #[serde(default)]
    boundary: Vec<usize>,
}

/// Interior edge `(a, b)` with the triangles on its left and right.
#[derive(Debug, Clone, Copy)]
struct InteriorEdge {
    a: usize,
    b: usize,
    left: usize,
    right: usize,
}

impl Triangulation {
    /// Orients every triangle counterclockwise, checks that edges are shared by
    /// at most two triangles, and traces the boundary cycle.
    pub fn new(points: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyLattice);
        }
        if let Some(p) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("point {p} is not finite")));
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            if a.max(b).max(c) >= points.len() || a == b || b == c || a == c {
                return Err(Error::InvalidInput(format!("triangle {t} has bad vertex indices")));
            }
            let s = signed_area(&[points[a], points[b], points[c]]);
            if s == 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
            tris.push(if s > 0.0 { [a, b, c] } else { [a, c, b] });
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if directed.insert(e, t).is_some() {
                    return Err(Error::InvalidInput(format!("edge {e:?} is used twice in the same direction")));
                }
            }
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) && next.insert(a, b).is_some() {
                return Err(Error::InvalidInput(format!("boundary is pinched at vertex {a}")));
            }
        }
        let start = *next.keys().min().ok_or_else(|| Error::InvalidInput("triangulation has no boundary".into()))?;
        let mut boundary = vec![start];
        let mut v = next[&start];
        while v != start {
            if boundary.len() > next.len() {
                return Err(Error::InvalidInput("boundary is not a simple cycle".into()));
            }
            boundary.push(v);
            v = *next.get(&v).ok_or_else(|| Error::InvalidInput("boundary is not closed".into()))?;
        }
        if boundary.len() != next.len() {
            return Err(Error::InvalidInput("boundary has more than one component".into()));
        }
        let mut used = vec![false; points.len()];
        for tri in &tris {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!("vertex {v} belongs to no triangle")));
        }
        Ok(Self { points, triangles: tris, boundary })
    }

    /// Delaunay triangulation of a point set (the convex hull is the boundary).
    pub fn delaunay(points: Vec<Point>) -> Result<Self> {
        let pts: Vec<delaunator::Point> = points.iter().map(|p| delaunator::Point { x: p.x, y: p.y }).collect();
        let tri = delaunator::triangulate(&pts);
        if tri.triangles.is_empty() {
            return Err(Error::EmptyLattice);
        }
        let triangles = tri.triangles.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(points, triangles)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary cycle, counterclockwise.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| signed_area(&t.map(|v| self.points[v]))).sum()
    }

    fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut b = vec![false; self.points.len()];
        for &v in &self.boundary {
            b[v] = true;
        }
        b
    }

    /// Triangle owning each directed edge.
    fn edge_owner(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::with_capacity(3 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                m.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        m
    }

    /// Interior edges in a deterministic order.
    fn interior_edges(&self) -> Vec<InteriorEdge> {
        let owner = self.edge_owner();
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if a < b {
                    if let Some(&r) = owner.get(&(b, a)) {
                        out.push(InteriorEdge { a, b, left: t, right: r });
                    }
                }
            }
        }
        out
    }

    /// The vertex of triangle `t` that is not `a` or `b`.
    fn opposite(&self, t: usize, a: usize, b: usize) -> usize {
        *self.triangles[t].iter().find(|&&v| v != a && v != b).expect("triangle has three vertices")
    }

    fn angle_opposite(&self, t: usize, a: usize, b: usize) -> f64 {
        let c = self.opposite(t, a, b);
        angle_at(self.points[c], self.points[a], self.points[b])
    }

    pub fn to_json(&self) -> String {
        let file = TriangulationFile {
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }

    /// Parses a triangulation file; a listed boundary must match the traced one up to rotation.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TriangulationFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let t = Self::new(file.points.iter().map(|&[x, y]| Point::new(x, y)).collect(), file.triangles)?;
        if !file.boundary.is_empty() && !same_cycle(&file.boundary, &t.boundary) {
            return Err(Error::Parse {
                location: "boundary".into(),
                message: "listed boundary differs from the traced boundary cycle".into(),
            });
        }
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    let Some(s) = b.iter().position(|&v| v == a[0]) else { return false };
    (0..n).all(|k| a[k] == b[(s + k) % n])
}

/// `(cot alpha + cot beta) / 2`.
pub fn cot_weight(alpha: f64, beta: f64) -> f64 {
    0.5 * (1.0 / alpha.tan() + 1.0 / beta.tan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelaunayReport {
    pub is_delaunay: bool,
    /// Min over interior edges of `pi - alpha - beta` (infinite without interior edges).
    pub min_slack: f64,
    /// Every triangle has at most one boundary side, and the angle facing it is acute.
    pub regular_boundary: bool,
    pub condition_d_slack: f64,
}

pub fn delaunay_report(t: &Triangulation) -> Result<DelaunayReport> {
    for (k, tri) in t.triangles.iter().enumerate() {
        let q = tri.map(|v| t.points[v]);
        let longest = (0..3).map(|i| q[i].dist(q[(i + 1) % 3])).fold(0.0, f64::max);
        if signed_area(&q) <= 1e-14 * longest * longest {
            return Err(Error::DegenerateTriangle(k));
        }
    }
    let mut min_slack = f64::INFINITY;
    for e in t.interior_edges() {
        let s = PI - t.angle_opposite(e.left, e.a, e.b) - t.angle_opposite(e.right, e.a, e.b);
        min_slack = min_slack.min(s);
    }
    Ok(DelaunayReport {
        is_delaunay: min_slack >= -1e-12,
        min_slack,
        regular_boundary: irregular_triangle(t).is_none(),
        condition_d_slack: min_slack,
    })
}

fn irregular_triangle(t: &Triangulation) -> Option<usize> {
    let owner = t.edge_owner();
    let mut count = vec![0usize; t.triangles.len()];
    let n = t.boundary.len();
    for k in 0..n {
        let (a, b) = (t.boundary[k], t.boundary[(k + 1) % n]);
        let tri = owner[&(a, b)];
        count[tri] += 1;
        if count[tri] > 1 || t.angle_opposite(tri, a, b) >= PI / 2.0 {
            return Some(tri);
        }
    }
    None
}

/// Orthogonal lattice built from a triangulation: vertices `0..n` are the
/// triangulation's vertices (graph B), vertex `n + t` is the circumcenter of
/// triangle `t` (graph W). Each interior edge `ab` between triangles `l` and
/// `r` gives the face `(a, C_l, b, C_r)`; boundary edges give no face.
#[derive(Debug, Clone)]
pub struct KiteLattice {
    pub lattice: QuadLattice,
    /// Number of triangulation vertices; lattice vertex `n + t` is the circumcenter of triangle `t`.
    pub n_vertices: usize,
    /// Triangulation edge `(a, b)` of each lattice face, in face order.
    pub face_edges: Vec<(usize, usize)>,
    /// `(cot alpha + cot beta) / 2` of each face's edge, from the triangle angles.
    pub cot_weights: Vec<f64>,
    /// Total area of the triangles `a C b` cut off at boundary edges.
    pub boundary_triangle_area: f64,
}

/// Smallest Delaunay slack accepted by the kite construction.
pub const KITE_MIN_SLACK: f64 = 1e-9;

pub fn build_kite_lattice(t: &Triangulation) -> Result<KiteLattice> {
    let report = delaunay_report(t)?;
    if !(report.min_slack > KITE_MIN_SLACK) {
        return Err(Error::NotDelaunay(report.min_slack));
    }
    if let Some(tri) = irregular_triangle(t) {
        return Err(Error::IrregularBoundary(tri));
    }
    let n = t.points.len();
    let mut points = t.points.clone();
    for (k, tri) in t.triangles.iter().enumerate() {
        let q = tri.map(|v| t.points[v]);
        let longest = (0..3).map(|i| q[i].dist(q[(i + 1) % 3])).fold(0.0, f64::max);
        if signed_area(&q) < 1e-14 * longest * longest {
            return Err(Error::DegenerateCircumcenter(k));
        }
        points.push(circumcenter(q[0], q[1], q[2]).ok_or(Error::DegenerateCircumcenter(k))?);
    }
    let mut faces = Vec::new();
    let mut face_edges = Vec::new();
    let mut cot_weights = Vec::new();
    for e in t.interior_edges() {
        faces.push([e.a, n + e.left, e.b, n + e.right]);
        face_edges.push((e.a, e.b));
        cot_weights.push(cot_weight(t.angle_opposite(e.left, e.a, e.b), t.angle_opposite(e.right, e.a, e.b)));
    }
    if faces.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let owner = t.edge_owner();
    let m = t.boundary.len();
    let mut boundary = Vec::with_capacity(2 * m);
    let mut cut = 0.0;
    for k in 0..m {
        let (a, b) = (t.boundary[k], t.boundary[(k + 1) % m]);
        let tri = owner[&(a, b)];
        boundary.push(a);
        boundary.push(n + tri);
        cut += signed_area(&[points[a], points[b], points[n + tri]]);
    }
    let lattice = QuadLattice::new(points, faces, boundary)?;
    Ok(KiteLattice { lattice, n_vertices: n, face_edges, cot_weights, boundary_triangle_area: cut })
}

/// Result of the cotangent finite element solve.
#[derive(Debug, Clone)]
pub struct FemSolution {
    pub solution: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Interior edges with negative cotangent weight (non-Delaunay input).
    pub negative_weights: usize,
}

/// P1 stiffness `area * grad(lambda_i) . grad(lambda_j)`, assembled per triangle.
pub fn fem_stiffness(t: &Triangulation) -> CsrMatrix {
    let blocks: Vec<([usize; 3], [[f64; 3]; 3])> = t
        .triangles
        .iter()
        .map(|tri| {
            let q = tri.map(|v| t.points[v]);
            let two_a = cross(q[1].sub(q[0]), q[2].sub(q[0]));
            let g: [[f64; 2]; 3] = std::array::from_fn(|i| {
                let (b, c) = (q[(i + 1) % 3], q[(i + 2) % 3]);
                [(b.y - c.y) / two_a, (c.x - b.x) / two_a]
            });
            let area = 0.5 * two_a;
            let k = std::array::from_fn(|i| std::array::from_fn(|j| area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
            (*tri, k)
        })
        .collect();
    CsrMatrix::from_element_blocks(t.points.len(), &blocks)
}

/// Piecewise-linear minimizer of the Dirichlet energy with the given boundary values.
pub fn solve_fem(t: &Triangulation, g: impl Fn(Point) -> f64, tol: f64) -> Result<FemSolution> {
    let m = fem_stiffness(t);
    let on_b = t.is_boundary_vertex();
    let interior: Vec<usize> = (0..t.points.len()).filter(|&v| !on_b[v]).collect();
    let mut boundary = t.boundary.clone();
    boundary.sort_unstable();
    let mut u = vec![0.0; t.points.len()];
    for &v in &boundary {
        u[v] = g(t.points[v]);
    }
    let scale = QuadLattice::scale_of(&boundary.iter().map(|&v| u[v]).collect::<Vec<_>>());
    let opts = SolveOptions::with_tol(tol);
    let (iterations, residual) = solver::solve_partitioned(&m, &interior, &boundary, &mut u, tol * scale, &opts)?;
    let negative_weights = t
        .interior_edges()
        .iter()
        .filter(|e| t.angle_opposite(e.left, e.a, e.b) + t.angle_opposite(e.right, e.a, e.b) > PI)
        .count();
    Ok(FemSolution { solution: u, residual, iterations, negative_weights })
}

/// Max over triangulation vertices of the gap between the finite element
/// solution and the Dirichlet solution on the kite lattice, both with boundary data `g`.
pub fn kite_equivalence(t: &Triangulation, g: impl Fn(Point) -> f64 + Copy, tol: f64) -> Result<f64> {
    let kite = build_kite_lattice(t)?;
    let p = DirichletProblem::from_fn(&kite.lattice, g)?;
    let lat = solver::solve_dirichlet(&p, tol)?;
    let fem = solve_fem(t, g, tol)?;
    Ok((0..kite.n_vertices).map(|v| (lat.solution[v] - fem.solution[v]).abs()).fold(0.0, f64::max))
}

/// Smallest cotangent weight tolerated by [`disk_mesh`]; it bounds the
/// diagonal ratio of the kite faces by its inverse.
pub const MESH_MIN_COT_WEIGHT: f64 = 0.1;
pub const MESH_ROUNDS: usize = 200;

/// Seeded Delaunay mesh of a disk: `ceil(2 pi r / spacing)` equally spaced
/// boundary points plus a jittered triangular grid of pitch `spacing` kept at
/// least `0.6 * spacing` away from the circle. Interior points of a nearly
/// cocircular quadruple (an edge with cotangent weight below
/// [`MESH_MIN_COT_WEIGHT`]) are jittered again and the mesh is rebuilt, for at most [`MESH_ROUNDS`] rounds.
pub fn disk_mesh(cx: f64, cy: f64, r: f64, spacing: f64, seed: u64) -> Result<Triangulation> {
    if !(spacing > 0.0 && spacing.is_finite() && spacing < r) {
        return Err(Error::InvalidStep(spacing));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = (TAU * r / spacing).ceil() as usize;
    let phase = rng.random_range(0.0..TAU / m as f64);
    let mut points: Vec<Point> = (0..m)
        .map(|k| {
            let th = phase + TAU * k as f64 / m as f64;
            Point::new(cx + r * th.cos(), cy + r * th.sin())
        })
        .collect();
    let dy = spacing * 3f64.sqrt() / 2.0;
    let jmax = (r / dy).ceil() as i64 + 1;
    let imax = (r / spacing).ceil() as i64 + 2;
    let keep = r - 0.6 * spacing;
    let mut jitter = |base: Point, a: f64| {
        Point::new(base.x + rng.random_range(-a..a) * spacing, base.y + rng.random_range(-a..a) * spacing)
    };
    let mut sites = vec![Point::new(0.0, 0.0); m];
    for j in -jmax..=jmax {
        for i in -imax..=imax {
            let base = Point::new((i as f64 + 0.5 * (j.rem_euclid(2)) as f64) * spacing, j as f64 * dy);
            let p = jitter(base, 0.15);
            if p.x.hypot(p.y) <= keep {
                sites.push(base);
                points.push(Point::new(cx + p.x, cy + p.y));
            }
        }
    }
    let mut marks = vec![0usize; points.len()];
    for _ in 0..MESH_ROUNDS {
        let t = Triangulation::delaunay(points.clone())?;
        let mut redraw = vec![false; points.len()];
        for e in t.interior_edges() {
            let w = cot_weight(t.angle_opposite(e.left, e.a, e.b), t.angle_opposite(e.right, e.a, e.b));
            if w < MESH_MIN_COT_WEIGHT {
                for c in [e.a, e.b, t.opposite(e.left, e.a, e.b), t.opposite(e.right, e.a, e.b)] {
                    redraw[c] |= c >= m;
                }
            }
        }
        if !redraw.contains(&true) {
            return Ok(t);
        }
        // points that keep coming back get a wider jitter
        for v in (m..points.len()).filter(|&v| redraw[v]) {
            marks[v] += 1;
            let a = (0.15 + 0.025 * marks[v] as f64).min(0.25);
            for _ in 0..64 {
                let p = jitter(sites[v], a);
                if p.x.hypot(p.y) <= keep {
                    points[v] = Point::new(cx + p.x, cy + p.y);
                    break;
                }
            }
        }
    }
    Triangulation::delaunay(points)
}

/// Regular triangular grid patch on a rectangle, mainly for tests.
pub fn triangular_patch(nx: usize, ny: usize, spacing: f64) -> Result<Triangulation> {
    let dy = spacing * 3f64.sqrt() / 2.0;
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(Point::new((i as f64 + 0.5 * (j % 2) as f64) * spacing, j as f64 * dy));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if j % 2 == 0 {
                tris.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                tris.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            } else {
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            }
        }
    }
    Triangulation::new(points, tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeKind;
    use crate::operators::conductance;

    fn equilateral_pair() -> Triangulation {
        let s = 3f64.sqrt() / 2.0;
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, s), Point::new(0.5, -s)];
        Triangulation::new(pts, vec![[0, 1, 2], [1, 0, 3]]).unwrap()
    }

    fn hexagon(jitter: f64) -> Triangulation {
        let mut pts = vec![Point::new(0.0, 0.0)];
        for k in 0..6 {
            let th = PI / 3.0 * k as f64;
            let r = 1.0 + jitter * ((k * 7 % 5) as f64 - 2.0);
            pts.push(Point::new(r * th.cos(), r * th.sin()));
        }
        let tris = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        Triangulation::new(pts, tris).unwrap()
    }

    #[test]
    fn cot_weight_examples() {
        assert!((cot_weight(PI / 3.0, PI / 3.0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(cot_weight(PI / 2.0, PI / 2.0).abs() < 1e-15);
        assert!((cot_weight(PI / 4.0, PI / 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_orientation_and_boundary() {
        let t = equilateral_pair();
        for tri in t.triangles() {
            assert!(signed_area(&tri.map(|v| t.points()[v])) > 0.0);
        }
        assert_eq!(t.boundary().len(), 4);
        assert!(signed_area(&t.boundary().iter().map(|&v| t.points()[v]).collect::<Vec<_>>()) > 0.0);
    }

    #[test]
    fn delaunay_examples() {
        let r = delaunay_report(&triangular_patch(4, 4, 1.0).unwrap()).unwrap();
        assert!(r.is_delaunay);
        assert!((r.min_slack - PI / 3.0).abs() < 1e-12);
        // a thin rhombus split along its long diagonal
        let pts = vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(2.0, 0.5), Point::new(2.0, -0.5)];
        let t = Triangulation::new(pts, vec![[0, 1, 2], [1, 0, 3]]).unwrap();
        let r = delaunay_report(&t).unwrap();
        assert!(!r.is_delaunay && r.min_slack < 0.0);
        assert!(matches!(build_kite_lattice(&t), Err(Error::NotDelaunay(_))));
        let single = Triangulation::new(pts_tri(), vec![[0, 1, 2]]).unwrap();
        let r = delaunay_report(&single).unwrap();
        assert!(r.is_delaunay && r.min_slack.is_infinite());
    }

    fn pts_tri() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn equilateral_pair_kite_face() {
        // each triangle has two boundary sides, so the pair itself is rejected
        let t = equilateral_pair();
        assert!(matches!(build_kite_lattice(&t), Err(Error::IrregularBoundary(_))));
        // the face over the shared edge, built by hand from the two circumcenters
        let p = t.points();
        let c0 = circumcenter(p[0], p[1], p[2]).unwrap();
        let c1 = circumcenter(p[1], p[0], p[3]).unwrap();
        let l = QuadLattice::from_faces(vec![p[0], c0, p[1], c1], vec![[0, 1, 2, 3]]).unwrap();
        assert!(l.is_orthogonal());
        let c = conductance(l.face_points(0)).unwrap();
        assert!((c.re - 1.0 / 3f64.sqrt()).abs() < 1e-15 && c.im.abs() < 1e-15);
        assert!((c.re - cot_weight(PI / 3.0, PI / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn split_square_is_rejected() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let t = Triangulation::new(pts, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        assert!(delaunay_report(&t).unwrap().min_slack.abs() < 1e-15);
        assert!(build_kite_lattice(&t).is_err());
    }

    #[test]
    fn hexagon_kites() {
        let t = hexagon(0.0);
        let k = build_kite_lattice(&t).unwrap();
        assert_eq!(k.lattice.face_count(), 6);
        assert_ne!(k.lattice.kind(), LatticeKind::General);
        assert_eq!(k.lattice.interior_vertices(), vec![0]);
        assert_eq!(k.lattice.boundary().len(), 12);
    }

    #[test]
    fn kite_conductances_and_area() {
        let t = disk_mesh(0.0, 0.0, 1.0, 0.15, 3).unwrap();
        let k = build_kite_lattice(&t).unwrap();
        assert!(k.lattice.is_orthogonal());
        for f in 0..k.lattice.face_count() {
            let c = conductance(k.lattice.face_points(f)).unwrap();
            assert!((c.re - k.cot_weights[f]).abs() <= 1e-12 * k.cot_weights[f]);
            assert!(c.im.abs() <= 1e-12 * c.re);
        }
        let kite_area: f64 = k.lattice.faces().iter().map(|f| f.area()).sum();
        assert!((kite_area + k.boundary_triangle_area - t.area()).abs() <= 1e-10 * t.area());
    }

    #[test]
    fn fem_is_exact_on_linear_data() {
        let t = disk_mesh(0.0, 0.0, 1.0, 0.2, 1).unwrap();
        let s = solve_fem(&t, |p| 2.0 * p.x - p.y + 1.0, 1e-12).unwrap();
        for (p, u) in t.points().iter().zip(&s.solution) {
            assert!((u - (2.0 * p.x - p.y + 1.0)).abs() < 1e-12);
        }
        let c = solve_fem(&t, |_| 3.0, 1e-12).unwrap();
        assert!(c.solution.iter().all(|u| (u - 3.0).abs() < 1e-13));
        assert_eq!(s.negative_weights, 0);
    }

    #[test]
    fn hexagon_center_is_a_weighted_mean() {
        let t = hexagon(0.05);
        let g = |p: Point| p.x * p.x - p.y * p.y;
        let s = solve_fem(&t, g, 1e-14).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..6 {
            let (a, prev, next) = (1 + k, 1 + (k + 5) % 6, 1 + (k + 1) % 6);
            let p = t.points();
            let w = cot_weight(angle_at(p[prev], p[0], p[a]), angle_at(p[next], p[0], p[a]));
            num += w * g(p[a]);
            den += w;
        }
        assert!((s.solution[0] - num / den).abs() < 1e-14);
    }

    #[test]
    fn fem_matches_kites() {
        let t = disk_mesh(0.0, 0.0, 1.0, 0.12, 7).unwrap();
        let d = kite_equivalence(&t, |p| p.x * p.x - p.y * p.y, 1e-13).unwrap();
        assert!(d <= 1e-9, "{d}");
        let e = kite_equivalence(&hexagon(0.0), |p| p.x, 1e-13);
        assert!(e.unwrap() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let t = disk_mesh(0.0, 0.0, 1.0, 0.3, 5).unwrap();
        let back = Triangulation::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(Triangulation::from_json("{\"points\":[[0,0]],\"triangles\":[[0,0]]}").is_err());
    }
}

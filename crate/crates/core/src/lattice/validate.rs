use std::collections::HashMap;
use std::fmt;

use super::{infer_kind, orient_clockwise, quad_area, trace_boundary, two_color, Color, LatticeData, LatticeKind};
use crate::geometry::{norm, quad_is_simple, signed_area};

/// One violated lattice invariant, with the offending indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonFinitePoint { vertex: usize },
    IndexOutOfRange { face: usize, index: usize },
    RepeatedVertex { face: usize },
    DegenerateFace { face: usize },
    SelfIntersectingFace { face: usize },
    OrphanVertex { vertex: usize },
    EdgeOverused { a: usize, b: usize, faces: Vec<usize> },
    FoldedEdge { a: usize, b: usize },
    FacesIntersectBadly { first: usize, second: usize, shared: Vec<usize> },
    BoundaryNotSimpleCycle { detail: String },
    FacesOverlap { face_area: f64, enclosed_area: f64 },
    NotBipartite { vertex: usize },
    DiagonalGraphDisconnected { color: Color, components: usize },
    KindMismatch { declared: LatticeKind, actual: LatticeKind },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Empty => write!(f, "lattice has no faces"),
            NonFinitePoint { vertex } => write!(f, "vertex {vertex} has a non-finite coordinate"),
            IndexOutOfRange { face, index } => write!(f, "face {face} references missing vertex {index}"),
            RepeatedVertex { face } => write!(f, "face {face} repeats a vertex"),
            DegenerateFace { face } => write!(f, "face {face} has zero area or a zero-length diagonal"),
            SelfIntersectingFace { face } => write!(f, "face {face} is self-intersecting"),
            OrphanVertex { vertex } => write!(f, "vertex {vertex} belongs to no face"),
            EdgeOverused { a, b, faces } => write!(f, "edge {a}-{b} is shared by more than two faces {faces:?}"),
            FoldedEdge { a, b } => write!(f, "edge {a}-{b} is traversed the same way by both faces (folded)"),
            FacesIntersectBadly { first, second, shared } => {
                write!(f, "faces intersect in more than one edge: faces {first} and {second} share vertices {shared:?}")
            }
            BoundaryNotSimpleCycle { detail } => write!(f, "boundary not a simple closed cycle: {detail}"),
            FacesOverlap { face_area, enclosed_area } => {
                write!(f, "faces overlap: total face area {face_area} differs from enclosed area {enclosed_area}")
            }
            NotBipartite { vertex } => write!(f, "lattice is not bipartite at vertex {vertex}"),
            DiagonalGraphDisconnected { color, components } => {
                write!(f, "diagonal graph {color:?} is disconnected ({components} components)")
            }
            KindMismatch { declared, actual } => {
                write!(f, "lattice declared {} but geometry is {}", declared.as_str(), actual.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks every lattice invariant on raw data. Violations are data, never failures.
pub fn validate(data: &LatticeData) -> ValidationReport {
    validate_data(data)
}

pub(crate) fn validate_data(data: &LatticeData) -> ValidationReport {
    let mut out = Vec::new();
    let n = data.points.len();
    if data.faces.is_empty() {
        out.push(Violation::Empty);
        return ValidationReport { violations: out };
    }
    for (v, p) in data.points.iter().enumerate() {
        if !p.is_finite() {
            out.push(Violation::NonFinitePoint { vertex: v });
        }
    }
    for (fi, f) in data.faces.iter().enumerate() {
        if let Some(&bad) = f.iter().find(|&&v| v >= n) {
            out.push(Violation::IndexOutOfRange { face: fi, index: bad });
        } else if (0..4).any(|i| (i + 1..4).any(|j| f[i] == f[j])) {
            out.push(Violation::RepeatedVertex { face: fi });
        }
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }

    // per-face geometry
    for (fi, f) in data.faces.iter().enumerate() {
        let q = f.map(|v| data.points[v]);
        let d1 = norm(q[2].sub(q[0]));
        let d2 = norm(q[3].sub(q[1]));
        let area = quad_area(&data.points, *f).abs();
        if d1 == 0.0 || d2 == 0.0 || area <= 1e-14 * d1.max(d2).powi(2) {
            out.push(Violation::DegenerateFace { face: fi });
        } else if !quad_is_simple(q) {
            out.push(Violation::SelfIntersectingFace { face: fi });
        }
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }
    let oriented: Vec<[usize; 4]> = data.faces.iter().map(|f| orient_clockwise(&data.points, *f)).collect();

    let mut used = vec![false; n];
    for f in &oriented {
        for &v in f {
            used[v] = true;
        }
    }
    for (v, u) in used.iter().enumerate() {
        if !u {
            out.push(Violation::OrphanVertex { vertex: v });
        }
    }

    // edge multiplicities and orientation consistency
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (fi, f) in oriented.iter().enumerate() {
        for k in 0..4 {
            let (a, b) = (f[k], f[(k + 1) % 4]);
            edges.entry((a.min(b), a.max(b))).or_default().push((fi, a < b));
        }
    }
    let mut edge_list: Vec<_> = edges.iter().collect();
    edge_list.sort_by_key(|(k, _)| **k);
    for (&(a, b), uses) in &edge_list {
        if uses.len() > 2 {
            out.push(Violation::EdgeOverused { a, b, faces: uses.iter().map(|u| u.0).collect() });
        } else if uses.len() == 2 && uses[0].1 == uses[1].1 {
            out.push(Violation::FoldedEdge { a, b });
        }
    }

    // pairwise face intersections: empty, a vertex, or an edge
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (fi, f) in oriented.iter().enumerate() {
        for &v in f {
            incident[v].push(fi);
        }
    }
    let mut shared: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (v, fs) in incident.iter().enumerate() {
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                shared.entry((fs[i].min(fs[j]), fs[i].max(fs[j]))).or_default().push(v);
            }
        }
    }
    let is_side = |f: &[usize; 4], a: usize, b: usize| {
        (0..4).any(|k| (f[k] == a && f[(k + 1) % 4] == b) || (f[k] == b && f[(k + 1) % 4] == a))
    };
    let mut bad_pairs: Vec<_> = shared
        .into_iter()
        .filter(|((f, g), vs)| {
            vs.len() > 2
                || (vs.len() == 2 && !(is_side(&oriented[*f], vs[0], vs[1]) && is_side(&oriented[*g], vs[0], vs[1])))
        })
        .collect();
    bad_pairs.sort();
    for ((f, g), vs) in bad_pairs {
        out.push(Violation::FacesIntersectBadly { first: f, second: g, shared: vs });
    }

    // boundary cycle
    match trace_boundary(&oriented) {
        Err(detail) => out.push(Violation::BoundaryNotSimpleCycle { detail }),
        Ok(traced) => {
            if !same_cycle(&traced, &data.boundary) {
                out.push(Violation::BoundaryNotSimpleCycle {
                    detail: format!(
                        "stored boundary ({} vertices) does not match the traced cycle ({} vertices)",
                        data.boundary.len(),
                        traced.len()
                    ),
                });
            } else {
                let face_area: f64 = oriented.iter().map(|f| quad_area(&data.points, *f).abs()).sum();
                let pts: Vec<_> = traced.iter().map(|&v| data.points[v]).collect();
                let enclosed = signed_area(&pts).abs();
                if (face_area - enclosed).abs() > 1e-9 * face_area {
                    out.push(Violation::FacesOverlap { face_area, enclosed_area: enclosed });
                }
            }
        }
    }

    match two_color(n, &oriented) {
        Err(vertex) => out.push(Violation::NotBipartite { vertex }),
        Ok(color) => {
            for c in [Color::B, Color::W] {
                let k = diagonal_components(n, &oriented, &color, c);
                if k != 1 {
                    out.push(Violation::DiagonalGraphDisconnected { color: c, components: k });
                }
            }
        }
    }

    if let Some(declared) = data.kind {
        let actual = infer_kind(&data.points, oriented.iter().copied());
        if actual != declared {
            out.push(Violation::KindMismatch { declared, actual });
        }
    }

    ValidationReport { violations: out }
}

/// Same cyclic sequence up to rotation and reversal, without repeats.
fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() || a.is_empty() {
        return false;
    }
    let n = a.len();
    let Some(k) = b.iter().position(|&v| v == a[0]) else {
        return false;
    };
    let fwd = (0..n).all(|i| a[i] == b[(k + i) % n]);
    let bwd = (0..n).all(|i| a[i] == b[(k + n - i) % n]);
    fwd || bwd
}

fn diagonal_components(n: usize, faces: &[[usize; 4]], color: &[Color], c: Color) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for f in faces {
        let (a, b) = if color[f[0]] == c { (f[0], f[2]) } else { (f[1], f[3]) };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut roots: Vec<usize> = (0..n).filter(|&v| color[v] == c).map(|v| find(&mut parent, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::lattice::{build_square_lattice, Domain};

    fn two_squares() -> LatticeData {
        LatticeData {
            points: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(2.0, 1.0),
            ],
            faces: vec![[0, 1, 4, 3], [1, 2, 5, 4]],
            boundary: vec![0, 1, 2, 5, 4, 3],
            kind: None,
        }
    }

    #[test]
    fn builder_output_is_clean() {
        for (dom, step) in [
            (Domain::Rect { x0: 0.0, y0: 0.0, x1: 2.0, y1: 1.0 }, 1.0),
            (Domain::Disk { cx: 0.0, cy: 0.0, r: 1.0 }, 0.1),
            (Domain::Disk { cx: 0.3, cy: -1.0, r: 2.0 }, 0.25),
        ] {
            let l = build_square_lattice(&dom, step).unwrap();
            assert!(l.validate().is_ok(), "{}", l.validate());
        }
    }

    #[test]
    fn pinched_pair_is_reported() {
        // second face reuses two sides of the first one
        let data = LatticeData {
            points: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                Point::new(-1.0, 2.0),
            ],
            faces: vec![[0, 1, 2, 3], [0, 3, 4, 2]],
            boundary: vec![0, 1, 2, 4, 3],
            kind: None,
        };
        let report = validate(&data);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::FacesIntersectBadly { shared, .. } if shared.len() == 3)));
        assert!(report.to_string().contains("faces intersect in more than one edge"));
    }

    #[test]
    fn skipped_boundary_vertex_is_reported() {
        let mut data = two_squares();
        assert!(validate(&data).is_ok());
        data.boundary.retain(|&v| v != 2);
        let report = validate(&data);
        assert!(report.to_string().contains("boundary not a simple closed cycle"));
    }

    #[test]
    fn boundary_reversal_and_rotation_are_accepted() {
        let mut data = two_squares();
        data.boundary.reverse();
        data.boundary.rotate_left(2);
        assert!(validate(&data).is_ok());
    }

    #[test]
    fn degenerate_and_repeated_faces() {
        let mut data = two_squares();
        data.faces[1] = [1, 2, 2, 4];
        assert!(matches!(validate(&data).violations[0], Violation::RepeatedVertex { face: 1 }));
        let mut data = two_squares();
        data.points[4] = Point::new(1.0, 0.0);
        data.points[1] = Point::new(1.0, 0.0);
        assert!(!validate(&data).is_ok());
    }

    #[test]
    fn declared_kind_is_checked() {
        let mut data = two_squares();
        data.kind = Some(LatticeKind::Square);
        assert!(validate(&data).is_ok());
        data.points[5] = Point::new(2.5, 1.3);
        let report = validate(&data);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::KindMismatch { .. })));
    }

    #[test]
    fn non_simple_quad_is_rejected() {
        let mut data = two_squares();
        data.faces[1] = [1, 2, 4, 5];
        assert!(!validate(&data).is_ok());
    }
}

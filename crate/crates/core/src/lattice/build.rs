use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QuadLattice;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Region descriptor for lattice generation: `disk:cx,cy,r` or `rect:x0,y0,x1,y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk { cx: 0.0, cy: 0.0, r: 1.0 }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Domain::Disk { cx, cy, r } => {
                let (dx, dy) = (p.x - cx, p.y - cy);
                dx * dx + dy * dy <= r * r * (1.0 + 1e-12)
            }
            Domain::Rect { x0, y0, x1, y1 } => {
                let e = 1e-12 * (x1 - x0).abs().max((y1 - y0).abs());
                p.x >= x0 - e && p.x <= x1 + e && p.y >= y0 - e && p.y <= y1 + e
            }
        }
    }

    /// Distance from `p` (inside the domain) to the domain boundary.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        match *self {
            Domain::Disk { cx, cy, r } => (r - (p.x - cx).hypot(p.y - cy)).abs(),
            Domain::Rect { x0, y0, x1, y1 } => {
                let inside = (p.x - x0).min(x1 - p.x).min(p.y - y0).min(y1 - p.y);
                if inside >= 0.0 {
                    inside
                } else {
                    let dx = (x0 - p.x).max(0.0).max(p.x - x1);
                    let dy = (y0 - p.y).max(0.0).max(p.y - y1);
                    dx.hypot(dy)
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Disk { r, .. } => PI * r * r,
            Domain::Rect { x0, y0, x1, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    fn anchor(&self) -> Point {
        match *self {
            Domain::Disk { cx, cy, .. } => Point::new(cx, cy),
            Domain::Rect { x0, y0, .. } => Point::new(x0, y0),
        }
    }

    fn bounds(&self) -> (Point, Point) {
        match *self {
            Domain::Disk { cx, cy, r } => (Point::new(cx - r, cy - r), Point::new(cx + r, cy + r)),
            Domain::Rect { x0, y0, x1, y1 } => (Point::new(x0, y0), Point::new(x1, y1)),
        }
    }

    fn is_well_formed(&self) -> bool {
        match *self {
            Domain::Disk { cx, cy, r } => cx.is_finite() && cy.is_finite() && r.is_finite() && r > 0.0,
            Domain::Rect { x0, y0, x1, y1 } => [x0, y0, x1, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0,
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad domain `{s}` (expected disk:cx,cy,r or rect:x0,y0,x1,y1)"));
        let (tag, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let d = match (tag, nums.as_slice()) {
            ("disk", &[cx, cy, r]) => Domain::Disk { cx, cy, r },
            ("rect", &[x0, y0, x1, y1]) => Domain::Rect { x0, y0, x1, y1 },
            _ => return Err(bad()),
        };
        if !d.is_well_formed() {
            return Err(bad());
        }
        Ok(d)
    }
}

/// All axis-aligned `step`-squares of the grid anchored at the disk center (or
/// the rectangle's lower-left corner) whose closed cell lies inside the domain.
/// Vertices are indexed row by row from the bottom.
pub fn build_square_lattice(domain: &Domain, step: f64) -> Result<QuadLattice> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    if !domain.is_well_formed() {
        return Err(Error::InvalidInput(format!("malformed domain {domain:?}")));
    }
    let a = domain.anchor();
    let (lo, hi) = domain.bounds();
    let i0 = ((lo.x - a.x) / step).floor() as i64 - 1;
    let i1 = ((hi.x - a.x) / step).ceil() as i64 + 1;
    let j0 = ((lo.y - a.y) / step).floor() as i64 - 1;
    let j1 = ((hi.y - a.y) / step).ceil() as i64 + 1;
    let at = |i: i64, j: i64| Point::new(a.x + i as f64 * step, a.y + j as f64 * step);

    let mut cells = Vec::new();
    for j in j0..j1 {
        for i in i0..i1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if corners.iter().all(|&(ci, cj)| domain.contains(at(ci, cj))) {
                cells.push(corners);
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyLattice);
    }
    // (j, i) ordering gives row-major indices
    let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for c in &cells {
        for &(i, j) in c {
            index.insert((j, i), 0);
        }
    }
    let mut points = Vec::with_capacity(index.len());
    for (k, ((j, i), slot)) in index.iter_mut().enumerate() {
        *slot = k;
        points.push(at(*i, *j));
    }
    let faces = cells.iter().map(|c| c.map(|(i, j)| index[&(j, i)])).collect();
    QuadLattice::from_faces(points, faces)
}

/// A square lattice whose interior vertices are displaced by up to
/// `amplitude * step` in each coordinate; the result is a general (nonorthogonal) lattice.
pub fn build_perturbed_lattice(domain: &Domain, step: f64, amplitude: f64, seed: u64) -> Result<QuadLattice> {
    if !(0.0..0.25).contains(&amplitude) {
        return Err(Error::InvalidInput(format!("perturbation amplitude {amplitude} outside [0, 0.25)")));
    }
    let base = build_square_lattice(domain, step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = base.points().to_vec();
    for (v, p) in points.iter_mut().enumerate() {
        let dx = rng.random_range(-1.0..1.0) * amplitude * step;
        let dy = rng.random_range(-1.0..1.0) * amplitude * step;
        if !base.is_boundary(v) {
            p.x += dx;
            p.y += dy;
        }
    }
    let faces = base.faces().iter().map(|f| f.vertices()).collect();
    QuadLattice::new(points, faces, base.boundary().to_vec())
}

/// The four-face nonorthogonal lattice on which a discrete harmonic function
/// exceeds its boundary maximum by the factor `m`, together with the discrete
/// analytic function `f` attached to it.
///
/// Vertex order: `0`, `±i`, `±cot(π/8)`, `±√2·m(cot(π/8) + i)`, `±√2·m(cot(π/8) − i)`.
pub fn tikhomirov_lattice(m: f64) -> Result<(QuadLattice, Vec<Complex64>)> {
    if !(m > 1.0) {
        return Err(Error::InvalidInput(format!("parameter m = {m} must exceed 1")));
    }
    let cot = 1.0 / (PI / 8.0).tan();
    let s = 2f64.sqrt() * m;
    let z = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(cot, 0.0),
        Complex64::new(-cot, 0.0),
        Complex64::new(s * cot, s),
        Complex64::new(-s * cot, -s),
        Complex64::new(s * cot, -s),
        Complex64::new(-s * cot, s),
    ];
    let f = vec![
        Complex64::new(m, m),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 2.0 * m),
        Complex64::new(0.0, 2.0 * m),
    ];
    let points = z.iter().map(|&w| Point::from_z(w)).collect();
    let faces = vec![[0, 3, 5, 1], [0, 1, 8, 4], [0, 4, 6, 2], [0, 2, 7, 3]];
    let lattice = QuadLattice::from_faces(points, faces)?;
    Ok((lattice, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Color, LatticeKind};

    #[test]
    fn rectangle_two_cells() {
        let l = build_square_lattice(&Domain::Rect { x0: 0.0, y0: 0.0, x1: 2.0, y1: 1.0 }, 1.0).unwrap();
        assert_eq!(l.face_count(), 2);
        assert_eq!(l.vertex_count(), 6);
        assert_eq!(l.boundary().len(), 6);
        assert_eq!(l.kind(), LatticeKind::Square);
    }

    #[test]
    fn disk_of_radius_one_and_a_half() {
        // brute force: unit cells of the integer grid with all corners in the disk
        let mut expected = 0;
        for i in -3..3 {
            for j in -3..3 {
                let ok = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                    .iter()
                    .all(|&(a, b): &(i32, i32)| ((a * a + b * b) as f64) <= 2.25);
                expected += ok as usize;
            }
        }
        assert_eq!(expected, 4);
        let l = build_square_lattice(&Domain::Disk { cx: 0.0, cy: 0.0, r: 1.5 }, 1.0).unwrap();
        assert_eq!(l.face_count(), expected);
        assert_eq!(l.interior_vertices().len(), 1);
    }

    #[test]
    fn too_small_or_bad_step() {
        let d = Domain::Rect { x0: 0.0, y0: 0.0, x1: 0.5, y1: 0.5 };
        assert!(matches!(build_square_lattice(&d, 1.0), Err(Error::EmptyLattice)));
        assert!(matches!(build_square_lattice(&d, 0.0), Err(Error::InvalidStep(_))));
        assert!(matches!(build_square_lattice(&d, -1.0), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn checkerboard_coloring() {
        let l = build_square_lattice(&Domain::Rect { x0: 0.0, y0: 0.0, x1: 3.0, y1: 2.0 }, 1.0).unwrap();
        for (v, p) in l.points().iter().enumerate() {
            let parity = (p.x.round() as i64 + p.y.round() as i64) % 2 == 0;
            assert_eq!(l.color(v) == Color::B, parity);
        }
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("disk:0,0,1".parse::<Domain>().unwrap(), Domain::unit_disk());
        assert_eq!("rect:0,0,2,1".parse::<Domain>().unwrap(), Domain::Rect { x0: 0.0, y0: 0.0, x1: 2.0, y1: 1.0 });
        assert!("disk:0,0".parse::<Domain>().is_err());
        assert!("disk:0,0,-1".parse::<Domain>().is_err());
        assert!("blob:1".parse::<Domain>().is_err());
    }

    #[test]
    fn tikhomirov_coloring_matches_diagonals_from_origin() {
        let (l, _) = tikhomirov_lattice(2.0).unwrap();
        let b: Vec<usize> = l.vertices_of_color(Color::B);
        assert_eq!(b, vec![0, 5, 6, 7, 8]);
        assert_eq!(l.vertices_of_color(Color::W), vec![1, 2, 3, 4]);
        assert_eq!(l.kind(), LatticeKind::General);
        assert_eq!(l.interior_vertices(), vec![0]);
    }

    #[test]
    fn perturbed_lattice_is_general_and_valid() {
        let l = build_perturbed_lattice(&Domain::unit_disk(), 0.1, 0.2, 7).unwrap();
        assert_eq!(l.kind(), LatticeKind::General);
        assert!(l.validate().is_ok());
    }
}

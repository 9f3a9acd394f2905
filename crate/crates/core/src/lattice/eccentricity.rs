use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{QuadLattice, ORTHOGONAL_TOL};
use crate::error::{Error, Result};
use crate::geometry::{cross, dot, norm, Point};

/// Measured constants for the diagonal conditions and the vertex-density condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EccentricityReport {
    /// Longest over shortest diagonal, maximized over faces.
    pub max_diag_ratio: f64,
    /// Smallest acute angle between the diagonal lines, in radians.
    pub min_diag_angle: f64,
    /// Largest number of vertices in a probe disk of radius equal to the maximal edge length.
    pub max_disk_count: usize,
    pub e: f64,
}

/// Probe centers are every vertex plus a grid of pitch `h/4`; counts use spatial binning.
pub fn eccentricity(lattice: &QuadLattice) -> Result<EccentricityReport> {
    let mut max_ratio: f64 = 1.0;
    let mut min_angle = FRAC_PI_2;
    for (fi, _) in lattice.faces().iter().enumerate() {
        let q = lattice.face_points(fi);
        let d1 = q[2].sub(q[0]);
        let d2 = q[3].sub(q[1]);
        let (l1, l2) = (norm(d1), norm(d2));
        if l1 == 0.0 || l2 == 0.0 {
            return Err(Error::DegenerateFace { face: fi });
        }
        // within the orthogonality tolerance a face counts as exactly round
        let ratio = l1.max(l2) / l1.min(l2);
        if ratio - 1.0 > ORTHOGONAL_TOL {
            max_ratio = max_ratio.max(ratio);
        }
        let cos = dot(d1, d2).abs() / (l1 * l2);
        if cos > ORTHOGONAL_TOL {
            min_angle = min_angle.min(cross(d1, d2).abs().atan2(dot(d1, d2).abs()));
        }
    }

    let radius = lattice.max_edge();
    let pts = lattice.points();
    let key = |p: Point| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64);
    let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (v, &p) in pts.iter().enumerate() {
        bins.entry(key(p)).or_default().push(v);
    }
    let r2 = radius * radius * (1.0 + 1e-12);
    let count = |c: Point| {
        let (bx, by) = key(c);
        let mut k = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(vs) = bins.get(&(bx + dx, by + dy)) {
                    k += vs
                        .iter()
                        .filter(|&&v| {
                            let d = pts[v].sub(c);
                            d[0] * d[0] + d[1] * d[1] <= r2
                        })
                        .count();
                }
            }
        }
        k
    };
    let mut max_count = pts.iter().map(|&p| count(p)).max().unwrap_or(0);
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pitch = lattice.h() / 4.0;
    let nx = ((hi.x - lo.x) / pitch).ceil() as usize;
    let ny = ((hi.y - lo.y) / pitch).ceil() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let c = Point::new(lo.x + i as f64 * pitch, lo.y + j as f64 * pitch);
            max_count = max_count.max(count(c));
        }
    }
    let e = max_ratio.max(1.0 / min_angle).max(max_count as f64);
    Ok(EccentricityReport { max_diag_ratio: max_ratio, min_diag_angle: min_angle, max_disk_count: max_count, e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_square_lattice, Domain};

    #[test]
    fn square_lattices_are_exactly_round() {
        let l = build_square_lattice(&Domain::unit_disk(), 0.1).unwrap();
        let r = eccentricity(&l).unwrap();
        assert_eq!(r.max_diag_ratio, 1.0);
        assert_eq!(r.min_diag_angle, FRAC_PI_2);
    }

    #[test]
    fn skewed_face_ratio() {
        let l = QuadLattice::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 3.0), Point::new(0.0, 1.0)],
            vec![[0, 1, 2, 3]],
            vec![0, 1, 2, 3],
        )
        .unwrap();
        let r = eccentricity(&l).unwrap();
        assert!((r.max_diag_ratio - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_square_disk_count() {
        let l = build_square_lattice(&Domain::Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }, 1.0).unwrap();
        // brute force over a fine probe grid
        let mut best = 0;
        for i in 0..=40 {
            for j in 0..=40 {
                let c = Point::new(-0.5 + i as f64 * 0.05, -0.5 + j as f64 * 0.05);
                let k = l.points().iter().filter(|p| p.dist(c) <= 1.0 + 1e-12).count();
                best = best.max(k);
            }
        }
        assert_eq!(best, 4);
        let r = eccentricity(&l).unwrap();
        assert_eq!(r.max_disk_count, 4);
        assert_eq!(r.e, 4.0);
    }
}

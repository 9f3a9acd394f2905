//! Planar points and the few predicates the lattice code needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the plane, read as the complex number `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn z(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_z(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn sub(self, o: Point) -> [f64; 2] {
        [self.x - o.x, self.y - o.y]
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Signed shoelace area of a closed polygon (positive for counterclockwise, y up).
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(b.sub(a), c.sub(a))
}

/// Closed segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// True iff the quadrilateral `q0 q1 q2 q3` has no crossing opposite sides.
pub fn quad_is_simple(q: [Point; 4]) -> bool {
    !segments_intersect(q[0], q[1], q[2], q[3]) && !segments_intersect(q[1], q[2], q[3], q[0])
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Circumcenter of a triangle; `None` when the triangle is collinear.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let d = 2.0 * cross(ab, ac);
    if d == 0.0 {
        return None;
    }
    let b2 = dot(ab, ab);
    let c2 = dot(ac, ac);
    let ux = (ac[1] * b2 - ab[1] * c2) / d;
    let uy = (ab[0] * c2 - ac[0] * b2) / d;
    Some(Point::new(a.x + ux, a.y + uy))
}

/// Interior angle at `a` of triangle `abc`.
pub fn angle_at(a: Point, b: Point, c: Point) -> f64 {
    let u = b.sub(a);
    let v = c.sub(a);
    cross(u, v).abs().atan2(dot(u, v))
}

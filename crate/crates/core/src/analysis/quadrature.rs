//! Adaptive Gauss-Kronrod (7/15) quadrature in one and two dimensions.

use std::f64::consts::TAU;

use crate::geometry::Point;
use crate::lattice::Domain;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 40;

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

/// `int_a^b f` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(f, a, b, tol, 0)
}

/// Iterated integral over the rectangle `[x0, x1] x [y0, y1]`.
pub fn integrate_rect(f: &dyn Fn(Point) -> f64, x0: f64, y0: f64, x1: f64, y1: f64, tol: f64) -> f64 {
    let inner_tol = tol / (x1 - x0);
    let outer = |x: f64| integrate(&|y: f64| f(Point::new(x, y)), y0, y1, inner_tol);
    integrate(&outer, x0, x1, 0.5 * tol)
}

/// Integral over a disk in polar coordinates.
pub fn integrate_disk(f: &dyn Fn(Point) -> f64, cx: f64, cy: f64, r: f64, tol: f64) -> f64 {
    let inner_tol = tol / TAU;
    let outer = |t: f64| {
        let (s, c) = t.sin_cos();
        integrate(&|rho: f64| rho * f(Point::new(cx + rho * c, cy + rho * s)), 0.0, r, inner_tol)
    };
    integrate(&outer, 0.0, TAU, 0.5 * tol)
}

pub fn integrate_domain(f: &dyn Fn(Point) -> f64, domain: &Domain, tol: f64) -> f64 {
    match *domain {
        Domain::Disk { cx, cy, r } => integrate_disk(f, cx, cy, r, tol),
        Domain::Rect { x0, y0, x1, y1 } => integrate_rect(f, x0, y0, x1, y1, tol),
    }
}

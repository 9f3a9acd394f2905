//! Face gradients, the energy form, admittances and the discrete Laplacian.

use std::fs::File;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, Point};
use crate::lattice::{Color, QuadLattice};
use crate::sparse::CsrMatrix;

/// Real vertex function, indexed like [`QuadLattice::points`].
pub type VertexFunction = Vec<f64>;
/// Complex vertex function, indexed like [`QuadLattice::points`].
pub type ComplexFunction = Vec<Complex64>;
/// Per-face gradient vector.
pub type FaceGradient = [f64; 2];

/// Relative size of `cross(d1, d2)` below which the diagonals count as parallel.
const SINGULAR_TOL: f64 = 1e-14;

/// Coefficient matrix `G` with `grad = G u` for the four corner values of a face.
fn gradient_matrix(q: [Point; 4]) -> Result<[[f64; 4]; 2]> {
    let d1 = q[2].sub(q[0]);
    let d2 = q[3].sub(q[1]);
    let det = cross(d1, d2);
    if !(det.abs() > SINGULAR_TOL * dot(d1, d1).sqrt() * dot(d2, d2).sqrt()) {
        return Err(Error::SingularFace);
    }
    let inv = 1.0 / det;
    Ok([[-d2[1] * inv, d1[1] * inv, d2[1] * inv, -d1[1] * inv], [d2[0] * inv, -d1[0] * inv, -d2[0] * inv, d1[0] * inv]])
}

/// The vector whose dot products with `z3 - z1` and `z4 - z2` are `u3 - u1` and `u4 - u2`.
pub fn face_gradient(q: [Point; 4], u: [f64; 4]) -> Result<FaceGradient> {
    let d1 = q[2].sub(q[0]);
    let d2 = q[3].sub(q[1]);
    let det = cross(d1, d2);
    if !(det.abs() > SINGULAR_TOL * dot(d1, d1).sqrt() * dot(d2, d2).sqrt()) {
        return Err(Error::SingularFace);
    }
    let a = u[2] - u[0];
    let b = u[3] - u[1];
    Ok([(a * d2[1] - b * d1[1]) / det, (b * d1[0] - a * d2[0]) / det])
}

/// Rotation by a quarter turn counterclockwise.
pub fn star(g: FaceGradient) -> FaceGradient {
    [-g[1], g[0]]
}

fn corner_values(l: &QuadLattice, f: usize, u: &[f64]) -> [f64; 4] {
    l.faces()[f].vertices().map(|v| u[v])
}

fn check_len(l: &QuadLattice, n: usize) -> Result<()> {
    if n != l.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "vertex function has {n} values, lattice has {} vertices",
            l.vertex_count()
        )));
    }
    Ok(())
}

/// Gradient on every face.
pub fn gradients(l: &QuadLattice, u: &[f64]) -> Result<Vec<FaceGradient>> {
    check_len(l, u.len())?;
    (0..l.face_count()).map(|f| face_gradient(l.face_points(f), corner_values(l, f, u))).collect()
}

/// Sum over faces of `|grad u|^2 * area`.
pub fn energy(l: &QuadLattice, u: &[f64]) -> Result<f64> {
    let g = gradients(l, u)?;
    Ok(g.iter().zip(l.faces()).map(|(g, f)| dot(*g, *g) * f.area()).sum())
}

/// Admittance `i (z2 - z4) / (z1 - z3)` of a face listed in normalized order.
pub fn conductance(q: [Point; 4]) -> Result<Complex64> {
    let d = q[0].z() - q[2].z();
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateDiagonal);
    }
    Ok(Complex64::i() * (q[1].z() - q[3].z()) / d)
}

/// Energy through the orthogonal-lattice weights: `sum (c (u3-u1)^2 + (u4-u2)^2 / c) / 2`.
pub fn energy_split(l: &QuadLattice, u: &[f64]) -> Result<f64> {
    if !l.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    check_len(l, u.len())?;
    let mut e = 0.0;
    for f in 0..l.face_count() {
        let c = conductance(l.face_points(f))?.re;
        let v = corner_values(l, f, u);
        e += 0.5 * (c * (v[2] - v[0]).powi(2) + (v[3] - v[1]).powi(2) / c);
    }
    Ok(e)
}

/// The energy form `E(u) = u^T M u / 2` split into interior and boundary vertex sets.
#[derive(Debug, Clone)]
pub struct StiffnessSystem {
    pub matrix: CsrMatrix,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

/// Local 4x4 block `2 * area * G^T G` of one face.
pub fn local_stiffness(q: [Point; 4], area: f64) -> Result<[[f64; 4]; 4]> {
    let g = gradient_matrix(q)?;
    let mut k = [[0.0; 4]; 4];
    for (a, row) in k.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = 2.0 * area * (g[0][a] * g[0][b] + g[1][a] * g[1][b]);
        }
    }
    Ok(k)
}

/// Block of face `f` as used by the lattice-wide operators. On orthogonal
/// lattices the B-W couplings are rounding noise of size `|cos|` and are dropped,
/// so the two diagonal graphs decouple exactly.
fn face_block(l: &QuadLattice, f: usize) -> Result<[[f64; 4]; 4]> {
    let mut k = local_stiffness(l.face_points(f), l.faces()[f].area())?;
    if l.is_orthogonal() {
        for (a, row) in k.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                if (a + b) % 2 == 1 {
                    *e = 0.0;
                }
            }
        }
    }
    Ok(k)
}

pub fn assemble(l: &QuadLattice) -> Result<StiffnessSystem> {
    let blocks =
        (0..l.face_count()).map(|f| Ok((l.faces()[f].vertices(), face_block(l, f)?))).collect::<Result<Vec<_>>>()?;
    let matrix = CsrMatrix::from_element_blocks(l.vertex_count(), &blocks);
    let mut boundary = l.boundary().to_vec();
    boundary.sort_unstable();
    Ok(StiffnessSystem { matrix, interior: l.interior_vertices(), boundary })
}

/// `-M u`, accumulated face by face.
pub fn laplacian(l: &QuadLattice, u: &[f64]) -> Result<VertexFunction> {
    check_len(l, u.len())?;
    let mut out = vec![0.0; l.vertex_count()];
    for (f, face) in l.faces().iter().enumerate() {
        let k = face_block(l, f)?;
        let v = face.vertices();
        let uv = v.map(|i| u[i]);
        for a in 0..4 {
            out[v[a]] -= (0..4).map(|b| k[a][b] * uv[b]).sum::<f64>();
        }
    }
    Ok(out)
}

/// The Laplacian through rotated gradients: at `z`, the sum over faces listed
/// from `z = z1` of `*grad u . (z2 - z4)`.
pub fn laplacian_rotated(l: &QuadLattice, u: &[f64]) -> Result<VertexFunction> {
    let g = gradients(l, u)?;
    let mut out = vec![0.0; l.vertex_count()];
    for (face, g) in l.faces().iter().zip(&g) {
        let s = star(*g);
        for k in 0..4 {
            let r = face.rotated(k);
            out[r[0]] += dot(s, l.point(r[1]).sub(l.point(r[3])));
        }
    }
    Ok(out)
}

/// Largest violation over faces of `(f1 - f3)/(z1 - z3) = (f2 - f4)/(z2 - z4)`.
pub fn analytic_residual(l: &QuadLattice, f: &[Complex64]) -> Result<f64> {
    check_len(l, f.len())?;
    let mut worst: f64 = 0.0;
    for face in l.faces() {
        let v = face.vertices();
        let z = v.map(|i| l.point(i).z());
        let d13 = z[0] - z[2];
        let d24 = z[1] - z[3];
        if d13.norm() == 0.0 || d24.norm() == 0.0 {
            return Err(Error::DegenerateDiagonal);
        }
        let r = (f[v[0]] - f[v[2]]) / d13 - (f[v[1]] - f[v[3]]) / d24;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Max modulus over a complex function, or 1 when it vanishes.
pub fn complex_scale(f: &[Complex64]) -> f64 {
    let m = f.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Samples `g` at every vertex.
pub fn restrict(l: &QuadLattice, g: impl Fn(Point) -> f64) -> VertexFunction {
    l.points().iter().map(|&p| g(p)).collect()
}

/// Adjacency of the diagonal graph of color `c`: `(neighbor, weight)` lists,
/// with weight `c(z1z3)` on B edges and `1/c(z1z3)` on W edges (real parts).
pub fn diagonal_graph(l: &QuadLattice, c: Color) -> Result<Vec<Vec<(usize, f64)>>> {
    let mut adj = vec![Vec::new(); l.vertex_count()];
    for f in 0..l.face_count() {
        let w = conductance(l.face_points(f))?.re;
        let v = l.faces()[f].vertices();
        let (a, b, w) = match c {
            Color::B => (v[0], v[2], w),
            Color::W => (v[1], v[3], 1.0 / w),
        };
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    Ok(adj)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `index,x,y,value`.
pub fn write_function_csv(l: &QuadLattice, u: &[f64], path: impl AsRef<Path>) -> Result<()> {
    check_len(l, u.len())?;
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["index", "x", "y", "value"]).map_err(csv_err)?;
    for (i, (p, v)) in l.points().iter().zip(u).enumerate() {
        w.write_record([i.to_string(), fmt(p.x), fmt(p.y), fmt(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `index,x,y,value_re,value_im`.
pub fn write_complex_csv(l: &QuadLattice, f: &[Complex64], path: impl AsRef<Path>) -> Result<()> {
    check_len(l, f.len())?;
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["index", "x", "y", "value_re", "value_im"]).map_err(csv_err)?;
    for (i, (p, v)) in l.points().iter().zip(f).enumerate() {
        w.write_record([i.to_string(), fmt(p.x), fmt(p.y), fmt(v.re), fmt(v.im)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either CSV layout; a real file yields zero imaginary parts.
pub fn read_function_csv(path: impl AsRef<Path>) -> Result<ComplexFunction> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let complex = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["index", "x", "y", "value"] => false,
        ["index", "x", "y", "value_re", "value_im"] => true,
        _ => return Err(Error::Parse { location: "line 1".into(), message: format!("unexpected header {header:?}") }),
    };
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = k + 2;
        let num = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(|| Error::Parse {
                location: format!("line {line} field {}", header[i]),
                message: "not a number".into(),
            })
        };
        let idx: usize = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse {
            location: format!("line {line} field index"),
            message: "not an index".into(),
        })?;
        if idx != k {
            return Err(Error::Parse {
                location: format!("line {line}"),
                message: format!("expected index {k}, got {idx}"),
            });
        }
        let z = if complex { Complex64::new(num(3)?, num(4)?) } else { Complex64::new(num(3)?, 0.0) };
        out.push(z);
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    let location = e.position().map(|p| format!("line {}", p.line())).unwrap_or_else(|| "csv".into());
    Error::Parse { location, message: e.to_string() }
}

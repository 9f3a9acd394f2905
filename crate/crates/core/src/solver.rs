//! The discrete Dirichlet problem, conjugate functions, analytic completion
//! and the alternating-current network picture.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::lattice::{Color, QuadLattice};
use crate::operators::{self, star, ComplexFunction, VertexFunction};
use crate::sparse::CsrMatrix;

/// Boundary data for the Dirichlet problem on a lattice.
#[derive(Debug, Clone)]
pub struct DirichletProblem<'a> {
    pub lattice: &'a QuadLattice,
    pub boundary_values: BTreeMap<usize, f64>,
}

impl<'a> DirichletProblem<'a> {
    /// Checks that the keys are exactly the boundary vertices and the values are finite.
    pub fn new(lattice: &'a QuadLattice, boundary_values: BTreeMap<usize, f64>) -> Result<Self> {
        if boundary_values.len() != lattice.boundary().len() {
            return Err(Error::InvalidInput(format!(
                "{} boundary values for {} boundary vertices",
                boundary_values.len(),
                lattice.boundary().len()
            )));
        }
        for (&v, &g) in &boundary_values {
            if v >= lattice.vertex_count() || !lattice.is_boundary(v) {
                return Err(Error::InvalidInput(format!("vertex {v} is not on the boundary")));
            }
            if !g.is_finite() {
                return Err(Error::InvalidInput(format!("boundary value at {v} is not finite")));
            }
        }
        Ok(Self { lattice, boundary_values })
    }

    /// Boundary data sampled from `g`.
    pub fn from_fn(lattice: &'a QuadLattice, g: impl Fn(Point) -> f64) -> Result<Self> {
        let map = lattice.boundary().iter().map(|&v| (v, g(lattice.point(v)))).collect();
        Self::new(lattice, map)
    }

    /// Boundary data read off a full vertex function.
    pub fn from_values(lattice: &'a QuadLattice, u: &[f64]) -> Result<Self> {
        let map = lattice.boundary().iter().map(|&v| (v, u[v])).collect();
        Self::new(lattice, map)
    }

    pub fn scale(&self) -> f64 {
        QuadLattice::scale_of(&self.boundary_values.values().copied().collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Target for `max |Laplacian u|` over interior vertices, relative to the boundary data scale.
    pub tol: f64,
    /// Iteration cap; defaults to twenty times the number of unknowns.
    pub max_iter: Option<usize>,
    /// Interior starting values (full-length vertex function); zero when absent.
    pub initial_guess: Option<VertexFunction>,
    /// Systems with fewer unknowns are factored densely.
    pub dense_below: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: None, initial_guess: None, dense_below: 500 }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: VertexFunction,
    /// Max |Laplacian u| over interior vertices.
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
}

pub fn solve_dirichlet(p: &DirichletProblem, tol: f64) -> Result<SolveReport> {
    solve_dirichlet_with(p, &SolveOptions::with_tol(tol))
}

pub fn solve_dirichlet_with(p: &DirichletProblem, opts: &SolveOptions) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {} must be positive", opts.tol)));
    }
    let l = p.lattice;
    let sys = operators::assemble(l)?;
    let mut u = vec![0.0; l.vertex_count()];
    if let Some(g) = &opts.initial_guess {
        if g.len() != u.len() {
            return Err(Error::InvalidInput("initial guess has the wrong length".into()));
        }
        u.copy_from_slice(g);
    }
    for (&v, &g) in &p.boundary_values {
        u[v] = g;
    }
    let target = opts.tol * p.scale();
    let (iterations, residual) = solve_partitioned(&sys.matrix, &sys.interior, &sys.boundary, &mut u, target, opts)?;
    let energy = operators::energy(l, &u)?;
    Ok(SolveReport { solution: u, residual, iterations, energy })
}

/// Solves `M u = 0` on `interior` with `u` fixed on `boundary`; `u` holds the
/// boundary data and the starting interior values. Returns iterations and the
/// final max-norm residual.
pub(crate) fn solve_partitioned(
    m: &CsrMatrix,
    interior: &[usize],
    boundary: &[usize],
    u: &mut [f64],
    target: f64,
    opts: &SolveOptions,
) -> Result<(usize, f64)> {
    let a_ii = m.block(interior, interior);
    let a_ib = m.rect_block(interior, boundary);
    let gb: Vec<f64> = boundary.iter().map(|&v| u[v]).collect();
    let b: Vec<f64> = a_ib.mul_vec(&gb).iter().map(|x| -x).collect();
    let mut x: Vec<f64> = interior.iter().map(|&v| u[v]).collect();
    let iterations = if interior.is_empty() {
        0
    } else if interior.len() < opts.dense_below {
        dense_solve(&a_ii, &b, &mut x)?;
        1
    } else {
        let cap = opts.max_iter.unwrap_or(20 * interior.len());
        pcg(&a_ii, &b, &mut x, target, cap)?
    };
    for (k, &v) in interior.iter().enumerate() {
        u[v] = x[k];
    }
    Ok((iterations, interior_residual(m, interior, u)))
}

fn interior_residual(m: &CsrMatrix, interior: &[usize], u: &[f64]) -> f64 {
    interior.iter().map(|&i| m.row(i).map(|(j, a)| a * u[j]).sum::<f64>().abs()).fold(0.0, f64::max)
}

fn dense_solve(a: &CsrMatrix, b: &[f64], x: &mut [f64]) -> Result<()> {
    let n = a.n();
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            d[(i, j)] = v;
        }
    }
    let chol = d.cholesky().ok_or(Error::SolverDiverged { iterations: 0, residual: f64::INFINITY })?;
    let sol = chol.solve(&DVector::from_column_slice(b));
    x.copy_from_slice(sol.as_slice());
    Ok(())
}

/// Jacobi-preconditioned conjugate gradients. Stops on the true residual in
/// the max norm, or on the rounding floor of `A x` when that is larger.
fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], target: f64, cap: usize) -> Result<usize> {
    let n = a.n();
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64], tmp: &mut [f64]| {
        a.mul_vec_into(x, tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
    };
    let floor = |x: &[f64]| {
        let s = a.abs_mul_vec(x);
        let m = s.iter().zip(b).fold(0.0_f64, |m, (s, b)| m.max(s + b.abs()));
        64.0 * f64::EPSILON * m
    };
    let norm_inf = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    true_residual(x, &mut r, &mut ap);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut it = 0;
    loop {
        if norm_inf(&r) <= target {
            true_residual(x, &mut r, &mut ap);
            let res = norm_inf(&r);
            if res <= target.max(floor(x)) {
                return Ok(it);
            }
            // drifted recurrence: restart from the true residual
            for i in 0..n {
                z[i] = r[i] * dinv[i];
            }
            p.copy_from_slice(&z);
            rz = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        }
        if it >= cap {
            true_residual(x, &mut r, &mut ap);
            let res = norm_inf(&r);
            if res <= target.max(floor(x)) {
                return Ok(it);
            }
            return Err(Error::SolverDiverged { iterations: it, residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            true_residual(x, &mut r, &mut ap);
            return Err(Error::SolverDiverged { iterations: it, residual: norm_inf(&r) });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
    }
}

/// Cycle-sum tolerance for the conjugate, relative to `max |u|`.
pub const CONJUGATE_TOL: f64 = 1e-8;

/// The face whose normalized vertex list is lexicographically smallest.
fn reference_face(l: &QuadLattice) -> usize {
    (0..l.face_count()).min_by_key(|&f| l.faces()[f].vertices()).expect("lattice has faces")
}

/// A function `v` with `grad v = *grad u` on every face, built by path sums
/// over the graphs B and W. The component containing `anchor` takes
/// `anchor_value` there; the other component is shifted so that on the
/// reference face the mean of `v` over the W diagonal exceeds the mean over
/// the B diagonal by `*grad u . (mid_W - mid_B)`.
pub fn conjugate(l: &QuadLattice, u: &[f64], anchor: usize, anchor_value: f64) -> Result<VertexFunction> {
    if anchor >= l.vertex_count() {
        return Err(Error::InvalidInput(format!("anchor {anchor} out of range")));
    }
    let grads = operators::gradients(l, u)?;
    let n = l.vertex_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut edges = Vec::with_capacity(2 * l.face_count());
    for (face, g) in l.faces().iter().zip(&grads) {
        let s = star(*g);
        let v = face.vertices();
        for (a, b) in [(v[0], v[2]), (v[1], v[3])] {
            let inc = dot(s, l.point(b).sub(l.point(a)));
            adj[a].push((b, inc));
            adj[b].push((a, -inc));
            edges.push((a, b, inc));
        }
    }
    let mut out = vec![f64::NAN; n];
    let mut queue = VecDeque::new();
    let anchor_color = l.color(anchor);
    let other_root = (0..n).find(|&v| l.color(v) != anchor_color).expect("both colors occur");
    for root in [anchor, other_root] {
        out[root] = 0.0;
        queue.push_back(root);
        while let Some(a) = queue.pop_front() {
            for &(b, inc) in &adj[a] {
                if out[b].is_nan() {
                    out[b] = out[a] + inc;
                    queue.push_back(b);
                }
            }
        }
    }
    if out.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("diagonal graph is disconnected".into()));
    }
    let mismatch = edges.iter().map(|&(a, b, inc)| (out[b] - out[a] - inc).abs()).fold(0.0, f64::max);
    if mismatch > CONJUGATE_TOL * QuadLattice::scale_of(u) {
        return Err(Error::NotHarmonic(mismatch));
    }
    let shift_anchor = anchor_value - out[anchor];
    for v in 0..n {
        if l.color(v) == anchor_color {
            out[v] += shift_anchor;
        }
    }
    let f = reference_face(l);
    let v = l.faces()[f].vertices();
    let q = l.face_points(f);
    let s = star(grads[f]);
    let mid_b = q[0].midpoint(q[2]);
    let mid_w = q[1].midpoint(q[3]);
    let want = dot(s, mid_w.sub(mid_b));
    let mean_b = 0.5 * (out[v[0]] + out[v[2]]);
    let mean_w = 0.5 * (out[v[1]] + out[v[3]]);
    let shift = match anchor_color {
        Color::B => mean_b + want - mean_w,
        Color::W => mean_w - want - mean_b,
    };
    for (x, c) in out.iter_mut().zip(l.colors()) {
        if *c != anchor_color {
            *x += shift;
        }
    }
    Ok(out)
}

/// `u + i v` with `v` the conjugate of `u`.
pub fn analytic_completion(l: &QuadLattice, u: &[f64], anchor: usize, anchor_value: f64) -> Result<ComplexFunction> {
    let v = conjugate(l, u, anchor, anchor_value)?;
    Ok(u.iter().zip(&v).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

/// Voltage drop `V = f(z1) - f(z3)` and current `I = i (f(z2) - f(z4))` on the B edge of one face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgePhasor {
    pub face: usize,
    pub z1: usize,
    pub z3: usize,
    pub voltage: Complex64,
    pub current: Complex64,
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    pub f: ComplexFunction,
    pub edges: Vec<EdgePhasor>,
    pub report: SolveReport,
}

impl NetworkState {
    /// `Re(f(B_k) - f(B_k+1))` over consecutive boundary B vertices in stored order.
    pub fn boundary_voltage_drops(&self, l: &QuadLattice) -> Vec<f64> {
        cyclic_drops(&l.boundary_of_color(Color::B), |v| self.f[v].re)
    }

    /// `Re(e^{i pi/2} i (f(W_k+1) - f(W_k)))` over consecutive boundary W vertices.
    pub fn boundary_currents_quarter_period(&self, l: &QuadLattice) -> Vec<f64> {
        let w = l.boundary_of_color(Color::W);
        let n = w.len();
        (0..n)
            .map(|k| {
                let cur = Complex64::i() * (self.f[w[(k + 1) % n]] - self.f[w[k]]);
                (cur * Complex64::i()).re
            })
            .collect()
    }
}

fn cyclic_drops(cycle: &[usize], val: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = cycle.len();
    (0..n).map(|k| val(cycle[k]) - val(cycle[(k + 1) % n])).collect()
}

fn integrate_cycle(
    l: &QuadLattice,
    color: Color,
    drops: &[f64],
    anchor: (usize, f64),
    out: &mut BTreeMap<usize, f64>,
) -> Result<()> {
    let cycle = l.boundary_of_color(color);
    if drops.len() != cycle.len() {
        return Err(Error::InvalidInput(format!(
            "{} increments for {} boundary vertices of color {color:?}",
            drops.len(),
            cycle.len()
        )));
    }
    let sum: f64 = drops.iter().sum();
    let size: f64 = drops.iter().map(|d| d.abs()).sum();
    if sum.abs() > 1e-10 * size.max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentBoundaryData(sum));
    }
    let start = cycle.iter().position(|&v| v == anchor.0).ok_or_else(|| {
        Error::InvalidInput(format!("anchor {} is not a boundary vertex of color {color:?}", anchor.0))
    })?;
    let n = cycle.len();
    let mut value = anchor.1;
    for k in 0..n {
        let i = (start + k) % n;
        out.insert(cycle[i], value);
        value -= drops[i];
    }
    Ok(())
}

/// Rebuilds the whole network from boundary voltage drops at time 0
/// (`b_drops[k] = u(B_k) - u(B_k+1)`) and boundary currents after a quarter
/// period (`w_drops[k] = u(W_k) - u(W_k+1)`), both along the stored boundary
/// order, with `u = Re f` pinned at one B and one W boundary vertex.
pub fn solve_network(
    l: &QuadLattice,
    b_drops: &[f64],
    w_drops: &[f64],
    b_anchor: (usize, f64),
    w_anchor: (usize, f64),
    tol: f64,
) -> Result<NetworkState> {
    if !l.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    let mut values = BTreeMap::new();
    integrate_cycle(l, Color::B, b_drops, b_anchor, &mut values)?;
    integrate_cycle(l, Color::W, w_drops, w_anchor, &mut values)?;
    let problem = DirichletProblem::new(l, values)?;
    let report = solve_dirichlet(&problem, tol)?;
    let f = analytic_completion(l, &report.solution, b_anchor.0, 0.0)?;
    let edges = network_phasors(l, &f);
    Ok(NetworkState { f, edges, report })
}

fn network_phasors(l: &QuadLattice, f: &[Complex64]) -> Vec<EdgePhasor> {
    l.faces()
        .iter()
        .enumerate()
        .map(|(face, fc)| {
            let v = fc.vertices();
            EdgePhasor {
                face,
                z1: v[0],
                z3: v[2],
                voltage: f[v[0]] - f[v[2]],
                current: Complex64::i() * (f[v[1]] - f[v[3]]),
            }
        })
        .collect()
}

/// Residual bound under which a function counts as discrete analytic:
/// relative to `max |f|` divided by the shortest diagonal.
pub fn analytic_tolerance(l: &QuadLattice, f: &[Complex64]) -> f64 {
    let dmin = l
        .faces()
        .iter()
        .map(|fc| {
            let v = fc.vertices();
            l.point(v[0]).dist(l.point(v[2])).min(l.point(v[1]).dist(l.point(v[3])))
        })
        .fold(f64::INFINITY, f64::min);
    1e-8 * operators::complex_scale(f) / dmin
}

pub(crate) fn require_analytic(l: &QuadLattice, f: &[Complex64]) -> Result<()> {
    let r = operators::analytic_residual(l, f)?;
    if r > analytic_tolerance(l, f) {
        return Err(Error::NotAnalytic(r));
    }
    Ok(())
}

/// `Re sum V conj(I) / 2` over all B edges.
pub fn network_energy(l: &QuadLattice, f: &[Complex64]) -> Result<f64> {
    require_analytic(l, f)?;
    Ok(network_phasors(l, f).iter().map(|e| 0.5 * (e.voltage * e.current.conj()).re).sum())
}

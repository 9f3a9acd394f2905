//! Discrete harmonic measure of boundary arcs: exact values from the
//! Dirichlet solver and Monte Carlo estimates from weighted random walks.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Color, QuadLattice};
use crate::operators::{diagonal_graph, VertexFunction};
use crate::solver::{solve_dirichlet, DirichletProblem};

/// Checks that `arc` lists a contiguous run of the boundary cycle (either
/// orientation, empty and full cycle allowed) and returns its indicator.
pub fn arc_indicator(l: &QuadLattice, arc: &[usize]) -> Result<Vec<bool>> {
    let mut mark = vec![false; l.vertex_count()];
    for &v in arc {
        if v >= l.vertex_count() || !l.is_boundary(v) || mark[v] {
            return Err(Error::NotAnArc);
        }
        mark[v] = true;
    }
    let b = l.boundary();
    let n = b.len();
    if arc.is_empty() || arc.len() == n {
        return Ok(mark);
    }
    // a proper sub-path has exactly one entry point along the cycle
    let starts = (0..n).filter(|&k| mark[b[k]] && !mark[b[(k + n - 1) % n]]).count();
    if starts != 1 {
        return Err(Error::NotAnArc);
    }
    Ok(mark)
}

/// Harmonic measure of `arc` seen from every vertex: the Dirichlet solution
/// with boundary data 1 on the arc and 0 elsewhere.
pub fn harmonic_measure_exact(l: &QuadLattice, arc: &[usize]) -> Result<VertexFunction> {
    if !l.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    let mark = arc_indicator(l, arc)?;
    let values = l.boundary().iter().map(|&v| (v, if mark[v] { 1.0 } else { 0.0 })).collect();
    let p = DirichletProblem::new(l, values)?;
    Ok(solve_dirichlet(&p, 1e-13)?.solution)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub n_walks: usize,
    pub seed: u64,
    /// Walks longer than this are discarded and counted.
    pub max_steps: usize,
    /// Diagonal graph to walk on; the start vertex must have this color.
    pub graph: Color,
}

impl WalkConfig {
    pub fn new(n_walks: usize, seed: u64, max_steps: usize) -> Self {
        Self { n_walks, seed, max_steps, graph: Color::B }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureEstimate {
    /// Fraction of absorbed walks that ended on the arc.
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / n_absorbed)`.
    pub stderr: f64,
    pub n_absorbed: usize,
    /// Walks dropped at the step cap.
    pub n_capped: usize,
    pub seed: u64,
}

/// Independent walks from `start` that step to a diagonal neighbor with
/// probability proportional to the edge admittance, until they reach the
/// boundary. Walk `i` draws from its own generator seeded with `seed ^ i`,
/// so the estimate does not depend on thread scheduling.
pub fn random_walk_measure(l: &QuadLattice, arc: &[usize], start: usize, cfg: &WalkConfig) -> Result<MeasureEstimate> {
    if !l.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    if cfg.n_walks == 0 {
        return Err(Error::InvalidInput("n_walks must be positive".into()));
    }
    if cfg.max_steps < l.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "max_steps {} is below the vertex count {}",
            cfg.max_steps,
            l.vertex_count()
        )));
    }
    if start >= l.vertex_count() || l.is_boundary(start) || l.color(start) != cfg.graph {
        return Err(Error::InvalidInput(format!("start {start} must be an interior vertex of color {:?}", cfg.graph)));
    }
    let mark = arc_indicator(l, arc)?;
    let adj = diagonal_graph(l, cfg.graph)?;
    let steps: Vec<Option<(Vec<usize>, WeightedIndex<f64>)>> = adj
        .iter()
        .enumerate()
        .map(|(v, nb)| {
            if l.is_boundary(v) || l.color(v) != cfg.graph {
                return Ok(None);
            }
            let w = WeightedIndex::new(nb.iter().map(|e| e.1))
                .map_err(|e| Error::InvalidInput(format!("bad admittances at vertex {v}: {e}")))?;
            Ok(Some((nb.iter().map(|e| e.0).collect(), w)))
        })
        .collect::<Result<_>>()?;

    let (hits, absorbed) = (0..cfg.n_walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ i);
            let mut v = start;
            for _ in 0..cfg.max_steps {
                let (nb, w) = steps[v].as_ref().expect("walk stays inside until absorbed");
                v = nb[w.sample(&mut rng)];
                if l.is_boundary(v) {
                    return (mark[v] as usize, 1usize);
                }
            }
            (0, 0)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if absorbed == 0 {
        return Err(Error::WalkCapExceeded(cfg.max_steps));
    }
    let p = hits as f64 / absorbed as f64;
    Ok(MeasureEstimate {
        p_hat: p,
        stderr: (p * (1.0 - p) / absorbed as f64).sqrt(),
        n_absorbed: absorbed,
        n_capped: cfg.n_walks - absorbed,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_square_lattice, tikhomirov_lattice, Domain};

    fn square(n: usize) -> QuadLattice {
        let h = 1.0 / n as f64;
        build_square_lattice(&Domain::Rect { x0: -1.0, y0: -1.0, x1: 1.0, y1: 1.0 }, h).unwrap()
    }

    fn center(l: &QuadLattice) -> usize {
        l.points().iter().position(|p| p.x.abs() < 1e-12 && p.y.abs() < 1e-12).unwrap()
    }

    /// Bottom side without its right end corner, so the four sides partition the boundary.
    fn bottom_side(l: &QuadLattice) -> Vec<usize> {
        let b = l.boundary();
        let mut out: Vec<usize> =
            b.iter().copied().filter(|&v| (l.point(v).y + 1.0).abs() < 1e-12 && l.point(v).x < 1.0 - 1e-12).collect();
        out.sort_by(|&a, &c| l.point(a).x.total_cmp(&l.point(c).x));
        out
    }

    #[test]
    fn trivial_arcs() {
        let l = square(3);
        let all = harmonic_measure_exact(&l, l.boundary()).unwrap();
        assert!(all.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let none = harmonic_measure_exact(&l, &[]).unwrap();
        assert!(none.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn side_measure_at_center_is_a_quarter() {
        let l = square(5);
        let w = harmonic_measure_exact(&l, &bottom_side(&l)).unwrap();
        assert!((w[center(&l)] - 0.25).abs() < 1e-10);
        assert!(w.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn non_arcs_are_rejected() {
        let l = square(2);
        let b = l.boundary();
        assert!(matches!(harmonic_measure_exact(&l, &[b[0], b[2]]), Err(Error::NotAnArc)));
        assert!(matches!(harmonic_measure_exact(&l, &[center(&l)]), Err(Error::NotAnArc)));
        assert!(arc_indicator(&l, &[b[b.len() - 1], b[0], b[1]]).is_ok());
        let (t, _) = tikhomirov_lattice(2.0).unwrap();
        assert!(matches!(harmonic_measure_exact(&t, &[]), Err(Error::NotOrthogonal)));
    }

    #[test]
    fn walk_on_small_square() {
        // 3x3 cells on [-1.5, 1.5]^2, four interior vertices; compared with the exact measure
        let l = build_square_lattice(&Domain::Rect { x0: -1.5, y0: -1.5, x1: 1.5, y1: 1.5 }, 1.0).unwrap();
        let arc: Vec<usize> = {
            let b = l.boundary();
            let mut s: Vec<usize> = b
                .iter()
                .copied()
                .filter(|&v| (l.point(v).y + 1.5).abs() < 1e-12 && l.point(v).x < 1.5 - 1e-12)
                .collect();
            s.sort_by(|&a, &c| l.point(a).x.total_cmp(&l.point(c).x));
            s
        };
        let starts: Vec<usize> = l.interior_vertices();
        let exact = harmonic_measure_exact(&l, &arc).unwrap();
        let cfg = WalkConfig { graph: l.color(starts[0]), ..WalkConfig::new(20_000, 42, 1000) };
        let est = random_walk_measure(&l, &arc, starts[0], &cfg).unwrap();
        assert!((est.p_hat - exact[starts[0]]).abs() <= 3.0 * est.stderr + 1e-12);
        assert_eq!(est, random_walk_measure(&l, &arc, starts[0], &cfg).unwrap());
        let full = random_walk_measure(&l, l.boundary(), starts[0], &cfg).unwrap();
        assert_eq!(full.p_hat, 1.0);
        assert_eq!(full.stderr, 0.0);
    }

    #[test]
    fn walk_from_center_of_three_by_three() {
        let l = square(1);
        let c = center(&l);
        let est = random_walk_measure(&l, &bottom_side(&l), c, &WalkConfig::new(10_000, 7, 100)).unwrap();
        assert!((est.p_hat - 0.25).abs() <= 3.0 * est.stderr);
        assert_eq!(est.n_absorbed, 10_000);
    }

    #[test]
    fn bad_walk_configs() {
        let l = square(2);
        let c = center(&l);
        assert!(random_walk_measure(&l, &[], c, &WalkConfig::new(0, 1, 100)).is_err());
        assert!(random_walk_measure(&l, &[], c, &WalkConfig::new(10, 1, 2)).is_err());
        assert!(random_walk_measure(&l, &[], l.boundary()[0], &WalkConfig::new(10, 1, 100)).is_err());
    }
}

use dca_core::analysis::{energy_conservation_residual, green_residual, max_principle_report};
use dca_core::fem::{build_kite_lattice, disk_mesh};
use dca_core::lattice::{build_perturbed_lattice, build_square_lattice, Domain};
use dca_core::measure::harmonic_measure_exact;
use dca_core::operators::{assemble, energy, energy_split, laplacian, laplacian_rotated};
use dca_core::solver::{analytic_completion, solve_dirichlet, solve_dirichlet_with, DirichletProblem, SolveOptions};
use dca_core::QuadLattice;
use proptest::prelude::*;

fn perturbed(seed: u64, amplitude: f64) -> QuadLattice {
    build_perturbed_lattice(&Domain::Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 0.8 }, 0.1, amplitude, seed).unwrap()
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

fn lattice_and_values() -> impl Strategy<Value = (QuadLattice, Vec<f64>)> {
    (0u64..1000, 0.0..0.24f64).prop_flat_map(|(s, a)| {
        let l = perturbed(s, a);
        let n = l.vertex_count();
        (Just(l), values(n))
    })
}

fn orthogonal_lattice() -> impl Strategy<Value = QuadLattice> {
    prop_oneof![
        (0.15..0.35f64).prop_map(|s| build_square_lattice(&Domain::unit_disk(), s).unwrap()),
        (0u64..1000).prop_map(|s| build_kite_lattice(&disk_mesh(0.0, 0.0, 1.0, 0.3, s).unwrap()).unwrap().lattice),
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_half_the_quadratic_form((l, u) in lattice_and_values()) {
        let e = energy(&l, &u).unwrap();
        let mu = assemble(&l).unwrap().matrix.mul_vec(&u);
        prop_assert!((e - 0.5 * dot(&u, &mu)).abs() <= 1e-10 * e);
    }

    #[test]
    fn laplacian_formulas_agree((l, u) in lattice_and_values()) {
        let a = laplacian(&l, &u).unwrap();
        let b = laplacian_rotated(&l, &u).unwrap();
        let scale = QuadLattice::scale_of(&a);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn energy_is_a_positive_form_vanishing_on_constants((l, u) in lattice_and_values(), c in -5.0..5.0f64) {
        prop_assert!(energy(&l, &u).unwrap() >= 0.0);
        prop_assert_eq!(energy(&l, &vec![c; l.vertex_count()]).unwrap(), 0.0);
        let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
        let (e0, e1) = (energy(&l, &u).unwrap(), energy(&l, &shifted).unwrap());
        prop_assert!((e0 - e1).abs() <= 1e-10 * e0.max(1e-300) + 1e-12);
    }

    #[test]
    fn orthogonal_energy_splits(l in orthogonal_lattice(), seed in 0u64..1000) {
        let u: Vec<f64> = (0..l.vertex_count()).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        let e = energy(&l, &u).unwrap();
        prop_assert!((e - energy_split(&l, &u).unwrap()).abs() <= 1e-10 * e);
    }

    #[test]
    fn green_identity_holds(l in orthogonal_lattice(), s in 0u64..1000) {
        let n = l.vertex_count();
        let u: Vec<f64> = (0..n).map(|i| ((i as f64 + s as f64) * 0.7).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| ((i as f64) * 1.3 - s as f64).cos()).collect();
        prop_assert!(green_residual(&l, &u, &v).unwrap() <= 1e-10);
    }

    #[test]
    fn solution_is_unique_and_minimizes_energy((l, w) in lattice_and_values(), guess_seed in 0u64..100) {
        let p = DirichletProblem::from_fn(&l, |q| (3.0 * q.x).sin() + q.y * q.y).unwrap();
        let a = solve_dirichlet(&p, 1e-12).unwrap();
        let guess: Vec<f64> = (0..l.vertex_count()).map(|i| ((i as u64 + guess_seed) % 7) as f64 - 3.0).collect();
        let opts = SolveOptions { initial_guess: Some(guess), dense_below: 0, ..SolveOptions::with_tol(1e-12) };
        let b = solve_dirichlet_with(&p, &opts).unwrap();
        for (x, y) in a.solution.iter().zip(&b.solution) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        // any perturbation vanishing on the boundary raises the energy
        let mut pert = a.solution.clone();
        for v in l.interior_vertices() {
            pert[v] += 0.1 * w[v];
        }
        prop_assert!(energy(&l, &pert).unwrap() >= a.energy - 1e-12 * a.energy);
    }

    #[test]
    fn harmonic_functions_obey_max_principle(l in orthogonal_lattice(), k in 1.0..4.0f64) {
        let p = DirichletProblem::from_fn(&l, |q| (k * q.x).sin() * (k * q.y).cosh()).unwrap();
        let u = solve_dirichlet(&p, 1e-13).unwrap().solution;
        prop_assert!((max_principle_report(&l, &u).ratio - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn energy_conservation_for_completions((l, _) in lattice_and_values(), k in 0.5..2.0f64) {
        let p = DirichletProblem::from_fn(&l, |q| (k * q.x).exp() * (k * q.y).cos()).unwrap();
        let u = solve_dirichlet(&p, 1e-13).unwrap().solution;
        let f = analytic_completion(&l, &u, l.boundary()[0], 0.0).unwrap();
        let e = energy(&l, &u).unwrap();
        prop_assert!(energy_conservation_residual(&l, &f).unwrap() <= 1e-10 * e);
    }

    #[test]
    fn harmonic_measure_is_additive(start in 0usize..40, split in 1usize..20, len in 2usize..20) {
        let l = build_square_lattice(&Domain::Rect { x0: -1.0, y0: -1.0, x1: 1.0, y1: 1.0 }, 0.2).unwrap();
        let b = l.boundary();
        let n = b.len();
        let arc: Vec<usize> = (0..split + len).map(|k| b[(start + k) % n]).collect();
        let (first, second) = arc.split_at(split);
        let w = harmonic_measure_exact(&l, &arc).unwrap();
        let w1 = harmonic_measure_exact(&l, first).unwrap();
        let w2 = harmonic_measure_exact(&l, second).unwrap();
        for v in 0..l.vertex_count() {
            prop_assert!((w[v] - w1[v] - w2[v]).abs() <= 1e-10);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w[v]));
        }
    }
}

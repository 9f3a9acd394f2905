use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::lattice::{build_perturbed_lattice, build_square_lattice, tikhomirov_lattice};
use crate::solver::{analytic_completion, solve_dirichlet};

fn disk(step: f64) -> QuadLattice {
    build_square_lattice(&Domain::unit_disk(), step).unwrap()
}

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn harmonic_on(l: &QuadLattice, g: impl Fn(Point) -> f64) -> Vec<f64> {
    solve_dirichlet(&DirichletProblem::from_fn(l, g).unwrap(), 1e-13).unwrap().solution
}

#[test]
fn max_principle_holds_for_harmonic_functions() {
    let l = disk(0.1);
    let u = harmonic_on(&l, |p| (3.0 * p.x).sin() * p.y.exp());
    let r = max_principle_report(&l, &u);
    assert!((r.ratio - 1.0).abs() <= 1e-12);
    let rb = max_principle_report_on(&l, &u, Some(Color::B));
    assert!((rb.ratio - 1.0).abs() <= 1e-12);
    let c = max_principle_report(&l, &vec![-3.0; l.vertex_count()]);
    assert_eq!(c.ratio, 1.0);
}

#[test]
fn max_principle_fails_on_the_counterexample() {
    let (l, f) = tikhomirov_lattice(2.0).unwrap();
    let u = harmonic_on(&l, |p| {
        let v = l.points().iter().position(|q| q.dist(p) == 0.0).unwrap();
        f[v].re
    });
    let r = max_principle_report(&l, &u);
    assert!((r.ratio - 2.0).abs() <= 1e-12, "{r:?}");
}

#[test]
fn green_identity() {
    let l = disk(0.1);
    let n = l.vertex_count();
    let (u, v) = (random(n, 1), random(n, 2));
    assert!(green_residual(&l, &u, &v).unwrap() <= 1e-10);
    assert_eq!(green_residual(&l, &u, &u).unwrap(), 0.0);
    let h = harmonic_on(&l, |p| p.x * p.y + p.x);
    assert!(green_residual(&l, &vec![1.0; n], &h).unwrap() <= 1e-12);
    let (t, _) = tikhomirov_lattice(2.0).unwrap();
    assert!(matches!(green_residual(&t, &[0.0; 9], &[0.0; 9]), Err(Error::NotOrthogonal)));
}

#[test]
fn boundary_flux_of_z_on_unit_square() {
    let l = build_square_lattice(&Domain::Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }, 1.0).unwrap();
    let f: Vec<Complex64> = l.points().iter().map(|p| p.z()).collect();
    assert!((boundary_flux(&l, &f) - 1.0).abs() < 1e-15);
    assert!(energy_conservation_residual(&l, &f).unwrap() < 1e-15);
}

#[test]
fn energy_conservation_on_patches() {
    let l = build_square_lattice(&Domain::Rect { x0: -1.0, y0: -0.5, x1: 1.5, y1: 1.0 }, 0.25).unwrap();
    for f in [|z: Complex64| z, |z: Complex64| z * z, |_: Complex64| Complex64::new(2.0, -1.0)] {
        let fv: Vec<Complex64> = l.points().iter().map(|p| f(p.z())).collect();
        let re: Vec<f64> = fv.iter().map(|z| z.re).collect();
        let e = energy(&l, &re).unwrap();
        assert!(energy_conservation_residual(&l, &fv).unwrap() <= 1e-10 * e.max(1e-300) + 1e-15);
    }
    // z on the patch: energy is the area, 2.5 * 1.5
    let fz: Vec<Complex64> = l.points().iter().map(|p| p.z()).collect();
    assert!((boundary_flux(&l, &fz) - 3.75).abs() < 1e-12);
    let bad: Vec<Complex64> = l.points().iter().map(|p| Complex64::new(p.x * p.x + p.y * p.y, 0.0)).collect();
    assert!(matches!(energy_conservation_residual(&l, &bad), Err(Error::NotAnalytic(_))));
}

#[test]
fn energy_conservation_on_perturbed_lattice() {
    let l = build_perturbed_lattice(&Domain::unit_disk(), 0.1, 0.2, 5).unwrap();
    let u = harmonic_on(&l, |p| p.x.exp() * p.y.cos());
    let f = analytic_completion(&l, &u, 0, 0.0).unwrap();
    let e = energy(&l, &u).unwrap();
    assert!(energy_conservation_residual(&l, &f).unwrap() <= 1e-10 * e);
}

#[test]
fn box_residual_exact_cases() {
    let l = build_square_lattice(&Domain::Disk { cx: 0.0, cy: 0.0, r: 2.0 }, 0.1).unwrap();
    let r = AxisSquare::new(0.0, 0.0, 1.0);
    assert!(laplacian_box_residual(&l, &ClosedForm::re_z(), &r).unwrap() <= 1e-12);
    assert!(laplacian_box_residual(&l, &ClosedForm::linear(1.0, -2.0, 0.5), &r).unwrap() <= 1e-10);
    assert_eq!(laplacian_box_residual(&l, &ClosedForm::constant(3.0), &r).unwrap(), 0.0);
    // grid-aligned box: half-weighted sides make |z|^2 exact
    assert!(laplacian_box_residual(&l, &ClosedForm::abs_z2(), &r).unwrap() <= 1e-11);
    let off = AxisSquare::new(0.03, -0.07, 1.0);
    assert!(laplacian_box_residual(&l, &ClosedForm::re_z2(), &off).unwrap() <= 1e-11);
}

#[test]
fn box_residual_for_abs_z2_on_coarse_grid() {
    // step 0.2: the 5x5 grid points in the box carry about half of them in B,
    // each with Laplacian 8 * 0.04, against 4 from the integral
    let l = build_square_lattice(&Domain::Disk { cx: 0.0, cy: 0.0, r: 2.0 }, 0.2).unwrap();
    let res = laplacian_box_residual(&l, &ClosedForm::abs_z2(), &AxisSquare::new(0.0, 0.0, 1.0)).unwrap();
    assert!((res - 0.16).abs() < 1e-12, "{res}");
}

#[test]
fn box_must_fit() {
    let l = disk(0.1);
    let g = ClosedForm::re_z();
    assert!(matches!(laplacian_box_residual(&l, &g, &AxisSquare::new(0.5, 0.5, 1.0)), Err(Error::BoxOutsideLattice)));
    assert!(laplacian_box_residual(&l, &g, &AxisSquare::new(0.0, 0.0, 0.1)).is_err());
}

#[test]
fn energy_study_of_re_z() {
    let ls: Vec<QuadLattice> = [0.2, 0.1, 0.05].iter().map(|&s| disk(s)).collect();
    let st = energy_convergence_study(&Domain::unit_disk(), &ClosedForm::re_z(), &ls).unwrap();
    assert!((st.continuum - PI).abs() < 1e-12);
    for w in st.records.windows(2) {
        assert!(w[1].max_error < w[0].max_error);
    }
    assert_eq!(st.records[2].level, 2);
    let c = energy_convergence_study(&Domain::unit_disk(), &ClosedForm::constant(1.0), &ls).unwrap();
    assert!(c.records.iter().all(|r| r.energy == 0.0 && r.max_error == 0.0));
}

#[test]
fn continuum_energy_of_re_z2_on_square() {
    let d = Domain::Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };
    assert!((continuum_energy(&d, &ClosedForm::re_z2()) - 8.0 / 3.0).abs() < 1e-12);
}

#[test]
fn dirichlet_study_exact_and_smooth() {
    let ls: Vec<QuadLattice> = [0.2, 0.1, 0.05].iter().map(|&s| disk(s)).collect();
    let d = Domain::unit_disk();
    for g in [ClosedForm::re_z(), ClosedForm::im_z(), ClosedForm::re_z2(), ClosedForm::im_z2()] {
        let recs = dirichlet_convergence_study(&d, &g, &ls, &g).unwrap();
        assert!(recs.iter().all(|r| r.max_error <= 1e-10), "{g:?}");
    }
    let g = ClosedForm::exp_cos();
    let recs = dirichlet_convergence_study(&d, &g, &ls, &g).unwrap();
    for w in recs.windows(2) {
        assert!(w[1].max_error < w[0].max_error);
    }
}

#[test]
fn friedrichs_examples() {
    let l = disk(0.05);
    let d = Domain::unit_disk();
    let n = l.vertex_count();
    // vanishes on the strip
    let inner: Vec<f64> = l.points().iter().map(|p| if p.x.hypot(p.y) < 0.5 { 1.0 } else { 0.0 }).collect();
    assert_eq!(friedrichs_ratio(&l, &d, 0.3, &inner).unwrap(), 0.0);
    // u = 1: zero energy, so the ratio is h * (#B in strip) / (r * #B on boundary)
    let r = 0.3;
    let ones = vec![1.0; n];
    let bs = l.vertices_of_color(Color::B);
    let strip = bs.iter().filter(|&&z| d.distance_to_boundary(l.point(z)) < r).count() as f64;
    let bd = bs.iter().filter(|&&z| l.is_boundary(z)).count() as f64;
    let expect = l.h() * strip / (r * bd);
    assert!((friedrichs_ratio(&l, &d, r, &ones).unwrap() - expect).abs() < 1e-14);
    assert!(matches!(friedrichs_ratio(&l, &d, 0.05, &ones), Err(Error::MarginTooSmall { .. })));
}

#[test]
fn continuity_modulus_trivial_cases() {
    let l = disk(0.2);
    let u = random(l.vertex_count(), 3);
    let m = continuity_modulus(&l, &u, &[(4, 4), (0, 1)]);
    assert_eq!(m[0], (0.0, 0.0));
    assert!(m[1].0 > 0.0);
    let c = continuity_modulus(&l, &vec![2.0; l.vertex_count()], &[(0, 1), (2, 5)]);
    assert!(c.iter().all(|x| x.1 == 0.0));
}

#[test]
fn study_csv() {
    let rec = StudyRecord { level: 0, h: 0.4, eccentricity: 4.0, max_error: 1e-3, energy: 3.0, solve_seconds: 0.01 };
    let mut buf = Vec::new();
    write_study_csv(&[rec], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "level,h,eccentricity,max_error,energy,solve_seconds");
    assert!(lines.next().unwrap().starts_with("0,4.0000000000000002e-1,"));
}

#[test]
fn identity_suite_passes() {
    let g = ClosedForm::exp_cos();
    for l in [disk(0.1), build_perturbed_lattice(&Domain::unit_disk(), 0.1, 0.2, 9).unwrap()] {
        let checks = identity_suite(&l, &g, 4).unwrap();
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert_ne!(c.passed, Some(false), "{c:?}");
        }
    }
    let (t, _) = tikhomirov_lattice(2.0).unwrap();
    let checks = identity_suite(&t, &ClosedForm::re_z(), 1).unwrap();
    assert_eq!(checks.iter().filter(|c| c.passed.is_none()).count(), 2);
}

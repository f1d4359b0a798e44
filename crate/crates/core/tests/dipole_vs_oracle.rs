mod common;

use cqwell::dipole::{
    decay_profile, diagonalize_dipole, dipole_matrix, oscillator_ladder, truncation_stability,
};
use cqwell::oracle::{grid_solve, GridSpec};
use cqwell::well::{solve_levels, WellParams};

#[test]
fn asymmetric_matrix_matches_grid_quadrature() {
    let p = WellParams::natural(4.0).unwrap();
    let b = solve_levels(p, 6, 1e-13).unwrap();
    let x = dipole_matrix(&b, 6).unwrap();
    let g = GridSpec::for_levels(&p, 6, 4001);
    let coarse = grid_solve(&p, &g, 6).unwrap();
    let fine = grid_solve(&p, &g.refined(), 6).unwrap();
    for m in 0..6 {
        for k in 0..6 {
            let r = (4.0 * fine.dipole_element(m, k) - coarse.dipole_element(m, k)) / 3.0;
            assert!(
                (x[(m, k)] - r).abs() <= 1e-6,
                "({m},{k}): {} vs {r}",
                x[(m, k)]
            );
        }
    }
    // Asymmetric well: mean positions are nonzero and shift towards the softer side.
    for k in 0..6 {
        assert!(x[(k, k)] > 0.0);
    }
}

#[test]
fn exact_symmetry() {
    let b = solve_levels(WellParams::natural(10.0).unwrap(), 8, 1e-13).unwrap();
    let x = dipole_matrix(&b, 8).unwrap();
    assert_eq!(x, x.transpose());
}

#[test]
fn symmetric_well_diagonal_vanishes() {
    let b = solve_levels(WellParams::natural(1.0).unwrap(), 6, 1e-13).unwrap();
    let x = dipole_matrix(&b, 6).unwrap();
    for k in 0..6 {
        assert!(x[(k, k)].abs() < 1e-10);
    }
}

#[test]
fn truncated_ladder_eigenvalues_match_charpoly_roots() {
    for n in 1..=4 {
        let x = oscillator_ladder(n);
        let (lambda, v) = diagonalize_dipole(&x).unwrap();
        let roots = common::charpoly_roots(&common::real_to_complex(&x), -3.0, 3.0, 6000);
        assert_eq!(roots.len(), n);
        for (l, r) in lambda.iter().zip(&roots) {
            assert!((l - r).abs() < 1e-12, "n={n}: {l} vs {r}");
        }
        let resid = (&x * &v - &v * nalgebra::DMatrix::from_diagonal(&lambda)).amax();
        assert!(resid <= 1e-10 * x.norm().max(1.0));
    }
    // n = 4: roots of H_4 are ±√((3 ∓ √6)/2).
    let (lambda, _) = diagonalize_dipole(&oscillator_ladder(4)).unwrap();
    let a = ((3.0 - 6f64.sqrt()) / 2.0).sqrt();
    let c = ((3.0 + 6f64.sqrt()) / 2.0).sqrt();
    let want = [-c, -a, a, c];
    for (l, w) in lambda.iter().zip(want) {
        assert!((l - w).abs() < 1e-14);
    }
}

#[test]
fn six_state_symmetric_spectrum_is_symmetric_about_zero() {
    let b = solve_levels(WellParams::natural(1.0).unwrap(), 6, 1e-13).unwrap();
    let (lambda, _) = diagonalize_dipole(&dipole_matrix(&b, 6).unwrap()).unwrap();
    for k in 0..3 {
        assert!((lambda[k] + lambda[5 - k]).abs() < 1e-9);
    }
}

#[test]
fn diagnostics_report() {
    let b = solve_levels(WellParams::natural(4.0).unwrap(), 12, 1e-12).unwrap();
    let x = dipole_matrix(&b, 8).unwrap();
    let profile = decay_profile(&x);
    let stability = truncation_stability(&b, 8).unwrap();
    eprintln!("off-diagonal decay profile: {profile:?}");
    eprintln!("lambda change n=8 -> 12: {stability:?}");
    assert_eq!(profile.len(), 8);
    assert_eq!(stability.len(), 5);
}

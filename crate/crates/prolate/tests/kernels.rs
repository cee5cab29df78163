use nalgebra::DMatrix;
use proptest::prelude::*;

use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::{Bispectral, ClassicalTriple};
use prolate::kernels::{
    commutation_defect_continuous, commutation_defect_discrete, commutation_defect_discrete_unchecked,
    nystrom_matrix, orthonormality_defect, spectral_check, spectral_check_pair, worst, BandKernel, OracleConfig,
};
use prolate::quadrature::Quadrature;
use prolate::solver::{darboux_commuting_order4, matrix_commuting_order2, perturbed_pair, solve_commuting, Family};
use prolate::{DifferentialOperator, Error, ShiftOperator};

fn hermite() -> ClassicalTriple {
    ClassicalTriple::hermite(1).unwrap()
}

#[test]
fn hermite_ground_state_kernel() {
    let h = hermite();
    let k = BandKernel::new(&h, 0, 0, f64::NEG_INFINITY, 0.5).unwrap();
    for (x, y) in [(0.0, 0.0), (0.3, -1.2), (2.0, 1.5)] {
        let want = (-(x * x + y * y) / 2.0f64).exp() / std::f64::consts::PI.sqrt();
        let got = k.kernel_k(x, y).unwrap()[(0, 0)];
        assert!((got - want).abs() < 1e-14, "({x},{y}): {got} vs {want}");
    }
    assert!(matches!(k.kernel_k(f64::INFINITY, 0.0), Err(Error::Domain { .. })));
}

#[test]
fn matrix_kernel_christoffel_darboux() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let h = HermiteMatrixFamily::new(a).unwrap();
    let n = 5;
    let k = BandKernel::new(&h, 0, n, f64::NEG_INFINITY, 0.5).unwrap();
    for (x, y) in [(0.4, -0.9), (1.3, 0.1)] {
        let lhs = (x - y) * k.kernel_k(x, y).unwrap();
        let p = |k: i64, z: f64| h.psi(k, z).unwrap();
        let h1 = h.h1(n).unwrap();
        let rhs = p(n + 1, x).transpose() * h1.transpose() * p(n, y) - p(n, x).transpose() * &h1 * p(n + 1, y);
        let d = (&lhs - &rhs).amax() / lhs.amax();
        assert!(d < 1e-10, "({x},{y}) defect {d}");
    }
}

#[test]
fn j_matrix_properties() {
    let h = hermite();
    let full = BandKernel::full(&h, 0, 12).unwrap();
    let q = full.quadrature(60, 12).unwrap();
    assert!(orthonormality_defect(&full, &q).unwrap() < 1e-7);
    let half = BandKernel::new(&h, 0, 4, f64::NEG_INFINITY, 0.0).unwrap();
    let q = half.quadrature(40, 10).unwrap();
    assert!((half.kernel_j(&q, 0, 0).unwrap()[(0, 0)] - 0.5).abs() < 1e-12);
    let j = half.j_matrix(&q).unwrap();
    assert!((&j - j.transpose()).amax() < 1e-15);
    assert!((half.kernel_j(&q, 1, 3).unwrap()[(0, 0)] - j[(1, 3)]).abs() < 1e-14);
    let eig = j.symmetric_eigen();
    assert!(eig.eigenvalues.min() > -1e-14);
    assert!(matches!(half.kernel_j(&q, 0, 5), Err(Error::Window { k: 5, .. })));
}

#[test]
fn family_orthonormality() {
    let h = HermiteMatrixFamily::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let k = BandKernel::full(&h, 0, 8).unwrap();
    assert!(orthonormality_defect(&k, &k.quadrature(60, 12).unwrap()).unwrap() < 1e-6);
    let s = SolitonFamily::new(3).unwrap();
    let k = BandKernel::full(&s, 1, 3).unwrap();
    assert!(orthonormality_defect(&k, &k.quadrature(120, 12).unwrap()).unwrap() < 1e-6);
}

#[test]
fn continuous_oracle_on_hermite() {
    let h = hermite();
    let fam = Family::Classical(h.clone());
    let (n, t) = (10, 0.7);
    let rep = solve_commuting(&fam, n, t).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let cfg = OracleConfig::default();
    let d = commutation_defect_continuous(&k, &rep.pair.diff, &cfg).unwrap();
    assert!(d.relative < 1e-6, "solved operator defect {d:?}");
    let id = commutation_defect_continuous(&k, &DifferentialOperator::identity(1), &cfg).unwrap();
    assert!(id.absolute < 1e-13, "identity defect {id:?}");
    // negative controls: β and the α-direction (λ, D)
    let bad = perturbed_pair(&fam, &rep, 1e-2).unwrap();
    let db = commutation_defect_continuous(&k, &bad.diff, &cfg).unwrap();
    assert!(db.relative > 1e-3, "β control {db:?}");
    let alpha = rep.pair.add(&h.lambda_pair().scale(0.05)).unwrap();
    let da = commutation_defect_continuous(&k, &alpha.diff, &cfg).unwrap();
    assert!(da.relative > 1e-3, "α control {da:?}");
}

#[test]
fn continuous_oracle_is_resolution_stable() {
    let h = hermite();
    let rep = solve_commuting(&Family::Classical(h.clone()), 6, 0.3).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let cfg = OracleConfig::default();
    let fine = OracleConfig { panels: 2 * cfg.panels, ..cfg };
    let a = commutation_defect_continuous(&k, &rep.pair.diff, &cfg).unwrap();
    let b = commutation_defect_continuous(&k, &rep.pair.diff, &fine).unwrap();
    assert!((a.relative - b.relative).abs() < 1e-5, "{a:?} vs {b:?}");
}

#[test]
fn discrete_oracle_on_hermite() {
    let h = hermite();
    let fam = Family::Classical(h.clone());
    let rep = solve_commuting(&fam, 10, 0.7).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let q = k.quadrature(60, 12).unwrap();
    let d = commutation_defect_discrete(&k, &rep.pair.shift, &q, 1e-10).unwrap();
    assert!(d.relative < 1e-8, "{d:?}");
    let id = commutation_defect_discrete(&k, &ShiftOperator::identity(1), &q, 1e-10).unwrap();
    assert_eq!(id.absolute, 0.0);
    let lam = h.lambda_operator();
    let dl = commutation_defect_discrete(&k, &lam, &q, 1e-10).unwrap();
    assert!(dl.relative > 1e-3, "λ(k) control {dl:?}");
    let bad = perturbed_pair(&fam, &rep, 1e-2).unwrap();
    match commutation_defect_discrete(&k, &bad.shift, &q, 1e-10) {
        Err(Error::Contract(msg)) => assert!(msg.contains("A_1(10)"), "{msg}"),
        other => panic!("expected a contract error, got {other:?}"),
    }
    let du = commutation_defect_discrete_unchecked(&k, &bad.shift, &q).unwrap();
    assert!(du.relative > 1e-3, "β control {du:?}");
}

#[test]
fn soliton_oracles() {
    let s = SolitonFamily::new(3).unwrap();
    let fam = Family::Soliton(s.clone());
    let rep = solve_commuting(&fam, 1, 0.4).unwrap();
    let k = BandKernel::from_window(&s, &rep.window).unwrap();
    let c = commutation_defect_continuous(&k, &rep.pair.diff, &OracleConfig::default()).unwrap();
    assert!(c.relative < 1e-6, "{c:?}");
    let q = k.quadrature(80, 12).unwrap();
    let d = commutation_defect_discrete(&k, &rep.pair.shift, &q, 1e-10).unwrap();
    assert!(d.relative < 1e-8, "{d:?}");
}

#[test]
fn spectral_cross_check() {
    let h = hermite();
    let rep = solve_commuting(&Family::Classical(h.clone()), 6, 0.5).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let q = k.quadrature(40, 10).unwrap();
    let t = nystrom_matrix(&k, &q).unwrap();
    assert!((&t - t.transpose()).amax() < 1e-14);
    let sc = spectral_check(&k, &rep.pair.diff, &q, 5).unwrap();
    assert!(sc.max_residual() < 1e-4, "{sc:?}");
    assert!(sc.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn shift_side_spectral_check_agrees_and_survives_singular_ends() {
    let h = hermite();
    let rep = solve_commuting(&Family::Classical(h.clone()), 6, 0.5).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let q = k.quadrature(40, 10).unwrap();
    let a = spectral_check(&k, &rep.pair.diff, &q, 5).unwrap();
    let b = spectral_check_pair(&k, &rep.pair, &q, 5).unwrap();
    for (x, y) in a.rayleigh.iter().zip(&b.rayleigh) {
        assert!((x - y).abs() < 1e-8 * x.abs().max(1.0), "{x} vs {y}");
    }
    // derivatives of Ψ lose all precision at the graded nodes near x = 0
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let rep = darboux_commuting_order4(&f, 6, 1.0).unwrap();
    let k = BandKernel::from_window(&f, &rep.window).unwrap();
    let q = k.quadrature(60, 12).unwrap();
    let sc = spectral_check_pair(&k, &rep.pair, &q, 4).unwrap();
    assert!(sc.max_residual() < 1e-8, "{sc:?}");
}

#[test]
fn spectral_check_on_block_family() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let h = HermiteMatrixFamily::new(a).unwrap();
    let rep = matrix_commuting_order2(&h, 6, 0.5).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let q = k.quadrature(40, 10).unwrap();
    let sc = spectral_check_pair(&k, &rep.pair, &q, 5).unwrap();
    let (r, used) = sc.resolved_max_residual(1e-8);
    assert!(used > 0 && r < 1e-4, "{sc:?}");
}

#[test]
fn clustered_eigenvalues_are_flagged_by_their_gap() {
    let j = ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap();
    let rep = solve_commuting(&Family::Classical(j.clone()), 10, 0.7).unwrap();
    let k = BandKernel::from_window(&j, &rep.window).unwrap();
    let q = k.quadrature(60, 12).unwrap();
    let sc = spectral_check_pair(&k, &rep.pair, &q, 11).unwrap();
    // the top eigenvalues agree to roundoff
    assert!(sc.gaps[0] < 1e-10);
    let (r, used) = sc.resolved_max_residual(1e-8);
    assert!(used >= 5 && r < 1e-4, "{sc:?}");
}

#[test]
fn worst_propagates_nan() {
    assert_eq!(worst([1.0, 3.0, 2.0]), 3.0);
    assert!(worst([1.0, f64::NAN, 2.0]).is_nan());
    assert_eq!(worst(std::iter::empty()), 0.0);
}

#[test]
fn graded_nodes_stay_off_nonzero_endpoints() {
    let q = Quadrature::graded(-1.0, 1.0, 60, 12, true, true).unwrap();
    assert!(q.nodes.iter().all(|&x| x > -1.0 && x < 1.0));
    let s: f64 = q.weights.iter().sum();
    assert!((s - 2.0).abs() < 1e-13);
    let j = ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap();
    let full = BandKernel::full(&j, 0, 10).unwrap();
    assert!(orthonormality_defect(&full, &full.quadrature(60, 12).unwrap()).unwrap() < 1e-6);
}

#[test]
fn mismatched_sizes_are_rejected() {
    let h = hermite();
    let k = BandKernel::new(&h, 0, 3, f64::NEG_INFINITY, 0.2).unwrap();
    let r = DifferentialOperator::identity(2);
    assert!(commutation_defect_continuous(&k, &r, &OracleConfig::default()).is_err());
    assert!(BandKernel::new(&h, 3, 2, 0.0, 1.0).is_err());
    assert!(BandKernel::new(&h, 0, 2, 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_symmetric(x in -3.0f64..3.0, y in -3.0f64..3.0, n in 0i64..8) {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, -0.2, -0.2, 1.4]);
        let h = HermiteMatrixFamily::new(a).unwrap();
        let k = BandKernel::new(&h, 0, n, f64::NEG_INFINITY, 0.0).unwrap();
        let kxy = k.kernel_k(x, y).unwrap();
        let kyx = k.kernel_k(y, x).unwrap();
        prop_assert!((kxy.transpose() - kyx).amax() < 1e-13);
    }

    #[test]
    fn nystrom_is_positive_semidefinite(t in -1.0f64..1.5, n in 0i64..6) {
        let h = ClassicalTriple::hermite(1).unwrap();
        let k = BandKernel::new(&h, 0, n, f64::NEG_INFINITY, t).unwrap();
        let q = k.quadrature(12, 8).unwrap();
        let m = nystrom_matrix(&k, &q).unwrap();
        let e = m.symmetric_eigen().eigenvalues;
        prop_assert!(e.min() > -1e-12 * e.max().max(1.0));
    }
}

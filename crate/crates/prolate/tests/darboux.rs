use nalgebra::DMatrix;
use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::{fourier_defect, Bispectral};
use prolate::operators::canonical::{diff_symmetry_defect, shift_symmetry_defect};
use prolate::quadrature::Quadrature;

fn gram(fam: &dyn Bispectral, kmax: i64, panels: usize) -> DMatrix<f64> {
    let n = fam.size();
    let (lo, hi) = fam.support();
    let dom = fam.quad_domain(lo, hi, kmax);
    let q = Quadrature::for_domain(&dom, panels, 14).unwrap();
    let m = (kmax as usize + 1) * n;
    let mut g = DMatrix::zeros(m, m);
    for (x, w) in q.nodes.iter().zip(&q.weights) {
        let t = fam.psi_range(0, kmax, *x, 0).unwrap();
        for i in 0..=kmax as usize {
            for j in 0..=kmax as usize {
                let blk = *w * &t[i][0] * t[j][0].transpose();
                let mut v = g.view_mut((i * n, j * n), (n, n));
                v += blk;
            }
        }
    }
    g
}

fn a_sym(r: usize) -> DMatrix<f64> {
    match r {
        1 => DMatrix::from_element(1, 1, 0.7),
        _ => DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -0.6]),
    }
}

#[test]
fn laguerre_factorizations() {
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let xs = f.base().sample_points(15);
    let ks: Vec<i64> = (0..=25).collect();
    let dd = f.factorization_defect_diff(&xs).unwrap();
    let ds = f.factorization_defect_shift(&ks).unwrap();
    assert!(dd < 1e-10, "Q q⁻² Q* defect {dd}");
    assert!(ds < 1e-10, "P* p⁻² P defect {ds}");
}

#[test]
fn laguerre_rejects_bad_parameters() {
    assert!(LaguerreDarboux::new(0.5, 0.5).is_err());
    assert!(LaguerreDarboux::new(0.5, -0.25).is_err());
    assert!(LaguerreDarboux::new(2.0, -1.0).is_err());
}

#[test]
fn laguerre_identities_and_basis_pairs() {
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let ks: Vec<i64> = (0..=12).collect();
    let xs = f.base().sample_points(8);
    for (name, d) in f.transform().identity_report(&ks, &xs).unwrap() {
        assert!(d < 1e-8, "{name}: {d}");
    }
    for (name, pair) in f.basis_pairs().unwrap() {
        let d = fourier_defect(&f, &pair, &ks, &xs).unwrap();
        assert!(d < 1e-8, "{name} Fourier defect {d}");
        let ss = shift_symmetry_defect(&pair.shift, &ks).unwrap();
        let ds = diff_symmetry_defect(&pair.diff, &xs).unwrap();
        assert!(ss < 1e-10 && ds < 1e-10, "{name} not symmetric: {ss} {ds}");
    }
}

#[test]
fn laguerre_darboux_is_orthonormal() {
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let g = gram(&f, 8, 80);
    let d = (g - DMatrix::identity(9, 9)).amax();
    assert!(d < 1e-8, "Gram defect {d}");
}

#[test]
fn hermite_matrix_factorizations() {
    for r in [1, 2] {
        let h = HermiteMatrixFamily::new(a_sym(r)).unwrap();
        let xs = h.base().sample_points(10);
        let ks: Vec<i64> = (0..=20).collect();
        let u = h.uu_star_defect(&xs).unwrap();
        let e = h.isometry_defect(&ks).unwrap();
        assert!(u < 1e-12, "r={r} UU* defect {u}");
        assert!(e < 1e-12, "r={r} E*E defect {e}");
    }
}

#[test]
fn hermite_matrix_identities_and_recurrence() {
    for r in [1, 2] {
        let h = HermiteMatrixFamily::new(a_sym(r)).unwrap();
        let ks: Vec<i64> = (0..=12).collect();
        let xs = h.base().sample_points(8);
        for (name, d) in h.transform().identity_report(&ks, &xs).unwrap() {
            assert!(d < 1e-9, "r={r} {name}: {d}");
        }
        let xp = prolate::families::FourierPair::new(
            h.recurrence_operator(),
            prolate::DifferentialOperator::scalar_multiplication(2 * r, prolate::ScalarExpr::x()),
        );
        let d = fourier_defect(&h, &xp, &ks, &xs).unwrap();
        assert!(d < 1e-10, "r={r} H recurrence defect {d}");
    }
}

#[test]
fn hermite_matrix_orthonormal_and_christoffel_darboux() {
    for r in [1, 2] {
        let h = HermiteMatrixFamily::new(a_sym(r)).unwrap();
        let n = 2 * r;
        let g = gram(&h, 6, 60);
        let d = (g - DMatrix::identity(7 * n, 7 * n)).amax();
        assert!(d < 1e-10, "r={r} Gram defect {d}");
        for (x, y) in [(0.3, -1.1), (1.7, 0.2), (-2.0, 2.5)] {
            let cd = h.christoffel_darboux_defect(5, x, y).unwrap();
            assert!(cd < 1e-10, "r={r} CD defect {cd} at ({x},{y})");
        }
    }
}

#[test]
fn hermite_matrix_singular_a() {
    let h = HermiteMatrixFamily::new(DMatrix::zeros(1, 1)).unwrap();
    let ks: Vec<i64> = (0..=10).collect();
    assert!(h.isometry_defect(&ks).unwrap() < 1e-12);
    let g = gram(&h, 5, 60);
    assert!((g - DMatrix::identity(12, 12)).amax() < 1e-10);
    assert!(HermiteMatrixFamily::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).is_err());
    assert!(HermiteMatrixFamily::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
}

#[test]
fn hermite_matrix_zero_a_decouples() {
    // with A = 0 the off-diagonal blocks are Hermite functions shifted by one index
    let h = HermiteMatrixFamily::new(DMatrix::zeros(1, 1)).unwrap();
    let base = prolate::families::ClassicalTriple::hermite(1).unwrap();
    for x in [-1.2, 0.4, 2.2] {
        for k in 1..8 {
            let p = h.psi(k, x).unwrap();
            let hk1 = base.psi(k + 1, x).unwrap()[(0, 0)];
            let hkm = base.psi(k - 1, x).unwrap()[(0, 0)];
            assert!(p[(0, 0)].abs() < 1e-12 && p[(1, 1)].abs() < 1e-12);
            assert!((p[(0, 1)] + hk1).abs() < 1e-10, "k={k}");
            assert!((p[(1, 0)] - hkm).abs() < 1e-10, "k={k}");
        }
    }
}

#[test]
fn hermite_matrix_commuting_pair_matches_expanded_form() {
    for r in [1, 2] {
        let h = HermiteMatrixFamily::new(a_sym(r)).unwrap();
        let (n, t) = (4, 0.8);
        let pair = h.commuting_pair(n, t).unwrap();
        let xs = h.base().sample_points(9);
        let ex = h.commuting_operator_expanded(n, t).unwrap();
        let d = pair.diff.relative_difference(&ex, &xs).unwrap();
        assert!(d < 1e-12, "r={r} expanded form defect {d}");
        let ks: Vec<i64> = (0..=10).collect();
        let fd = fourier_defect(&h, &pair, &ks, &xs).unwrap();
        assert!(fd < 1e-9, "r={r} Fourier defect {fd}");
    }
}

#[test]
fn soliton_equations() {
    for nsol in 1..=4 {
        let s = SolitonFamily::new(nsol).unwrap();
        let ks: Vec<i64> = (0..=nsol as i64 + 2).collect();
        let xs = s.sample_points(12);
        let sd = s.schrodinger_defect(&ks, &xs).unwrap();
        assert!(sd < 1e-11, "N={nsol} Schrödinger defect {sd}");
        let inner: Vec<i64> = (1..=nsol as i64 + 2).collect();
        let dd = s.difference_defect(&inner, &xs).unwrap();
        assert!(dd < 1e-11, "N={nsol} difference defect {dd}");
    }
}

#[test]
fn soliton_bound_states_are_orthonormal() {
    for nsol in 1..=4 {
        let s = SolitonFamily::new(nsol).unwrap();
        let kmax = nsol as i64;
        let g = gram(&s, kmax, 120);
        let m = kmax as usize + 1;
        for i in 1..m {
            for j in 1..m {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-10, "N={nsol} G[{i},{j}] = {}", g[(i, j)]);
            }
        }
        assert!(s.psi(kmax + 1, 0.3).unwrap()[(0, 0)] == 0.0);
        assert!(s.psi(-1, 0.3).unwrap()[(0, 0)] == 0.0);
    }
}

use nalgebra::DMatrix;
use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::{fourier_defect, Bispectral, ClassicalTriple};
use prolate::solver::{
    build_symmetric_basis, classical_closed_form, darboux_commuting_order4, family_window_rank,
    matrix_commuting_order2, matrix_family_rank_bound, monomial_bisymmetric_rank,
    monomial_rank_formula, proportionality_defect, soliton_parameters, solve_commuting, Family,
};
use prolate::{DifferentialOperator, ScalarExpr};

fn classical() -> Vec<ClassicalTriple> {
    vec![
        ClassicalTriple::hermite(1).unwrap(),
        ClassicalTriple::laguerre(0.5, 1).unwrap(),
        ClassicalTriple::laguerre(2.0, 1).unwrap(),
        ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap(),
        ClassicalTriple::jacobi(1.0, 2.0, 1).unwrap(),
    ]
}

#[test]
fn hermite_basis_anticommutator_coefficient() {
    let h = ClassicalTriple::hermite(1).unwrap();
    let b = build_symmetric_basis(&Family::Classical(h), 2, 2).unwrap();
    let anti = &b.elements[3].pair.shift;
    for k in 0..8 {
        let kf = k as f64;
        let want = ((kf + 1.0) / 2.0).sqrt() * (-2.0 * kf - 2.0 * (kf + 1.0));
        let got = anti.coeff(1, k).unwrap()[(0, 0)];
        assert!((got - want).abs() < 1e-12, "k={k}: {got} vs {want}");
    }
}

#[test]
fn classical_solver_matches_closed_form() {
    for f in classical() {
        for (n, t) in [(5, 0.3), (10, 0.7)] {
            let fam = Family::Classical(f.clone());
            let rep = solve_commuting(&fam, n, t).unwrap();
            let closed = classical_closed_form(&f, n, t).unwrap();
            let xs = f.sample_points(50);
            let d = proportionality_defect(&rep.pair.diff, &closed, &xs, false).unwrap();
            assert!(d < 1e-8, "{} n={n} t={t}: defect {d}", f.name());
            assert_eq!(rep.order, 2);
            assert!(rep.max_residual() < 1e-9, "residual {}", rep.max_residual());
        }
    }
}

#[test]
fn classical_table_rows() {
    let (n, t) = (10, 0.7);
    let nf = n as f64;
    // Hermite: ∂2(x−t)∂ + 2(x−t)(1−x²) + 2(2n+1)x
    let h = ClassicalTriple::hermite(1).unwrap();
    let row = DifferentialOperator::scalar(
        1,
        vec![
            ScalarExpr::poly(&[-t, 1.0]) * ScalarExpr::poly(&[1.0, 0.0, -1.0]) * 2.0
                + ScalarExpr::poly(&[0.0, 2.0 * (2.0 * nf + 1.0)]),
            ScalarExpr::constant(2.0),
            ScalarExpr::poly(&[-2.0 * t, 2.0]),
        ],
    );
    let d = row
        .relative_difference(&classical_closed_form(&h, n, t).unwrap(), &h.sample_points(20))
        .unwrap();
    assert!(d < 1e-13, "Hermite row {d}");
    // Laguerre: ∂2x(x−t)∂ + 1 + (x−t)(1−(a−x)²/(2x)) + (2n+1)x
    let a = 0.5;
    let l = ClassicalTriple::laguerre(a, 1).unwrap();
    let x = ScalarExpr::x();
    let c0 = ScalarExpr::constant(1.0)
        + ScalarExpr::poly(&[-t, 1.0])
            * (ScalarExpr::constant(1.0) - ScalarExpr::poly(&[a, -1.0]).powi(2) / (x.clone() * 2.0))
        + ScalarExpr::poly(&[0.0, 2.0 * nf + 1.0]);
    let c2 = ScalarExpr::poly(&[0.0, -2.0 * t, 2.0]);
    let row = DifferentialOperator::scalar(1, vec![c0, c2.differentiate(), c2]);
    let d = row
        .relative_difference(&classical_closed_form(&l, n, t).unwrap(), &l.sample_points(20))
        .unwrap();
    assert!(d < 1e-13, "Laguerre row {d}");
    // Jacobi: ∂2(1−x²)(x−t)∂ − 2x + 2(x−t)(a²/(2(x−1)) − b²/(2(x+1)) + (a+b)(a+b+2)/4)
    //         + (2(n+1)² + (a+b)(2n+1))x
    let (a, b) = (1.0, 2.0);
    let j = ClassicalTriple::jacobi(a, b, 1).unwrap();
    let c2 = ScalarExpr::poly(&[1.0, 0.0, -1.0]) * ScalarExpr::poly(&[-t, 1.0]) * 2.0;
    let c0 = ScalarExpr::poly(&[0.0, -2.0])
        + ScalarExpr::poly(&[-t, 1.0])
            * (ScalarExpr::constant(a * a / 2.0) / ScalarExpr::poly(&[-1.0, 1.0])
                - ScalarExpr::constant(b * b / 2.0) / ScalarExpr::poly(&[1.0, 1.0])
                + ScalarExpr::constant((a + b) * (a + b + 2.0) / 4.0))
            * 2.0
        + ScalarExpr::poly(&[0.0, 2.0 * (nf + 1.0).powi(2) + (a + b) * (2.0 * nf + 1.0)]);
    let row = DifferentialOperator::scalar(1, vec![c0, c2.differentiate(), c2]);
    let d = row
        .relative_difference(&classical_closed_form(&j, n, t).unwrap(), &j.sample_points(20))
        .unwrap();
    assert!(d < 1e-12, "Jacobi row {d}");
}

#[test]
fn soliton_solver_reproduces_beta_gamma() {
    for nsol in [2, 3, 4] {
        let s = SolitonFamily::new(nsol).unwrap();
        for (p, t) in [(1, 0.4), (2, -0.3)] {
            if p > nsol as i64 {
                continue;
            }
            let rep = solve_commuting(&Family::Soliton(s.clone()), p, t).unwrap();
            let (beta, gamma) = soliton_parameters(&rep).unwrap();
            let (eb, eg) = s.closed_form(p, t);
            assert!((beta - eb).abs() < 1e-8 * eb.abs().max(1.0), "N={nsol} p={p}: β {beta} vs {eb}");
            assert!((gamma - eg).abs() < 1e-8 * eg.abs().max(1.0), "N={nsol} p={p}: γ {gamma} vs {eg}");
        }
    }
}

#[test]
fn soliton_anticommutator_image() {
    let nsol = 3;
    let s = SolitonFamily::new(nsol).unwrap();
    let b = build_symmetric_basis(&Family::Soliton(s.clone()), 2, 2).unwrap();
    let anti = &b.elements[3].pair;
    let nn = (nsol * (nsol + 1)) as f64;
    let sh = ScalarExpr::x().sinh();
    let c2 = sh.clone() * 4.0;
    let c0 = sh.clone() * 2.0 + sh * ScalarExpr::x().sech().powi(2) * (4.0 * nn);
    let want = DifferentialOperator::scalar(1, vec![c0, c2.differentiate(), c2]);
    let xs = s.sample_points(15);
    assert!(anti.diff.relative_difference(&want, &xs).unwrap() < 1e-12);
    let ks: Vec<i64> = (1..=nsol as i64).collect();
    assert!(fourier_defect(&s, anti, &ks, &xs).unwrap() < 1e-8);
}

#[test]
fn laguerre_darboux_solver_is_the_closed_form_one_index_up() {
    // the closed-form c-vector at n vanishes the concomitants on {0..n−1}; the solver
    // works on {0..n}, so its answer is the closed-form vector at n + 1
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let rep = darboux_commuting_order4(&f, 6, 1.0).unwrap();
    assert_eq!(rep.order, 4);
    assert_eq!(rep.null_dim - rep.constant_dim, 1);
    let shifted = rep.verification[1].1;
    assert!(shifted > 1.0 - 1e-10, "cosine with c(n+1) {shifted}");
    let c = f.closed_form_coefficients(6, 1.0);
    assert_eq!(c[6], 0.0);
    assert_eq!(&c[..3], &[1.0, -2.0, 1.0]);
    let rep5 = darboux_commuting_order4(&f, 5, 1.0).unwrap();
    assert!(rep5.verification[1].1 > 1.0 - 1e-10);
}

#[test]
fn laguerre_darboux_basis_independent() {
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let r = family_window_rank(&Family::LaguerreDarboux(f), 4, 4).unwrap();
    assert_eq!(r, 8);
}

#[test]
fn matrix_family_closed_form_lies_in_the_solution_space() {
    for a in [
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
    ] {
        let h = HermiteMatrixFamily::new(a).unwrap();
        let r = h.r();
        let rep = matrix_commuting_order2(&h, 6, 0.5).unwrap();
        let d = rep.verification[0].1;
        assert!(d < 1e-10, "r={r} closed-form residual {d}");
        assert_eq!(rep.order, 2, "r={r}");
        // A splits the family into r decoupled blocks, each with its own constant
        assert_eq!(rep.constant_dim, r, "r={r}");
        assert!(rep.max_residual() < 1e-9);
    }
}

#[test]
fn window_ranks() {
    for f in classical() {
        let r = family_window_rank(&Family::Classical(f.clone()), 2, 2).unwrap();
        assert_eq!(r, 4, "{}", f.name());
    }
    let h2 = ClassicalTriple::hermite(2).unwrap();
    assert_eq!(family_window_rank(&Family::Classical(h2), 2, 2).unwrap(), 13);
    for (l, m) in [(0, 1), (1, 1), (2, 1), (1, 2)] {
        assert_eq!(monomial_bisymmetric_rank(1, l, m), (l + 1) * (m + 1));
        assert_eq!(monomial_bisymmetric_rank(2, l, m), monomial_rank_formula(2, l, m));
    }
    let h = HermiteMatrixFamily::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let r = family_window_rank(&Family::HermiteMatrix(h), 4, 4).unwrap();
    assert!(r >= matrix_family_rank_bound(2), "rank {r}");
}

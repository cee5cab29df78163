use nalgebra::DMatrix;
use prolate::families::{fourier_defect, Bispectral, ClassicalTriple};
use prolate::quadrature::Quadrature;

fn triples() -> Vec<ClassicalTriple> {
    vec![
        ClassicalTriple::hermite(1).unwrap(),
        ClassicalTriple::hermite(2).unwrap(),
        ClassicalTriple::laguerre(0.5, 1).unwrap(),
        ClassicalTriple::laguerre(2.0, 1).unwrap(),
        ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap(),
        ClassicalTriple::jacobi(1.0, 2.0, 2).unwrap(),
        ClassicalTriple::jacobi(0.0, 0.0, 1).unwrap(),
    ]
}

fn gram(fam: &ClassicalTriple, kmax: i64) -> DMatrix<f64> {
    let (lo, hi) = fam.support();
    let dom = fam.quad_domain(lo, hi, kmax);
    let q = Quadrature::for_domain(&dom, 60, 12).unwrap();
    let mut g = DMatrix::zeros(kmax as usize + 1, kmax as usize + 1);
    for (x, w) in q.nodes.iter().zip(&q.weights) {
        let t = fam.psi_range(0, kmax, *x, 0).unwrap();
        for i in 0..=kmax as usize {
            for j in 0..=kmax as usize {
                g[(i, j)] += w * t[i][0][(0, 0)] * t[j][0][(0, 0)];
            }
        }
    }
    g
}

#[test]
fn recurrence_residual_up_to_k30() {
    for fam in triples() {
        let ks: Vec<i64> = (0..=30).collect();
        let xs = fam.sample_points(20);
        let d = fourier_defect(&fam, &fam.x_pair(), &ks, &xs).unwrap();
        assert!(d < 1e-9, "{} recurrence defect {d}", fam.name());
    }
}

#[test]
fn eigenvalue_relation_and_derivative_pairs() {
    for fam in triples() {
        let ks: Vec<i64> = (0..=20).collect();
        let xs = fam.sample_points(20);
        for (i, p) in fam.derivative_pairs().iter().enumerate() {
            let d = fourier_defect(&fam, p, &ks, &xs).unwrap();
            assert!(d < 1e-9, "{} pair {i} defect {d}", fam.name());
        }
    }
}

#[test]
fn hermite_eigen_equation_explicit() {
    let h = ClassicalTriple::hermite(1).unwrap();
    let d = h.diff_operator();
    for k in 0..=15 {
        for x in [-2.0, 0.3, 1.7] {
            let jets = h.psi_derivatives(k, x, 2).unwrap();
            let lhs = d.apply_at(&jets, x).unwrap();
            let rhs = &jets[0] * (-2.0 * k as f64);
            assert!((lhs - &rhs).amax() < 1e-10 * (1.0 + rhs.amax()));
        }
    }
}

#[test]
fn laguerre_eigenvalue_at_sample() {
    let l = ClassicalTriple::laguerre(0.5, 1).unwrap();
    let jets = l.psi_derivatives(3, 1.25, 2).unwrap();
    let lhs = l.diff_operator().apply_at(&jets, 1.25).unwrap();
    assert!((lhs[(0, 0)] + 3.0 * jets[0][(0, 0)]).abs() < 1e-10);
}

#[test]
fn hermite_ground_state() {
    let h = ClassicalTriple::hermite(2).unwrap();
    let v = h.psi(0, 0.4).unwrap();
    let want = std::f64::consts::PI.powf(-0.25) * (-0.08f64).exp();
    assert!((v[(0, 0)] - want).abs() < 1e-15);
    assert_eq!(v[(0, 1)], 0.0);
    assert!(h.psi(-1, 0.4).unwrap().amax() == 0.0);
}

#[test]
fn orthonormality_gram() {
    for fam in triples() {
        let g = gram(&fam, 12);
        let d = (g - DMatrix::identity(13, 13)).amax();
        assert!(d < 1e-7, "{} gram defect {d}", fam.name());
    }
}

#[test]
fn poly_degree_is_exact() {
    for fam in triples() {
        for k in 0..10 {
            let c = fam.poly_coeffs(k);
            assert_eq!(c.len(), k as usize + 1);
            assert!(c[k as usize].abs() > 1e-12);
        }
    }
}

#[test]
fn monomial_pairs() {
    let m = ClassicalTriple::monomial(2).unwrap();
    let ks: Vec<i64> = (0..8).collect();
    let xs = [0.3, 0.9, 1.4];
    for p in m.derivative_pairs() {
        assert!(fourier_defect(&m, &p, &ks, &xs).unwrap() < 1e-12);
    }
}

#[test]
fn parameter_validation() {
    assert!(ClassicalTriple::laguerre(-2.0, 1).is_err());
    assert!(ClassicalTriple::jacobi(0.0, -1.5, 1).is_err());
    assert!(ClassicalTriple::hermite(0).is_err());
}

#[test]
fn domain_errors() {
    let j = ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap();
    assert!(j.psi(2, 1.5).is_err());
}

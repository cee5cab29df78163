//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line. Run with
//! `cargo test -p prolate --test acceptance -- --nocapture --test-threads=1`.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prolate::concomitant::{continuous_adjointability_defect, discrete_adjointability_defect};
use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::{Bispectral, ClassicalTriple};
use prolate::kernels::{
    commutation_defect_continuous, commutation_defect_discrete, commutation_defect_discrete_unchecked,
    orthonormality_defect, spectral_check, BandKernel, Defect, OracleConfig,
};
use prolate::quadrature::Quadrature;
use prolate::solver::{
    classical_closed_form, darboux_commuting_order4, family_window_rank, matrix_commuting_order2,
    matrix_family_rank_bound, monomial_bisymmetric_rank, monomial_rank_formula, perturbed_pair,
    proportionality_defect, soliton_parameters, solve_commuting, CommutingReport, Family,
};
use prolate::testfn::BumpPoly;
use prolate::{DifferentialOperator, ExprMatrix, ScalarExpr, Seq, ShiftOperator};

// pinned tolerances
const CLOSED_FORM_TOL: f64 = 1e-8;
const CONTINUOUS_TOL: f64 = 1e-6;
const DISCRETE_TOL: f64 = 1e-8;
const CONTROL_FLOOR: f64 = 1e-3;
const CONTROL_PERTURBATION: f64 = 1e-2;
const LEAK_TOL: f64 = 1e-9;
const FACTORIZATION_TOL: f64 = 1e-8;
const COEFFICIENT_TOL: f64 = 1e-6;
const UU_TOL: f64 = 1e-9;
const ISOMETRY_TOL: f64 = 1e-8;
const ORTHONORMALITY_TOL: f64 = 1e-6;
const CD_TOL: f64 = 1e-8;
const SOLITON_EQUATION_TOL: f64 = 1e-8;
const SOLITON_PARAMETER_TOL: f64 = 1e-8;
const DISCRETE_ADJOINT_TOL: f64 = 1e-12;
const CONTINUOUS_ADJOINT_TOL: f64 = 1e-8;
const SPECTRAL_TOL: f64 = 1e-4;
const CLASSICAL_CASE_BUDGET: Duration = Duration::from_secs(10);
const DARBOUX_BUDGET: Duration = Duration::from_secs(60);
const DISCRETE_QUAD: (usize, usize) = (60, 12);

fn report(criterion: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn classical_families() -> Vec<ClassicalTriple> {
    vec![
        ClassicalTriple::hermite(1).unwrap(),
        ClassicalTriple::laguerre(0.5, 1).unwrap(),
        ClassicalTriple::laguerre(2.0, 1).unwrap(),
        ClassicalTriple::jacobi(0.5, 0.5, 1).unwrap(),
        ClassicalTriple::jacobi(1.0, 2.0, 1).unwrap(),
    ]
}

const CLASSICAL_CASES: [(i64, f64); 2] = [(5, 0.3), (10, 0.7)];

fn classical_reports() -> Vec<(ClassicalTriple, CommutingReport, Duration)> {
    let mut out = Vec::new();
    for f in classical_families() {
        for (n, t) in CLASSICAL_CASES {
            let start = Instant::now();
            let rep = solve_commuting(&Family::Classical(f.clone()), n, t).unwrap();
            out.push((f.clone(), rep, start.elapsed()));
        }
    }
    out
}

fn continuous(fam: &dyn Bispectral, rep: &CommutingReport, diff: &DifferentialOperator) -> Defect {
    let k = BandKernel::from_window(fam, &rep.window).unwrap();
    commutation_defect_continuous(&k, diff, &OracleConfig::default()).unwrap()
}

/// Checked discrete defect; a boundary-coefficient contract error counts as infinite.
fn discrete(fam: &dyn Bispectral, rep: &CommutingReport, shift: &ShiftOperator) -> (f64, f64) {
    let k = BandKernel::from_window(fam, &rep.window).unwrap();
    let q = k.quadrature(DISCRETE_QUAD.0, DISCRETE_QUAD.1).unwrap();
    let checked = commutation_defect_discrete(&k, shift, &q, LEAK_TOL).map_or(f64::INFINITY, |d| d.relative);
    let unchecked = commutation_defect_discrete_unchecked(&k, shift, &q).unwrap().relative;
    (checked, unchecked)
}

#[test]
fn criterion_1_classical_closed_forms() {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut failures = Vec::new();
    for (f, rep, took) in classical_reports() {
        let closed = classical_closed_form(&f, rep.n, rep.t).unwrap();
        let d = proportionality_defect(&rep.pair.diff, &closed, &f.sample_points(50), false).unwrap();
        worst = worst.max(d);
        slowest = slowest.max(took);
        if d >= CLOSED_FORM_TOL || took >= CLASSICAL_CASE_BUDGET {
            failures.push(format!("{} n={} t={}: {d:.2e}", f.name(), rep.n, rep.t));
        }
    }
    report(
        1,
        failures.is_empty(),
        &format!(
            "10 cases, max relative defect {worst:.2e} (tol {CLOSED_FORM_TOL:.0e}), slowest {:.2}s {failures:?}",
            slowest.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_continuous_oracle() {
    let mut worst = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    for (f, rep, _) in classical_reports() {
        let fam = Family::Classical(f.clone());
        worst = worst.max(continuous(&f, &rep, &rep.pair.diff).relative);
        let bad = perturbed_pair(&fam, &rep, CONTROL_PERTURBATION).unwrap();
        weakest_control = weakest_control.min(continuous(&f, &rep, &bad.diff).relative);
    }
    report(
        2,
        worst < CONTINUOUS_TOL && weakest_control > CONTROL_FLOOR,
        &format!(
            "max defect {worst:.2e} (tol {CONTINUOUS_TOL:.0e}); β·(1+1e-2) control min {weakest_control:.2e} (> {CONTROL_FLOOR:.0e})"
        ),
    );
}

#[test]
fn criterion_3_discrete_oracle() {
    let mut worst = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    for (f, rep, _) in classical_reports() {
        let fam = Family::Classical(f.clone());
        worst = worst.max(discrete(&f, &rep, &rep.pair.shift).0);
        let bad = perturbed_pair(&fam, &rep, CONTROL_PERTURBATION).unwrap();
        let (checked, unchecked) = discrete(&f, &rep, &bad.shift);
        assert!(checked.is_infinite(), "perturbed operator passed the boundary check");
        weakest_control = weakest_control.min(unchecked);
    }
    report(
        3,
        worst < DISCRETE_TOL && weakest_control > CONTROL_FLOOR,
        &format!(
            "max defect {worst:.2e} (tol {DISCRETE_TOL:.0e}); β·(1+1e-2) control rejected at the boundary, truncated commutator min {weakest_control:.2e}"
        ),
    );
}

#[test]
fn criterion_4_laguerre_darboux() {
    let start = Instant::now();
    let f = LaguerreDarboux::new(0.5, -2.0).unwrap();
    let (n, t) = (6, 1.0);
    let xs = f.base().sample_points(20);
    let ks: Vec<i64> = (0..=30).collect();
    let fd = f.factorization_defect_diff(&xs).unwrap();
    let fs = f.factorization_defect_shift(&ks).unwrap();
    let rep = darboux_commuting_order4(&f, n, t).unwrap();
    let cos_n = rep.verification[0].1;
    let cos_n1 = rep.verification[1].1;
    let cont = continuous(&f, &rep, &rep.pair.diff).relative;
    let disc = discrete(&f, &rep, &rep.pair.shift).0;
    let closed = f.closed_form_pair(n, t).unwrap();
    let closed_cont = continuous(&f, &rep, &closed.diff).relative;
    let took = start.elapsed();
    let pass = fd < FACTORIZATION_TOL
        && fs < FACTORIZATION_TOL
        && 1.0 - cos_n < COEFFICIENT_TOL
        && rep.order == 4
        && cont < CONTINUOUS_TOL
        && disc < DISCRETE_TOL
        && took < DARBOUX_BUDGET;
    report(
        4,
        pass,
        &format!(
            "factorizations {fd:.1e}/{fs:.1e}; order {}; 1−cos vs closed-form c(n) {:.2e} (tol {COEFFICIENT_TOL:.0e}), vs c(n+1) {:.2e}; \
             solved defects {cont:.1e}/{disc:.1e}; closed-form c(n) continuous defect {closed_cont:.1e}; {:.1}s",
            rep.order,
            1.0 - cos_n,
            1.0 - cos_n1,
            took.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_matrix_family() {
    let mut lines = Vec::new();
    let mut pass = true;
    for a in [
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
    ] {
        let h = HermiteMatrixFamily::new(a).unwrap();
        let (n, t) = (6, 0.5);
        let xs = h.base().sample_points(15);
        let ks: Vec<i64> = (0..=20).collect();
        let uu = h.uu_star_defect(&xs).unwrap();
        let iso = h.isometry_defect(&ks).unwrap();
        let full = BandKernel::full(&h, 0, 8).unwrap();
        let orth = orthonormality_defect(&full, &full.quadrature(60, 12).unwrap()).unwrap();
        let cd = [(0.3, -1.1), (1.7, 0.2), (-2.0, 2.5)]
            .iter()
            .map(|&(x, y)| h.christoffel_darboux_defect(n, x, y).unwrap())
            .fold(0.0, f64::max);
        let rep = matrix_commuting_order2(&h, n, t).unwrap();
        let closed = h.commuting_pair(n, t).unwrap();
        let cont = continuous(&h, &rep, &closed.diff).relative;
        let disc = discrete(&h, &rep, &closed.shift).0;
        let ok = uu < UU_TOL
            && iso < ISOMETRY_TOL
            && orth < ORTHONORMALITY_TOL
            && cd < CD_TOL
            && cont < CONTINUOUS_TOL
            && disc < CONTINUOUS_TOL;
        pass &= ok;
        lines.push(format!(
            "r={}: UU* {uu:.1e}, E*E {iso:.1e}, Gram {orth:.1e}, CD {cd:.1e}, closed form {cont:.1e}/{disc:.1e}",
            h.r()
        ));
    }
    report(5, pass, &lines.join("; "));
}

#[test]
fn criterion_6_soliton() {
    let s = SolitonFamily::new(3).unwrap();
    let (p, t) = (1, 0.4);
    let xs = s.sample_points(20);
    let ks: Vec<i64> = (0..=5).collect();
    let sd = s.schrodinger_defect(&ks, &xs).unwrap();
    let dd = s.difference_defect(&(1..=5).collect::<Vec<_>>(), &xs).unwrap();
    let full = BandKernel::full(&s, 1, 3).unwrap();
    let norms = orthonormality_defect(&full, &full.quadrature(120, 12).unwrap()).unwrap();
    let rep = solve_commuting(&Family::Soliton(s.clone()), p, t).unwrap();
    let (beta, gamma) = soliton_parameters(&rep).unwrap();
    let (eb, eg) = s.closed_form(p, t);
    let pe = ((beta - eb).abs() / eb.abs().max(1.0)).max((gamma - eg).abs() / eg.abs().max(1.0));
    let cont = continuous(&s, &rep, &rep.pair.diff).relative;
    let disc = discrete(&s, &rep, &rep.pair.shift).0;
    let pass = sd < SOLITON_EQUATION_TOL
        && dd < SOLITON_EQUATION_TOL
        && norms < ORTHONORMALITY_TOL
        && pe < SOLITON_PARAMETER_TOL
        && cont < CONTINUOUS_TOL
        && disc < CONTINUOUS_TOL;
    report(
        6,
        pass,
        &format!(
            "equations {sd:.1e}/{dd:.1e}, norms {norms:.1e}, (β,γ) = ({beta:.10}, {gamma:.10}) vs ({eb}, {eg:.10}) rel {pe:.1e}, commutation {cont:.1e}/{disc:.1e}"
        ),
    );
}

fn random_shift(rng: &mut ChaCha8Rng, n: usize, radius: i64) -> ShiftOperator {
    let diags = (-radius..=radius)
        .map(|j| {
            let c: Vec<DMatrix<f64>> =
                (0..3).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
            (j, Seq::from_fn(n, move |k| Ok(&c[0] + &c[1] * (k as f64 * 0.1) + &c[2] * (k as f64 * 0.3).sin())))
        })
        .collect();
    ShiftOperator::from_diags(n, diags)
}

fn random_seq(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> impl Fn(i64) -> prolate::Result<DMatrix<f64>> {
    let vals: Vec<DMatrix<f64>> = (lo..=hi).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
    move |k| {
        if k < lo || k > hi {
            Ok(DMatrix::zeros(n, n))
        } else {
            Ok(vals[(k - lo) as usize].clone())
        }
    }
}

fn random_diff(rng: &mut ChaCha8Rng, n: usize, order: usize) -> DifferentialOperator {
    let c = (0..=order)
        .map(|_| {
            ExprMatrix::from_fn(n, |_, _| {
                let p: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                ScalarExpr::poly(&p)
            })
        })
        .collect();
    DifferentialOperator::new(c).unwrap()
}

#[test]
fn criterion_7_adjointability_properties() {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 100, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = (0u64..u64::MAX, 1i64..4, -6i64..3, 0i64..10, 1usize..3);
    let mut discrete_worst = 0.0f64;
    for _ in 0..100 {
        let (seed, r, m, len, n) = strategy.new_tree(&mut runner).unwrap().current();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_shift(&mut rng, n, r);
        let f = random_seq(&mut rng, n, m - 4, m + len + 4);
        let g = random_seq(&mut rng, n, m - 4, m + len + 4);
        let d = discrete_adjointability_defect(&l, &f, &g, m, m + len).unwrap();
        discrete_worst = discrete_worst.max(d.amax());
    }
    let strategy = (0u64..u64::MAX, 0usize..5, -1.0f64..0.0, 0.2f64..1.0);
    let mut continuous_worst = 0.0f64;
    for _ in 0..50 {
        let (seed, order, x0, width) = strategy.new_tree(&mut runner).unwrap().current();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_diff(&mut rng, 2, order);
        let x1 = x0 + width;
        let f = BumpPoly::random(2, 2, x0 - 0.5, x1 + 0.3, 3, rng.random());
        let g = BumpPoly::random(2, 2, x0 - 0.2, x1 + 0.6, 3, rng.random());
        let quad = Quadrature::composite(x0, x1, 40, 10).unwrap();
        let defect = continuous_adjointability_defect(&d, &f, &g, &quad, (Some(x0), Some(x1))).unwrap();
        continuous_worst = continuous_worst.max(defect.amax());
    }
    report(
        7,
        discrete_worst < DISCRETE_ADJOINT_TOL && continuous_worst < CONTINUOUS_ADJOINT_TOL,
        &format!(
            "discrete max {discrete_worst:.1e} over 100 cases (tol {DISCRETE_ADJOINT_TOL:.0e}), continuous max {continuous_worst:.1e} over 50 cases (tol {CONTINUOUS_ADJOINT_TOL:.0e})"
        ),
    );
}

#[test]
fn criterion_8_rank_bounds() {
    // pairs counted once; each pair contributes one operator on either side
    let mut classical = Vec::new();
    let mut pass = true;
    for f in classical_families() {
        let r = family_window_rank(&Family::Classical(f.clone()), 2, 2).unwrap();
        pass &= 2 * r >= 8;
        classical.push(r);
    }
    let h2 = family_window_rank(&Family::Classical(ClassicalTriple::hermite(2).unwrap()), 2, 2).unwrap();
    pass &= h2 >= 8;
    let mut mono = Vec::new();
    for (l, m) in [(0, 1), (1, 1), (2, 1), (1, 2)] {
        let r1 = monomial_bisymmetric_rank(1, l, m);
        let r2 = monomial_bisymmetric_rank(2, l, m);
        pass &= r1 == (l + 1) * (m + 1) && r2 == monomial_rank_formula(2, l, m);
        mono.push(format!("({l},{m}):{r1}/{r2}"));
    }
    let hm = HermiteMatrixFamily::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let rm = family_window_rank(&Family::HermiteMatrix(hm), 4, 4).unwrap();
    let bound = matrix_family_rank_bound(2);
    pass &= rm >= bound;
    report(
        8,
        pass,
        &format!(
            "classical (2,2) pair ranks {classical:?} (×2 sides ≥ 8), Hermite N=2 {h2} ≥ 8; monomial N=1/N=2 {mono:?}; matrix (4,4) {rm} ≥ {bound}"
        ),
    );
}

#[test]
fn criterion_9_simultaneous_diagonalization() {
    let h = ClassicalTriple::hermite(1).unwrap();
    let rep = solve_commuting(&Family::Classical(h.clone()), 6, 0.5).unwrap();
    let k = BandKernel::from_window(&h, &rep.window).unwrap();
    let q = k.quadrature(40, 10).unwrap();
    let sc = spectral_check(&k, &rep.pair.diff, &q, 5).unwrap();
    let worst = sc.max_residual();
    report(
        9,
        worst < SPECTRAL_TOL,
        &format!("top-5 eigenvalues {:.6?}, max residual {worst:.1e} (tol {SPECTRAL_TOL:.0e})", sc.eigenvalues),
    );
}

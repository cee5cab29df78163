use proptest::prelude::*;
use prolate::ScalarExpr;

fn x() -> ScalarExpr {
    ScalarExpr::x()
}

/// Five-point centred difference with one Richardson step.
fn richardson(f: &ScalarExpr, x0: f64, h: f64) -> f64 {
    let d = |h: f64| {
        let e = |t: f64| f.eval(t).unwrap();
        (-e(x0 + 2.0 * h) + 8.0 * e(x0 + h) - 8.0 * e(x0 - h) + e(x0 - 2.0 * h)) / (12.0 * h)
    };
    (16.0 * d(h / 2.0) - d(h)) / 15.0
}

fn atoms() -> Vec<ScalarExpr> {
    vec![
        ScalarExpr::poly(&[1.0, -2.0, 0.5, 0.25]),
        x().powf(1.5),
        ScalarExpr::poly(&[3.0, -1.0]).powf(-0.5),
        ScalarExpr::poly(&[0.0, 0.7]).exp(),
        ScalarExpr::poly(&[0.0, 0.0, -0.5]).exp(),
        x().sinh(),
        x().cosh(),
        x().sech(),
        x().tanh(),
        ScalarExpr::poly(&[2.0, 0.0, 1.0]).sqrt().unwrap(),
        ScalarExpr::one() / ScalarExpr::poly(&[3.0, 1.0]),
        x().sech().powi(2) * x().sinh() + x().powf(0.5) * 3.0,
    ]
}

#[test]
fn eval_examples() {
    let p = ScalarExpr::poly(&[-1.0, 0.0, 1.0]);
    assert_eq!(p.eval(2.0).unwrap(), 3.0);
    let g = ScalarExpr::poly(&[0.0, 0.0, -0.5]).exp();
    assert_eq!(g.eval(0.0).unwrap(), 1.0);
    let s2 = x().sech().powi(2);
    let want = 1.0 / 1f64.cosh().powi(2);
    assert!((s2.eval(1.0).unwrap() - want).abs() < 1e-14);
}

#[test]
fn differentiate_examples() {
    let d = x().powi(3).differentiate();
    for t in [-1.3, 0.0, 2.5] {
        assert!((d.eval(t).unwrap() - 3.0 * t * t).abs() < 1e-13);
    }
    let ds = x().sech().differentiate();
    for t in [-1.3f64, 0.2, 2.5] {
        let want = -t.cosh().recip() * t.tanh();
        assert!((ds.eval(t).unwrap() - want).abs() < 1e-14);
    }
    let f = ScalarExpr::poly(&[1.0, 0.0, -1.0]) * ScalarExpr::poly(&[0.0, 0.0, -0.5]).exp();
    let d4 = f.nth_derivative(4).eval(0.3).unwrap();
    // Richardson on the third derivative
    let d3 = f.nth_derivative(3);
    let fd = richardson(&d3, 0.3, 1e-2);
    assert!(((d4 - fd) / d4).abs() < 1e-5);
    let jets = f.eval_derivatives(0.3, 4).unwrap();
    assert!(((jets[4] - d4) / d4).abs() < 1e-12);
}

#[test]
fn atom_derivatives_match_finite_differences() {
    for (i, a) in atoms().iter().enumerate() {
        let d = a.differentiate();
        for t in [0.35, 0.8, 1.7] {
            let want = richardson(a, t, 1e-3);
            let got = d.eval(t).unwrap();
            assert!(
                (got - want).abs() < 1e-6 * (1.0 + want.abs()),
                "atom {i} at {t}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn domain_violations_are_errors() {
    let q = ScalarExpr::one() / ScalarExpr::poly(&[-1.0, 1.0]);
    assert!(q.eval(1.0).is_err());
    assert!(x().powf(0.5).eval(-1.0).is_err());
    assert!(ScalarExpr::constant(-2.0).sqrt().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn linearity_and_product_rule(a in -3.0f64..3.0, b in -3.0f64..3.0, i in 0usize..12, j in 0usize..12, t in 0.2f64..1.9) {
        let at = atoms();
        let (f, g) = (at[i].clone(), at[j].clone());
        let lin = (f.clone() * a + g.clone() * b).differentiate().eval(t).unwrap();
        let want = a * f.differentiate().eval(t).unwrap() + b * g.differentiate().eval(t).unwrap();
        prop_assert!((lin - want).abs() < 1e-10 * (1.0 + want.abs()));
        let prod = (f.clone() * g.clone()).differentiate().eval(t).unwrap();
        let want = f.differentiate().eval(t).unwrap() * g.eval(t).unwrap()
            + f.eval(t).unwrap() * g.differentiate().eval(t).unwrap();
        prop_assert!((prod - want).abs() < 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn jets_match_symbolic_derivatives(i in 0usize..12, t in 0.2f64..1.9) {
        let f = &atoms()[i];
        let jets = f.eval_derivatives(t, 3).unwrap();
        for (o, v) in jets.iter().enumerate() {
            let s = f.nth_derivative(o).eval(t).unwrap();
            prop_assert!((v - s).abs() < 1e-9 * (1.0 + s.abs()));
        }
    }
}

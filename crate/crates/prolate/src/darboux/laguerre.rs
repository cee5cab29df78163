//! Order-4 Darboux transformation of the Laguerre family from the factorization
//! `Q q⁻² Q* = (D+λ)(D+λ−1)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::darboux::DarbouxTransform;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exprmat::ExprMatrix;
use crate::families::{Bispectral, ClassicalTriple, FourierPair, QuadDomain};
use crate::operators::{DifferentialOperator, Seq, ShiftOperator};

#[derive(Debug, Clone)]
pub struct LaguerreDarboux {
    pub a: f64,
    pub lambda: f64,
    /// `√((λ+a)/λ)`
    pub beta: f64,
    base: ClassicalTriple,
    q_fn: ScalarExpr,
    transform: DarbouxTransform,
}

impl LaguerreDarboux {
    pub fn new(a: f64, lambda: f64) -> Result<Self> {
        let base = ClassicalTriple::laguerre(a, 1)?;
        if !(lambda * (lambda + a) > 0.0) {
            return Err(Error::Construction(format!(
                "need λ(λ+a) > 0 for a real β, got λ = {lambda}, a = {a}"
            )));
        }
        let bad: Vec<i64> = (0..=(lambda.max(0.0).ceil() as i64 + 1))
            .filter(|&k| (lambda - k as f64) * (lambda - k as f64 - 1.0) <= 0.0)
            .collect();
        if !bad.is_empty() {
            return Err(Error::Construction(format!(
                "p(k)² = (λ−k)(λ−k−1) must be positive; fails for k = {bad:?} with λ = {lambda}"
            )));
        }
        let beta = ((lambda + a) / lambda).sqrt();
        let q0 = 2.0 * lambda + 2.0 * a + beta * (2.0 * lambda + a);
        // q(x) = q0 − βx never vanishes on (0, ∞) iff q0 ≤ 0
        if q0 > 0.0 {
            return Err(Error::Construction(format!(
                "q(x) vanishes at x = {} inside (0, ∞); need λ < min(0, −a)",
                q0 / beta
            )));
        }
        let q_fn = ScalarExpr::poly(&[q0, -beta]);
        let x = ScalarExpr::x();
        let bracket = ScalarExpr::poly(&[a * a / 4.0, -(2.0 * lambda + a) / 2.0, 0.25])
            / ScalarExpr::poly(&[0.0, 1.0]);
        let qop = DifferentialOperator::scalar(
            1,
            vec![
                bracket * q_fn.clone() * -1.0,
                ScalarExpr::constant(q0),
                x * q_fn.clone(),
            ],
        );
        let (lam, b) = (lambda, beta);
        let up = move |k: i64| {
            let kf = k as f64;
            if k < -1 {
                return 0.0;
            }
            -b * (kf - lam) * ((kf + 1.0) * (kf + a + 1.0)).sqrt()
        };
        let down = move |k: i64| {
            let kf = k as f64;
            if k <= 0 {
                return 0.0;
            }
            -b * (kf + 1.0 - lam) * (kf * (kf + a)).sqrt()
        };
        let diag = move |k: i64| {
            let kf = k as f64;
            2.0 * b * kf * (kf + 1.0) - 2.0 * lam * b * (b + 2.0) * kf - lam * b * (b + 2.0)
                + 2.0 * lam * b * lam * (b + 1.0)
        };
        let p = ShiftOperator::from_diags(
            1,
            vec![
                (1, Seq::scalar(1, up)),
                (0, Seq::scalar(1, diag)),
                (-1, Seq::scalar(1, down)),
            ],
        );
        let pk = move |k: i64| ((lam - k as f64) * (lam - k as f64 - 1.0)).sqrt();
        let f = Seq::scalar(1, pk);
        let e = ShiftOperator::scalar_diagonal(1, move |k| 1.0 / pk(k)).compose(&p)?;
        let transform = DarbouxTransform::new(
            "laguerre-darboux",
            Arc::new(base.clone()),
            p,
            qop,
            f,
            e,
            ExprMatrix::scalar(1, q_fn.clone()),
            ExprMatrix::scalar(1, q_fn.recip()),
        );
        Ok(LaguerreDarboux {
            a,
            lambda,
            beta,
            base,
            q_fn,
            transform,
        })
    }

    pub fn base(&self) -> &ClassicalTriple {
        &self.base
    }

    pub fn transform(&self) -> &DarbouxTransform {
        &self.transform
    }

    /// `q(x) = 2λ + 2a + β(2λ + a − x)`.
    pub fn q_fn(&self) -> &ScalarExpr {
        &self.q_fn
    }

    pub fn p_of_k(&self, k: i64) -> f64 {
        ((self.lambda - k as f64) * (self.lambda - k as f64 - 1.0)).sqrt()
    }

    /// Relative defect of `Q q⁻² Q* = (D+λ)(D+λ−1)` over the samples.
    pub fn factorization_defect_diff(&self, xs: &[f64]) -> Result<f64> {
        let q = self.transform.q();
        let iq2 = DifferentialOperator::scalar_multiplication(1, self.q_fn.powi(-2));
        let lhs = q.compose(&iq2)?.compose(&q.adjoint())?;
        let d = self.base.diff_operator();
        let id = DifferentialOperator::identity(1);
        let rhs = d
            .add(&id.scale(self.lambda))?
            .compose(&d.add(&id.scale(self.lambda - 1.0))?)?;
        lhs.relative_difference(&rhs, xs)
    }

    /// Relative defect of `P* p⁻² P = q(L)²` over the indices.
    pub fn factorization_defect_shift(&self, ks: &[i64]) -> Result<f64> {
        let p = self.transform.p();
        let lam = self.lambda;
        let ip2 = ShiftOperator::scalar_diagonal(1, move |k| {
            1.0 / ((lam - k as f64) * (lam - k as f64 - 1.0))
        });
        let lhs = p.adjoint().compose(&ip2)?.compose(p)?;
        let q0 = self.q_fn.eval(0.0)?;
        let ql = ShiftOperator::identity(1)
            .scale(q0)
            .sub(&self.base.shift_operator().scale(self.beta))?;
        let rhs = ql.compose(&ql)?;
        lhs.relative_difference(&rhs, ks)
    }

    /// The order-4 eigenoperator pair `(p⁻¹PP*p⁻¹, q²)` is the outer image of the
    /// identity; this is its partner `(p², q⁻¹Q*Qq⁻¹)`.
    pub fn eigen_pair(&self) -> Result<FourierPair> {
        self.transform.inner(&FourierPair::identity(1))
    }

    /// The seven symmetric pairs `R₁..R₇`, labelled.
    pub fn basis_pairs(&self) -> Result<Vec<(String, FourierPair)>> {
        let t = &self.transform;
        let xl = self.base.x_pair();
        let ld = self.base.lambda_pair();
        let id = FourierPair::identity(1);
        let xl2 = xl.compose(&xl)?;
        let skew = xl.commutator(&ld)?;
        Ok(vec![
            ("R1 = q⁻¹Q*Qq⁻¹".into(), t.inner(&id)?),
            ("R2 = q⁻¹Q*xQq⁻¹".into(), t.inner(&xl)?),
            ("R3 = q⁻¹Q*x²Qq⁻¹".into(), t.inner(&xl2)?),
            ("R4 = q²".into(), t.outer(&id)?),
            ("R5 = qDq".into(), t.outer(&ld)?),
            ("R6 = qQq⁻¹ + q⁻¹Q*q".into(), t.mixed_symmetrized(&id, 1.0)?),
            (
                "R7 = qBQq⁻¹ + q⁻¹Q*B*q, B = [x,D]".into(),
                t.mixed_symmetrized(&skew, 1.0)?,
            ),
        ])
    }

    /// Closed-form coefficients `c₁..c₇` of the commuting operator.
    pub fn closed_form_coefficients(&self, n: i64, t: f64) -> [f64; 7] {
        let (lam, a, b) = (self.lambda, self.a, self.beta);
        let nf = n as f64;
        [
            t * t,
            -2.0 * t,
            1.0,
            -lam * (lam - nf) * (lam + nf - 1.0) / (lam + a),
            -2.0 * lam * (lam - nf) / (lam + a),
            // a(β+1)/(β−1) = λ(β+1)²
            (lam - nf) / b * (lam * (b + 1.0) * (b + 1.0) - t),
            0.0,
        ]
    }

    /// `Σ c_j R_j` with the closed-form coefficients at `n`.
    pub fn closed_form_pair(&self, n: i64, t: f64) -> Result<FourierPair> {
        let c = self.closed_form_coefficients(n, t);
        let basis = self.basis_pairs()?;
        let terms: Vec<(f64, &FourierPair)> = c.iter().zip(&basis).map(|(c, (_, p))| (*c, p)).collect();
        FourierPair::linear_combination(&terms)
    }
}

impl Bispectral for LaguerreDarboux {
    fn name(&self) -> String {
        "laguerre-darboux".into()
    }

    fn size(&self) -> usize {
        1
    }

    fn support(&self) -> (f64, f64) {
        self.transform.support()
    }

    fn psi_derivatives(&self, k: i64, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        self.transform.psi_derivatives(k, x, order)
    }

    fn psi_range(&self, lo: i64, hi: i64, x: f64, order: usize) -> Result<Vec<Vec<DMatrix<f64>>>> {
        self.transform.psi_range(lo, hi, x, order)
    }

    fn quad_domain(&self, lo: f64, hi: f64, kmax: i64) -> QuadDomain {
        self.transform.quad_domain(lo, hi, kmax)
    }
}

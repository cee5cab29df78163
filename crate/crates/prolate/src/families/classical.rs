//! Hermite, Laguerre and Jacobi bispectral triples (times `I_N`) and the monomial toy family.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::families::{Bispectral, FourierPair, QuadDomain};
use crate::jet::Jet;
use crate::operators::{DifferentialOperator, ShiftOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalKind {
    Hermite,
    Laguerre { a: f64 },
    Jacobi { a: f64, b: f64 },
    /// `Ψ(k,x) = xᵏ I` on `(0, ∞)`.
    Monomial,
}

#[derive(Debug, Clone)]
pub struct ClassicalTriple {
    kind: ClassicalKind,
    n: usize,
    /// `π₀`, the normalization constant.
    c0: f64,
    weight: ScalarExpr,
    /// `D = ∂ p ∂ + q`
    p: ScalarExpr,
    q: ScalarExpr,
}

impl ClassicalTriple {
    pub fn new(kind: ClassicalKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("matrix size N must be at least 1".into()));
        }
        let x = ScalarExpr::x();
        let (c0, weight, p, q) = match kind {
            ClassicalKind::Hermite => (
                PI.powf(-0.25),
                ScalarExpr::poly(&[0.0, 0.0, -0.5]).exp(),
                ScalarExpr::one(),
                ScalarExpr::poly(&[1.0, 0.0, -1.0]),
            ),
            ClassicalKind::Laguerre { a } => {
                if !(a > -1.0) {
                    return Err(Error::Construction(format!(
                        "Laguerre parameter must satisfy a > -1, got a = {a}"
                    )));
                }
                let w = x.powf(a / 2.0) * ScalarExpr::poly(&[0.0, -0.5]).exp();
                // ½ − (a − x)²/(4x)
                let q = ScalarExpr::constant(0.5)
                    - ScalarExpr::poly(&[a * a, -2.0 * a, 1.0]) / ScalarExpr::poly(&[0.0, 4.0]);
                ((-0.5 * ln_gamma(a + 1.0)).exp(), w, x.clone(), q)
            }
            ClassicalKind::Jacobi { a, b } => {
                if !(a > -1.0) || !(b > -1.0) {
                    return Err(Error::Construction(format!(
                        "Jacobi parameters must satisfy a > -1 and b > -1, got a = {a}, b = {b}"
                    )));
                }
                let w = ScalarExpr::poly(&[1.0, -1.0]).powf(a / 2.0)
                    * ScalarExpr::poly(&[1.0, 1.0]).powf(b / 2.0);
                let ln_mass = (a + b + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
                    - ln_gamma(a + b + 2.0);
                let mut q = ScalarExpr::constant((a + b) * (a + b + 2.0) / 4.0);
                if a != 0.0 {
                    q = q + ScalarExpr::constant(a * a / 2.0) / ScalarExpr::poly(&[-1.0, 1.0]);
                }
                if b != 0.0 {
                    q = q - ScalarExpr::constant(b * b / 2.0) / ScalarExpr::poly(&[1.0, 1.0]);
                }
                ((-0.5 * ln_mass).exp(), w, ScalarExpr::poly(&[1.0, 0.0, -1.0]), q)
            }
            ClassicalKind::Monomial => (
                1.0,
                ScalarExpr::one(),
                ScalarExpr::zero(),
                ScalarExpr::zero(),
            ),
        };
        Ok(ClassicalTriple {
            kind,
            n,
            c0,
            weight,
            p,
            q,
        })
    }

    pub fn hermite(n: usize) -> Result<Self> {
        Self::new(ClassicalKind::Hermite, n)
    }

    pub fn laguerre(a: f64, n: usize) -> Result<Self> {
        Self::new(ClassicalKind::Laguerre { a }, n)
    }

    pub fn jacobi(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(ClassicalKind::Jacobi { a, b }, n)
    }

    pub fn monomial(n: usize) -> Result<Self> {
        Self::new(ClassicalKind::Monomial, n)
    }

    pub fn kind(&self) -> ClassicalKind {
        self.kind
    }

    pub fn weight(&self) -> &ScalarExpr {
        &self.weight
    }

    /// `(p, q)` with `D = ∂ p ∂ + q`.
    pub fn pq(&self) -> (ScalarExpr, ScalarExpr) {
        (self.p.clone(), self.q.clone())
    }

    /// Coefficient of `𝒮⁻¹` in `L` (so `𝒮` carries `A(k+1)`); zero for `k ≤ 0`.
    pub fn recurrence_a(&self, k: i64) -> f64 {
        recurrence_a(self.kind, k)
    }

    /// Diagonal coefficient of `L`.
    pub fn recurrence_b(&self, k: i64) -> f64 {
        recurrence_b(self.kind, k)
    }

    pub fn eigenvalue_lambda(&self, k: i64) -> f64 {
        eigenvalue(self.kind, k)
    }

    /// The shift operator `L` with `L·Ψ = Ψ·x`.
    pub fn shift_operator(&self) -> ShiftOperator {
        let n = self.n;
        let kind = self.kind;
        if kind == ClassicalKind::Monomial {
            return ShiftOperator::shift(n, 1);
        }
        let mut l = ShiftOperator::scalar_diagonal(n, move |k| recurrence_b(kind, k));
        let lower = ShiftOperator::scalar_diagonal(n, move |k| recurrence_a(kind, k))
            .compose(&ShiftOperator::shift(n, -1))
            .expect("same size");
        let upper = ShiftOperator::scalar_diagonal(n, move |k| recurrence_a(kind, k + 1))
            .compose(&ShiftOperator::shift(n, 1))
            .expect("same size");
        l = l.add(&lower).expect("same size").add(&upper).expect("same size");
        l
    }

    /// The differential operator `D` with `Ψ·D = λ(k)Ψ`.
    pub fn diff_operator(&self) -> DifferentialOperator {
        if self.kind == ClassicalKind::Monomial {
            // ∂ x : F ↦ F′ x
            return DifferentialOperator::scalar(self.n, vec![ScalarExpr::zero(), ScalarExpr::x()]);
        }
        DifferentialOperator::scalar(
            self.n,
            vec![self.q.clone(), self.p.differentiate(), self.p.clone()],
        )
    }

    /// `λ(k) I` as a diagonal shift operator.
    pub fn lambda_operator(&self) -> ShiftOperator {
        let kind = self.kind;
        ShiftOperator::scalar_diagonal(self.n, move |k| eigenvalue(kind, k))
    }

    /// `(L, x)`
    pub fn x_pair(&self) -> FourierPair {
        FourierPair::new(
            self.shift_operator(),
            DifferentialOperator::scalar_multiplication(self.n, ScalarExpr::x()),
        )
    }

    /// `(λ(k), D)`
    pub fn lambda_pair(&self) -> FourierPair {
        FourierPair::new(self.lambda_operator(), self.diff_operator())
    }

    /// Generating Fourier pairs: `(L, x)`, `(λ, D)`, and for Hermite also the `∂ₓ` pair.
    pub fn derivative_pairs(&self) -> Vec<FourierPair> {
        let mut out = vec![self.x_pair(), self.lambda_pair()];
        if self.kind == ClassicalKind::Hermite {
            let n = self.n;
            let down = ShiftOperator::scalar_diagonal(n, |k| (k.max(0) as f64 / 2.0).sqrt())
                .compose(&ShiftOperator::shift(n, -1))
                .expect("same size");
            let up = ShiftOperator::scalar_diagonal(n, |k| ((k + 1).max(0) as f64 / 2.0).sqrt())
                .compose(&ShiftOperator::shift(n, 1))
                .expect("same size");
            out.push(FourierPair::new(
                down.sub(&up).expect("same size"),
                DifferentialOperator::derivative(n, 1),
            ));
        }
        out
    }

    /// Coefficients of `π_k` (lowest degree first) from the recurrence in coefficient space.
    pub fn poly_coeffs(&self, k: i64) -> Vec<f64> {
        if k < 0 {
            return vec![0.0];
        }
        if self.kind == ClassicalKind::Monomial {
            let mut c = vec![0.0; k as usize + 1];
            c[k as usize] = 1.0;
            return c;
        }
        let mut prev: Vec<f64> = vec![0.0];
        let mut cur: Vec<f64> = vec![self.c0];
        for j in 0..k {
            let a = self.recurrence_a(j);
            let b = self.recurrence_b(j);
            let a1 = self.recurrence_a(j + 1);
            let mut next = vec![0.0; cur.len() + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= b * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= a * c;
            }
            for v in next.iter_mut() {
                *v /= a1;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (a, b) = self.support();
        if x < a || x > b || x.is_nan() {
            return Err(Error::domain(
                format!("point outside the support ({a}, {b}) of the {} family", self.name()),
                x,
            ));
        }
        Ok(())
    }
}

fn recurrence_a(kind: ClassicalKind, k: i64) -> f64 {
    if k <= 0 {
        return 0.0;
    }
    let kf = k as f64;
    match kind {
        ClassicalKind::Hermite => (kf / 2.0).sqrt(),
        ClassicalKind::Laguerre { a } => -(kf * (kf + a)).sqrt(),
        ClassicalKind::Jacobi { a, b } => {
            let s = 2.0 * kf + a + b;
            let sq = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s * s - 1.0))
            };
            sq.sqrt()
        }
        ClassicalKind::Monomial => 0.0,
    }
}

fn recurrence_b(kind: ClassicalKind, k: i64) -> f64 {
    let kf = k as f64;
    match kind {
        ClassicalKind::Hermite | ClassicalKind::Monomial => 0.0,
        ClassicalKind::Laguerre { a } => 2.0 * kf + 1.0 + a,
        ClassicalKind::Jacobi { a, b } => {
            if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * kf + 2.0 + a + b) * (2.0 * kf + a + b))
            }
        }
    }
}

fn eigenvalue(kind: ClassicalKind, k: i64) -> f64 {
    let kf = k as f64;
    match kind {
        ClassicalKind::Hermite => -2.0 * kf,
        ClassicalKind::Laguerre { .. } => -kf,
        ClassicalKind::Jacobi { a, b } => -kf * (kf + a + b + 1.0),
        ClassicalKind::Monomial => kf,
    }
}

impl Bispectral for ClassicalTriple {
    fn name(&self) -> String {
        match self.kind {
            ClassicalKind::Hermite => "hermite".into(),
            ClassicalKind::Laguerre { .. } => "laguerre".into(),
            ClassicalKind::Jacobi { .. } => "jacobi".into(),
            ClassicalKind::Monomial => "monomial".into(),
        }
    }

    fn size(&self) -> usize {
        self.n
    }

    fn support(&self) -> (f64, f64) {
        match self.kind {
            ClassicalKind::Hermite => (f64::NEG_INFINITY, f64::INFINITY),
            ClassicalKind::Laguerre { .. } | ClassicalKind::Monomial => (0.0, f64::INFINITY),
            ClassicalKind::Jacobi { .. } => (-1.0, 1.0),
        }
    }

    fn psi_derivatives(&self, k: i64, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        Ok(self.psi_range(k, k, x, order)?.remove(0))
    }

    fn psi_range(&self, lo: i64, hi: i64, x: f64, order: usize) -> Result<Vec<Vec<DMatrix<f64>>>> {
        self.check_domain(x)?;
        let n = self.n;
        let to_mats = |j: &Jet| -> Vec<DMatrix<f64>> {
            j.derivatives()
                .into_iter()
                .map(|v| DMatrix::identity(n, n) * v)
                .collect()
        };
        let zero = vec![DMatrix::zeros(n, n); order + 1];
        if self.kind == ClassicalKind::Monomial {
            return (lo..=hi)
                .map(|k| Ok(to_mats(&Jet::variable(x, order).powf(k as f64, x)?)))
                .collect();
        }
        let w = self.weight.eval_jet(x, order)?;
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut prev = Jet::constant(0.0, order);
        let mut cur = Jet::constant(self.c0, order);
        let mut k = 0;
        for target in lo..=hi {
            if target < 0 {
                out.push(zero.clone());
                continue;
            }
            while k < target {
                let a = self.recurrence_a(k);
                let b = self.recurrence_b(k);
                let a1 = self.recurrence_a(k + 1);
                let next = cur
                    .mul_variable(x)
                    .sub(&cur.scale(b))
                    .sub(&prev.scale(a))
                    .scale(1.0 / a1);
                prev = cur;
                cur = next;
                k += 1;
            }
            out.push(to_mats(&cur.mul(&w)));
        }
        Ok(out)
    }

    fn quad_domain(&self, lo: f64, hi: f64, kmax: i64) -> QuadDomain {
        let k = kmax.max(0) as f64;
        let (a, b, ga, gb) = match self.kind {
            ClassicalKind::Hermite => {
                let cut = (2.0 * k + 1.0).sqrt() + 9.5;
                (-cut, cut, false, false)
            }
            ClassicalKind::Laguerre { a } => (0.0, 4.0 * k + 2.0 * a.abs() + 100.0, true, false),
            ClassicalKind::Jacobi { .. } => (-1.0, 1.0, true, true),
            ClassicalKind::Monomial => (0.0, 10.0, false, false),
        };
        QuadDomain {
            lo: lo.max(a),
            hi: hi.min(b),
            grade_lo: ga && lo <= a,
            grade_hi: gb && hi >= b,
        }
    }
}

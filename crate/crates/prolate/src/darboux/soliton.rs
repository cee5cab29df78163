//! Bound states of the reflectionless potential `N(N+1) sech²x`, indexed by the
//! spectral parameter `k = 0..=N` and extended by zero.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::families::{Bispectral, FourierPair, QuadDomain};
use crate::operators::{DifferentialOperator, Seq, ShiftOperator};

const HALF_WIDTH: f64 = 45.0;

#[derive(Debug, Clone)]
pub struct SolitonFamily {
    pub nsol: usize,
    mu: Vec<f64>,
    psi: Vec<ScalarExpr>,
}

/// `A(k) = √((N−k)(k+N+1)/(k(k+1)))` for `1 ≤ k < N`, `A(0) = 1`, zero elsewhere.
pub fn a_coef(nsol: usize, k: i64) -> f64 {
    let n = nsol as i64;
    if k < 0 || k >= n {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    ((nf - kf) * (kf + nf + 1.0) / (kf * (kf + 1.0))).sqrt()
}

impl SolitonFamily {
    pub fn new(nsol: usize) -> Result<Self> {
        if nsol == 0 {
            return Err(Error::Construction("soliton number N must be ≥ 1".into()));
        }
        let n = nsol as i64;
        let nf = nsol as f64;
        let mut mu = vec![0.0; nsol + 1];
        mu[1] = (nf * (nf + 1.0)).sqrt();
        mu[0] = mu[1];
        for k in 1..nsol {
            mu[k + 1] = a_coef(nsol, k as i64) * mu[k];
        }
        let x = ScalarExpr::x();
        let z = ScalarExpr::poly_of(&[0.5, 0.5], x.tanh());
        let sech = x.sech();
        let mut psi = Vec::with_capacity(nsol + 1);
        for k in 0..=n {
            let kf = k as f64;
            // ₂F₁(k−N, k+N+1; k+1; z) terminates at degree N−k
            let mut c = vec![1.0];
            for m in 0..(n - k) {
                let mf = m as f64;
                let prev = c[m as usize];
                c.push(prev * (kf - nf + mf) * (kf + nf + 1.0 + mf) / ((kf + 1.0 + mf) * (mf + 1.0)));
            }
            let sign = if (k - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let pref = sign * mu[k as usize] * 2f64.powi(-(k as i32));
            let e = ScalarExpr::poly_of(&c, z.clone()) * sech.powi(k as i32) * pref;
            psi.push(e);
        }
        Ok(SolitonFamily { nsol, mu, psi })
    }

    pub fn mu(&self, k: i64) -> f64 {
        if k < 0 || k > self.nsol as i64 {
            0.0
        } else {
            self.mu[k as usize]
        }
    }

    pub fn a_coef(&self, k: i64) -> f64 {
        a_coef(self.nsol, k)
    }

    /// `L = A(k)𝒮 + A(k−1)𝒮⁻¹`.
    pub fn shift_operator(&self) -> ShiftOperator {
        let n = self.nsol;
        ShiftOperator::from_diags(
            1,
            vec![
                (1, Seq::scalar(1, move |k| a_coef(n, k))),
                (-1, Seq::scalar(1, move |k| a_coef(n, k - 1))),
            ],
        )
    }

    /// `D = ∂² + N(N+1) sech²x`.
    pub fn diff_operator(&self) -> DifferentialOperator {
        let nf = self.nsol as f64;
        let v = ScalarExpr::x().sech().powi(2) * (nf * (nf + 1.0));
        DifferentialOperator::scalar(1, vec![v, ScalarExpr::zero(), ScalarExpr::one()])
    }

    /// `(L, 2 sinh x)`.
    pub fn l_pair(&self) -> FourierPair {
        let two_sinh = ScalarExpr::x().sinh() * 2.0;
        FourierPair::new(
            self.shift_operator(),
            DifferentialOperator::scalar_multiplication(1, two_sinh),
        )
    }

    /// `(k², D)`.
    pub fn d_pair(&self) -> FourierPair {
        FourierPair::new(
            ShiftOperator::scalar_diagonal(1, |k| (k * k) as f64),
            self.diff_operator(),
        )
    }

    /// `I, (k², D), (L, 2 sinh x), ({k², L}, {D, 2 sinh x})`, labelled.
    pub fn basis_pairs(&self) -> Result<Vec<(String, FourierPair)>> {
        let l = self.l_pair();
        let d = self.d_pair();
        Ok(vec![
            ("I".into(), FourierPair::identity(1)),
            ("(k², D)".into(), d.clone()),
            ("(L, 2sinh x)".into(), l.clone()),
            ("{k², L}".into(), d.anticommutator(&l)?),
        ])
    }

    /// Closed-form `β(p)` and `γ(t)` of `{k²,L} + βL + γk²`.
    pub fn closed_form(&self, p: i64, t: f64) -> (f64, f64) {
        let q = (p - 1) as f64;
        (-2.0 * q * q - 2.0 * q - 1.0, -4.0 * t.sinh())
    }

    /// Max-relative defect of `Ψ·D = k²Ψ` for `k ∈ ks`.
    pub fn schrodinger_defect(&self, ks: &[i64], xs: &[f64]) -> Result<f64> {
        crate::families::fourier_defect(self, &self.d_pair(), ks, xs)
    }

    /// Max-relative defect of `L·Ψ = 2 sinh x Ψ` for `k ∈ ks`.
    pub fn difference_defect(&self, ks: &[i64], xs: &[f64]) -> Result<f64> {
        crate::families::fourier_defect(self, &self.l_pair(), ks, xs)
    }
}

impl Bispectral for SolitonFamily {
    fn name(&self) -> String {
        format!("soliton(N={})", self.nsol)
    }

    fn size(&self) -> usize {
        1
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn psi_derivatives(&self, k: i64, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        if k < 0 || k > self.nsol as i64 {
            return Ok(vec![DMatrix::zeros(1, 1); order + 1]);
        }
        let d = self.psi[k as usize].eval_derivatives(x, order)?;
        Ok(d.into_iter().map(|v| DMatrix::from_element(1, 1, v)).collect())
    }

    fn quad_domain(&self, lo: f64, hi: f64, _kmax: i64) -> QuadDomain {
        QuadDomain {
            lo: lo.max(-HALF_WIDTH),
            hi: hi.min(HALF_WIDTH),
            grade_lo: false,
            grade_hi: false,
        }
    }
}

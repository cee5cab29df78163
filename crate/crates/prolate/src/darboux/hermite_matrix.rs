//! `2r × 2r` Darboux transformation of the Hermite family through the
//! Dirac-type operator `U = [[∂+x, −A], [−A, ∂−x]]`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::darboux::DarbouxTransform;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exprmat::ExprMatrix;
use crate::families::{Bispectral, ClassicalTriple, FourierPair, QuadDomain};
use crate::operators::{DifferentialOperator, Seq, ShiftOperator};

const SINGULAR_TOL: f64 = 1e-12;

/// Cholesky data `B_k B_kᵀ = 2kI + A²` and the polar factor `B_k⁻¹A`.
#[derive(Debug, Clone)]
struct Factors {
    r: usize,
    a: DMatrix<f64>,
    /// `B_0⁻¹A` when `A` is singular (`r = 1` only).
    polar0: Option<DMatrix<f64>>,
}

impl Factors {
    fn b(&self, k: i64) -> Result<DMatrix<f64>> {
        if k < 0 {
            return Err(Error::domain("Cholesky factor B_k needs k ≥ 0", k as f64));
        }
        if k == 0 && self.polar0.is_some() {
            return Ok(DMatrix::zeros(self.r, self.r));
        }
        let m = DMatrix::identity(self.r, self.r) * (2.0 * k as f64) + &self.a * &self.a;
        m.cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::Construction(format!("2kI + A² is not positive definite at k = {k}")))
    }

    fn b_inv(&self, k: i64) -> Result<DMatrix<f64>> {
        self.b(k)?
            .try_inverse()
            .ok_or_else(|| Error::Construction(format!("B_{k} is singular")))
    }

    fn polar(&self, k: i64) -> Result<DMatrix<f64>> {
        if k == 0 {
            if let Some(p) = &self.polar0 {
                return Ok(p.clone());
            }
        }
        Ok(self.b_inv(k)? * &self.a)
    }
}

fn blocks(r: usize, b: [[&DMatrix<f64>; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * r, 2 * r);
    for (i, row) in b.iter().enumerate() {
        for (j, blk) in row.iter().enumerate() {
            m.view_mut((i * r, j * r), (r, r)).copy_from(blk);
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct HermiteMatrixFamily {
    pub a: DMatrix<f64>,
    r: usize,
    base: ClassicalTriple,
    factors: Factors,
    transform: DarbouxTransform,
}

impl HermiteMatrixFamily {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let r = a.nrows();
        if r == 0 || a.ncols() != r {
            return Err(Error::shape("square r×r matrix, r ≥ 1", format!("{}x{}", a.nrows(), a.ncols())));
        }
        if (&a - a.transpose()).amax() > 1e-14 * (1.0 + a.amax()) {
            return Err(Error::Construction("A must be symmetric".into()));
        }
        let sv = a.clone().svd(false, false).singular_values;
        let singular = sv.min() <= SINGULAR_TOL * (1.0 + sv.max());
        let polar0 = if singular {
            if r != 1 {
                return Err(Error::Construction(
                    "singular A with r ≥ 2 has no k = 0 Cholesky factorization; use an invertible A".into(),
                ));
            }
            Some(DMatrix::identity(1, 1))
        } else {
            None
        };
        let factors = Factors { r, a: a.clone(), polar0 };
        let n = 2 * r;
        let base = ClassicalTriple::hermite(n)?;
        let zr = DMatrix::<f64>::zeros(r, r);
        let ir = DMatrix::<f64>::identity(r, r);
        let ma = -a.clone();

        let p_down = Seq::from_fn(n, {
            let (zr, ir) = (zr.clone(), ir.clone());
            move |k| {
                let s = if k > 0 { (2.0 * k as f64).sqrt() } else { 0.0 };
                Ok(blocks(r, [[&(&ir * s), &zr], [&zr, &zr]]))
            }
        });
        let p_up = Seq::from_fn(n, {
            let (zr, ir) = (zr.clone(), ir.clone());
            move |k| {
                let s = if k >= -1 { (2.0 * k as f64 + 2.0).sqrt() } else { 0.0 };
                Ok(blocks(r, [[&zr, &zr], [&zr, &(&ir * -s)]]))
            }
        });
        let p_mid = Seq::constant(blocks(r, [[&zr, &ma], [&ma, &zr]]));
        let p = ShiftOperator::from_diags(n, vec![(-1, p_down), (0, p_mid), (1, p_up)]);

        let f = Seq::from_fn(n, {
            let (fac, zr) = (factors.clone(), zr.clone());
            move |k| {
                if k < 0 {
                    return Ok(DMatrix::zeros(n, n));
                }
                Ok(blocks(r, [[&zr, &fac.b(k)?], [&fac.b(k + 1)?, &zr]]))
            }
        });
        let e_down = Seq::from_fn(n, {
            let (fac, zr) = (factors.clone(), zr.clone());
            move |k| {
                if k <= 0 {
                    return Ok(DMatrix::zeros(n, n));
                }
                let c = fac.b_inv(k)? * (2.0 * k as f64).sqrt();
                Ok(blocks(r, [[&zr, &zr], [&c, &zr]]))
            }
        });
        let e_mid = Seq::from_fn(n, {
            let (fac, zr) = (factors.clone(), zr.clone());
            move |k| {
                if k < 0 {
                    return Ok(DMatrix::zeros(n, n));
                }
                let c11 = -(fac.b_inv(k + 1)? * &fac.a);
                let c22 = -fac.polar(k)?;
                Ok(blocks(r, [[&c11, &zr], [&zr, &c22]]))
            }
        });
        let e_up = Seq::from_fn(n, {
            let (fac, zr) = (factors.clone(), zr.clone());
            move |k| {
                if k < 0 {
                    return Ok(DMatrix::zeros(n, n));
                }
                let c = fac.b_inv(k + 1)? * -(2.0 * k as f64 + 2.0).sqrt();
                Ok(blocks(r, [[&zr, &c], [&zr, &zr]]))
            }
        });
        let e = ShiftOperator::from_diags(n, vec![(-1, e_down), (0, e_mid), (1, e_up)]);

        let u = Self::u_operator(&a);
        let transform = DarbouxTransform::new(
            format!("hermite-matrix(r={r})"),
            Arc::new(base.clone()),
            p,
            u,
            f,
            e,
            ExprMatrix::identity(n),
            ExprMatrix::identity(n),
        );
        Ok(HermiteMatrixFamily {
            a,
            r,
            base,
            factors,
            transform,
        })
    }

    fn u_operator(a: &DMatrix<f64>) -> DifferentialOperator {
        let r = a.nrows();
        let n = 2 * r;
        let b0 = ExprMatrix::from_fn(n, |i, j| {
            let (bi, bj) = (i / r, j / r);
            let (ii, jj) = (i % r, j % r);
            if bi == bj {
                if ii == jj {
                    if bi == 0 {
                        ScalarExpr::x()
                    } else {
                        ScalarExpr::x() * -1.0
                    }
                } else {
                    ScalarExpr::zero()
                }
            } else {
                ScalarExpr::constant(-a[(ii, jj)])
            }
        });
        DifferentialOperator::new(vec![b0, ExprMatrix::identity(n)]).expect("consistent sizes")
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn base(&self) -> &ClassicalTriple {
        &self.base
    }

    pub fn transform(&self) -> &DarbouxTransform {
        &self.transform
    }

    pub fn u(&self) -> &DifferentialOperator {
        self.transform.q()
    }

    pub fn cholesky(&self, k: i64) -> Result<DMatrix<f64>> {
        self.factors.b(k)
    }

    /// `H₁(k) = √((k+1)/2) · diag(B_{k+1}⁻¹B_{k+2}, B_kᵀ B_{k+1}⁻ᵀ)`; zero for `k < 0`.
    pub fn h1(&self, k: i64) -> Result<DMatrix<f64>> {
        let n = 2 * self.r;
        if k < 0 {
            return Ok(DMatrix::zeros(n, n));
        }
        let fac = &self.factors;
        let zr = DMatrix::zeros(self.r, self.r);
        let d1 = fac.b_inv(k + 1)? * fac.b(k + 2)?;
        let d2 = fac.b(k)?.transpose() * fac.b_inv(k + 1)?.transpose();
        Ok(blocks(self.r, [[&d1, &zr], [&zr, &d2]]) * ((k as f64 + 1.0) / 2.0).sqrt())
    }

    /// `H₀(k) = [[0, B_{k+1}⁻¹A B_k⁻ᵀ], [B_k⁻¹A B_{k+1}⁻ᵀ, 0]]`.
    pub fn h0(&self, k: i64) -> Result<DMatrix<f64>> {
        let fac = &self.factors;
        let zr = DMatrix::zeros(self.r, self.r);
        let pol = fac.polar(k)?;
        let up = fac.b_inv(k + 1)? * pol.transpose();
        let lo = pol * fac.b_inv(k + 1)?.transpose();
        Ok(blocks(self.r, [[&zr, &up], [&lo, &zr]]))
    }

    /// `H₁(k)𝒮 + H₀(k) + H₁(k−1)ᵀ𝒮⁻¹`, the recurrence operator of `x`.
    pub fn recurrence_operator(&self) -> ShiftOperator {
        let n = 2 * self.r;
        let (s1, s0, s2) = (self.clone(), self.clone(), self.clone());
        ShiftOperator::from_diags(
            n,
            vec![
                (1, Seq::from_fn(n, move |k| s1.h1(k))),
                (0, Seq::from_fn(n, move |k| if k < 0 { Ok(DMatrix::zeros(n, n)) } else { s0.h0(k) })),
                (-1, Seq::from_fn(n, move |k| Ok(s2.h1(k - 1)?.transpose()))),
            ],
        )
    }

    /// Relative defect of the Christoffel–Darboux identity
    /// `(x−y) Σ_{k≤n} Ψ̃(k,x)ᵀΨ̃(k,y) = Ψ̃(n+1,x)ᵀH₁(n)ᵀΨ̃(n,y) − Ψ̃(n,x)ᵀH₁(n)Ψ̃(n+1,y)`.
    pub fn christoffel_darboux_defect(&self, n: i64, x: f64, y: f64) -> Result<f64> {
        let tx = self.psi_range(0, n + 1, x, 0)?;
        let ty = self.psi_range(0, n + 1, y, 0)?;
        let mut k = DMatrix::zeros(2 * self.r, 2 * self.r);
        for j in 0..=n as usize {
            k += tx[j][0].transpose() * &ty[j][0];
        }
        let lhs = k * (x - y);
        let h = self.h1(n)?;
        let (n1, n0) = (n as usize + 1, n as usize);
        let rhs = tx[n1][0].transpose() * h.transpose() * &ty[n0][0]
            - tx[n0][0].transpose() * &h * &ty[n1][0];
        Ok((&lhs - &rhs).amax() / lhs.amax().max(rhs.amax()).max(f64::MIN_POSITIVE))
    }

    /// `UU*` against `diag(−D + A², −D + A² + 2)`.
    pub fn uu_star_defect(&self, xs: &[f64]) -> Result<f64> {
        let u = self.u();
        let lhs = u.compose(&u.adjoint())?;
        let (r, n) = (self.r, 2 * self.r);
        let a2 = &self.a * &self.a;
        let c0 = ExprMatrix::from_fn(n, |i, j| {
            let same_block = i / r == j / r;
            if !same_block {
                return ScalarExpr::zero();
            }
            let (ii, jj) = (i % r, j % r);
            let mut c = a2[(ii, jj)];
            if ii == jj {
                c += if i / r == 1 { 2.0 } else { 0.0 } - 1.0;
                return ScalarExpr::poly(&[c, 0.0, 1.0]);
            }
            ScalarExpr::constant(c)
        });
        let rhs = DifferentialOperator::new(vec![
            c0,
            ExprMatrix::zeros(n),
            ExprMatrix::identity(n).scale(-1.0),
        ])?;
        lhs.relative_difference(&rhs, xs)
    }

    /// `‖P*(F*)⁻¹F⁻¹P − I‖`, computed as `E*E − I` with `E = F⁻¹P`.
    pub fn isometry_defect(&self, ks: &[i64]) -> Result<f64> {
        let e = self.transform.e();
        let ee = e.adjoint().compose(e)?;
        ee.relative_difference(&ShiftOperator::identity(2 * self.r), ks)
    }

    /// Constant `C = diag(A² + (2n+2)I, A² + (2n+2)I)`.
    pub fn shift_constant(&self, n: i64) -> DMatrix<f64> {
        let c = &self.a * &self.a + DMatrix::identity(self.r, self.r) * (2.0 * n as f64 + 2.0);
        let z = DMatrix::zeros(self.r, self.r);
        blocks(self.r, [[&c, &z], [&z, &c]])
    }

    /// The order-2 commuting pair: `U*(t−x)U + x·C` and its shift-side preimage.
    pub fn commuting_pair(&self, n: i64, t: f64) -> Result<FourierPair> {
        self.perturbed_commuting_pair(n, t, 0.0)
    }

    /// `U*(t−x)U + (1 + rel)·x·C`, a negative control for `rel ≠ 0`.
    pub fn perturbed_commuting_pair(&self, n: i64, t: f64, rel: f64) -> Result<FourierPair> {
        let nn = 2 * self.r;
        let tx = FourierPair::identity(nn).scale(t).sub(&self.base.x_pair())?;
        let xc = FourierPair::constant(&self.shift_constant(n))?.compose(&self.base.x_pair())?;
        self.transform
            .inner(&tx)?
            .add(&self.transform.outer(&xc)?.scale(1.0 + rel))
    }

    /// Expanded closed form `∂(x−t)∂ + (tA² + (2n+2)x + tx² − x³) + [[t−2x, A], [A, −t+2x]]`.
    pub fn commuting_operator_expanded(&self, n: i64, t: f64) -> Result<DifferentialOperator> {
        let (r, nn) = (self.r, 2 * self.r);
        let a2 = &self.a * &self.a;
        let nf = n as f64;
        let c0 = ExprMatrix::from_fn(nn, |i, j| {
            let (bi, bj, ii, jj) = (i / r, j / r, i % r, j % r);
            if bi != bj {
                return ScalarExpr::constant(self.a[(ii, jj)]);
            }
            let mut c = vec![t * a2[(ii, jj)], 0.0, 0.0, 0.0];
            if ii == jj {
                let sign = if bi == 0 { 1.0 } else { -1.0 };
                c = vec![t * a2[(ii, jj)] + sign * t, 2.0 * nf + 2.0 - 2.0 * sign, t, -1.0];
            }
            ScalarExpr::poly(&c)
        });
        let c1 = ExprMatrix::identity(nn);
        let c2 = ExprMatrix::scalar(nn, ScalarExpr::poly(&[-t, 1.0]));
        DifferentialOperator::new(vec![c0, c1, c2])
    }

    /// Labelled symmetric candidate pairs spanning the `(4,4)` window before the
    /// bandwidth restriction.
    pub fn candidate_pairs(&self) -> Result<Vec<(String, FourierPair)>> {
        let nn = 2 * self.r;
        let t = &self.transform;
        let x = self.base.x_pair();
        let d = self.base.lambda_pair();
        let id = FourierPair::identity(nn);
        let xs = [id.clone(), x.clone(), x.compose(&x)?];
        let sym = symmetric_units(nn);
        let skew = skew_units(nn);
        let mut out = Vec::new();
        for (j, xj) in xs.iter().enumerate() {
            for kk in 0..2 {
                let w = if kk == 0 { xj.scale(2.0) } else { xj.anticommutator(&d)? };
                for (lab, e) in &sym {
                    let pe = FourierPair::constant(e)?.compose(&w)?;
                    out.push((format!("U*{lab}{{x^{j},D^{kk}}}U"), t.inner(&pe)?));
                }
            }
        }
        for (j, xj) in xs.iter().enumerate().skip(1) {
            let c = xj.commutator(&d)?;
            for (lab, e) in &skew {
                let pe = FourierPair::constant(e)?.compose(&c)?;
                out.push((format!("U*{lab}[x^{j},D]U"), t.inner(&pe)?));
            }
        }
        for (j, xj) in xs.iter().enumerate() {
            for (lab, e) in &sym {
                let pe = FourierPair::constant(e)?.compose(xj)?;
                out.push((format!("{lab}x^{j}"), t.outer(&pe)?));
            }
        }
        for (j, xj) in xs.iter().enumerate().skip(1) {
            let c = xj.commutator(&d)?;
            for (lab, e) in &skew {
                let pe = FourierPair::constant(e)?.compose(&c)?;
                out.push((format!("{lab}[x^{j},D]"), t.outer(&pe)?));
            }
        }
        Ok(out)
    }
}

/// `E_ii` and `E_ij + E_ji`, labelled.
pub fn symmetric_units(n: usize) -> Vec<(String, DMatrix<f64>)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
            out.push((format!("S{i}{j}"), m));
        }
    }
    out
}

/// `E_ij − E_ji` for `i < j`, labelled.
pub fn skew_units(n: usize) -> Vec<(String, DMatrix<f64>)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            out.push((format!("K{i}{j}"), m));
        }
    }
    out
}

impl Bispectral for HermiteMatrixFamily {
    fn name(&self) -> String {
        self.transform.name()
    }

    fn size(&self) -> usize {
        2 * self.r
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

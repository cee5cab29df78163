//! Self-adjoint bispectral Darboux transformations `Ψ̃ = F⁻¹ P·Ψ·G⁻¹` and the
//! worked families built from them, plus the soliton family.

pub mod hermite_matrix;
pub mod laguerre;
pub mod soliton;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::exprmat::ExprMatrix;
use crate::families::{fourier_defect, Bispectral, FourierPair, QuadDomain};
use crate::func::leibniz;
use crate::operators::{DifferentialOperator, Seq, ShiftOperator};

pub use hermite_matrix::HermiteMatrixFamily;
pub use laguerre::LaguerreDarboux;
pub use soliton::SolitonFamily;

/// `Ψ̃(k,x) = F(k)⁻¹ (P·Ψ)(k,x) G(x)⁻¹` with `P·Ψ = Ψ·Q`, for `k ≥ 0`; zero for `k < 0`.
///
/// The shift operator `E = F⁻¹P` is stored instead of `F⁻¹` so that `F` may be
/// singular at isolated indices.
#[derive(Clone)]
pub struct DarbouxTransform {
    name: String,
    base: Arc<dyn Bispectral>,
    p: ShiftOperator,
    q: DifferentialOperator,
    f: Seq,
    e: ShiftOperator,
    g: ExprMatrix,
    g_inv: ExprMatrix,
}

impl std::fmt::Debug for DarbouxTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DarbouxTransform")
            .field("name", &self.name)
            .field("base", &self.base.name())
            .finish()
    }
}

impl DarbouxTransform {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        base: Arc<dyn Bispectral>,
        p: ShiftOperator,
        q: DifferentialOperator,
        f: Seq,
        e: ShiftOperator,
        g: ExprMatrix,
        g_inv: ExprMatrix,
    ) -> Self {
        DarbouxTransform {
            name: name.into(),
            base,
            p,
            q,
            f,
            e,
            g,
            g_inv,
        }
    }

    pub fn base(&self) -> &Arc<dyn Bispectral> {
        &self.base
    }

    pub fn p(&self) -> &ShiftOperator {
        &self.p
    }

    pub fn q(&self) -> &DifferentialOperator {
        &self.q
    }

    pub fn f(&self) -> &Seq {
        &self.f
    }

    /// `E = F⁻¹P`.
    pub fn e(&self) -> &ShiftOperator {
        &self.e
    }

    pub fn g(&self) -> &ExprMatrix {
        &self.g
    }

    pub fn g_inv(&self) -> &ExprMatrix {
        &self.g_inv
    }

    fn mult(&self, m: &ExprMatrix) -> DifferentialOperator {
        DifferentialOperator::multiplication(m.clone())
    }

    /// `(M, R) ↦ (F*MF, G*⁻¹ Q* R Q G⁻¹)`.
    pub fn inner(&self, pair: &FourierPair) -> Result<FourierPair> {
        let fd = ShiftOperator::diagonal(self.f.clone());
        let shift = fd.adjoint().compose(&pair.shift)?.compose(&fd)?;
        let ginv = self.mult(&self.g_inv);
        let diff = ginv
            .adjoint()
            .compose(&self.q.adjoint())?
            .compose(&pair.diff)?
            .compose(&self.q)?
            .compose(&ginv)?;
        Ok(FourierPair::new(shift, diff))
    }

    /// `(M, R) ↦ (F⁻¹P M P*F*⁻¹, G R G*)`.
    pub fn outer(&self, pair: &FourierPair) -> Result<FourierPair> {
        let shift = self.e.compose(&pair.shift)?.compose(&self.e.adjoint())?;
        let g = self.mult(&self.g);
        let diff = g.compose(&pair.diff)?.compose(&g.adjoint())?;
        Ok(FourierPair::new(shift, diff))
    }

    /// `(M, R) ↦ (F⁻¹P M F, G R Q G⁻¹)`; not symmetric in general.
    pub fn mixed(&self, pair: &FourierPair) -> Result<FourierPair> {
        let fd = ShiftOperator::diagonal(self.f.clone());
        let shift = self.e.compose(&pair.shift)?.compose(&fd)?;
        let diff = self
            .mult(&self.g)
            .compose(&pair.diff)?
            .compose(&self.q)?
            .compose(&self.mult(&self.g_inv))?;
        Ok(FourierPair::new(shift, diff))
    }

    /// `X + sign·X*` for `X = mixed(A, B)`: symmetric for `sign = 1`, skew for `sign = −1`.
    pub fn mixed_symmetrized(&self, pair: &FourierPair, sign: f64) -> Result<FourierPair> {
        let m = self.mixed(pair)?;
        m.add(&m.adjoint().scale(sign))
    }

    /// Relative defect between `F Ψ̃` and `Ψ·Q G⁻¹` (the differential-side presentation).
    pub fn presentation_defect(&self, ks: &[i64], xs: &[f64]) -> Result<f64> {
        let order = self.q.order();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for &x in xs {
            let gi = self.g_inv.eval(x)?;
            for &k in ks {
                let lhs = self.f.eval(k)? * self.psi(k, x)?;
                let pd = self.base.psi_derivatives(k, x, order)?;
                let rhs = self.q.apply_at(&pd, x)? * &gi;
                diff = diff.max((&lhs - &rhs).amax());
                scale = scale.max(lhs.amax()).max(rhs.amax());
            }
        }
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }

    /// Defects of the Darboux identities on the `(k, x)` grid.
    pub fn identity_report(&self, ks: &[i64], xs: &[f64]) -> Result<Vec<(String, f64)>> {
        let n = self.size();
        let id = FourierPair::identity(n);
        let base_pq = FourierPair::new(self.p.clone(), self.q.clone());
        let base_adj = base_pq.adjoint();
        Ok(vec![
            (
                "base pair P·Ψ = Ψ·Q".into(),
                fourier_defect(self.base.as_ref(), &base_pq, ks, xs)?,
            ),
            (
                "adjoint pair P*·Ψ = Ψ·Q*".into(),
                fourier_defect(self.base.as_ref(), &base_adj, ks, xs)?,
            ),
            (
                "presentations F⁻¹P·Ψ·G⁻¹ = F⁻¹Ψ·QG⁻¹".into(),
                self.presentation_defect(ks, xs)?,
            ),
            (
                "F*F·Ψ̃ = Ψ̃·G*⁻¹Q*QG⁻¹".into(),
                fourier_defect(self, &self.inner(&id)?, ks, xs)?,
            ),
            (
                "F⁻¹PP*F*⁻¹·Ψ̃ = Ψ̃·GG*".into(),
                fourier_defect(self, &self.outer(&id)?, ks, xs)?,
            ),
        ])
    }
}

impl Bispectral for DarbouxTransform {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn size(&self) -> usize {
        self.base.size()
    }

    fn support(&self) -> (f64, f64) {
        self.base.support()
    }

    fn psi_derivatives(&self, k: i64, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        Ok(self.psi_range(k, k, x, order)?.remove(0))
    }

    fn psi_range(&self, lo: i64, hi: i64, x: f64, order: usize) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let n = self.size();
        let r = self.e.radius() as i64;
        let table = self.base.psi_range(lo - r, hi + r, x, order)?;
        let gi = self.g_inv.eval_derivatives(x, order)?;
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for k in lo..=hi {
            if k < 0 {
                out.push(vec![DMatrix::zeros(n, n); order + 1]);
                continue;
            }
            let mut ep = vec![DMatrix::zeros(n, n); order + 1];
            for (j, s) in self.e.diags() {
                let c = s.eval(k)?;
                let src = &table[(k + j - lo + r) as usize];
                for (d, slot) in ep.iter_mut().enumerate() {
                    *slot += &c * &src[d];
                }
            }
            out.push(leibniz(&ep, &gi, order));
        }
        Ok(out)
    }

    fn quad_domain(&self, lo: f64, hi: f64, kmax: i64) -> QuadDomain {
        self.base.quad_domain(lo, hi, kmax + self.e.radius() as i64)
    }

    fn sample_points(&self, count: usize) -> Vec<f64> {
        self.base.sample_points(count)
    }
}

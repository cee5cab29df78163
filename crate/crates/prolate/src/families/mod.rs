//! Discrete-continuous bispectral functions and their Fourier pairs.

pub mod classical;
pub mod pair;

use nalgebra::DMatrix;

use crate::error::Result;

pub use classical::{ClassicalKind, ClassicalTriple};
pub use pair::FourierPair;

/// Integration data for a family: a finite range that carries all of the mass of
/// `Ψ(k,·)` for the indices in use, plus which ends need graded panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDomain {
    pub lo: f64,
    pub hi: f64,
    pub grade_lo: bool,
    pub grade_hi: bool,
}

/// A matrix-valued function `Ψ(k, x)` on `ℤ × V` with exact `x`-derivatives.
pub trait Bispectral: Send + Sync {
    fn name(&self) -> String;

    /// Matrix size `N`.
    fn size(&self) -> usize;

    /// Support `V = (v0, v1)`; infinite ends allowed.
    fn support(&self) -> (f64, f64);

    /// `Ψ(k,x), ∂ₓΨ(k,x), …, ∂ₓ^order Ψ(k,x)`.
    fn psi_derivatives(&self, k: i64, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>>;

    fn psi(&self, k: i64, x: f64) -> Result<DMatrix<f64>> {
        Ok(self.psi_derivatives(k, x, 0)?.remove(0))
    }

    /// Derivative lists for every `k` in `lo..=hi` at once.
    fn psi_range(&self, lo: i64, hi: i64, x: f64, order: usize) -> Result<Vec<Vec<DMatrix<f64>>>> {
        (lo..=hi).map(|k| self.psi_derivatives(k, x, order)).collect()
    }

    /// Finite integration range adequate for indices up to `kmax`, restricted to `(lo, hi)`.
    fn quad_domain(&self, lo: f64, hi: f64, kmax: i64) -> QuadDomain;

    /// Sample points well inside the support, used for numeric operator checks.
    fn sample_points(&self, count: usize) -> Vec<f64> {
        let (a, b) = self.support();
        let (a, b) = match (a.is_finite(), b.is_finite()) {
            (true, true) => (a + 0.05 * (b - a), b - 0.05 * (b - a)),
            (true, false) => (a + 0.1, a + 6.0),
            (false, true) => (b - 6.0, b - 0.1),
            (false, false) => (-3.0, 3.0),
        };
        (0..count)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
            .collect()
    }
}

/// Max-relative defect `‖P·Ψ − Ψ·R‖` over the sampled grid.
pub fn fourier_defect(
    fam: &dyn Bispectral,
    pair: &FourierPair,
    ks: &[i64],
    xs: &[f64],
) -> Result<f64> {
    let order = pair.diff.order();
    let r = pair.shift.radius() as i64;
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for &x in xs {
        let kmin = ks.iter().min().copied().unwrap_or(0) - r;
        let kmax = ks.iter().max().copied().unwrap_or(0) + r;
        let table = fam.psi_range(kmin, kmax, x, order)?;
        for &k in ks {
            let left = pair
                .shift
                .apply(|j| Ok(table[(j - kmin) as usize][0].clone()), k)?;
            let right = pair.diff.apply_at(&table[(k - kmin) as usize], x)?;
            diff = diff.max((&left - &right).amax());
            scale = scale.max(left.amax()).max(right.amax());
        }
    }
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

//! Time-band limiting kernels `K(x,y)` and `J(m,k)` and the commutation
//! oracles built on them.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::{Bispectral, FourierPair};
use crate::func::MatrixFunction;
use crate::operators::{DifferentialOperator, ShiftOperator};
use crate::quadrature::Quadrature;
use crate::solver::BandWindow;
use crate::testfn::BumpPoly;

/// Index window `I = {k_lo..=k_hi}` and continuous window `(x0, x1)` of a family.
#[derive(Clone, Copy)]
pub struct BandKernel<'a> {
    pub fam: &'a dyn Bispectral,
    pub k_lo: i64,
    pub k_hi: i64,
    pub x0: f64,
    pub x1: f64,
}

/// Relative and absolute size of a commutator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect {
    pub relative: f64,
    pub absolute: f64,
}

/// Settings of the continuous oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    pub panels: usize,
    pub points: usize,
    pub check_points: usize,
    pub poly_degree: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            trials: 8,
            seed: 20240917,
            panels: 40,
            points: 10,
            check_points: 24,
            poly_degree: 3,
        }
    }
}

/// Eigen-residuals of the solved operator on the top eigenvectors of the
/// discretized `T`.
#[derive(Debug, Clone)]
pub struct SpectralCheck {
    pub eigenvalues: Vec<f64>,
    /// Distance to the nearest other Nyström eigenvalue, relative to the largest.
    pub gaps: Vec<f64>,
    pub rayleigh: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl SpectralCheck {
    pub fn max_residual(&self) -> f64 {
        worst(self.residuals.iter().copied())
    }

    /// Largest residual over the eigenpairs whose relative gap exceeds
    /// `gap_floor`, with their count. Inside a tighter cluster the computed
    /// eigenvectors are only fixed up to a rotation of size `ε/gap`.
    pub fn resolved_max_residual(&self, gap_floor: f64) -> (f64, usize) {
        let kept: Vec<f64> = self
            .gaps
            .iter()
            .zip(&self.residuals)
            .filter(|(g, _)| **g > gap_floor)
            .map(|(_, r)| *r)
            .collect();
        (worst(kept.iter().copied()), kept.len())
    }
}

/// Maximum that propagates NaN (`f64::max` silently drops it).
pub fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

impl<'a> BandKernel<'a> {
    pub fn new(fam: &'a dyn Bispectral, k_lo: i64, k_hi: i64, x0: f64, x1: f64) -> Result<Self> {
        let (lo, hi) = fam.support();
        if k_hi < k_lo {
            return Err(Error::Construction(format!("empty index window {k_lo}..={k_hi}")));
        }
        if !(x0 < x1 && x0 >= lo && x1 <= hi) {
            return Err(Error::domain(
                format!("window ({x0}, {x1}) must be a nonempty subinterval of ({lo}, {hi})"),
                x0,
            ));
        }
        Ok(BandKernel { fam, k_lo, k_hi, x0, x1 })
    }

    pub fn from_window(fam: &'a dyn Bispectral, w: &BandWindow) -> Result<Self> {
        Self::new(fam, w.k_lo, w.k_hi, w.x_lo, w.x_hi)
    }

    /// Whole support, indices `k_lo..=k_hi`.
    pub fn full(fam: &'a dyn Bispectral, k_lo: i64, k_hi: i64) -> Result<Self> {
        let (lo, hi) = fam.support();
        Self::new(fam, k_lo, k_hi, lo, hi)
    }

    /// `|I|`.
    pub fn index_count(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }

    /// Finite version of `(x0, x1)` (infinite ends cut by the family's envelope).
    pub fn finite_window(&self) -> (f64, f64) {
        let d = self.fam.quad_domain(self.x0, self.x1, self.k_hi);
        (d.lo, d.hi)
    }

    /// Quadrature on `(x0, x1)`, graded at singular ends.
    pub fn quadrature(&self, panels: usize, points: usize) -> Result<Quadrature> {
        let d = self.fam.quad_domain(self.x0, self.x1, self.k_hi);
        Quadrature::for_domain(&d, panels, points)
    }

    fn check_point(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.fam.support();
        if x.is_finite() && x > lo && x < hi {
            Ok(())
        } else {
            Err(Error::domain(format!("kernel argument outside the support ({lo}, {hi})"), x))
        }
    }

    /// `K(x,y) = Σ_{k∈I} Ψ(k,x)*Ψ(k,y)`.
    pub fn kernel_k(&self, x: f64, y: f64) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let px = self.fam.psi_range(self.k_lo, self.k_hi, x, 0)?;
        let py = self.fam.psi_range(self.k_lo, self.k_hi, y, 0)?;
        let n = self.fam.size();
        let mut k = DMatrix::zeros(n, n);
        for (a, b) in px.iter().zip(&py) {
            k += a[0].transpose() * &b[0];
        }
        Ok(k)
    }

    /// `J(m,k) = ∫_{x0}^{x1} Ψ(m,y)Ψ(k,y)* dy`.
    pub fn kernel_j(&self, quad: &Quadrature, m: i64, k: i64) -> Result<DMatrix<f64>> {
        for i in [m, k] {
            if i < self.k_lo || i > self.k_hi {
                return Err(Error::Window { k: i, lo: self.k_lo, hi: self.k_hi });
            }
        }
        let n = self.fam.size();
        let mut j = DMatrix::zeros(n, n);
        for (y, w) in quad.nodes.iter().zip(&quad.weights) {
            let a = self.fam.psi(m, *y)?;
            let b = self.fam.psi(k, *y)?;
            j += *w * a * b.transpose();
        }
        Ok(j)
    }

    /// All of `J` as a `|I|N × |I|N` block matrix.
    pub fn j_matrix(&self, quad: &Quadrature) -> Result<DMatrix<f64>> {
        let n = self.fam.size();
        let m = self.index_count() * n;
        let mut j = DMatrix::zeros(m, m);
        for (y, w) in quad.nodes.iter().zip(&quad.weights) {
            let t = self.fam.psi_range(self.k_lo, self.k_hi, *y, 0)?;
            let mut col = DMatrix::zeros(m, n);
            for (i, p) in t.iter().enumerate() {
                col.view_mut((i * n, 0), (n, n)).copy_from(&p[0]);
            }
            j += *w * &col * col.transpose();
        }
        if !j.iter().all(|v| v.is_finite()) {
            return Err(Error::Quadrature("non-finite entries in J".into()));
        }
        Ok(j)
    }

    /// Block matrix of `L` on `I`: block `(m, m+j)` is `A_j(m)`; couplings leaving `I` dropped.
    pub fn restrict_shift(&self, l: &ShiftOperator) -> Result<DMatrix<f64>> {
        let n = self.fam.size();
        let m = self.index_count() * n;
        let mut out = DMatrix::zeros(m, m);
        for (j, _) in l.diags() {
            for k in self.k_lo..=self.k_hi {
                let col = k + j;
                if col < self.k_lo || col > self.k_hi {
                    continue;
                }
                let a = l.coeff(j, k)?;
                let r = ((k - self.k_lo) as usize) * n;
                let c = ((col - self.k_lo) as usize) * n;
                out.view_mut((r, c), (n, n)).copy_from(&a);
            }
        }
        Ok(out)
    }

    /// Coefficients `A_j(k)` with `k ∈ I`, `k+j ∉ I` whose entries exceed `tol` relative
    /// to the largest in-window coefficient.
    pub fn boundary_leaks(&self, l: &ShiftOperator, tol: f64) -> Result<Vec<String>> {
        let mut scale = 0.0f64;
        let mut outside = Vec::new();
        for (j, _) in l.diags() {
            for k in self.k_lo..=self.k_hi {
                let a = l.coeff(j, k)?;
                if k + j < self.k_lo || k + j > self.k_hi {
                    outside.push((j, k, a));
                } else {
                    scale = scale.max(a.amax());
                }
            }
        }
        let scale = if scale == 0.0 { 1.0 } else { scale };
        let mut bad = Vec::new();
        for (j, k, a) in outside {
            for r in 0..a.nrows() {
                for c in 0..a.ncols() {
                    if a[(r, c)].abs() > tol * scale {
                        bad.push(format!("A_{j}({k})[{r},{c}] = {:.3e}", a[(r, c)]));
                    }
                }
            }
        }
        Ok(bad)
    }
}

fn defect(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> Defect {
    let mut abs = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        abs = abs.max((x - y).amax());
        scale = scale.max(x.amax()).max(y.amax());
    }
    Defect {
        relative: if scale == 0.0 { abs } else { abs / scale },
        absolute: abs,
    }
}

/// The continuous edge that test functions straddle, and the finite range around it.
fn bump_frame(kern: &BandKernel) -> (f64, f64) {
    let (lo, hi) = kern.fam.support();
    let d = kern.fam.quad_domain(lo, hi, kern.k_hi);
    let edge = if kern.x1 < hi {
        kern.x1
    } else if kern.x0 > lo {
        kern.x0
    } else {
        (d.lo + d.hi) / 2.0
    };
    let span = (edge - d.lo).min(d.hi - edge).min(4.0);
    (edge, span)
}

/// `max_F ‖T(F·R) − (TF)·R‖` over seeded random smooth test functions supported in
/// the family's support and straddling the continuous band edge.
pub fn commutation_defect_continuous(
    kern: &BandKernel,
    r: &DifferentialOperator,
    cfg: &OracleConfig,
) -> Result<Defect> {
    let n = kern.fam.size();
    if r.size() != n {
        return Err(Error::shape(n, r.size()));
    }
    if cfg.trials == 0 {
        return Err(Error::Contract("at least one trial is required".into()));
    }
    let m = r.order();
    let (edge, span) = bump_frame(kern);
    let (wlo, whi) = kern.finite_window();
    let xs: Vec<f64> = (0..cfg.check_points)
        .map(|i| wlo + (whi - wlo) * (0.05 + 0.9 * (i as f64 + 0.5) / cfg.check_points as f64))
        .collect();
    let mut lhs_basis = Vec::with_capacity(xs.len());
    let mut psi_basis = Vec::with_capacity(xs.len());
    for &x in &xs {
        let t = kern.fam.psi_range(kern.k_lo, kern.k_hi, x, m)?;
        let mut applied = Vec::with_capacity(t.len());
        for d in &t {
            applied.push(r.apply_at(d, x)?);
        }
        lhs_basis.push(applied);
        psi_basis.push(t.into_iter().map(|mut d| d.swap_remove(0)).collect::<Vec<_>>());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = Defect { relative: 0.0, absolute: 0.0 };
    for _ in 0..cfg.trials {
        let c = edge - span * rng.random_range(0.3..0.95);
        let d = edge + span * rng.random_range(0.3..0.95);
        let f = BumpPoly::random(n, n, c, d, cfg.poly_degree, rng.random());
        let (a, b) = (c.max(kern.x0), d.min(kern.x1));
        let quad = Quadrature::composite(a, b, cfg.panels, cfg.points)?;
        let mut cm = vec![DMatrix::zeros(n, n); kern.index_count()];
        let mut dm = vec![DMatrix::zeros(n, n); kern.index_count()];
        for (y, w) in quad.nodes.iter().zip(&quad.weights) {
            let fd = f.derivatives(*y, m)?;
            let fr = r.apply_at(&fd, *y)?;
            let t = kern.fam.psi_range(kern.k_lo, kern.k_hi, *y, 0)?;
            for (i, p) in t.iter().enumerate() {
                let pt = p[0].transpose();
                cm[i] += *w * &fd[0] * &pt;
                dm[i] += *w * &fr * &pt;
            }
        }
        let mut tf_r = Vec::with_capacity(xs.len());
        let mut t_fr = Vec::with_capacity(xs.len());
        for (applied, psi) in lhs_basis.iter().zip(&psi_basis) {
            let mut u = DMatrix::zeros(n, n);
            let mut v = DMatrix::zeros(n, n);
            for i in 0..kern.index_count() {
                u += &cm[i] * &applied[i];
                v += &dm[i] * &psi[i];
            }
            tf_r.push(u);
            t_fr.push(v);
        }
        let e = defect(&tf_r, &t_fr);
        if e.relative > worst.relative {
            worst = e;
        }
    }
    Ok(worst)
}

/// `‖JL − LJ‖` on the `|I|N`-dimensional window, with `L` truncated to `I` and
/// no check of the boundary coefficients.
pub fn commutation_defect_discrete_unchecked(
    kern: &BandKernel,
    l: &ShiftOperator,
    quad: &Quadrature,
) -> Result<Defect> {
    if l.size() != kern.fam.size() {
        return Err(Error::shape(kern.fam.size(), l.size()));
    }
    let j = kern.j_matrix(quad)?;
    let lm = kern.restrict_shift(l)?;
    let c = &j * &lm - &lm * &j;
    let abs = c.amax();
    let scale = j.amax() * lm.amax();
    Ok(Defect {
        relative: if scale == 0.0 { abs } else { abs / scale },
        absolute: abs,
    })
}

/// Discrete oracle; fails with a contract error naming every coefficient that
/// couples `I` to its complement above `leak_tol`.
pub fn commutation_defect_discrete(
    kern: &BandKernel,
    l: &ShiftOperator,
    quad: &Quadrature,
    leak_tol: f64,
) -> Result<Defect> {
    let bad = kern.boundary_leaks(l, leak_tol)?;
    if !bad.is_empty() {
        return Err(Error::Contract(format!(
            "boundary coefficients do not vanish on {}..={}: {}",
            kern.k_lo,
            kern.k_hi,
            bad.join(", ")
        )));
    }
    commutation_defect_discrete_unchecked(kern, l, quad)
}

/// Max entry of `J − I` for a full-support kernel.
pub fn orthonormality_defect(kern: &BandKernel, quad: &Quadrature) -> Result<f64> {
    let j = kern.j_matrix(quad)?;
    let m = j.nrows();
    Ok((j - DMatrix::identity(m, m)).amax())
}

/// Nyström discretization of `T` on the window's quadrature nodes; returns the
/// symmetrized matrix `W^{1/2} K W^{1/2}` (block size `N`).
pub fn nystrom_matrix(kern: &BandKernel, quad: &Quadrature) -> Result<DMatrix<f64>> {
    let n = kern.fam.size();
    let cols = psi_columns(kern, quad)?;
    let mut g = DMatrix::zeros(quad.nodes.len() * n, kern.index_count() * n);
    for (i, c) in cols.iter().enumerate() {
        g.view_mut((i * n, 0), (n, kern.index_count() * n)).copy_from(c);
    }
    Ok(&g * g.transpose())
}

/// Row block `i`: `√w_i [Ψ(k_lo, y_i)*, …, Ψ(k_hi, y_i)*]`.
fn psi_columns(kern: &BandKernel, quad: &Quadrature) -> Result<Vec<DMatrix<f64>>> {
    let n = kern.fam.size();
    let mut out = Vec::with_capacity(quad.nodes.len());
    for (y, w) in quad.nodes.iter().zip(&quad.weights) {
        let t = kern.fam.psi_range(kern.k_lo, kern.k_hi, *y, 0)?;
        let mut row = DMatrix::zeros(n, kern.index_count() * n);
        for (k, p) in t.iter().enumerate() {
            row.view_mut((0, k * n), (n, n)).copy_from(&(w.sqrt() * p[0].transpose()));
        }
        out.push(row);
    }
    Ok(out)
}

/// Top `count` eigenvectors `v` of the Nyström matrix and the residuals
/// `‖Rv − (vᵀRv)v‖ / ‖Rv‖`, with `R` applied exactly to the Nyström interpolant.
pub fn spectral_check(
    kern: &BandKernel,
    r: &DifferentialOperator,
    quad: &Quadrature,
    count: usize,
) -> Result<SpectralCheck> {
    let n = kern.fam.size();
    if r.size() != n {
        return Err(Error::shape(n, r.size()));
    }
    let m = r.order();
    let mut applied = Vec::with_capacity(quad.nodes.len());
    for y in &quad.nodes {
        let tab = kern.fam.psi_range(kern.k_lo, kern.k_hi, *y, m)?;
        let mut rows = Vec::with_capacity(tab.len());
        for d in &tab {
            rows.push(r.apply_at(d, *y)?);
        }
        applied.push(rows);
    }
    spectral_residuals(kern, quad, count, &applied)
}

/// As [`spectral_check`], but `Ψ(k)·R` is evaluated as `(L·Ψ)(k)` through the
/// shift side of the pair. No derivatives are taken, so the result stays
/// accurate at nodes close to a singular endpoint.
pub fn spectral_check_pair(
    kern: &BandKernel,
    pair: &FourierPair,
    quad: &Quadrature,
    count: usize,
) -> Result<SpectralCheck> {
    let n = kern.fam.size();
    if pair.shift.size() != n {
        return Err(Error::shape(n, pair.shift.size()));
    }
    let rad = pair.shift.radius() as i64;
    let (lo, hi) = (kern.k_lo, kern.k_hi);
    let fam_lo = (lo - rad).max(0);
    let mut applied = Vec::with_capacity(quad.nodes.len());
    for y in &quad.nodes {
        let tab = kern.fam.psi_range(fam_lo, hi + rad, *y, 0)?;
        let mut rows = Vec::with_capacity(kern.index_count());
        for k in lo..=hi {
            let mut acc = DMatrix::zeros(n, n);
            for (j, a) in pair.shift.diags() {
                // Ψ vanishes below the first index; its coefficient may not be finite there
                if k + j >= fam_lo {
                    acc += a.eval(k)? * &tab[(k + j - fam_lo) as usize][0];
                }
            }
            rows.push(acc);
        }
        applied.push(rows);
    }
    spectral_residuals(kern, quad, count, &applied)
}

/// `applied[i][k]` is `(Ψ(k_lo + k)·R)(y_i)`.
fn spectral_residuals(
    kern: &BandKernel,
    quad: &Quadrature,
    count: usize,
    applied: &[Vec<DMatrix<f64>>],
) -> Result<SpectralCheck> {
    let n = kern.fam.size();
    let t = nystrom_matrix(kern, quad)?;
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let cols = psi_columns(kern, quad)?;
    let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let top = sorted.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let mut out = SpectralCheck {
        eigenvalues: Vec::new(),
        gaps: Vec::new(),
        rayleigh: Vec::new(),
        residuals: Vec::new(),
    };
    for (pos, &idx) in order.iter().enumerate().take(count) {
        let above = if pos > 0 { sorted[pos - 1] - sorted[pos] } else { f64::INFINITY };
        let below = sorted.get(pos + 1).map_or(f64::INFINITY, |b| sorted[pos] - b);
        out.gaps.push(above.min(below) / top);
        let mu = eig.eigenvalues[idx];
        let v = eig.eigenvectors.column(idx).into_owned();
        // expansion coefficients of the interpolant φ = Σ a_k Ψ(k,·)
        let mut a = DMatrix::zeros(1, kern.index_count() * n);
        for (i, c) in cols.iter().enumerate() {
            let vi = v.rows(i * n, n).transpose();
            a += &vi * c;
        }
        a /= mu;
        let mut rv = nalgebra::DVector::zeros(v.len());
        for (i, (rows, w)) in applied.iter().zip(&quad.weights).enumerate() {
            let mut s = DMatrix::zeros(1, n);
            for (k, rk) in rows.iter().enumerate() {
                s += a.columns(k * n, n) * rk;
            }
            for c in 0..n {
                rv[i * n + c] = w.sqrt() * s[(0, c)];
            }
        }
        let rho = v.dot(&rv);
        let res = (&rv - rho * &v).norm() / rv.norm().max(f64::MIN_POSITIVE);
        out.eigenvalues.push(mu);
        out.rayleigh.push(rho);
        out.residuals.push(res);
    }
    Ok(out)
}

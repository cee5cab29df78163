//! Bilinear concomitants: the boundary forms left over by integration and
//! summation by parts against the formal adjoint.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exprmat::ExprMatrix;
use crate::func::{binom, MatrixFunction};
use crate::operators::canonical::{symmetric_form_diff, symmetric_form_shift};
use crate::operators::{DifferentialOperator, ShiftOperator};
use crate::quadrature::Quadrature;

/// `𝒞_D(F,G;x) = Σⱼ Σ_{i<j} (−1)ⁱ F^{(j−1−i)} ((G Aⱼᵀ)^{(i)})ᵀ` for `D = Σ ∂ʲ Aⱼ`.
pub fn continuous_concomitant(
    d: &DifferentialOperator,
    f: &dyn MatrixFunction,
    g: &dyn MatrixFunction,
    x: f64,
) -> Result<DMatrix<f64>> {
    let m = d.order();
    let fd = f.derivatives(x, m.saturating_sub(1))?;
    let gd = g.derivatives(x, m.saturating_sub(1))?;
    check_derivs(&fd, m)?;
    check_derivs(&gd, m)?;
    let mut out = DMatrix::zeros(fd[0].nrows(), gd[0].nrows());
    for j in 1..=m {
        let aj = d.coeff(j).eval_derivatives(x, j - 1)?;
        for i in 0..j {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            // ((G Aᵀ)^{(i)})ᵀ = Σ_l C(i,l) A^{(i−l)} G^{(l)ᵀ}
            let mut inner = DMatrix::zeros(aj[0].nrows(), gd[0].nrows());
            for l in 0..=i {
                inner += binom(i, l) * (&aj[i - l] * gd[l].transpose());
            }
            out += sign * (&fd[j - 1 - i] * inner);
        }
    }
    Ok(out)
}

fn check_derivs(d: &[DMatrix<f64>], m: usize) -> Result<()> {
    if d.len() < m.max(1) {
        return Err(Error::Contract(format!(
            "test function supplied {} derivatives, {} needed",
            d.len(),
            m
        )));
    }
    Ok(())
}

/// Block form `𝒞_D(F,G;x) = Σ_{a,b} F^{(a)} C_{a,b}(x) G^{(b)ᵀ}` with `0 ≤ a, b < m`.
#[derive(Debug, Clone)]
pub struct ConcomitantMatrix {
    pub order: usize,
    /// `blocks[a][b]`
    pub blocks: Vec<Vec<ExprMatrix>>,
}

impl ConcomitantMatrix {
    pub fn new(d: &DifferentialOperator) -> Result<Self> {
        let m = d.order();
        let n = d.size();
        // derivative tables A_j^{(s)} as expressions
        let mut ders: Vec<Vec<ExprMatrix>> = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let mut v = vec![d.coeff(j)];
            for s in 1..j {
                let next = v[s - 1].differentiate();
                v.push(next);
            }
            ders.push(v);
        }
        let mut blocks = vec![vec![ExprMatrix::zeros(n); m]; m];
        for (a, row) in blocks.iter_mut().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                let mut acc = ExprMatrix::zeros(n);
                for j in (a + b + 1)..=m {
                    let e = j - 1 - a;
                    let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
                    acc = acc.add(&ders[j][e - b].scale(sign * binom(e, b)))?;
                }
                *slot = acc;
            }
        }
        Ok(ConcomitantMatrix { order: m, blocks })
    }

    /// The `mN × mN` numeric block matrix at `x`.
    pub fn eval(&self, x: f64) -> Result<DMatrix<f64>> {
        let m = self.order;
        if m == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        let n = self.blocks[0][0].size();
        let mut out = DMatrix::zeros(m * n, m * n);
        for a in 0..m {
            for b in 0..m {
                out.view_mut((a * n, b * n), (n, n))
                    .copy_from(&self.blocks[a][b].eval(x)?);
            }
        }
        Ok(out)
    }

    /// Quadratic-form evaluation `Σ F^{(a)} C_{a,b} G^{(b)ᵀ}`.
    pub fn apply(
        &self,
        f: &dyn MatrixFunction,
        g: &dyn MatrixFunction,
        x: f64,
    ) -> Result<DMatrix<f64>> {
        let m = self.order;
        let fd = f.derivatives(x, m.saturating_sub(1))?;
        let gd = g.derivatives(x, m.saturating_sub(1))?;
        let mut out = DMatrix::zeros(fd[0].nrows(), gd[0].nrows());
        for a in 0..m {
            for b in 0..m {
                let c = self.blocks[a][b].eval(x)?;
                out += &fd[a] * c * gd[b].transpose();
            }
        }
        Ok(out)
    }
}

/// `∫_{x0}^{x1} [(F·D)Gᵀ − F(G·D*)ᵀ] dx − [𝒞_D(F,G;x1) − 𝒞_D(F,G;x0)]` over the
/// interval of `quad`. An infinite end of the true interval is passed as `None`,
/// where the concomitant is taken to be 0.
pub fn continuous_adjointability_defect(
    d: &DifferentialOperator,
    f: &dyn MatrixFunction,
    g: &dyn MatrixFunction,
    quad: &Quadrature,
    ends: (Option<f64>, Option<f64>),
) -> Result<DMatrix<f64>> {
    let ds = d.adjoint();
    let probe = f.derivatives(quad.nodes[0], 0)?;
    let rows = probe[0].nrows();
    let cols = g.derivatives(quad.nodes[0], 0)?[0].nrows();
    let mut integral = DMatrix::zeros(rows, cols);
    for (x, w) in quad.nodes.iter().zip(&quad.weights) {
        let fd = d.apply(f, *x)?;
        let gd = ds.apply(g, *x)?;
        let fv = f.derivatives(*x, 0)?.remove(0);
        let gv = g.derivatives(*x, 0)?.remove(0);
        integral += *w * (fd * gv.transpose() - fv * gd.transpose());
    }
    if let Some(x1) = ends.1 {
        integral -= continuous_concomitant(d, f, g, x1)?;
    }
    if let Some(x0) = ends.0 {
        integral += continuous_concomitant(d, f, g, x0)?;
    }
    Ok(integral)
}

/// `𝒞_{𝒮ⁿ}(F,G;z) = Σ_{i=1}^n F(z+i)ᵀ G(z+i−n)`.
fn shift_power_concomitant<F, G>(f: &F, g: &G, n: i64, z: i64) -> Result<DMatrix<f64>>
where
    F: Fn(i64) -> Result<DMatrix<f64>>,
    G: Fn(i64) -> Result<DMatrix<f64>>,
{
    let mut acc: Option<DMatrix<f64>> = None;
    for i in 1..=n {
        let term = f(z + i)?.transpose() * g(z + i - n)?;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.ok_or_else(|| Error::Contract("empty shift concomitant".into()))
}

/// Discrete concomitant `Σₙ [𝒞_{𝒮ⁿ}(F, AₙᵀG; z) − 𝒞_{𝒮ⁿ}(A₋ₙᵀG, F; z)ᵀ]`.
pub fn discrete_concomitant<F, G>(l: &ShiftOperator, f: F, g: G, z: i64) -> Result<DMatrix<f64>>
where
    F: Fn(i64) -> Result<DMatrix<f64>>,
    G: Fn(i64) -> Result<DMatrix<f64>>,
{
    let cols = f(z)?.ncols();
    let gcols = g(z)?.ncols();
    let mut out = DMatrix::zeros(cols, gcols);
    for (j, a) in l.diags() {
        if j == 0 {
            continue;
        }
        let h = |k: i64| -> Result<DMatrix<f64>> { Ok(a.eval(k)?.transpose() * g(k)?) };
        if j > 0 {
            out += shift_power_concomitant(&f, &h, j, z)?;
        } else {
            out -= shift_power_concomitant(&h, &f, -j, z)?.transpose();
        }
    }
    Ok(out)
}

/// `Σ_{k=m}^{n} [(L·F)(k)ᵀG(k) − F(k)ᵀ(L*·G)(k)] − [𝒞_L(F,G;n) − 𝒞_L(F,G;m−1)]`.
pub fn discrete_adjointability_defect<F, G>(
    l: &ShiftOperator,
    f: F,
    g: G,
    m: i64,
    n: i64,
) -> Result<DMatrix<f64>>
where
    F: Fn(i64) -> Result<DMatrix<f64>>,
    G: Fn(i64) -> Result<DMatrix<f64>>,
{
    if m > n {
        return Err(Error::Contract(format!("empty summation window {m}..={n}")));
    }
    let ls = l.adjoint();
    let mut acc = DMatrix::zeros(f(m)?.ncols(), g(m)?.ncols());
    for k in m..=n {
        acc += l.apply(&f, k)?.transpose() * g(k)? - f(k)?.transpose() * ls.apply(&g, k)?;
    }
    acc -= discrete_concomitant(l, &f, &g, n)?;
    acc += discrete_concomitant(l, &f, &g, m - 1)?;
    Ok(acc)
}

/// Conditions making the concomitant of a formally symmetric operator vanish at an edge.
pub enum Boundary<'a> {
    Discrete { op: &'a ShiftOperator, k1: i64, samples: &'a [i64] },
    Continuous { op: &'a DifferentialOperator, x1: f64, samples: &'a [f64] },
}

/// Named matrix blocks that must vanish; symmetry of the operator is checked first.
pub fn concomitant_vanishing_conditions(b: Boundary<'_>) -> Result<Vec<(String, DMatrix<f64>)>> {
    match b {
        Boundary::Discrete { op, k1, samples } => {
            symmetric_form_shift(op, samples)?.vanishing_conditions(k1)
        }
        Boundary::Continuous { op, x1, samples } => {
            symmetric_form_diff(op, samples)?.vanishing_conditions(x1)
        }
    }
}

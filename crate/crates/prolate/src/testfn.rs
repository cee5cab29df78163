//! Smooth compactly supported matrix test functions: a C∞ bump times a
//! random polynomial matrix.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::ScalarExpr;
use crate::exprmat::ExprMatrix;
use crate::func::MatrixFunction;

/// `exp(-1/(1 - s²))` with `s` the affine map of `(c, d)` onto `(-1, 1)`; zero outside.
#[derive(Debug, Clone)]
pub struct Bump {
    pub c: f64,
    pub d: f64,
    inner: ScalarExpr,
}

impl Bump {
    pub fn new(c: f64, d: f64) -> Self {
        assert!(d > c, "bump support must be a nonempty interval");
        let m = 2.0 / (d - c);
        let s = ScalarExpr::poly(&[-(c + d) / (d - c), m]);
        let one_minus_s2 = 1.0 - s.powi(2);
        let inner = (ScalarExpr::constant(-1.0) / one_minus_s2).exp();
        Bump { c, d, inner }
    }

    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if x <= self.c || x >= self.d {
            return Ok(vec![0.0; order + 1]);
        }
        self.inner.eval_derivatives(x, order)
    }
}

/// `bump(x) · P(x)` with `P` a polynomial matrix (`rows × cols`).
#[derive(Debug, Clone)]
pub struct BumpPoly {
    pub bump: Bump,
    pub poly: Vec<ExprMatrixRect>,
}

/// Rectangular polynomial matrix stored row-major.
#[derive(Debug, Clone)]
pub struct ExprMatrixRect {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<ScalarExpr>,
}

impl ExprMatrixRect {
    pub fn eval_derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        let mut out = vec![DMatrix::zeros(self.rows, self.cols); order + 1];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self.data[i * self.cols + j].eval_derivatives(x, order)?;
                for (o, v) in d.into_iter().enumerate() {
                    out[o][(i, j)] = v;
                }
            }
        }
        Ok(out)
    }
}

impl From<ExprMatrix> for ExprMatrixRect {
    fn from(m: ExprMatrix) -> Self {
        let n = m.size();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m.get(i, j).clone());
            }
        }
        ExprMatrixRect { rows: n, cols: n, data }
    }
}

impl BumpPoly {
    /// Random polynomial entries of degree `deg` centred on the support, seeded.
    pub fn random(rows: usize, cols: usize, c: f64, d: f64, deg: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mid = (c + d) / 2.0;
        let half = (d - c) / 2.0;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            // coefficients in the scaled variable (x - mid)/half
            let u: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = ScalarExpr::poly(&[-mid / half, 1.0 / half]);
            data.push(ScalarExpr::poly_of(&u, s));
        }
        BumpPoly {
            bump: Bump::new(c, d),
            poly: vec![ExprMatrixRect { rows, cols, data }],
        }
    }

    pub fn rows(&self) -> usize {
        self.poly[0].rows
    }

    pub fn cols(&self) -> usize {
        self.poly[0].cols
    }
}

impl MatrixFunction for BumpPoly {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        let b = self.bump.derivatives(x, order)?;
        let (r, c) = (self.rows(), self.cols());
        if b.iter().all(|v| *v == 0.0) {
            return Ok(vec![DMatrix::zeros(r, c); order + 1]);
        }
        let p = self.poly[0].eval_derivatives(x, order)?;
        let mut out = vec![DMatrix::zeros(r, c); order + 1];
        for (e, slot) in out.iter_mut().enumerate() {
            for i in 0..=e {
                *slot += crate::func::binom(e, i) * b[i] * &p[e - i];
            }
        }
        Ok(out)
    }
}

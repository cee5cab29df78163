//! Banded matrix shift operators `Σ Aⱼ(k) 𝒮ʲ` acting on functions of `k ∈ ℤ`
//! by `(L·F)(k) = Σ Aⱼ(k) F(k+j)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

type SeqEval = dyn Fn(i64) -> Result<DMatrix<f64>> + Send + Sync;

/// A matrix-valued sequence `k ↦ A(k)`, optionally restricted to a window.
#[derive(Clone)]
pub struct Seq {
    n: usize,
    f: Arc<SeqEval>,
    window: Option<(i64, i64)>,
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Seq")
            .field("n", &self.n)
            .field("window", &self.window)
            .finish()
    }
}

impl Seq {
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(i64) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        Seq {
            n,
            f: Arc::new(f),
            window: None,
        }
    }

    /// `a(k) · I_n`.
    pub fn scalar<F>(n: usize, a: F) -> Self
    where
        F: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(n, move |k| Ok(DMatrix::identity(n, n) * a(k)))
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, move |_| Ok(m.clone()))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// Precomputed values on `[lo, lo + values.len() - 1]`; evaluation outside is an error.
    pub fn tabulated(lo: i64, values: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = values
            .first()
            .map(|v| v.nrows())
            .ok_or_else(|| Error::Construction("empty tabulated sequence".into()))?;
        let hi = lo + values.len() as i64 - 1;
        let vals = Arc::new(values);
        Ok(Seq {
            n,
            f: Arc::new(move |k| {
                if k < lo || k > hi {
                    return Err(Error::Window { k, lo, hi });
                }
                Ok(vals[(k - lo) as usize].clone())
            }),
            window: Some((lo, hi)),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        self.window
    }

    pub fn eval(&self, k: i64) -> Result<DMatrix<f64>> {
        if let Some((lo, hi)) = self.window {
            if k < lo || k > hi {
                return Err(Error::Window { k, lo, hi });
            }
        }
        let v = (self.f)(k)?;
        if v.nrows() != self.n || v.ncols() != self.n {
            return Err(Error::shape(
                format!("{0}x{0}", self.n),
                format!("{}x{}", v.nrows(), v.ncols()),
            ));
        }
        Ok(v)
    }

    /// `k ↦ A(k + s)`.
    pub fn shifted(&self, s: i64) -> Seq {
        let f = self.clone();
        Seq {
            n: self.n,
            f: Arc::new(move |k| f.eval(k + s)),
            window: self.window.map(|(lo, hi)| (lo - s, hi - s)),
        }
    }

    /// Pointwise product `A(k) B(k)`.
    pub fn mul(&self, o: &Seq) -> Seq {
        let (a, b) = (self.clone(), o.clone());
        Seq {
            n: self.n,
            f: Arc::new(move |k| Ok(a.eval(k)? * b.eval(k)?)),
            window: intersect(self.window, o.window),
        }
    }

    pub fn add(&self, o: &Seq) -> Seq {
        let (a, b) = (self.clone(), o.clone());
        Seq {
            n: self.n,
            f: Arc::new(move |k| Ok(a.eval(k)? + b.eval(k)?)),
            window: intersect(self.window, o.window),
        }
    }

    pub fn scale(&self, s: f64) -> Seq {
        let a = self.clone();
        Seq {
            n: self.n,
            f: Arc::new(move |k| Ok(a.eval(k)? * s)),
            window: self.window,
        }
    }

    pub fn transpose(&self) -> Seq {
        let a = self.clone();
        Seq {
            n: self.n,
            f: Arc::new(move |k| Ok(a.eval(k)?.transpose())),
            window: self.window,
        }
    }

    /// Freeze the values on `[lo, hi]`.
    pub fn tabulate(&self, lo: i64, hi: i64) -> Result<Seq> {
        let vals = (lo..=hi).map(|k| self.eval(k)).collect::<Result<Vec<_>>>()?;
        Seq::tabulated(lo, vals)
    }
}

fn intersect(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    match (a, b) {
        (None, w) | (w, None) => w,
        (Some((l1, h1)), Some((l2, h2))) => Some((l1.max(l2), h1.min(h2))),
    }
}

#[derive(Debug, Clone)]
pub struct ShiftOperator {
    n: usize,
    diags: BTreeMap<i64, Seq>,
}

impl ShiftOperator {
    pub fn zero(n: usize) -> Self {
        ShiftOperator {
            n,
            diags: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(Seq::identity(n))
    }

    /// Multiplication by a sequence, `A(k) 𝒮⁰`.
    pub fn diagonal(a: Seq) -> Self {
        Self::from_diags(a.size(), vec![(0, a)])
    }

    /// Multiplication by a scalar sequence times `I_n`.
    pub fn scalar_diagonal<F>(n: usize, a: F) -> Self
    where
        F: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        Self::diagonal(Seq::scalar(n, a))
    }

    /// Pure shift `𝒮ʲ · I_n`.
    pub fn shift(n: usize, j: i64) -> Self {
        Self::from_diags(n, vec![(j, Seq::identity(n))])
    }

    pub fn from_diags(n: usize, diags: Vec<(i64, Seq)>) -> Self {
        let mut map: BTreeMap<i64, Seq> = BTreeMap::new();
        for (j, s) in diags {
            assert_eq!(s.size(), n, "diagonal size mismatch");
            let merged = match map.remove(&j) {
                Some(prev) => prev.add(&s),
                None => s,
            };
            map.insert(j, merged);
        }
        ShiftOperator { n, diags: map }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn diags(&self) -> impl Iterator<Item = (i64, &Seq)> {
        self.diags.iter().map(|(j, s)| (*j, s))
    }

    /// Structural band radius.
    pub fn radius(&self) -> usize {
        self.diags.keys().map(|j| j.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Bandwidth with the factor-2 convention: `2 · radius`.
    pub fn bandwidth(&self) -> usize {
        2 * self.radius()
    }

    /// Coefficient of `𝒮ʲ` at `k` (zero if the diagonal is absent).
    pub fn coeff(&self, j: i64, k: i64) -> Result<DMatrix<f64>> {
        match self.diags.get(&j) {
            Some(s) => s.eval(k),
            None => Ok(DMatrix::zeros(self.n, self.n)),
        }
    }

    /// Band radius detected numerically over the sample indices.
    pub fn effective_radius(&self, ks: &[i64], tol: f64) -> Result<usize> {
        let mut norms: Vec<(i64, f64)> = Vec::new();
        for (&j, s) in &self.diags {
            let mut m = 0.0f64;
            for &k in ks {
                m = m.max(s.eval(k)?.amax());
            }
            norms.push((j, m));
        }
        let scale = norms.iter().map(|p| p.1).fold(0.0, f64::max);
        Ok(norms
            .iter()
            .filter(|p| p.1 > tol * scale)
            .map(|p| p.0.unsigned_abs() as usize)
            .max()
            .unwrap_or(0))
    }

    fn check(&self, o: &ShiftOperator) -> Result<()> {
        if self.n != o.n {
            return Err(Error::shape(self.n, o.n));
        }
        Ok(())
    }

    pub fn add(&self, o: &ShiftOperator) -> Result<ShiftOperator> {
        self.check(o)?;
        let mut d: Vec<(i64, Seq)> = self.diags.iter().map(|(j, s)| (*j, s.clone())).collect();
        d.extend(o.diags.iter().map(|(j, s)| (*j, s.clone())));
        Ok(Self::from_diags(self.n, d))
    }

    pub fn sub(&self, o: &ShiftOperator) -> Result<ShiftOperator> {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> ShiftOperator {
        ShiftOperator {
            n: self.n,
            diags: self.diags.iter().map(|(j, a)| (*j, a.scale(s))).collect(),
        }
    }

    /// `(self ∘ o)·F = self·(o·F)`, using `𝒮ᵃ B(k) = B(k+a) 𝒮ᵃ`.
    pub fn compose(&self, o: &ShiftOperator) -> Result<ShiftOperator> {
        self.check(o)?;
        let mut d = Vec::new();
        for (&a, sa) in &self.diags {
            for (&b, sb) in &o.diags {
                d.push((a + b, sa.mul(&sb.shifted(a))));
            }
        }
        Ok(Self::from_diags(self.n, d))
    }

    /// Formal adjoint `Σ Aₙ(k−n)ᵀ 𝒮⁻ⁿ`.
    pub fn adjoint(&self) -> ShiftOperator {
        let d = self
            .diags
            .iter()
            .map(|(&j, s)| (-j, s.shifted(-j).transpose()))
            .collect();
        Self::from_diags(self.n, d)
    }

    pub fn anticommutator(&self, o: &ShiftOperator) -> Result<ShiftOperator> {
        self.compose(o)?.add(&o.compose(self)?)
    }

    pub fn commutator(&self, o: &ShiftOperator) -> Result<ShiftOperator> {
        self.compose(o)?.sub(&o.compose(self)?)
    }

    /// Left multiplication by a sequence: `A(k) · self`.
    pub fn left_mul(&self, a: &Seq) -> ShiftOperator {
        ShiftOperator::diagonal(a.clone())
            .compose(self)
            .expect("sizes checked by caller")
    }

    /// `(L·F)(k)`.
    pub fn apply<F>(&self, f: F, k: i64) -> Result<DMatrix<f64>>
    where
        F: Fn(i64) -> Result<DMatrix<f64>>,
    {
        let mut acc: Option<DMatrix<f64>> = None;
        for (&j, s) in &self.diags {
            let fv = f(k + j)?;
            if fv.nrows() != self.n {
                return Err(Error::shape(self.n, fv.nrows()));
            }
            let term = s.eval(k)? * fv;
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => {
                let cols = f(k)?.ncols();
                Ok(DMatrix::zeros(self.n, cols))
            }
        }
    }

    /// Freeze every diagonal on `[lo, hi]` (for repeated evaluation).
    pub fn tabulate(&self, lo: i64, hi: i64) -> Result<ShiftOperator> {
        let mut diags = BTreeMap::new();
        for (&j, s) in &self.diags {
            diags.insert(j, s.tabulate(lo, hi)?);
        }
        Ok(ShiftOperator { n: self.n, diags })
    }

    /// Max-norm coefficient difference over `ks`, relative to the coefficient scale.
    pub fn relative_difference(&self, o: &ShiftOperator, ks: &[i64]) -> Result<f64> {
        let mut js: Vec<i64> = self.diags.keys().chain(o.diags.keys()).cloned().collect();
        js.sort_unstable();
        js.dedup();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for &j in &js {
            for &k in ks {
                let a = self.coeff(j, k)?;
                let b = o.coeff(j, k)?;
                diff = diff.max((&a - &b).amax());
                scale = scale.max(a.amax()).max(b.amax());
            }
        }
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }
}

//! Composite Gauss–Legendre quadrature, optionally graded toward endpoints
//! where the integrand has an algebraic singularity.

use crate::error::{Error, Result};
use crate::families::QuadDomain;

/// Number of geometric refinement levels at a graded end.
const GRADE_LEVELS: usize = 24;
const GRADE_RATIO: f64 = 0.2;

/// Smallest grading offset that keeps nodes distinct from the endpoint `e`.
fn min_offset(e: f64) -> f64 {
    256.0 * f64::EPSILON * e.abs().max(f64::MIN_POSITIVE.sqrt())
}

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    pub grade_lo: bool,
    pub grade_hi: bool,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let n = points;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

impl Quadrature {
    /// `panels` equal panels of `points` nodes on `[lo, hi]`.
    pub fn composite(lo: f64, hi: f64, panels: usize, points: usize) -> Result<Self> {
        Self::graded(lo, hi, panels, points, false, false)
    }

    /// Equal panels, with the first/last panel replaced by geometrically shrinking
    /// panels when `grade_lo`/`grade_hi` is set.
    pub fn graded(
        lo: f64,
        hi: f64,
        panels: usize,
        points: usize,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Quadrature(format!(
                "interval ({lo}, {hi}) must be finite; truncate infinite ends first"
            )));
        }
        if hi <= lo || panels == 0 || points == 0 {
            return Err(Error::Quadrature(format!(
                "empty rule: interval ({lo}, {hi}), {panels} panels, {points} points"
            )));
        }
        let h = (hi - lo) / panels as f64;
        let mut breaks: Vec<f64> = (0..=panels).map(|i| lo + h * i as f64).collect();
        breaks[panels] = hi;
        if grade_lo {
            let first = breaks[1];
            let mut g: Vec<f64> = (1..=GRADE_LEVELS)
                .rev()
                .map(|l| (first - lo) * GRADE_RATIO.powi(l as i32))
                .filter(|&off| off > min_offset(lo))
                .map(|off| lo + off)
                .collect();
            g.insert(0, lo);
            breaks.splice(0..1, g);
        }
        if grade_hi {
            let m = breaks.len();
            let last = breaks[m - 2];
            let g: Vec<f64> = (1..=GRADE_LEVELS)
                .map(|l| (hi - last) * GRADE_RATIO.powi(l as i32))
                .filter(|&off| off > min_offset(hi))
                .map(|off| hi - off)
                .chain(std::iter::once(hi))
                .collect();
            breaks.splice(m - 1..m, g);
        }
        let (gx, gw) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * points);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for win in breaks.windows(2) {
            let (a, b) = (win[0], win[1]);
            let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(c + r * x);
                weights.push(r * w);
            }
        }
        Ok(Quadrature {
            nodes,
            weights,
            panels,
            points,
            lo,
            hi,
            grade_lo,
            grade_hi,
        })
    }

    pub fn for_domain(d: &QuadDomain, panels: usize, points: usize) -> Result<Self> {
        Self::graded(d.lo, d.hi, panels, points, d.grade_lo, d.grade_hi)
    }

    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(*x)?;
        }
        Ok(s)
    }

    /// Same rule with twice as many panels.
    pub fn refined(&self) -> Result<Self> {
        Self::graded(
            self.lo,
            self.hi,
            self.panels * 2,
            self.points,
            self.grade_lo,
            self.grade_hi,
        )
    }
}

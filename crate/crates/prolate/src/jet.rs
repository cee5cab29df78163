//! Truncated Taylor series ("jets") about a point.
//!
//! A jet of order `d` stores `c[i] = f^{(i)}(x) / i!` for `i = 0..=d`. Arithmetic
//! on jets propagates exact derivatives, which is how every expression and wave
//! function in this crate is differentiated numerically.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function `x ↦ x` expanded at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut j = Jet::constant(x, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn from_taylor(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "a jet needs at least one coefficient");
        Jet { c }
    }

    /// Build from derivative values `f, f', f'', ...`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        Jet {
            c: d.iter().enumerate().map(|(i, v)| v / factorial(i)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn taylor(&self) -> &[f64] {
        &self.c
    }

    /// `i`-th derivative.
    pub fn derivative(&self, i: usize) -> f64 {
        self.c[i] * factorial(i)
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..self.c.len()).map(|i| self.derivative(i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![0.0; n];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (0..=k).map(|i| self.c[i] * o.c[k - i]).sum();
        }
        Jet { c }
    }

    /// Multiply by the variable shifted to the expansion point, i.e. `(t - x0 + x0)`
    /// when the jet is about `x0`. Used by polynomial recurrences.
    pub fn mul_variable(&self, x: f64) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        for k in 0..c.len() {
            c[k] = x * self.c[k] + if k > 0 { self.c[k - 1] } else { 0.0 };
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet, at: f64) -> Result<Jet> {
        let b0 = o.c[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(Error::domain("division by a vanishing denominator", at));
        }
        let n = self.c.len().min(o.c.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|i| o.c[i] * q[k - i]).sum();
            q[k] = (self.c[k] - s) / b0;
        }
        Ok(Jet { c: q })
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|i| i as f64 * self.c[i] * e[k - i]).sum();
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    /// `(sinh u, cosh u)` together.
    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sinh();
        c[0] = self.c[0].cosh();
        for k in 1..n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for i in 1..=k {
                ss += i as f64 * self.c[i] * c[k - i];
                cc += i as f64 * self.c[i] * s[k - i];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    /// `tanh u`, via `t' = (1 - t²) u'`; stays finite for large arguments.
    pub fn tanh(&self) -> Jet {
        let n = self.c.len();
        let mut t = vec![0.0; n];
        let mut one_minus_t2 = vec![0.0; n];
        t[0] = self.c[0].tanh();
        one_minus_t2[0] = 1.0 - t[0] * t[0];
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|i| i as f64 * self.c[i] * one_minus_t2[k - i])
                .sum();
            t[k] = s / k as f64;
            let sq: f64 = (0..=k).map(|i| t[i] * t[k - i]).sum();
            one_minus_t2[k] = -sq;
        }
        Jet { c: t }
    }

    /// `sech u`, via `s' = -s tanh(u) u'`.
    pub fn sech(&self) -> Jet {
        let n = self.c.len();
        let t = self.tanh();
        let mut s = vec![0.0; n];
        let mut st = vec![0.0; n];
        s[0] = 1.0 / self.c[0].cosh();
        st[0] = s[0] * t.c[0];
        for k in 1..n {
            let v: f64 = (1..=k).map(|i| i as f64 * self.c[i] * st[k - i]).sum();
            s[k] = -v / k as f64;
            st[k] = (0..=k).map(|i| s[i] * t.c[k - i]).sum();
        }
        Jet { c: s }
    }

    /// Non-negative integer power by repeated multiplication (valid at zero).
    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Real power `u^a`. Non-integer exponents need `u > 0` (or `u = 0` with
    /// no derivatives requested and `a > 0`).
    pub fn powf(&self, a: f64, at: f64) -> Result<Jet> {
        let u0 = self.c[0];
        if a == a.trunc() && a.abs() < 1e6 {
            if a >= 0.0 {
                return Ok(self.powi(a as u32));
            }
            if u0 == 0.0 {
                return Err(Error::domain("negative power of zero", at));
            }
            let p = self.powi((-a) as u32);
            return Jet::constant(1.0, self.order()).div(&p, at);
        }
        if u0 < 0.0 {
            return Err(Error::domain("fractional power of a negative base", at));
        }
        if u0 == 0.0 {
            if a > 0.0 && self.order() == 0 {
                return Ok(Jet::constant(0.0, 0));
            }
            return Err(Error::domain(
                "fractional power is not differentiable at zero",
                at,
            ));
        }
        let n = self.c.len();
        let mut p = vec![0.0; n];
        p[0] = u0.powf(a);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|i| (a * i as f64 - (k - i) as f64) * self.c[i] * p[k - i])
                .sum();
            p[k] = s / (k as f64 * u0);
        }
        Ok(Jet { c: p })
    }

    pub fn sqrt(&self, at: f64) -> Result<Jet> {
        if self.c[0] < 0.0 {
            return Err(Error::domain("square root of a negative value", at));
        }
        self.powf(0.5, at)
    }

    /// Evaluate the polynomial `Σ coeffs[i] u^i` by Horner's rule.
    pub fn poly(coeffs: &[f64], u: &Jet) -> Jet {
        let mut acc = Jet::constant(0.0, u.order());
        for &c in coeffs.iter().rev() {
            acc = acc.mul(u).add_const(c);
        }
        acc
    }
}

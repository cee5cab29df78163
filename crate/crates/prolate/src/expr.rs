//! Scalar expressions in one real variable with exact differentiation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Var,
    /// `Σ coeffs[i] · arg^i`
    Poly { coeffs: Vec<f64>, arg: ScalarExpr },
    Pow { base: ScalarExpr, exponent: f64 },
    Exp(ScalarExpr),
    Sinh(ScalarExpr),
    Cosh(ScalarExpr),
    Sech(ScalarExpr),
    Tanh(ScalarExpr),
    Sqrt(ScalarExpr),
    Sum(Vec<ScalarExpr>),
    Product(Vec<ScalarExpr>),
    Quotient(ScalarExpr, ScalarExpr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Debug, Clone)]
pub struct ScalarExpr(Arc<Node>);

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

impl ScalarExpr {
    fn new(n: Node) -> Self {
        ScalarExpr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The independent variable.
    pub fn x() -> Self {
        Self::new(Node::Var)
    }

    /// Polynomial in the independent variable, lowest degree first.
    pub fn poly(coeffs: &[f64]) -> Self {
        Self::poly_of(coeffs, Self::x())
    }

    /// Polynomial evaluated at a sub-expression.
    pub fn poly_of(coeffs: &[f64], arg: ScalarExpr) -> Self {
        let c = trim(coeffs.to_vec());
        if c.len() == 1 {
            return Self::constant(c[0]);
        }
        if let Some(v) = arg.as_const() {
            let val = c.iter().rev().fold(0.0, |acc, ci| acc * v + ci);
            return Self::constant(val);
        }
        Self::new(Node::Poly { coeffs: c, arg })
    }

    pub fn powf(&self, exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::one();
        }
        if exponent == 1.0 {
            return self.clone();
        }
        if exponent.fract() == 0.0 && exponent > 0.0 && exponent <= 64.0 {
            if let Some(c) = self.poly_coeffs_in_var() {
                let mut acc = vec![1.0];
                for _ in 0..exponent as usize {
                    acc = poly_mul(&acc, &c);
                }
                return Self::poly(&acc);
            }
        }
        if let Some(c) = self.as_const() {
            return Self::constant(c.powf(exponent));
        }
        Self::new(Node::Pow {
            base: self.clone(),
            exponent,
        })
    }

    pub fn powi(&self, n: i32) -> Self {
        self.powf(n as f64)
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::new(Node::Exp(self.clone())),
        }
    }

    pub fn sinh(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.sinh()),
            None => Self::new(Node::Sinh(self.clone())),
        }
    }

    pub fn cosh(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.cosh()),
            None => Self::new(Node::Cosh(self.clone())),
        }
    }

    pub fn sech(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(1.0 / c.cosh()),
            None => Self::new(Node::Sech(self.clone())),
        }
    }

    pub fn tanh(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.tanh()),
            None => Self::new(Node::Tanh(self.clone())),
        }
    }

    /// Square root. A constant negative argument is rejected here; a
    /// non-constant argument is checked at evaluation time.
    pub fn sqrt(&self) -> Result<Self> {
        match self.as_const() {
            Some(c) if c < 0.0 => Err(Error::Construction(format!(
                "square root of negative constant {c}"
            ))),
            Some(c) => Ok(Self::constant(c.sqrt())),
            None => Ok(Self::new(Node::Sqrt(self.clone()))),
        }
    }

    pub fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    pub fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Structurally the zero constant.
    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// Coefficients if the expression is a polynomial in the variable (or a constant).
    fn poly_coeffs_in_var(&self) -> Option<Vec<f64>> {
        match &*self.0 {
            Node::Const(c) => Some(vec![*c]),
            Node::Var => Some(vec![0.0, 1.0]),
            Node::Poly { coeffs, arg } if matches!(&*arg.0, Node::Var) => Some(coeffs.clone()),
            _ => None,
        }
    }

    pub fn sum(terms: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::new();
        let mut poly = vec![0.0];
        let mut has_poly = false;
        let mut stack: Vec<ScalarExpr> = terms.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            if let Node::Sum(inner) = &*t.0 {
                stack.extend(inner.iter().rev().cloned());
                continue;
            }
            if let Some(c) = t.poly_coeffs_in_var() {
                poly = poly_add(&poly, &c);
                has_poly = true;
                continue;
            }
            flat.push(t);
        }
        let poly = trim(poly);
        if has_poly && !(poly.len() == 1 && poly[0] == 0.0) {
            flat.insert(0, Self::poly(&poly));
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::new(Node::Sum(flat)),
        }
    }

    pub fn product(factors: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::new();
        let mut poly = vec![1.0];
        let mut stack: Vec<ScalarExpr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            if let Node::Product(inner) = &*f.0 {
                stack.extend(inner.iter().rev().cloned());
                continue;
            }
            if let Some(c) = f.poly_coeffs_in_var() {
                poly = poly_mul(&poly, &c);
                continue;
            }
            flat.push(f);
        }
        let poly = trim(poly);
        if poly.len() == 1 && poly[0] == 0.0 {
            return Self::zero();
        }
        let is_one = poly.len() == 1 && poly[0] == 1.0;
        if flat.is_empty() {
            return Self::poly(&poly);
        }
        if !is_one {
            flat.insert(0, Self::poly(&poly));
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        Self::new(Node::Product(flat))
    }

    pub fn quotient(num: ScalarExpr, den: ScalarExpr) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(d) = den.as_const() {
            if d != 0.0 {
                return num * (1.0 / d);
            }
        }
        Self::new(Node::Quotient(num, den))
    }

    pub fn differentiate(&self) -> ScalarExpr {
        use Node::*;
        match &*self.0 {
            Const(_) => Self::zero(),
            Var => Self::one(),
            Poly { coeffs, arg } => {
                let d: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c)
                    .collect();
                Self::poly_of(&d, arg.clone()) * arg.differentiate()
            }
            Pow { base, exponent } => {
                base.powf(exponent - 1.0) * base.differentiate() * *exponent
            }
            Exp(u) => self.clone() * u.differentiate(),
            Sinh(u) => u.cosh() * u.differentiate(),
            Cosh(u) => u.sinh() * u.differentiate(),
            Sech(u) => -(self.clone() * u.tanh() * u.differentiate()),
            Tanh(u) => u.sech().powi(2) * u.differentiate(),
            Sqrt(u) => Self::quotient(u.differentiate(), self.clone() * 2.0),
            Sum(ts) => Self::sum(ts.iter().map(|t| t.differentiate()).collect()),
            Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let di = fs[i].differentiate();
                    if di.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<ScalarExpr> = fs.clone();
                    parts[i] = di;
                    terms.push(Self::product(parts));
                }
                Self::sum(terms)
            }
            Quotient(n, d) => {
                let num = n.differentiate() * d.clone() - n.clone() * d.differentiate();
                Self::quotient(num, d.powi(2))
            }
        }
    }

    /// `n`-th derivative.
    pub fn nth_derivative(&self, n: usize) -> ScalarExpr {
        (0..n).fold(self.clone(), |e, _| e.differentiate())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        use Node::*;
        let v = match &*self.0 {
            Const(c) => *c,
            Var => x,
            Poly { coeffs, arg } => {
                let u = arg.eval(x)?;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
            Pow { base, exponent } => {
                let b = base.eval(x)?;
                if b < 0.0 && exponent.fract() != 0.0 {
                    return Err(Error::domain("fractional power of a negative base", x));
                }
                if b == 0.0 && *exponent < 0.0 {
                    return Err(Error::domain("negative power of zero", x));
                }
                b.powf(*exponent)
            }
            Exp(u) => u.eval(x)?.exp(),
            Sinh(u) => u.eval(x)?.sinh(),
            Cosh(u) => u.eval(x)?.cosh(),
            Sech(u) => 1.0 / u.eval(x)?.cosh(),
            Tanh(u) => u.eval(x)?.tanh(),
            Sqrt(u) => {
                let v = u.eval(x)?;
                if v < 0.0 {
                    return Err(Error::domain("square root of a negative value", x));
                }
                v.sqrt()
            }
            Sum(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.eval(x)?;
                }
                s
            }
            Product(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= f.eval(x)?;
                }
                p
            }
            Quotient(n, d) => {
                let dv = d.eval(x)?;
                if dv == 0.0 {
                    return Err(Error::domain("division by a vanishing denominator", x));
                }
                n.eval(x)? / dv
            }
        };
        if !v.is_finite() {
            return Err(Error::domain("non-finite value", x));
        }
        Ok(v)
    }

    /// Taylor jet of order `order` at `x`.
    pub fn eval_jet(&self, x: f64, order: usize) -> Result<Jet> {
        use Node::*;
        let j = match &*self.0 {
            Const(c) => Jet::constant(*c, order),
            Var => Jet::variable(x, order),
            Poly { coeffs, arg } => Jet::poly(coeffs, &arg.eval_jet(x, order)?),
            Pow { base, exponent } => base.eval_jet(x, order)?.powf(*exponent, x)?,
            Exp(u) => u.eval_jet(x, order)?.exp(),
            Sinh(u) => u.eval_jet(x, order)?.sinh_cosh().0,
            Cosh(u) => u.eval_jet(x, order)?.sinh_cosh().1,
            Sech(u) => u.eval_jet(x, order)?.sech(),
            Tanh(u) => u.eval_jet(x, order)?.tanh(),
            Sqrt(u) => u.eval_jet(x, order)?.sqrt(x)?,
            Sum(ts) => {
                let mut acc = Jet::constant(0.0, order);
                for t in ts {
                    acc = acc.add(&t.eval_jet(x, order)?);
                }
                acc
            }
            Product(fs) => {
                let mut acc = Jet::constant(1.0, order);
                for f in fs {
                    acc = acc.mul(&f.eval_jet(x, order)?);
                }
                acc
            }
            Quotient(n, d) => n.eval_jet(x, order)?.div(&d.eval_jet(x, order)?, x)?,
        };
        if !j.is_finite() {
            return Err(Error::domain("non-finite value", x));
        }
        Ok(j)
    }

    /// Values of the expression and its first `order` derivatives at `x`.
    pub fn eval_derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(self.eval_jet(x, order)?.derivatives())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Node::*;
        match &*self.0 {
            Const(c) => write!(f, "{c}"),
            Var => write!(f, "x"),
            Poly { coeffs, arg } => {
                let arg_s = match &*arg.0 {
                    Var => "x".to_string(),
                    _ => format!("({arg})"),
                };
                let mut first = true;
                write!(f, "(")?;
                for (i, c) in coeffs.iter().enumerate() {
                    if *c == 0.0 {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    match i {
                        0 => write!(f, "{c}")?,
                        1 => write!(f, "{c}*{arg_s}")?,
                        _ => write!(f, "{c}*{arg_s}^{i}")?,
                    }
                }
                write!(f, ")")
            }
            Pow { base, exponent } => write!(f, "({base})^{exponent}"),
            Exp(u) => write!(f, "exp({u})"),
            Sinh(u) => write!(f, "sinh({u})"),
            Cosh(u) => write!(f, "cosh({u})"),
            Sech(u) => write!(f, "sech({u})"),
            Tanh(u) => write!(f, "tanh({u})"),
            Sqrt(u) => write!(f, "sqrt({u})"),
            Sum(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Product(fs) => {
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Quotient(n, d) => write!(f, "{n}/({d})"),
        }
    }
}

impl From<f64> for ScalarExpr {
    fn from(c: f64) -> Self {
        ScalarExpr::constant(c)
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: ScalarExpr) -> ScalarExpr {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), o.as_const()) {
            return ScalarExpr::constant(a + b);
        }
        ScalarExpr::sum(vec![self, o])
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: ScalarExpr) -> ScalarExpr {
        self + (-o)
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self * -1.0
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: ScalarExpr) -> ScalarExpr {
        if self.is_zero() || o.is_zero() {
            return ScalarExpr::zero();
        }
        if self.as_const() == Some(1.0) {
            return o;
        }
        if o.as_const() == Some(1.0) {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), o.as_const()) {
            return ScalarExpr::constant(a * b);
        }
        ScalarExpr::product(vec![self, o])
    }
}

impl Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, o: ScalarExpr) -> ScalarExpr {
        ScalarExpr::quotient(self, o)
    }
}

impl Add<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: f64) -> ScalarExpr {
        self + ScalarExpr::constant(o)
    }
}

impl Sub<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: f64) -> ScalarExpr {
        self + ScalarExpr::constant(-o)
    }
}

impl Mul<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: f64) -> ScalarExpr {
        self * ScalarExpr::constant(o)
    }
}

impl Div<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, o: f64) -> ScalarExpr {
        ScalarExpr::quotient(self, ScalarExpr::constant(o))
    }
}

impl Mul<ScalarExpr> for f64 {
    type Output = ScalarExpr;
    fn mul(self, o: ScalarExpr) -> ScalarExpr {
        ScalarExpr::constant(self) * o
    }
}

impl Add<ScalarExpr> for f64 {
    type Output = ScalarExpr;
    fn add(self, o: ScalarExpr) -> ScalarExpr {
        ScalarExpr::constant(self) + o
    }
}

impl Sub<ScalarExpr> for f64 {
    type Output = ScalarExpr;
    fn sub(self, o: ScalarExpr) -> ScalarExpr {
        ScalarExpr::constant(self) - o
    }
}

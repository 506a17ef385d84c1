//! Sparse multivariate Laurent polynomials with lexicographically ordered terms.

use super::scalar::{Rat, Scalar};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("divisor does not divide the dividend exactly")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

#[derive(Clone)]
pub struct LaurentPoly<C> {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Vec<i64>, C>,
}

pub fn var_names(prefix: &str, n: usize) -> Arc<Vec<String>> {
    Arc::new((1..=n).map(|i| format!("{prefix}{i}")).collect())
}

fn pad(e: &[i64], n: usize) -> Vec<i64> {
    let mut v = e.to_vec();
    v.resize(n, 0);
    v
}

impl<C: Scalar> LaurentPoly<C> {
    pub fn zero_in(vars: Arc<Vec<String>>) -> Self {
        LaurentPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant_in(vars: Arc<Vec<String>>, c: C) -> Self {
        let n = vars.len();
        Self::monomial(vars, vec![0; n], c)
    }

    /// Variable-free constant; combines with polynomials in any variable set.
    pub fn constant(c: C) -> Self {
        Self::monomial(Arc::new(Vec::new()), Vec::new(), c)
    }

    pub fn monomial(vars: Arc<Vec<String>>, exps: Vec<i64>, c: C) -> Self {
        assert_eq!(vars.len(), exps.len(), "exponent length must match variables");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        LaurentPoly { vars, terms }
    }

    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, C::one())
    }

    pub fn from_terms(vars: Arc<Vec<String>>, terms: impl IntoIterator<Item = (Vec<i64>, C)>) -> Self {
        let mut p = Self::zero_in(vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[i64]) -> C {
        self.terms.get(&pad(e, self.nvars())).cloned().unwrap_or_else(C::zero)
    }

    fn add_term(&mut self, e: Vec<i64>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                let s = x.plus(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    /// Common variable context of two operands (constants broadcast).
    fn context(&self, o: &Self) -> Arc<Vec<String>> {
        if self.vars.len() >= o.vars.len() {
            debug_assert!(o.vars.iter().zip(self.vars.iter()).all(|(a, b)| a == b), "variable mismatch");
            self.vars.clone()
        } else {
            debug_assert!(self.vars.iter().zip(o.vars.iter()).all(|(a, b)| a == b), "variable mismatch");
            o.vars.clone()
        }
    }

    /// Re-expresses the polynomial over a (longer) variable list.
    pub fn in_vars(&self, vars: Arc<Vec<String>>) -> Self {
        let n = vars.len();
        assert!(n >= self.nvars());
        LaurentPoly { vars, terms: self.terms.iter().map(|(e, c)| (pad(e, n), c.clone())).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&vec![0; self.nvars()])
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn plus(&self, o: &Self) -> Self {
        let vars = self.context(o);
        let n = vars.len();
        let mut out = LaurentPoly { vars, terms: self.terms.iter().map(|(e, c)| (pad(e, n), c.clone())).collect() };
        for (e, c) in &o.terms {
            out.add_term(pad(e, n), c.clone());
        }
        out
    }

    pub fn negate(&self) -> Self {
        LaurentPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c.negate())).collect() }
    }

    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negate())
    }

    pub fn times(&self, o: &Self) -> Self {
        let vars = self.context(o);
        let n = vars.len();
        let mut out = Self::zero_in(vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<i64> = (0..n).map(|i| e1.get(i).unwrap_or(&0) + e2.get(i).unwrap_or(&0)).collect();
                out.add_term(e, c1.times(c2));
            }
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero_in(self.vars.clone());
        }
        LaurentPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c.times(s))).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant_in(self.vars.clone(), C::one());
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }

    /// Multiplies by the monomial `x^e`.
    pub fn shift(&self, e: &[i64]) -> Self {
        let n = self.nvars();
        let e = pad(e, n);
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(x, c)| ((0..n).map(|i| x[i] + e[i]).collect(), c.clone())).collect(),
        }
    }

    /// Componentwise minimum exponent (the largest monomial factor).
    pub fn min_exponents(&self) -> Vec<i64> {
        let n = self.nvars();
        let mut m: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            m = Some(match m {
                None => e.clone(),
                Some(cur) => (0..n).map(|i| cur[i].min(e[i])).collect(),
            });
        }
        m.unwrap_or_else(|| vec![0; n])
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.keys().map(|e| e.iter().sum::<i64>()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Lexicographically largest term.
    pub fn leading(&self) -> Option<(&Vec<i64>, &C)> {
        self.terms.iter().next_back()
    }

    /// Evaluates with a coefficient embedding; `None` on a negative power of zero.
    pub fn eval_with<F: Scalar>(&self, point: &[F], embed: impl Fn(&C) -> F) -> Option<F> {
        let mut acc = F::zero();
        for (e, c) in &self.terms {
            let mut t = embed(c);
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    t = t.times(&point[i].pow_i(k)?);
                }
            }
            acc = acc.plus(&t);
        }
        Some(acc)
    }

    pub fn eval(&self, point: &[C]) -> Option<C> {
        self.eval_with(point, |c| c.clone())
    }

    /// Substitutes polynomials for the variables (nonnegative exponents,
    /// or monomial images for negative ones).
    pub fn compose(&self, images: &[LaurentPoly<C>], vars: Arc<Vec<String>>) -> Option<Self> {
        let mut out = Self::zero_in(vars.clone());
        for (e, c) in &self.terms {
            let mut t = Self::constant_in(vars.clone(), c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.times(&images[i].pow(k as u32));
                } else if k < 0 {
                    let img = &images[i];
                    if !img.is_monomial() {
                        return None;
                    }
                    let (ex, co) = img.leading().unwrap();
                    let inv = LaurentPoly::monomial(vars.clone(), ex.iter().map(|x| -x).collect(), co.recip()?);
                    t = t.times(&inv.pow((-k) as u32));
                }
            }
            out = out.plus(&t);
        }
        Some(out)
    }

    /// Coefficient-wise map into another scalar type.
    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        let mut out = LaurentPoly::zero_in(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Text form such as `1+z1+z1*z2*z3` (terms in ascending lexicographic order).
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], k) })
                .collect();
            let cs = c.render();
            let term = if mono.is_empty() {
                cs
            } else if c == &C::one() {
                mono.join("*")
            } else if c == &C::one().negate() {
                format!("-{}", mono.join("*"))
            } else {
                format!("{}*{}", cs, mono.join("*"))
            };
            if !out.is_empty() && !term.starts_with('-') {
                out.push('+');
            }
            out.push_str(&term);
        }
        out
    }
}

impl<C: Scalar> PartialEq for LaurentPoly<C> {
    fn eq(&self, o: &Self) -> bool {
        self.minus(o).is_zero()
    }
}

impl<C: Scalar> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Exact quotient `p / q` in the polynomial ring: both operands are first
/// shifted by a common monomial so that all exponents are nonnegative, and
/// the quotient must then be a polynomial.
pub fn exact_divide<C: Scalar>(p: &LaurentPoly<C>, q: &LaurentPoly<C>) -> Result<LaurentPoly<C>, PolyError> {
    if q.is_zero() {
        return Err(PolyError::DivisionByZero);
    }
    let vars = p.context(q);
    let n = vars.len();
    let p = p.in_vars(vars.clone());
    let q = q.in_vars(vars.clone());
    if p.is_zero() {
        return Ok(LaurentPoly::zero_in(vars));
    }
    let mp = p.min_exponents();
    let mq = q.min_exponents();
    let s: Vec<i64> = (0..n).map(|i| -(mp[i].min(mq[i]).min(0))).collect();
    let mut rem = p.shift(&s);
    let qq = q.shift(&s);
    let (qe, qc) = {
        let (e, c) = qq.leading().unwrap();
        (e.clone(), c.clone())
    };
    let qinv = qc.recip().ok_or(PolyError::DivisionByZero)?;
    // A genuine quotient has degree deg_i(p) - deg_i(q) in every variable,
    // which bounds the division loop.
    let bound: Vec<i64> = (0..n).map(|i| rem.degree_in(i) - qq.degree_in(i)).collect();
    let mut quo = LaurentPoly::zero_in(vars.clone());
    while let Some((re, rc)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
        let d: Vec<i64> = (0..n).map(|i| re[i] - qe[i]).collect();
        if d.iter().zip(&bound).any(|(&x, &b)| x < 0 || x > b) {
            return Err(PolyError::NotDivisible);
        }
        let t = LaurentPoly::monomial(vars.clone(), d, rc.times(&qinv));
        rem = rem.minus(&t.times(&qq));
        quo = quo.plus(&t);
    }
    Ok(quo)
}

/// Polynomials act as scalars for matrix arithmetic; only monomials are invertible.
impl Scalar for LaurentPoly<Rat> {
    fn zero() -> Self {
        LaurentPoly::constant(Rat::zero())
    }
    fn one() -> Self {
        LaurentPoly::constant(Rat::from_integer(1.into()))
    }
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        LaurentPoly::plus(self, o)
    }
    fn minus(&self, o: &Self) -> Self {
        LaurentPoly::minus(self, o)
    }
    fn times(&self, o: &Self) -> Self {
        LaurentPoly::times(self, o)
    }
    fn negate(&self) -> Self {
        LaurentPoly::negate(self)
    }
        fn recip(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (e, c) = self.leading().unwrap();
        Some(LaurentPoly::monomial(self.vars().clone(), e.iter().map(|x| -x).collect(), Scalar::recip(c)?))
    }
    fn from_rat(r: &Rat) -> Self {
        LaurentPoly::constant(r.clone())
    }
    fn magnitude(&self) -> f64 {
        if LaurentPoly::is_zero(self) {
            0.0
        } else {
            1.0
        }
    }
    fn render(&self) -> String {
        self.to_text()
    }
}


//! Quotients of Laurent polynomials.
//!
//! There is no multivariate GCD here. Fractions are kept small by removing
//! monomial factors and by cancelling whenever one side divides the other
//! exactly, which covers every expression the library builds (cleared
//! denominators of triangular solves, products of chart units).

use super::poly::{exact_divide, LaurentPoly};
use super::scalar::{Rat, Scalar};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub struct RationalFunction<C> {
    num: LaurentPoly<C>,
    den: LaurentPoly<C>,
}

impl<C: Scalar> RationalFunction<C> {
    pub fn new(num: LaurentPoly<C>, den: LaurentPoly<C>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::normalized(num, den))
    }

    pub fn from_poly(p: LaurentPoly<C>) -> Self {
        let one = LaurentPoly::constant(C::one());
        RationalFunction { num: p, den: one }
    }

    pub fn numer(&self) -> &LaurentPoly<C> {
        &self.num
    }

    pub fn denom(&self) -> &LaurentPoly<C> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The polynomial value when the denominator is a constant.
    pub fn as_poly(&self) -> Option<LaurentPoly<C>> {
        if self.den.is_constant() {
            let c = self.den.constant_term().recip()?;
            Some(self.num.scale(&c))
        } else {
            None
        }
    }

    fn normalized(num: LaurentPoly<C>, den: LaurentPoly<C>) -> Self {
        if num.is_zero() {
            return Self::from_poly(LaurentPoly::zero_in(num.vars().clone()));
        }
        // Move the monomial part of the denominator into the numerator.
        let shift: Vec<i64> = den.min_exponents().iter().map(|x| -x).collect();
        let (mut num, mut den) = (num.in_vars(den_vars(&num, &den)), den.shift(&shift));
        num = num.shift(&pad_to(&shift, num.nvars()));
        if den.is_monomial() {
            let (_, c) = den.leading().unwrap();
            let inv = c.recip().expect("nonzero coefficient");
            return Self::from_poly(num.scale(&inv));
        }
        if let Ok(q) = exact_divide(&num, &den) {
            return Self::from_poly(q);
        }
        if !num.is_monomial() {
            if let Ok(q) = exact_divide(&den, &num) {
                // num/den = 1/q; keep q pure (monomial shift goes upstairs).
                let m = q.min_exponents();
                let neg: Vec<i64> = m.iter().map(|x| -x).collect();
                num = LaurentPoly::monomial(q.vars().clone(), neg.clone(), C::one());
                den = q.shift(&neg);
                if den.is_monomial() {
                    let (_, c) = den.leading().unwrap();
                    return Self::from_poly(num.scale(&c.recip().unwrap()));
                }
            }
        }
        let lead = den.leading().unwrap().1.recip().expect("nonzero coefficient");
        RationalFunction { num: num.scale(&lead), den: den.scale(&lead) }
    }

    pub fn eval_with<F: Scalar>(&self, point: &[F], embed: impl Fn(&C) -> F + Copy) -> Option<F> {
        let n = self.num.eval_with(point, embed)?;
        let d = self.den.eval_with(point, embed)?;
        n.over(&d)
    }

    pub fn eval(&self, point: &[C]) -> Option<C> {
        self.eval_with(point, |c| c.clone())
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy) -> RationalFunction<D> {
        RationalFunction::normalized(self.num.map_coeffs(f), self.den.map_coeffs(f))
    }

    pub fn to_text(&self) -> String {
        if self.den.is_constant() && self.den.constant_term() == C::one() {
            self.num.to_text()
        } else {
            format!("({})/({})", self.num.to_text(), self.den.to_text())
        }
    }
}

fn den_vars<C: Scalar>(a: &LaurentPoly<C>, b: &LaurentPoly<C>) -> Arc<Vec<String>> {
    if a.nvars() >= b.nvars() {
        a.vars().clone()
    } else {
        b.vars().clone()
    }
}

fn pad_to(v: &[i64], n: usize) -> Vec<i64> {
    let mut v = v.to_vec();
    v.resize(n, 0);
    v
}

impl<C: Scalar> PartialEq for RationalFunction<C> {
    fn eq(&self, o: &Self) -> bool {
        self.num.times(&o.den) == o.num.times(&self.den)
    }
}

impl<C: Scalar> fmt::Debug for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl<C: Scalar> Scalar for RationalFunction<C> {
    fn zero() -> Self {
        Self::from_poly(LaurentPoly::constant(C::zero()))
    }
    fn one() -> Self {
        Self::from_poly(LaurentPoly::constant(C::one()))
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(self.num.plus(&o.num), self.den.clone());
        }
        Self::normalized(self.num.times(&o.den).plus(&o.num.times(&self.den)), self.den.times(&o.den))
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negate())
    }
    fn times(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::normalized(self.num.times(&o.num), self.den.times(&o.den))
    }
    fn negate(&self) -> Self {
        RationalFunction { num: self.num.negate(), den: self.den.clone() }
    }
    fn recip(&self) -> Option<Self> {
        if self.num.is_zero() {
            None
        } else {
            Some(Self::normalized(self.den.clone(), self.num.clone()))
        }
    }
    fn from_rat(r: &Rat) -> Self {
        Self::from_poly(LaurentPoly::constant(C::from_rat(r)))
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn render(&self) -> String {
        self.to_text()
    }
}

//! Scalar abstraction shared by the exact and numeric code paths.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub type Int = BigInt;
pub type Rat = BigRational;

/// Field-like scalar. Method names avoid clashing with `std::ops`.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn recip(&self) -> Option<Self>;
    fn from_rat(r: &Rat) -> Self;
    /// Size used for pivot selection; exact types only need `> 0` for nonzero.
    fn magnitude(&self) -> f64;
    /// Zero test used by elimination; numeric types use a tolerance.
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn exact() -> bool {
        true
    }
    /// Compact text form used in polynomial rendering.
    fn render(&self) -> String {
        format!("{:?}", self)
    }

    fn from_i64(v: i64) -> Self {
        Self::from_rat(&Rat::from_integer(v.into()))
    }
    fn over(&self, o: &Self) -> Option<Self> {
        o.recip().map(|i| self.times(&i))
    }
    fn pow_i(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.times(&b);
            }
            b = b.times(&b);
            n >>= 1;
        }
        Some(acc)
    }
}

impl Scalar for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(BigRational::recip(self))
        }
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::MAX)
    }
    fn render(&self) -> String {
        rat_string(self)
    }
}

pub const NUMERIC_EPS: f64 = 1e-11;

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn from_rat(r: &Rat) -> Self {
        Complex64::new(rat_to_f64(r), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn negligible(&self) -> bool {
        self.norm() < NUMERIC_EPS
    }
    fn exact() -> bool {
        false
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back on a scaled quotient.
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn int_to_rat(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

/// `p/q` form for canonical output; integers print without a denominator.
pub fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn sign_of(r: &Rat) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

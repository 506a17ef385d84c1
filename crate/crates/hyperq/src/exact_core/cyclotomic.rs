//! Elements of cyclotomic fields `Q(ζ_m)`, stored as dense coefficient
//! vectors in the power basis modulo the m-th cyclotomic polynomial.

use super::scalar::{self as sc, rat_string, rat_to_f64, Int, Rat};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

#[derive(Clone)]
pub struct CycScalar {
    m: u64,
    c: Vec<Rat>,
}

fn poly_trim(p: &mut Vec<Rat>) {
    while p.len() > 1 && p.last().is_some_and(|x| x.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `f`.
fn poly_rem_monic(a: &[Rat], f: &[Rat]) -> Vec<Rat> {
    let deg = f.len() - 1;
    let mut r = a.to_vec();
    while r.len() > deg {
        let lead = r.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = r.len() - deg;
        for i in 0..deg {
            r[shift + i] -= &lead * &f[i];
        }
    }
    r.resize(deg.max(1), Rat::zero());
    r
}

fn poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut bb = b.to_vec();
    poly_trim(&mut bb);
    let db = bb.len() - 1;
    let is_zero = |p: &Vec<Rat>| p.iter().all(|x| x.is_zero());
    if r.len() <= db || is_zero(&r) {
        return (vec![Rat::zero()], r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    while r.len() > db && !is_zero(&r) {
        let dr = r.len() - 1;
        let coef = &r[dr] / &bb[db];
        for i in 0..=db {
            r[dr - db + i] -= &coef * &bb[i];
        }
        q[dr - db] = coef;
        r.pop();
        if r.is_empty() {
            r.push(Rat::zero());
        }
        poly_trim(&mut r);
    }
    (q, r)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    poly_trim(&mut out);
    out
}

/// Integer coefficients of the m-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<Rat> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<Rat>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    let mut p = vec![Rat::zero(); m as usize + 1];
    p[0] = -Rat::one();
    p[m as usize] = Rat::one();
    for d in 1..m {
        if m % d == 0 {
            let (q, _) = poly_divmod(&p, &cyclotomic_poly(d));
            p = q;
        }
    }
    poly_trim(&mut p);
    cache.lock().unwrap().insert(m, p.clone());
    p
}

pub fn euler_phi(m: u64) -> usize {
    cyclotomic_poly(m).len() - 1
}

impl CycScalar {
    pub fn from_rat_in(m: u64, r: Rat) -> Self {
        let mut c = vec![Rat::zero(); euler_phi(m)];
        c[0] = r;
        CycScalar { m, c }
    }

    pub fn rational(r: Rat) -> Self {
        Self::from_rat_in(1, r)
    }

    /// `ζ_m^e`.
    pub fn root_of_unity(m: u64, e: i64) -> Self {
        let e = e.rem_euclid(m as i64) as usize;
        let mut x = vec![Rat::zero(); e + 1];
        x[e] = Rat::one();
        CycScalar { m, c: poly_rem_monic(&x, &cyclotomic_poly(m)) }
    }

    /// `exp(2πi·r)` for rational log-coordinate `r`.
    pub fn exp_2pi_i(r: &Rat) -> Self {
        let d = r.denom().clone();
        let n = r.numer().mod_floor(&d);
        let m: u64 = d.try_into().expect("small torsion order");
        let e: i64 = n.try_into().expect("small exponent");
        Self::root_of_unity(m, e)
    }

    pub fn conductor(&self) -> u64 {
        self.m
    }

    pub fn coefficients(&self) -> &[Rat] {
        &self.c
    }

    /// Re-expresses the element in `Q(ζ_l)` for a multiple `l` of the conductor.
    pub fn lift(&self, l: u64) -> Self {
        if l == self.m {
            return self.clone();
        }
        assert_eq!(l % self.m, 0, "lift target must be a multiple of the conductor");
        let step = (l / self.m) as usize;
        let mut x = vec![Rat::zero(); (self.c.len() - 1) * step + 1];
        for (i, a) in self.c.iter().enumerate() {
            x[i * step] = a.clone();
        }
        CycScalar { m: l, c: poly_rem_monic(&x, &cyclotomic_poly(l)) }
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let l = self.m.lcm(&o.m);
        (self.lift(l), o.lift(l))
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ang = 2.0 * std::f64::consts::PI * (i as f64) / (self.m as f64);
            acc += Complex64::from_polar(1.0, ang) * rat_to_f64(a);
        }
        acc
    }

    /// Human-readable form with `w{m}` denoting `ζ_m`.
    pub fn pretty(&self) -> String {
        if let Some(r) = self.as_rational() {
            return rat_string(&r);
        }
        let mut parts = Vec::new();
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let s = rat_string(a);
            parts.push(match i {
                0 => s,
                _ => format!("{}*w{}^{}", s, self.m, i),
            });
        }
        format!("({})", parts.join("+"))
    }
}

impl PartialEq for CycScalar {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.c == b.c
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl sc::Scalar for CycScalar {
    fn zero() -> Self {
        Self::rational(<Rat as Zero>::zero())
    }
    fn one() -> Self {
        Self::rational(<Rat as One>::one())
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| Zero::is_zero(x))
    }
    fn plus(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        CycScalar { m: a.m, c: a.c.iter().zip(&b.c).map(|(x, y)| x + y).collect() }
    }
    fn minus(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        CycScalar { m: a.m, c: a.c.iter().zip(&b.c).map(|(x, y)| x - y).collect() }
    }
    fn times(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let prod = poly_mul(&a.c, &b.c);
        CycScalar { m: a.m, c: poly_rem_monic(&prod, &cyclotomic_poly(a.m)) }
    }
    fn negate(&self) -> Self {
        CycScalar { m: self.m, c: self.c.iter().map(|x| -x).collect() }
    }
    fn recip(&self) -> Option<Self> {
        if sc::Scalar::is_zero(self) {
            return None;
        }
        // Extended Euclid against the (irreducible) cyclotomic polynomial.
        let f = cyclotomic_poly(self.m);
        let (mut r0, mut r1) = (f.clone(), {
            let mut a = self.c.clone();
            poly_trim(&mut a);
            a
        });
        let (mut s0, mut s1) = (vec![<Rat as Zero>::zero()], vec![<Rat as One>::one()]);
        while !(r1.len() == 1 && Zero::is_zero(&r1[0])) {
            let (q, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant.
        let k = r0[0].clone();
        let inv: Vec<Rat> = s0.iter().map(|x| x / &k).collect();
        Some(CycScalar { m: self.m, c: poly_rem_monic(&inv, &f) })
    }
    fn from_rat(r: &Rat) -> Self {
        Self::rational(r.clone())
    }
    fn magnitude(&self) -> f64 {
        if sc::Scalar::is_zero(self) {
            0.0
        } else {
            1.0
        }
    }
    fn render(&self) -> String {
        self.pretty()
    }
}

/// Scalars that can hold values of cyclotomic fields (exactly or numerically).
pub trait CycField: sc::Scalar {
    fn from_cyc(c: &CycScalar) -> Self;
}

impl CycField for CycScalar {
    fn from_cyc(c: &CycScalar) -> Self {
        c.clone()
    }
}

impl CycField for Complex64 {
    fn from_cyc(c: &CycScalar) -> Self {
        c.to_complex()
    }
}

pub fn int_to_i64(x: &Int) -> i64 {
    x.try_into().expect("exponent fits in i64")
}

//! Arbitrary-precision integer matrices: Hermite and Smith normal forms,
//! saturated kernels and lattice helpers.

use super::matrix::Matrix;
use super::scalar::{Int, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_string()).collect()).collect();
        write!(f, "IntMatrix{:?}", rows)
    }
}

/// `U · M · V = D`.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// Nonzero diagonal entries `d₁ | d₂ | …`.
    pub fn divisors(&self) -> Vec<Int> {
        let n = self.d.rows.min(self.d.cols);
        (0..n).map(|i| self.d.get(i, i).clone()).filter(|x| !x.is_zero()).collect()
    }
}

/// Row Hermite form `H = U · M` with its pivot columns.
#[derive(Clone, Debug)]
pub struct HermiteForm {
    pub h: IntMatrix,
    pub u: IntMatrix,
    pub pivots: Vec<usize>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Int::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_big_rows(rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect())
    }

    /// `cols` must be given for the zero-row case.
    pub fn from_big_rows_with_cols(rows: Vec<Vec<Int>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged integer matrix");
            data.extend(row);
        }
        IntMatrix { rows: r, cols, data }
    }

    pub fn from_big_rows(rows: Vec<Vec<Int>>) -> Self {
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_big_rows_with_cols(rows, c)
    }

    pub fn from_cols(cols: &[Vec<Int>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, c[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> Vec<Int> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    pub fn col(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }
    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
    pub fn to_cols(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }
    /// Small-entry view; panics if an entry exceeds `i64`.
    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        self.to_rows().iter().map(|r| r.iter().map(|x| x.to_i64().expect("entry fits i64")).collect()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in integer product");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    out.data[idx] += a * o.get(l, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum()).collect()
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                m.set(i, jj, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        Self::from_big_rows_with_cols(idx.iter().map(|&i| self.row(i)).collect(), self.cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn to_rat(&self) -> Matrix<Rat> {
        Matrix::from_rows(
            (0..self.rows).map(|i| self.row(i).into_iter().map(Rat::from_integer).collect()).collect(),
        )
        .with_shape(self.rows, self.cols)
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return Int::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn rank(&self) -> usize {
        hermite(self).pivots.len()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += f · row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, f: &Int) {
        if f.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(dst, j) + f * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    fn add_col_multiple(&mut self, dst: usize, src: usize, f: &Int) {
        if f.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, dst) + f * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j);
            self.set(r, j, v);
        }
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        let inv = self.to_rat().inverse()?;
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = inv.get(i, j);
                if !x.is_integer() {
                    return None;
                }
                out.set(i, j, x.numer().clone());
            }
        }
        Some(out)
    }
}

impl Matrix<Rat> {
    /// Keeps the declared shape even for zero rows or columns.
    pub fn with_shape(self, rows: usize, cols: usize) -> Self {
        if self.rows() == rows && self.cols() == cols {
            self
        } else {
            Matrix::zeros(rows, cols)
        }
    }
}

/// Row Hermite normal form: positive pivots, entries above pivots reduced
/// into `[0, pivot)`. Deterministic.
pub fn hermite(m: &IntMatrix) -> HermiteForm {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..h.cols {
        if r == h.rows {
            break;
        }
        loop {
            // Smallest nonzero magnitude in column c at or below row r.
            let mut best: Option<usize> = None;
            for i in r..h.rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                if best.map_or(true, |b| h.get(i, c).abs() < h.get(b, c).abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..h.rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = h.get(i, c).div_floor(h.get(r, c));
                let nq = -q;
                h.add_row_multiple(i, r, &nq);
                u.add_row_multiple(i, r, &nq);
                if !h.get(i, c).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let piv = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&piv);
            let nq = -q;
            h.add_row_multiple(i, r, &nq);
            u.add_row_multiple(i, r, &nq);
        }
        pivots.push(c);
        r += 1;
    }
    HermiteForm { h, u, pivots }
}

/// Smith normal form with deterministic pivoting: smallest magnitude first,
/// ties broken by lowest (row, column) index.
pub fn snf(m: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.get(i, j);
                if x.is_zero() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -a.get(i, t).div_floor(a.get(t, t));
                a.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                dirty |= !a.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -a.get(t, j).div_floor(a.get(t, t));
                a.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                dirty |= !a.get(t, j).is_zero();
            }
            if dirty {
                // Bring the smallest remaining entry of row/column t to the pivot.
                let mut best = (t, t);
                for i in t + 1..rows {
                    let x = a.get(i, t);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    let x = a.get(t, j);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                a.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                a.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                continue;
            }
            // Divisibility chain: fold an offending row into the pivot row.
            let piv = a.get(t, t).clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(a.get(i, j) % &piv).is_zero()));
            match offender {
                Some(i) => {
                    let one = Int::one();
                    a.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    SnfDecomposition { u, d: a, v }
}

/// Integral basis of `ker(M) ∩ Zⁿ` as the columns of the result. The basis
/// is canonical: Hermite-reduced with pivots read from the last coordinate
/// backwards, so for `M = [I | A]` it is `[-A; I]`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let n = m.cols;
    let hf = hermite(&m.transpose());
    let rank = hf.pivots.len();
    let raw: Vec<Vec<Int>> = (rank..n).map(|i| hf.u.row(i)).collect();
    if raw.is_empty() {
        return IntMatrix::zeros(n, 0);
    }
    let rev: Vec<Vec<Int>> = raw.iter().map(|r| r.iter().rev().cloned().collect()).collect();
    let h = hermite(&IntMatrix::from_big_rows_with_cols(rev, n)).h;
    let mut vecs: Vec<Vec<Int>> =
        (0..h.rows).map(|i| h.row(i).into_iter().rev().collect::<Vec<_>>()).filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    vecs.reverse();
    IntMatrix::from_cols(&vecs, n)
}

/// True when the rows generate a saturated sublattice (all invariant factors 1).
pub fn rows_saturated(m: &IntMatrix) -> bool {
    snf(m).divisors().iter().all(|d| d.is_one())
}

/// Basis (rows) of the saturation `span_Q(rows) ∩ Zᵏ`.
pub fn saturation_rows(m: &IntMatrix) -> IntMatrix {
    let k = m.cols;
    if m.rows == 0 {
        return IntMatrix::zeros(0, k);
    }
    let dec = snf(m);
    let r = dec.divisors().len();
    let vinv = dec.v.inverse_unimodular().expect("unimodular V");
    let rows: Vec<Vec<Int>> = (0..r).map(|i| vinv.row(i)).collect();
    let h = hermite(&IntMatrix::from_big_rows_with_cols(rows, k)).h;
    IntMatrix::from_big_rows_with_cols((0..r).map(|i| h.row(i)).collect(), k)
}

/// Completes the rows of a saturated lattice basis to a basis of `Zᵏ`.
pub fn complete_to_unimodular(m: &IntMatrix) -> Option<IntMatrix> {
    let k = m.cols;
    if m.rows == 0 {
        return Some(IntMatrix::identity(k));
    }
    let dec = snf(m);
    if !dec.divisors().iter().all(|d| d.is_one()) || dec.divisors().len() != m.rows {
        return None;
    }
    let vinv = dec.v.inverse_unimodular()?;
    let extra: Vec<Vec<Int>> = (m.rows..k).map(|i| vinv.row(i)).collect();
    Some(IntMatrix::from_big_rows_with_cols(extra, k))
}

/// Coordinates of `v` in the lattice spanned by the rows of `basis`, if any.
pub fn lattice_coords(basis: &IntMatrix, v: &[Int]) -> Option<Vec<Int>> {
    let b = basis.to_rat().transpose();
    let rhs: Vec<Rat> = v.iter().cloned().map(Rat::from_integer).collect();
    // Least-structure solve through RREF on [Bᵀ | v].
    let r = b.rows();
    let c = b.cols();
    let mut aug = Matrix::<Rat>::zeros(r, c + 1);
    for i in 0..r {
        for j in 0..c {
            aug.set(i, j, b.get(i, j).clone());
        }
        aug.set(i, c, rhs[i].clone());
    }
    let (red, piv) = aug.rref();
    if piv.contains(&c) {
        return None;
    }
    let mut x = vec![Rat::zero(); c];
    for (row, &pc) in piv.iter().enumerate() {
        x[pc] = red.get(row, c).clone();
    }
    if x.iter().any(|q| !q.is_integer()) {
        return None;
    }
    Some(x.into_iter().map(|q| q.numer().clone()).collect())
}

/// Primitive representative with first nonzero entry positive.
pub fn primitive(v: &[Int]) -> Vec<Int> {
    let g = v.iter().fold(Int::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let mut out: Vec<Int> = v.iter().map(|x| x / &g).collect();
    if out.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        out.iter_mut().for_each(|x| *x = -x.clone());
    }
    out
}

/// Clears denominators of a rational vector and returns a primitive integer vector.
pub fn primitive_from_rat(v: &[Rat]) -> Vec<Int> {
    let l = v.iter().fold(Int::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<Int> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    primitive(&ints)
}

pub fn big(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

//! Canonical (RREF) representatives of linear subspaces.

use super::matrix::Matrix;
use super::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct SubspacePoint<F> {
    ambient_dim: usize,
    basis: Matrix<F>,
    pivots: Vec<usize>,
}

impl<F: Scalar> SubspacePoint<F> {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn contains(&self, v: &[F]) -> bool {
        let mut rows = self.basis.to_rows();
        rows.push(pad(v, self.ambient_dim));
        Matrix::from_rows(rows).rank() == self.rank()
    }

    /// Entrywise comparison with a tolerance; for exact scalars use `==`.
    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        self.ambient_dim == o.ambient_dim
            && self.pivots == o.pivots
            && self.basis.flatten().iter().zip(o.basis.flatten().iter()).all(|(a, b)| a.minus(b).magnitude() <= tol)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Vec<Vec<G>> {
        self.basis.to_rows().iter().map(|r| r.iter().map(&f).collect()).collect()
    }
}

impl<F: Scalar> PartialEq for SubspacePoint<F> {
    fn eq(&self, o: &Self) -> bool {
        self.ambient_dim == o.ambient_dim && self.pivots == o.pivots && self.basis == o.basis
    }
}

fn pad<F: Scalar>(v: &[F], n: usize) -> Vec<F> {
    assert!(v.len() <= n, "vector longer than the ambient dimension");
    let mut out = v.to_vec();
    out.resize(n, F::zero());
    out
}

/// RREF of the stacked (zero-padded) vectors with zero rows dropped.
pub fn canonical_subspace<F: Scalar>(vectors: &[Vec<F>], ambient_dim: usize) -> SubspacePoint<F> {
    if vectors.is_empty() {
        return SubspacePoint { ambient_dim, basis: Matrix::zeros(0, ambient_dim), pivots: Vec::new() };
    }
    let m = Matrix::from_rows(vectors.iter().map(|v| pad(v, ambient_dim)).collect());
    let (red, pivots) = m.rref();
    let rows: Vec<Vec<F>> = (0..pivots.len()).map(|i| red.row(i)).collect();
    let basis = if rows.is_empty() { Matrix::zeros(0, ambient_dim) } else { Matrix::from_rows(rows) };
    SubspacePoint { ambient_dim, basis, pivots }
}

//! Input validation and the circuit combinatorics of an integer matrix:
//! circuits with their sign vectors, rank-2 flats and matroid bases.

use crate::error::{HyperqError, Result};
use crate::exact_core::int_matrix::{kernel_basis, lattice_coords, primitive};
use crate::exact_core::{IntMatrix, Int, Matrix, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Matrix presentation `[a]` (d×n) with optional character lift and cocharacter.
#[derive(Clone, Debug, PartialEq)]
pub struct HypertoricData {
    pub a: IntMatrix,
    pub chi: Option<Vec<i64>>,
    pub tau: Option<Vec<i64>>,
}

impl HypertoricData {
    pub fn new(a: IntMatrix, chi: Option<Vec<i64>>, tau: Option<Vec<i64>>) -> Result<Self> {
        if let Some(c) = &chi {
            if c.len() != a.cols() {
                return Err(HyperqError::InvalidInput(format!("chi has length {}, expected {}", c.len(), a.cols())));
            }
        }
        if let Some(t) = &tau {
            if t.len() != a.rows() {
                return Err(HyperqError::InvalidInput(format!("tau has length {}, expected {}", t.len(), a.rows())));
            }
        }
        if a.rank() != a.rows() {
            return Err(HyperqError::NotFullRank);
        }
        Ok(HypertoricData { a, chi, tau })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows), None, None)
    }

    pub fn with_chi(mut self, chi: Vec<i64>) -> Result<Self> {
        self.chi = Some(chi);
        Self::new(self.a, self.chi, self.tau)
    }

    pub fn with_tau(mut self, tau: Vec<i64>) -> Result<Self> {
        self.tau = Some(tau);
        Self::new(self.a, self.chi, self.tau)
    }

    pub fn d(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn k(&self) -> usize {
        self.n() - self.d()
    }

    pub fn column(&self, i: usize) -> Vec<Int> {
        self.a.col(i)
    }

    /// `a_Q`, the square submatrix on the columns in `q`.
    pub fn submatrix(&self, q: &[usize]) -> IntMatrix {
        self.a.select_cols(q)
    }

    /// `a_Q⁻¹` over the rationals.
    pub fn inverse_on(&self, q: &[usize]) -> Option<Matrix<Rat>> {
        self.submatrix(q).to_rat().inverse()
    }

    /// Integral basis of `ker a` as columns (`ι`).
    pub fn iota(&self) -> IntMatrix {
        kernel_basis(&self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Smoothness {
    pub simple: bool,
    pub unimodular: bool,
    pub witness: Option<String>,
}

impl Smoothness {
    pub fn smooth(&self) -> bool {
        self.simple && self.unimodular
    }
}

/// Circuit with its normalized sign vector (first nonzero entry +1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircuitVector {
    pub support: Vec<usize>,
    pub beta: Vec<i64>,
}

impl CircuitVector {
    pub fn from_beta(beta: Vec<i64>) -> Self {
        let beta = normalize_sign(beta);
        let support = (0..beta.len()).filter(|&i| beta[i] != 0).collect();
        CircuitVector { support, beta }
    }

    pub fn positive_part(&self) -> Vec<usize> {
        self.support.iter().copied().filter(|&i| self.beta[i] > 0).collect()
    }

    pub fn negative_part(&self) -> Vec<usize> {
        self.support.iter().copied().filter(|&i| self.beta[i] < 0).collect()
    }

    /// Label like `124` from 1-based support indices.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.support.iter().map(|i| (i + 1).to_string()).collect();
        if self.support.iter().all(|&i| i < 9) {
            parts.concat()
        } else {
            parts.join(",")
        }
    }
}

fn normalize_sign(mut v: Vec<i64>) -> Vec<i64> {
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatKind {
    Pair,
    Triple,
}

/// Maximal set of vectors spanning a 2-plane. Members index the input list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTwoFlat {
    pub members: Vec<usize>,
    pub kind: FlatKind,
}

fn subsets_of_size(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    subsets_of_size(n, r)
}

pub fn validate_smooth(data: &HypertoricData) -> Result<Smoothness> {
    let d = data.d();
    let n = data.n();
    let mut unimodular = true;
    let mut witness = None;
    for q in subsets_of_size(n, d) {
        let det = data.submatrix(&q).det();
        if !det.is_zero() && det.abs() != Int::one() {
            unimodular = false;
            witness = Some(format!("minor on columns {:?} has determinant {}", one_based(&q), det));
            break;
        }
    }
    let mut simple = true;
    for i in 0..n {
        if data.column(i).iter().all(|x| x.is_zero()) {
            simple = false;
            witness.get_or_insert_with(|| format!("column {} is zero", i + 1));
        }
    }
    if simple {
        if let Some(chi) = &data.chi {
            'outer: for q in subsets_of_size(n, d) {
                let Some(v) = vertex(data, &q, chi) else { continue };
                for j in (0..n).filter(|j| !q.contains(j)) {
                    if affine_value(data, j, &v, chi).is_zero() {
                        simple = false;
                        witness.get_or_insert_with(|| {
                            format!("vertex of {:?} lies on hyperplane {}", one_based(&q), j + 1)
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(Smoothness { simple, unimodular, witness })
}

pub fn one_based(q: &[usize]) -> Vec<usize> {
    q.iter().map(|i| i + 1).collect()
}

/// Vertex `v_Q` solving `⟨a_i, v⟩ + χ_i = 0` for `i ∈ Q`.
pub fn vertex(data: &HypertoricData, q: &[usize], chi: &[i64]) -> Option<Vec<Rat>> {
    let aq = data.submatrix(q).to_rat().transpose();
    let rhs: Vec<Rat> = q.iter().map(|&i| Rat::from_integer((-chi[i]).into())).collect();
    aq.solve(&rhs)
}

/// `⟨a_j, v⟩ + χ_j`.
pub fn affine_value(data: &HypertoricData, j: usize, v: &[Rat], chi: &[i64]) -> Rat {
    let col = data.column(j);
    let mut acc = Rat::from_integer(chi[j].into());
    for (x, c) in v.iter().zip(&col) {
        acc += x * Rat::from_integer(c.clone());
    }
    acc
}

fn require_smooth(data: &HypertoricData) -> Result<()> {
    let s = validate_smooth(data)?;
    if !s.smooth() {
        return Err(HyperqError::NotSmooth(s.witness.unwrap_or_default()));
    }
    Ok(())
}

fn kernel_vector_of(data: &HypertoricData, support: &[usize]) -> Option<Vec<i64>> {
    let sub = data.submatrix(support);
    let ker = kernel_basis(&sub);
    if ker.cols() != 1 {
        return None;
    }
    let v = primitive(&ker.col(0));
    let mut beta = vec![0i64; data.n()];
    for (pos, &i) in support.iter().enumerate() {
        beta[i] = v[pos].to_i64()?;
    }
    Some(normalize_sign(beta))
}

/// Circuits ordered by their sorted support.
pub fn circuits(data: &HypertoricData) -> Result<Vec<CircuitVector>> {
    require_smooth(data)?;
    Ok(circuits_unchecked(data))
}

/// Circuit enumeration without the smoothness precondition.
pub fn circuits_unchecked(data: &HypertoricData) -> Vec<CircuitVector> {
    let n = data.n();
    let d = data.d();
    let mut found: Vec<CircuitVector> = Vec::new();
    for size in 1..=(d + 1).min(n) {
        for s in subsets_of_size(n, size) {
            if found.iter().any(|c| c.support.iter().all(|i| s.contains(i))) {
                continue;
            }
            if data.submatrix(&s).rank() != size - 1 {
                continue;
            }
            // Every proper subset is independent because no smaller circuit lies inside.
            if let Some(beta) = kernel_vector_of(data, &s) {
                found.push(CircuitVector { support: s, beta });
            }
        }
    }
    found.sort();
    found
}

/// All `d`-subsets with `det a_Q = ±1`, lexicographically.
pub fn fixed_points(data: &HypertoricData) -> Result<Vec<Vec<usize>>> {
    require_smooth(data)?;
    Ok(subsets_of_size(data.n(), data.d()).into_iter().filter(|q| data.submatrix(q).det().abs().is_one()).collect())
}

/// The unique circuit `S` with `S \ Q = {j}`.
pub fn circuit_through(data: &HypertoricData, q: &[usize], j: usize) -> Result<CircuitVector> {
    if q.contains(&j) {
        return Err(HyperqError::InvalidInput(format!("index {} lies in the basis", j + 1)));
    }
    let inv =
        data.inverse_on(q).ok_or_else(|| HyperqError::InvalidInput(format!("{:?} is not a basis", one_based(q))))?;
    let aj: Vec<Rat> = data.column(j).into_iter().map(Rat::from_integer).collect();
    let c = inv.mul_vec(&aj);
    let mut beta = vec![0i64; data.n()];
    beta[j] = 1;
    for (pos, &i) in q.iter().enumerate() {
        if !c[pos].is_integer() {
            return Err(HyperqError::NotSmooth(format!("basis {:?} is not unimodular", one_based(q))));
        }
        beta[i] = -c[pos].to_integer().to_i64().expect("small coefficient");
    }
    Ok(CircuitVector::from_beta(beta))
}

pub(crate) fn rank_of_i64(rows: &[&[i64]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
    IntMatrix::from_rows(&m).rank()
}

/// Maximal flats of rank 2 among the given vectors (indices into `phi`).
pub fn rank2_flats(phi: &[Vec<i64>]) -> Result<Vec<RankTwoFlat>> {
    for i in 0..phi.len() {
        for j in i + 1..phi.len() {
            if rank_of_i64(&[&phi[i], &phi[j]]) < 2 {
                return Err(HyperqError::CollinearInput(i, j));
            }
        }
    }
    let mut flats: Vec<Vec<usize>> = Vec::new();
    for i in 0..phi.len() {
        for j in i + 1..phi.len() {
            if flats.iter().any(|f| f.contains(&i) && f.contains(&j)) {
                continue;
            }
            let members: Vec<usize> =
                (0..phi.len()).filter(|&l| rank_of_i64(&[&phi[i], &phi[j], &phi[l]]) == 2).collect();
            flats.push(members);
        }
    }
    flats
        .into_iter()
        .map(|members| {
            let kind = match members.len() {
                2 => FlatKind::Pair,
                3 => {
                    if !is_signed_sum_triple(phi, &members) {
                        return Err(HyperqError::FlatTooLarge(3));
                    }
                    FlatKind::Triple
                }
                m => return Err(HyperqError::FlatTooLarge(m)),
            };
            Ok(RankTwoFlat { members, kind })
        })
        .collect()
}

/// True when one member equals `±x ± y` for the other two.
fn is_signed_sum_triple(phi: &[Vec<i64>], m: &[usize]) -> bool {
    let perms = [(m[0], m[1], m[2]), (m[1], m[0], m[2]), (m[2], m[0], m[1])];
    perms.iter().any(|&(c, a, b)| {
        [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().any(|&(s, t)| {
            (0..phi[c].len()).all(|l| phi[c][l] == s * phi[a][l] + t * phi[b][l])
        })
    })
}

/// Checks the circuit axioms on a family of supports: nonempty members, no
/// containment, and elimination. Returns a witness on failure.
pub fn check_circuit_axioms(supports: &[Vec<usize>]) -> std::result::Result<(), String> {
    for (i, s) in supports.iter().enumerate() {
        if s.is_empty() {
            return Err(format!("circuit {} is empty", i));
        }
        for (j, t) in supports.iter().enumerate() {
            if i != j && s.iter().all(|x| t.contains(x)) {
                return Err(format!("circuit {:?} is contained in {:?}", one_based(s), one_based(t)));
            }
        }
    }
    for (i, s) in supports.iter().enumerate() {
        for t in supports.iter().skip(i + 1) {
            for e in s.iter().filter(|e| t.contains(e)) {
                let mut union: Vec<usize> = s.iter().chain(t.iter()).copied().filter(|x| x != e).collect();
                union.sort();
                union.dedup();
                if !supports.iter().any(|c| c.iter().all(|x| union.contains(x))) {
                    return Err(format!(
                        "elimination fails for {:?}, {:?} at {}",
                        one_based(s),
                        one_based(t),
                        e + 1
                    ));
                }
            }
        }
    }
    Ok(())
}

/// A finite list of primitive integer vectors in `Zᵏ` (positive representatives).
#[derive(Clone, Debug, PartialEq)]
pub struct Arrangement {
    pub k: usize,
    pub vectors: Vec<Vec<i64>>,
}

impl Arrangement {
    pub fn new(k: usize, vectors: Vec<Vec<i64>>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != k {
                return Err(HyperqError::InvalidInput(format!("vector {} has length {}, expected {}", i, v.len(), k)));
            }
            if v.iter().all(|&x| x == 0) {
                return Err(HyperqError::InvalidInput(format!("vector {} is zero", i)));
            }
            let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
            if g != 1 {
                return Err(HyperqError::InvalidInput(format!("vector {} is not primitive", i)));
            }
        }
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                if rank_of_i64(&[&vectors[i], &vectors[j]]) < 2 {
                    return Err(HyperqError::CollinearInput(i, j));
                }
            }
        }
        Ok(Arrangement { k, vectors })
    }

    /// Circuit vectors written in the coordinates of the kernel basis `ι`.
    pub fn from_hypertoric(data: &HypertoricData) -> Result<Self> {
        let cs = circuits(data)?;
        let iota = data.iota();
        let basis = iota.transpose();
        let mut vectors = Vec::new();
        for c in &cs {
            let coords = lattice_coords(&basis, &crate::exact_core::int_matrix::big(&c.beta))
                .ok_or_else(|| HyperqError::NotSmooth("circuit outside the kernel lattice".into()))?;
            vectors.push(coords.iter().map(|x| x.to_i64().expect("small coordinate")).collect());
        }
        Self::new(data.k(), vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn rank(&self) -> usize {
        let rows: Vec<&[i64]> = self.vectors.iter().map(|v| v.as_slice()).collect();
        rank_of_i64(&rows)
    }

    pub fn rank_of(&self, idx: &[usize]) -> usize {
        let rows: Vec<&[i64]> = idx.iter().map(|&i| self.vectors[i].as_slice()).collect();
        rank_of_i64(&rows)
    }

    pub fn matrix_of(&self, idx: &[usize]) -> IntMatrix {
        let rows: Vec<Vec<i64>> = idx.iter().map(|&i| self.vectors[i].clone()).collect();
        if rows.is_empty() {
            IntMatrix::zeros(0, self.k)
        } else {
            IntMatrix::from_rows(&rows)
        }
    }
}

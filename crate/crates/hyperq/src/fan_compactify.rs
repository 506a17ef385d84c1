//! The fan cut out by the hyperplanes `h_α = {⟨α,·⟩ = 0}`, its toric charts,
//! the boundary strata of each chart and the extension of the family `Q`
//! across them.

use crate::circuit_matroid::{combinations, rank_of_i64, Arrangement};
use crate::error::{HyperqError, Result};
use crate::exact_core::int_matrix::{big, complete_to_unimodular, lattice_coords, saturation_rows};
use crate::exact_core::{canonical_subspace, kernel_basis, CycField, IntMatrix, Scalar, SubspacePoint};
use crate::nested_charts::{maximal_nested_sets, torus_power, NestedSet};
use crate::toric_layers::zero_dim_layers;
use num_traits::{Signed, ToPrimitive};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_i64(v: &[crate::exact_core::Int]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("small entry")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    /// Indices into [`Fan::rays`], sorted.
    pub rays: Vec<usize>,
    /// `sign ⟨α, x⟩` on the interior, when the cone comes from the arrangement.
    pub signs: Option<Vec<i8>>,
}

#[derive(Clone, Debug)]
pub struct Fan {
    pub k: usize,
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Cone>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    /// First offending cone and its determinant (0 when not simplicial).
    pub witness: Option<(usize, i64)>,
}

/// Candidate rays: primitive generators of the lines cut out by `k−1`
/// independent hyperplanes, both orientations.
fn candidate_rays(arr: &Arrangement) -> Vec<Vec<i64>> {
    let k = arr.k;
    let mut out = BTreeSet::new();
    if k == 1 {
        out.insert(vec![1]);
        out.insert(vec![-1]);
    } else {
        for sub in combinations(arr.len(), k - 1) {
            if arr.rank_of(&sub) != k - 1 {
                continue;
            }
            let ker = kernel_basis(&arr.matrix_of(&sub));
            let r = to_i64(&ker.col(0));
            out.insert(r.iter().map(|x| -x).collect());
            out.insert(r);
        }
    }
    out.into_iter().collect()
}

fn generic_signs(arr: &Arrangement) -> Vec<i8> {
    let m = arr.vectors.iter().flatten().map(|x| x.abs()).max().unwrap_or(1) as i128;
    let n = 2 * m + 2;
    let x: Vec<i128> = (0..arr.k).map(|j| n.pow(j as u32)).collect();
    arr.vectors.iter().map(|v| v.iter().zip(&x).map(|(&a, b)| a as i128 * b).sum::<i128>().signum() as i8).collect()
}

impl Fan {
    /// Chambers of the arrangement by flipping one wall at a time.
    pub fn from_arrangement(arr: &Arrangement) -> Result<Self> {
        if arr.rank() < arr.k {
            return Err(HyperqError::RankDeficient);
        }
        let candidates = candidate_rays(arr);
        let mut ray_index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut rays: Vec<Vec<i64>> = Vec::new();
        let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
        let mut cones = Vec::new();
        let start = generic_signs(arr);
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start);
        while let Some(signs) = queue.pop_front() {
            let members: Vec<&Vec<i64>> = candidates
                .iter()
                .filter(|r| arr.vectors.iter().zip(&signs).all(|(a, &s)| s as i64 * dot(a, r) >= 0))
                .collect();
            let mut idx = Vec::with_capacity(members.len());
            for r in &members {
                let next = ray_index.len();
                let i = *ray_index.entry((*r).clone()).or_insert_with(|| {
                    rays.push((*r).clone());
                    next
                });
                idx.push(i);
            }
            idx.sort_unstable();
            for (a, alpha) in arr.vectors.iter().enumerate() {
                let tight: Vec<&[i64]> =
                    members.iter().filter(|r| dot(alpha, r) == 0).map(|r| r.as_slice()).collect();
                if rank_of_i64(&tight) + 1 == arr.k {
                    let mut flipped = signs.clone();
                    flipped[a] = -flipped[a];
                    if seen.insert(flipped.clone()) {
                        queue.push_back(flipped);
                    }
                }
            }
            cones.push(Cone { rays: idx, signs: Some(signs) });
        }
        // Deterministic order: sort rays, then cones by their sign vectors.
        let mut order: Vec<usize> = (0..rays.len()).collect();
        order.sort_by(|&a, &b| rays[a].cmp(&rays[b]));
        let mut relabel = vec![0; rays.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }
        let rays: Vec<Vec<i64>> = order.iter().map(|&i| rays[i].clone()).collect();
        for c in &mut cones {
            c.rays = c.rays.iter().map(|&i| relabel[i]).collect();
            c.rays.sort_unstable();
        }
        cones.sort_by(|a, b| b.signs.cmp(&a.signs));
        Ok(Fan { k: arr.k, rays, cones })
    }

    /// A fan given by explicit simplicial cones.
    pub fn from_cones(k: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Self> {
        if rays.iter().any(|r| r.len() != k) {
            return Err(HyperqError::InvalidInput("ray of the wrong length".into()));
        }
        if cones.iter().flatten().any(|&i| i >= rays.len()) {
            return Err(HyperqError::InvalidInput("cone references a missing ray".into()));
        }
        let cones = cones
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                Cone { rays: c, signs: None }
            })
            .collect();
        Ok(Fan { k, rays, cones })
    }

    pub fn ray_matrix(&self, cone: usize) -> Vec<Vec<i64>> {
        self.cones[cone].rays.iter().map(|&i| self.rays[i].clone()).collect()
    }

    /// Codimension-one faces (as ray sets) of a cone.
    fn facets(&self, cone: usize) -> Vec<Vec<usize>> {
        let c = &self.cones[cone];
        let k = self.k;
        let mut out = BTreeSet::new();
        if c.rays.len() == k {
            for sub in combinations(k, k - 1) {
                out.insert(sub.iter().map(|&i| c.rays[i]).collect::<Vec<_>>());
            }
            return out.into_iter().collect();
        }
        // Non-simplicial: maximal subsets lying on a supporting hyperplane.
        for sub in combinations(c.rays.len(), k - 1) {
            let rows: Vec<&[i64]> = sub.iter().map(|&i| self.rays[c.rays[i]].as_slice()).collect();
            if rank_of_i64(&rows) != k - 1 {
                continue;
            }
            let normal = to_i64(&kernel_basis(&IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())).col(0));
            let vals: Vec<i64> = c.rays.iter().map(|&r| dot(&normal, &self.rays[r])).collect();
            if vals.iter().all(|&v| v >= 0) || vals.iter().all(|&v| v <= 0) {
                out.insert(c.rays.iter().zip(&vals).filter(|(_, &v)| v == 0).map(|(&r, _)| r).collect::<Vec<_>>());
            }
        }
        out.into_iter().collect()
    }

    /// Every facet lies in exactly two maximal cones.
    pub fn is_complete(&self) -> bool {
        if self.k == 0 {
            return true;
        }
        let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for c in 0..self.cones.len() {
            for f in self.facets(c) {
                *count.entry(f).or_default() += 1;
            }
        }
        !count.is_empty() && count.values().all(|&n| n == 2)
    }

    pub fn is_regular(&self) -> Regularity {
        for (i, c) in self.cones.iter().enumerate() {
            if c.rays.len() != self.k {
                return Regularity { regular: false, witness: Some((i, 0)) };
            }
            let det = IntMatrix::from_rows(&self.ray_matrix(i)).det();
            if det.abs() != 1.into() {
                return Regularity { regular: false, witness: Some((i, det.to_i64().unwrap_or(i64::MAX))) };
            }
        }
        Regularity { regular: true, witness: None }
    }
}

/// `q^α = 1` written as `u^λ = 1` in the chart coordinates `u_i = q^{β_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypersurface {
    pub alpha: usize,
    /// `λ = sign · α` in the dual basis.
    pub sign: i8,
    pub lambda: Vec<i64>,
}

impl Hypersurface {
    pub fn support(&self) -> Vec<usize> {
        (0..self.lambda.len()).filter(|&i| self.lambda[i] != 0).collect()
    }
}

/// The affine chart `U_σ ≅ Aᵏ` of a regular cone.
#[derive(Clone, Debug)]
pub struct ToricChart {
    pub cone: Option<usize>,
    /// Ray generators `r_i`.
    pub rays: Vec<Vec<i64>>,
    /// Dual basis `β_i` with `⟨β_i, r_j⟩ = δ_ij`.
    pub dual_basis: Vec<Vec<i64>>,
    pub hypersurfaces: Vec<Hypersurface>,
}

impl ToricChart {
    /// Chart for an explicit character basis; every `±α` must have
    /// nonnegative coordinates in it.
    pub fn from_dual_basis(arr: &Arrangement, basis: Vec<Vec<i64>>) -> Result<Self> {
        let k = arr.k;
        if basis.len() != k || basis.iter().any(|b| b.len() != k) {
            return Err(HyperqError::InvalidInput("dual basis has the wrong shape".into()));
        }
        let b = IntMatrix::from_rows(&basis);
        let binv = b
            .inverse_unimodular()
            .ok_or_else(|| HyperqError::NotRegular(format!("basis {:?} is not unimodular", basis)))?;
        // Rays are the columns of B⁻¹.
        let rays: Vec<Vec<i64>> = (0..k).map(|j| to_i64(&binv.col(j))).collect();
        let mut hypersurfaces = Vec::with_capacity(arr.len());
        for (a, alpha) in arr.vectors.iter().enumerate() {
            let lambda: Vec<i64> = rays.iter().map(|r| dot(alpha, r)).collect();
            let sign = if lambda.iter().all(|&x| x >= 0) {
                1
            } else if lambda.iter().all(|&x| x <= 0) {
                -1
            } else {
                return Err(HyperqError::NotExpressible(format!(
                    "{:?} has coordinates {:?} of mixed sign in {:?}",
                    alpha, lambda, basis
                )));
            };
            let lambda = lambda.iter().map(|x| sign as i64 * x).collect();
            hypersurfaces.push(Hypersurface { alpha: a, sign, lambda });
        }
        Ok(ToricChart { cone: None, rays, dual_basis: basis, hypersurfaces })
    }

    pub fn k(&self) -> usize {
        self.rays.len()
    }

    /// Torus point of chart coordinates with all `u_i ≠ 0`: `q_l = ∏ u_i^{(r_i)_l}`.
    pub fn to_torus<F: Scalar>(&self, u: &[F]) -> Result<Vec<F>> {
        if u.iter().any(|x| x.negligible()) {
            return Err(HyperqError::OutsideTorus("boundary point of the toric chart".into()));
        }
        Ok((0..self.k())
            .map(|l| {
                (0..self.k()).fold(F::one(), |acc, i| acc.times(&u[i].pow_i(self.rays[i][l]).expect("nonzero")))
            })
            .collect())
    }

    /// `u_i = q^{β_i}`.
    pub fn from_torus<F: Scalar>(&self, q: &[F]) -> Vec<F> {
        self.dual_basis.iter().map(|b| torus_power(q, b)).collect()
    }
}

/// The chart of a regular cone of the fan.
pub fn chart_hypersurfaces(arr: &Arrangement, fan: &Fan, cone: usize) -> Result<ToricChart> {
    let rays = fan.ray_matrix(cone);
    if rays.len() != arr.k || IntMatrix::from_rows(&rays).det().abs() != 1.into() {
        return Err(HyperqError::NotRegular(format!("cone {} with rays {:?}", cone, rays)));
    }
    // Dual basis: rows of R⁻¹ where R has the rays as columns.
    let r_cols = IntMatrix::from_rows(&rays).transpose();
    let dual = r_cols.inverse_unimodular().expect("unimodular").to_i64_rows();
    let mut chart = ToricChart::from_dual_basis(arr, dual)?;
    chart.cone = Some(cone);
    Ok(chart)
}

/// Coordinates on the `S`-torus factor adapted to `Φ_S`: the first `r`
/// rows of `m` span the saturation of the surviving `λ|_S`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub rank: usize,
    pub m: Vec<Vec<i64>>,
    pub m_inv: Vec<Vec<i64>>,
}

/// A boundary stratum `{u_i ≠ 0 ⇔ i ∈ S}` of a toric chart together with
/// the nested-set charts of the arrangement it inherits.
#[derive(Clone, Debug)]
pub struct StratumChart {
    pub chart: ToricChart,
    pub support: Vec<usize>,
    /// Hypersurfaces (indices into `chart.hypersurfaces`) with `supp λ ⊆ S`.
    pub surviving: Vec<usize>,
    pub removed: Vec<usize>,
    pub reduction: Reduction,
    /// `Φ_S` in the coordinates of the reduction; `None` when empty.
    pub reduced: Option<Arrangement>,
    pub nested: Vec<NestedSet>,
}

impl StratumChart {
    /// Number of open charts this stratum contributes.
    pub fn chart_count(&self) -> usize {
        self.nested.len().max(1)
    }

    fn rho(&self, l: usize) -> Vec<i64> {
        let k = self.chart.k();
        let mut out = vec![0; k];
        for (a, &j) in self.support.iter().enumerate() {
            let c = self.reduction.m_inv[a][l];
            for x in 0..k {
                out[x] += c * self.chart.rays[j][x];
            }
        }
        out
    }

    /// Full chart coordinates `u` of a stratum point.
    pub fn chart_coordinates<F: CycField>(&self, point: &StratumPoint<F>) -> Result<Vec<F>> {
        let r = self.reduction.rank;
        let s = self.support.len();
        let k = self.chart.k();
        if point.free.len() != s - r || point.boundary.len() != k - s {
            return Err(HyperqError::InvalidInput("stratum point has the wrong shape".into()));
        }
        let v_l: Vec<F> = match (&self.reduced, point.nested) {
            (None, _) => Vec::new(),
            (Some(_), Some(i)) => {
                let ns = self.nested.get(i).ok_or_else(|| HyperqError::InvalidInput("no such nested set".into()))?;
                ns.chart_to_torus(&point.z)?
            }
            (Some(_), None) => return Err(HyperqError::InvalidInput("a nested set is required".into())),
        };
        let v: Vec<F> = v_l.into_iter().chain(point.free.iter().cloned()).collect();
        let mut u = vec![F::zero(); k];
        for (a, &j) in self.support.iter().enumerate() {
            u[j] = (0..s).fold(F::one(), |acc, b| acc.times(&v[b].pow_i(self.reduction.m_inv[a][b]).expect("nonzero")));
        }
        let mut rest = point.boundary.iter();
        for (j, slot) in u.iter_mut().enumerate() {
            if !self.support.contains(&j) {
                *slot = rest.next().expect("shape checked").clone();
            }
        }
        Ok(u)
    }

    /// Extension of `Q` to a stratum point, as a subspace of `𝔲¹`
    /// (`t_α` per arrangement vector, then standard coordinates of `𝔱`).
    pub fn extend<F: CycField>(&self, point: &StratumPoint<F>, hbar: &F) -> Result<SubspacePoint<F>> {
        let k = self.chart.k();
        let nt = self.chart.hypersurfaces.len();
        let u = self.chart_coordinates(point)?;
        let surviving: BTreeSet<usize> = self.surviving.iter().copied().collect();
        // Regular coefficients (1+u^λ)/(u^λ−1) off Φ_S.
        let mut coeff: Vec<Option<F>> = vec![None; nt];
        for (h, hs) in self.chart.hypersurfaces.iter().enumerate() {
            if surviving.contains(&h) {
                continue;
            }
            let ul = u.iter().zip(&hs.lambda).fold(F::one(), |acc, (x, &e)| acc.times(&x.pow_i(e).expect("e ≥ 0")));
            let den = ul.minus(&F::one());
            if den.negligible() {
                return Err(HyperqError::WallCollision(format!("u^{:?} = 1", hs.lambda)));
            }
            coeff[h] = Some(ul.plus(&F::one()).over(&den).expect("nonzero"));
        }
        // ⟨λ, ρ⟩ with λ = Σ λ_i β_i; the sign of t_α is immaterial since
        // α_i (1+q^α)/(q^α−1) is invariant under α ↦ −α.
        let alpha_of = |h: usize, rho: &[i64]| -> i64 {
            let lam = &self.chart.hypersurfaces[h].lambda;
            lam.iter().zip(&self.chart.dual_basis).map(|(&l, b)| l * dot(b, rho)).sum()
        };
        let regular_row = |rho: &[i64], scale: &F| -> Vec<F> {
            let mut row = vec![F::zero(); nt + k];
            for x in 0..k {
                row[nt + x] = scale.times(&F::from_i64(rho[x]));
            }
            for h in 0..nt {
                if let Some(c) = &coeff[h] {
                    let a = alpha_of(h, rho);
                    if a != 0 {
                        row[h] = scale.times(hbar).times(&F::from_i64(a)).times(c);
                    }
                }
            }
            row
        };
        let mut rows = Vec::with_capacity(k);
        for j in 0..k {
            if !self.support.contains(&j) {
                rows.push(regular_row(&self.chart.rays[j], &F::one()));
            }
        }
        let r = self.reduction.rank;
        for l in r..self.support.len() {
            rows.push(regular_row(&self.rho(l), &F::one()));
        }
        if r > 0 {
            let ns = &self.nested[point.nested.expect("checked in chart_coordinates")];
            let ext = ns.extension_vectors()?;
            let embed = |c: &crate::exact_core::CycScalar| F::from_cyc(c);
            for row in &ext.rows {
                let m = row.monomial.eval_with(&point.z, embed).expect("polynomial");
                let mut rho = vec![0; k];
                for (l, &c) in row.v_part.iter().enumerate() {
                    let rl = self.rho(l);
                    for x in 0..k {
                        rho[x] += c * rl[x];
                    }
                }
                let mut v = regular_row(&rho, &m);
                for (a, num, den) in &row.t_terms {
                    let d = den.eval_with(&point.z, embed).expect("polynomial");
                    if d.negligible() {
                        return Err(HyperqError::PAlphaZero(format!("hypersurface {}", self.surviving[*a])));
                    }
                    let n = num.eval_with(&point.z, embed).expect("polynomial");
                    v[self.surviving[*a]] = hbar.times(&n.over(&d).expect("nonzero"));
                }
                rows.push(v);
            }
        }
        Ok(canonical_subspace(&rows, nt + k))
    }

    /// Torus point of an interior stratum point (all boundary coordinates nonzero).
    pub fn to_torus<F: CycField>(&self, point: &StratumPoint<F>) -> Result<Vec<F>> {
        self.chart.to_torus(&self.chart_coordinates(point)?)
    }
}

/// A point of a stratum: nested-chart coordinates on the `Φ_S` factor,
/// free torus coordinates on its complement in the `S`-torus, and the
/// remaining chart coordinates (which may vanish).
#[derive(Clone, Debug)]
pub struct StratumPoint<F> {
    pub nested: Option<usize>,
    pub z: Vec<F>,
    pub free: Vec<F>,
    pub boundary: Vec<F>,
}

/// Splits the hypersurfaces of a chart by support and sets up the `S`-factor.
pub fn boundary_supports(chart: &ToricChart, support: &[usize], cap: usize) -> Result<StratumChart> {
    let k = chart.k();
    let mut s: Vec<usize> = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.iter().any(|&i| i >= k) {
        return Err(HyperqError::InvalidInput(format!("support {:?} out of range", support)));
    }
    let (surviving, removed): (Vec<usize>, Vec<usize>) =
        (0..chart.hypersurfaces.len()).partition(|&h| chart.hypersurfaces[h].support().iter().all(|i| s.contains(i)));
    let restricted: Vec<Vec<i64>> =
        surviving.iter().map(|&h| s.iter().map(|&i| chart.hypersurfaces[h].lambda[i]).collect()).collect();
    let ns = s.len();
    let (reduction, reduced) = if restricted.is_empty() {
        let id: Vec<Vec<i64>> = (0..ns).map(|i| (0..ns).map(|j| i64::from(i == j)).collect()).collect();
        (Reduction { rank: 0, m: id.clone(), m_inv: id }, None)
    } else {
        let l = saturation_rows(&IntMatrix::from_rows(&restricted));
        let e = complete_to_unimodular(&l).expect("saturated rows");
        let mut m = l.to_i64_rows();
        m.extend(e.to_i64_rows());
        let m_inv = IntMatrix::from_rows(&m).inverse_unimodular().expect("unimodular").to_i64_rows();
        let r = l.rows();
        let coords: Vec<Vec<i64>> =
            restricted.iter().map(|v| to_i64(&lattice_coords(&l, &big(v)).expect("in the saturated span"))).collect();
        (Reduction { rank: r, m, m_inv }, Some(Arrangement::new(r, coords)?))
    };
    let mut nested = Vec::new();
    if let Some(red) = &reduced {
        for p in zero_dim_layers(red)? {
            nested.extend(maximal_nested_sets(red, &p, cap)?);
        }
    }
    Ok(StratumChart { chart: chart.clone(), support: s, surviving, removed, reduction, reduced, nested })
}

/// All strata of all charts of a regular fan.
pub fn stratified_charts(arr: &Arrangement, fan: &Fan, cap: usize) -> Result<Vec<StratumChart>> {
    let reg = fan.is_regular();
    if !reg.regular {
        let (c, det) = reg.witness.expect("witness for a non-regular fan");
        return Err(HyperqError::NotRegular(format!("cone {} with rays {:?} (det {})", c, fan.ray_matrix(c), det)));
    }
    let mut out = Vec::new();
    for c in 0..fan.cones.len() {
        let chart = chart_hypersurfaces(arr, fan, c)?;
        for mask in 0..(1usize << arr.k) {
            let s: Vec<usize> = (0..arr.k).filter(|i| mask >> i & 1 == 1).collect();
            out.push(boundary_supports(&chart, &s, cap)?);
        }
    }
    Ok(out)
}

/// Total number of opens `Σ_σ Σ_S max(1, |M_S^σ|)`.
pub fn stratified_chart_count(strata: &[StratumChart]) -> usize {
    strata.iter().map(|s| s.chart_count()).sum()
}

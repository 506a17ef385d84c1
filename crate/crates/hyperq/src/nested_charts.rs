//! Maximal nested sets of layers through a torsion point and the blow-up
//! charts they index: adapted bases, the chart map `f^S`, the regularized
//! functions `p_α`, the projective maps `ψ_C` and the boundary extension of
//! the Grassmannian family `Q`.

use crate::circuit_matroid::{rank_of_i64, Arrangement};
use crate::error::{HyperqError, Result};
use crate::exact_core::int_matrix::{complete_to_unimodular, lattice_coords, saturation_rows};
use crate::exact_core::{
    canonical_subspace, exact_divide, var_names, CycField, CycScalar, IntMatrix, LaurentPoly, RationalFunction, Scalar,
    SubspacePoint,
};
use crate::toric_layers::{completion, irreducible_factors, phi_p, Layer, TorusPoint};
use num_traits::{Signed, ToPrimitive};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Default cap on the number of nested sets per base point.
pub const DEFAULT_MAX_NESTED: usize = 10_000;

/// The cap from `HYPERQ_MAX_NESTED`, falling back to the default.
pub fn max_nested_from_env() -> usize {
    std::env::var("HYPERQ_MAX_NESTED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_NESTED)
}

type Poly = LaurentPoly<CycScalar>;
type RatFn = RationalFunction<CycScalar>;

/// A maximal nested set `S = {C₁, …, C_k}` together with an adapted basis.
#[derive(Clone, Debug)]
pub struct NestedSet {
    pub arrangement: Arrangement,
    pub base_point: TorusPoint,
    /// Complete sets `A_i = Φ_{C_i}` (indices into the arrangement).
    pub members: Vec<Vec<usize>>,
    pub layers: Vec<Layer>,
    /// `s(C_i)`: the largest member strictly inside `C_i`.
    pub successor: Vec<Option<usize>>,
    /// `α_{C_i}`, one per member.
    pub adapted_basis: Vec<Vec<i64>>,
    /// `a_i = α_{C_i}(p)`.
    pub constants: Vec<CycScalar>,
}

fn is_superset(a: &[usize], b: &[usize]) -> bool {
    b.iter().all(|x| a.contains(x))
}

fn in_rational_span(rows: &[Vec<i64>], v: &[i64]) -> bool {
    let mut all: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    let r = rank_of_i64(&all);
    all.push(v);
    rank_of_i64(&all) == r
}

fn sign_normalized(v: &[i64]) -> Vec<i64> {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.iter().map(|y| -y).collect(),
        _ => v.to_vec(),
    }
}

fn det_is_unit(rows: &[Vec<i64>]) -> bool {
    rows.len() == rows.first().map_or(0, |r| r.len()) && IntMatrix::from_rows(rows).det().abs() == 1.into()
}

impl NestedSet {
    /// Builds the nested set from its complete sets and a default adapted basis.
    pub fn from_members(arr: &Arrangement, p: &TorusPoint, members: Vec<Vec<usize>>) -> Result<Self> {
        let mut members: Vec<Vec<usize>> = members
            .into_iter()
            .map(|mut m| {
                m.sort_unstable();
                m
            })
            .collect();
        members.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        members.dedup();
        if members.len() != arr.k {
            return Err(HyperqError::AdaptedBasisFailure(format!(
                "nested set has {} members, expected {}",
                members.len(),
                arr.k
            )));
        }
        let layers: Vec<Layer> =
            members.iter().map(|m| Layer::through(arr, saturation_rows(&arr.matrix_of(m)), p)).collect();
        let mut ns = NestedSet {
            arrangement: arr.clone(),
            base_point: p.clone(),
            members,
            layers,
            successor: Vec::new(),
            adapted_basis: Vec::new(),
            constants: Vec::new(),
        };
        ns.successor = ns.compute_successors()?;
        let basis = ns.default_adapted_basis()?;
        ns.set_basis(basis);
        Ok(ns)
    }

    pub fn k(&self) -> usize {
        self.arrangement.k
    }

    /// `C_i ⊆ C_j`.
    pub fn layer_within(&self, i: usize, j: usize) -> bool {
        is_superset(&self.members[i], &self.members[j])
    }

    fn compute_successors(&self) -> Result<Vec<Option<usize>>> {
        let k = self.members.len();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let below: Vec<usize> = (0..k).filter(|&j| j != i && self.layer_within(j, i)).collect();
            for &a in &below {
                for &b in &below {
                    if !self.layer_within(a, b) && !self.layer_within(b, a) {
                        return Err(HyperqError::AdaptedBasisFailure(format!(
                            "members {:?} and {:?} below {:?} are incomparable",
                            self.members[a], self.members[b], self.members[i]
                        )));
                    }
                }
            }
            // The largest layer below is the one with the smallest complete set.
            out.push(below.into_iter().min_by_key(|&j| self.members[j].len()));
        }
        Ok(out)
    }

    fn saturation_of(&self, i: usize) -> Vec<Vec<i64>> {
        self.layers[i].saturation.to_i64_rows()
    }

    /// Greedy construction from the largest layers down; candidates are the
    /// standard basis, then circuit vectors, then an SNF completion.
    pub fn default_adapted_basis(&self) -> Result<Vec<Vec<i64>>> {
        let k = self.k();
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by_key(|&i| (self.layers[i].codim(), i));
        let mut chosen: Vec<Option<Vec<i64>>> = vec![None; self.members.len()];
        for &i in &order {
            let sat = self.saturation_of(i);
            let prior: Vec<Vec<i64>> = (0..self.members.len())
                .filter(|&j| j != i && self.layer_within(i, j))
                .map(|j| chosen[j].clone().expect("larger layers are processed first"))
                .collect();
            if prior.len() + 1 != sat.len() {
                return Err(HyperqError::AdaptedBasisFailure(format!(
                    "layer {:?} has rank {} but {} members above it",
                    self.members[i],
                    sat.len(),
                    prior.len()
                )));
            }
            let acceptable = |c: &[i64]| -> bool {
                if c.iter().all(|&x| x == 0) || !in_rational_span(&sat, c) {
                    return false;
                }
                // The candidate must not be constant on any member outside the chain below C_i.
                for j in 0..self.members.len() {
                    if j != i && !self.layer_within(j, i) && in_rational_span(&self.saturation_of(j), c) {
                        return false;
                    }
                }
                let mut rows = prior.clone();
                rows.push(c.to_vec());
                let m = IntMatrix::from_rows(&rows);
                m.rank() == rows.len() && crate::exact_core::int_matrix::rows_saturated(&m)
                    && lattice_in(&sat, c)
            };
            let mut candidates: Vec<Vec<i64>> = (0..k)
                .map(|l| {
                    let mut e = vec![0; k];
                    e[l] = 1;
                    e
                })
                .collect();
            candidates.extend(self.members[i].iter().map(|&a| sign_normalized(&self.arrangement.vectors[a])));
            candidates.extend(self.arrangement.vectors.iter().map(|v| sign_normalized(v)));
            if let Some(c) = snf_candidate(&sat, &prior) {
                candidates.push(c);
            }
            let pick = candidates.into_iter().find(|c| acceptable(c)).ok_or_else(|| {
                HyperqError::AdaptedBasisFailure(format!("no basis vector for layer {:?}", self.members[i]))
            })?;
            chosen[i] = Some(pick);
        }
        let basis: Vec<Vec<i64>> = chosen.into_iter().map(|c| c.expect("all members processed")).collect();
        check_adapted_basis(self, &basis).map_err(HyperqError::AdaptedBasisFailure)?;
        Ok(basis)
    }

    fn set_basis(&mut self, basis: Vec<Vec<i64>>) {
        self.constants = basis.iter().map(|b| self.base_point.value(b)).collect();
        self.adapted_basis = basis;
    }

    /// Replaces the adapted basis, reordering the members so that
    /// `p_S(β_i) = C_i`.
    pub fn with_adapted_basis(&self, basis: Vec<Vec<i64>>) -> Result<Self> {
        if basis.len() != self.k() || basis.iter().any(|b| b.len() != self.k()) {
            return Err(HyperqError::InvalidInput("adapted basis has the wrong shape".into()));
        }
        let mut perm = Vec::with_capacity(basis.len());
        for b in &basis {
            perm.push(self.p_s_map(b)?);
        }
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        if distinct.len() != perm.len() {
            return Err(HyperqError::AdaptedBasisFailure("p_S is not a bijection on the basis".into()));
        }
        let mut ns = self.clone();
        ns.members = perm.iter().map(|&j| self.members[j].clone()).collect();
        ns.layers = perm.iter().map(|&j| self.layers[j].clone()).collect();
        ns.successor = ns.compute_successors()?;
        check_adapted_basis(&ns, &basis).map_err(HyperqError::AdaptedBasisFailure)?;
        ns.set_basis(basis);
        Ok(ns)
    }

    /// `p_S(α)`: the largest member on which `α` is constant.
    pub fn p_s_map(&self, alpha: &[i64]) -> Result<usize> {
        let cands: Vec<usize> =
            (0..self.members.len()).filter(|&j| in_rational_span(&self.saturation_of(j), alpha)).collect();
        cands
            .iter()
            .copied()
            .find(|&j| cands.iter().all(|&l| self.layer_within(l, j)))
            .ok_or_else(|| HyperqError::NoContainingLayer(format!("{:?}", alpha)))
    }

    /// Exponent vector of `∏_{C_j ⊆ C_i} z_j`.
    pub fn monomial_exponents(&self, i: usize) -> Vec<i64> {
        (0..self.members.len()).map(|j| i64::from(self.layer_within(j, i))).collect()
    }

    pub fn vars(&self) -> Arc<Vec<String>> {
        var_names("z", self.k())
    }

    /// Chart units `y_i = a_i + ∏_{C_j⊆C_i} z_j`.
    pub fn units(&self) -> Vec<Poly> {
        let vars = self.vars();
        (0..self.k())
            .map(|i| {
                let m = Poly::monomial(vars.clone(), self.monomial_exponents(i), CycScalar::one());
                m.plus(&Poly::constant_in(vars.clone(), self.constants[i].clone()))
            })
            .collect()
    }

    fn basis_inverse(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.adapted_basis).inverse_unimodular().expect("adapted basis is unimodular")
    }

    /// Coordinates `c` of `α = Σ c_i β_i`.
    pub fn coordinates(&self, alpha: &[i64]) -> Vec<i64> {
        let binv = self.basis_inverse();
        (0..self.k())
            .map(|j| (0..self.k()).map(|l| alpha[l] * binv.get(l, j).to_i64().expect("small")).sum())
            .collect()
    }

    /// `q^α = N/D` in chart coordinates, with `N, D` products of units.
    pub fn q_power_parts(&self, alpha: &[i64]) -> (Poly, Poly) {
        let vars = self.vars();
        let ys = self.units();
        let c = self.coordinates(alpha);
        let mut num = Poly::constant_in(vars.clone(), CycScalar::one());
        let mut den = Poly::constant_in(vars, CycScalar::one());
        for (y, &e) in ys.iter().zip(&c) {
            if e > 0 {
                num = num.times(&y.pow(e as u32));
            } else if e < 0 {
                den = den.times(&y.pow((-e) as u32));
            }
        }
        (num, den)
    }

    /// `p_α` with `q^α − α(p) = p_α · ∏_{C_j ⊆ C_α} z_j`; exact, and `p_α(0) ≠ 0`.
    pub fn p_alpha(&self, alpha: &[i64]) -> Result<RatFn> {
        let c = self.p_s_map(alpha)?;
        let a = self.base_point.value(alpha);
        let (n0, d) = self.q_power_parts(alpha);
        let num = n0.minus(&d.scale(&a));
        let mono = Poly::monomial(self.vars(), self.monomial_exponents(c), CycScalar::one());
        let q = exact_divide(&num, &mono)
            .map_err(|_| HyperqError::NotDivisible(format!("q^{:?} - a by the monomial of {:?}", alpha, self.members[c])))?;
        if q.constant_term().is_zero() {
            return Err(HyperqError::NotDivisible(format!("p_alpha(0) = 0 for {:?}", alpha)));
        }
        RatFn::new(q, d).ok_or_else(|| HyperqError::DenominatorZero("chart unit".into()))
    }

    /// `f^S`: torus point (standard coordinates) of chart coordinates `z`.
    pub fn chart_to_torus<F: CycField>(&self, z: &[F]) -> Result<Vec<F>> {
        let k = self.k();
        let ys: Vec<F> = (0..k)
            .map(|i| {
                let m = z.iter().zip(self.monomial_exponents(i)).filter(|(_, e)| *e == 1).fold(F::one(), |acc, (x, _)| acc.times(x));
                F::from_cyc(&self.constants[i]).plus(&m)
            })
            .collect();
        if let Some(i) = ys.iter().position(|y| y.negligible()) {
            return Err(HyperqError::OutsideTorus(format!("coordinate {} of f^S vanishes", i + 1)));
        }
        let binv = self.basis_inverse();
        Ok((0..k)
            .map(|l| {
                (0..k).fold(F::one(), |acc, i| {
                    let e = binv.get(l, i).to_i64().expect("small");
                    acc.times(&ys[i].pow_i(e).expect("nonzero unit"))
                })
            })
            .collect())
    }

    /// Inverse of [`Self::chart_to_torus`].
    pub fn torus_to_chart<F: CycField>(&self, q: &[F]) -> Result<Vec<F>> {
        let k = self.k();
        if q.iter().any(|x| x.negligible()) {
            return Err(HyperqError::OutsideTorus("zero torus coordinate".into()));
        }
        let ys: Vec<F> = self.adapted_basis.iter().map(|b| torus_power(q, b)).collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.members[i].len()));
        let mut z: Vec<Option<F>> = vec![None; k];
        for &i in &order {
            let mut den = F::one();
            for j in 0..k {
                if j != i && self.layer_within(j, i) {
                    den = den.times(z[j].as_ref().expect("smaller layers first"));
                }
            }
            if den.negligible() {
                return Err(HyperqError::DenominatorZero(format!("z_{}", i + 1)));
            }
            let num = ys[i].minus(&F::from_cyc(&self.constants[i]));
            z[i] = Some(num.over(&den).expect("nonzero denominator"));
        }
        Ok(z.into_iter().map(|x| x.expect("filled")).collect())
    }

    /// `ψ_C`: homogeneous coordinates `[α(t) − α|_C]` over the generators,
    /// with the common monomial factor removed. Defaults to the Hermite basis
    /// of the saturated lattice of `C`.
    pub fn psi(&self, layer: &Layer, generators: Option<&[Vec<i64>]>) -> Result<ProjectiveMap> {
        let gens: Vec<Vec<i64>> = match generators {
            Some(g) => g.to_vec(),
            None => layer.saturation.to_i64_rows(),
        };
        if gens.is_empty() {
            return Err(HyperqError::InvalidInput("layer has no generators".into()));
        }
        let mut parts = Vec::new();
        for g in &gens {
            let v = layer
                .character_value(g)
                .ok_or_else(|| HyperqError::InvalidInput(format!("{:?} is not constant on the layer", g)))?;
            let a = CycScalar::exp_2pi_i(&v);
            let (n0, d) = self.q_power_parts(g);
            parts.push((n0.minus(&d.scale(&a)), d));
        }
        let k = self.k();
        let mut common: Option<Vec<i64>> = None;
        for (n, d) in &parts {
            if n.is_zero() {
                continue;
            }
            let (en, ed) = (n.min_exponents(), d.min_exponents());
            let e: Vec<i64> = (0..k).map(|i| en[i] - ed[i]).collect();
            common = Some(match common {
                None => e,
                Some(c) => (0..k).map(|i| c[i].min(e[i])).collect(),
            });
        }
        let shift: Vec<i64> = common.unwrap_or_else(|| vec![0; k]).iter().map(|x| -x).collect();
        let coords = parts
            .into_iter()
            .map(|(n, d)| RatFn::new(n.shift(&shift), d).expect("unit denominator"))
            .collect();
        Ok(ProjectiveMap { generators: gens, coords })
    }

    /// Where `z` sits relative to `V_S⁰ ⊆ V_S ⊆ U_S`.
    pub fn domain<F: CycField>(&self, z: &[F]) -> Result<ChartDomain> {
        let q = match self.chart_to_torus(z) {
            Ok(q) => q,
            Err(_) => return Ok(ChartDomain::Outside),
        };
        let arr = &self.arrangement;
        let local = phi_p(arr, &self.base_point);
        let mut on: Vec<usize> = Vec::new();
        for (a, v) in arr.vectors.iter().enumerate() {
            if torus_power(&q, v).minus(&F::one()).negligible() {
                if !local.contains(&a) {
                    return Ok(ChartDomain::Outside);
                }
                on.push(a);
            }
        }
        if !on.is_empty() {
            // The point must lie on the component through p.
            let sat = saturation_rows(&arr.matrix_of(&on)).to_i64_rows();
            for s in &sat {
                let want = F::from_cyc(&self.base_point.value(s));
                if !torus_power(&q, s).minus(&want).negligible() {
                    return Ok(ChartDomain::Outside);
                }
            }
        }
        for &a in &local {
            let p = self.p_alpha(&arr.vectors[a])?;
            let v = p.eval_with(z, |c| F::from_cyc(c));
            if v.map_or(true, |x| x.negligible()) {
                return Ok(ChartDomain::U);
            }
        }
        if z.iter().any(|x| x.negligible()) {
            Ok(ChartDomain::V)
        } else {
            Ok(ChartDomain::V0)
        }
    }

    /// The spanning vectors `(∏_{C_j⊆C_i} z_j)·v_i''` of the extended family,
    /// as functions of `z`, in `𝔲¹` coordinates (`t_α` for each arrangement
    /// vector, then the standard coordinates of `𝔱`).
    pub fn extension_vectors(&self) -> Result<ExtensionVectors> {
        let k = self.k();
        let arr = &self.arrangement;
        let binv = self.basis_inverse();
        let vars = self.vars();
        let mut rows = Vec::with_capacity(k);
        let parts: Vec<(Vec<i64>, Poly, Poly)> = arr
            .vectors
            .iter()
            .map(|v| {
                let (n0, d) = self.q_power_parts(v);
                (self.coordinates(v), n0, d)
            })
            .collect();
        for i in 0..k {
            let mi = self.monomial_exponents(i);
            let mut t_terms = Vec::new();
            for (a, (c, n0, d)) in parts.iter().enumerate() {
                if c[i] == 0 {
                    continue;
                }
                // (1 + q^α)/(q^α − 1) = (N₀ + D)/(N₀ − D); clear the monomial part of N₀ − D.
                let n = n0.minus(d);
                let e = n.min_exponents();
                let rest: Vec<i64> = (0..k).map(|j| mi[j] - e[j]).collect();
                if rest.iter().any(|&x| x < 0) {
                    return Err(HyperqError::NotDivisible(format!(
                        "t-coefficient of {:?} in row {} is not regular",
                        arr.vectors[a],
                        i + 1
                    )));
                }
                let neg: Vec<i64> = e.iter().map(|x| -x).collect();
                let numer = n0.plus(d).shift(&rest).scale(&CycScalar::from_i64(c[i]));
                t_terms.push((a, numer, n.shift(&neg)));
            }
            let v_part: Vec<i64> = (0..k).map(|l| binv.get(l, i).to_i64().expect("small")).collect();
            rows.push(ExtensionRow { monomial: Poly::monomial(vars.clone(), mi, CycScalar::one()), v_part, t_terms });
        }
        Ok(ExtensionVectors { num_t: arr.len(), k, rows })
    }

    /// `Q_Φ^S(z)`: the span of the cleared spanning vectors at `z ∈ V_S`.
    pub fn boundary_extension<F: CycField>(&self, z: &[F], hbar: &F) -> Result<SubspacePoint<F>> {
        self.extension_vectors()?.evaluate(z, hbar)
    }
}

fn lattice_in(sat: &[Vec<i64>], c: &[i64]) -> bool {
    if sat.is_empty() {
        return false;
    }
    let basis = IntMatrix::from_rows(sat);
    lattice_coords(&basis, &crate::exact_core::int_matrix::big(c)).is_some()
}

/// Completes `prior` inside the saturated lattice spanned by `sat`.
fn snf_candidate(sat: &[Vec<i64>], prior: &[Vec<i64>]) -> Option<Vec<i64>> {
    let basis = IntMatrix::from_rows(sat);
    let r = sat.len();
    let coords: Vec<Vec<crate::exact_core::Int>> = prior
        .iter()
        .map(|p| lattice_coords(&basis, &crate::exact_core::int_matrix::big(p)))
        .collect::<Option<_>>()?;
    let m = if coords.is_empty() {
        IntMatrix::zeros(0, r)
    } else {
        IntMatrix::from_big_rows_with_cols(coords, r)
    };
    let extra = complete_to_unimodular(&m)?;
    if extra.rows() == 0 {
        return None;
    }
    let w = extra.row(0);
    Some(
        (0..sat[0].len())
            .map(|j| (0..r).map(|i| w[i].to_i64().expect("small") * sat[i][j]).sum())
            .collect(),
    )
}

/// `q^v` for a torus point in standard coordinates.
pub fn torus_power<F: Scalar>(q: &[F], v: &[i64]) -> F {
    q.iter().zip(v).fold(F::one(), |acc, (x, &e)| acc.times(&x.pow_i(e).expect("nonzero torus coordinate")))
}

/// Checks the defining property of an adapted basis.
pub fn check_adapted_basis(ns: &NestedSet, basis: &[Vec<i64>]) -> std::result::Result<(), String> {
    if !det_is_unit(basis) {
        return Err("basis is not unimodular".into());
    }
    for (i, layer) in ns.layers.iter().enumerate() {
        let sat = layer.saturation.to_i64_rows();
        let inside = basis.iter().filter(|b| in_rational_span(&sat, b)).count();
        if inside != sat.len() {
            return Err(format!(
                "{} basis vectors lie in the lattice of {:?}, which has rank {}",
                inside,
                ns.members[i],
                sat.len()
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartDomain {
    Outside,
    U,
    V,
    V0,
}

/// Homogeneous coordinates as functions of the chart coordinates.
#[derive(Clone, Debug)]
pub struct ProjectiveMap {
    pub generators: Vec<Vec<i64>>,
    pub coords: Vec<RatFn>,
}

impl ProjectiveMap {
    pub fn eval<F: CycField>(&self, z: &[F]) -> Result<Vec<F>> {
        let vals: Vec<F> = self
            .coords
            .iter()
            .map(|c| c.eval_with(z, |x| F::from_cyc(x)).ok_or_else(|| HyperqError::DenominatorZero("psi coordinate".into())))
            .collect::<Result<_>>()?;
        if vals.iter().all(|v| v.negligible()) {
            return Err(HyperqError::AllZero);
        }
        Ok(vals)
    }

    pub fn texts(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_text()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionRow {
    /// `∏_{C_j⊆C_i} z_j`, multiplying the `𝔱` part.
    pub monomial: Poly,
    /// `B⁻¹ e_i` in standard coordinates.
    pub v_part: Vec<i64>,
    /// `(arrangement index, numerator, denominator)`; the coefficient of
    /// `t_α` is `ħ · numerator / denominator`.
    pub t_terms: Vec<(usize, Poly, Poly)>,
}

#[derive(Clone, Debug)]
pub struct ExtensionVectors {
    pub num_t: usize,
    pub k: usize,
    pub rows: Vec<ExtensionRow>,
}

impl ExtensionVectors {
    pub fn vectors<F: CycField>(&self, z: &[F], hbar: &F) -> Result<Vec<Vec<F>>> {
        let embed = |c: &CycScalar| F::from_cyc(c);
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut v = vec![F::zero(); self.num_t + self.k];
            let m = row.monomial.eval_with(z, embed).expect("polynomial");
            for (l, &x) in row.v_part.iter().enumerate() {
                v[self.num_t + l] = m.times(&F::from_i64(x));
            }
            for (a, num, den) in &row.t_terms {
                let d = den.eval_with(z, embed).expect("polynomial");
                if d.negligible() {
                    return Err(HyperqError::PAlphaZero(format!("t-coefficient {} vanishes in the denominator", a)));
                }
                let n = num.eval_with(z, embed).expect("polynomial");
                v[*a] = hbar.times(&n.over(&d).expect("nonzero"));
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn evaluate<F: CycField>(&self, z: &[F], hbar: &F) -> Result<SubspacePoint<F>> {
        let vecs = self.vectors(z, hbar)?;
        Ok(canonical_subspace(&vecs, self.num_t + self.k))
    }
}

/// `Q(q) = Span{e_i + ħ Σ_{α} α_i (1+q^α)/(q^α−1) t_α}` at a regular torus
/// point, summing over `Φ = Φ⁺ ⊔ −Φ⁺` with `t_{−α} = t_α`.
pub fn interior_family<F: CycField>(arr: &Arrangement, q: &[F], hbar: &F) -> Result<SubspacePoint<F>> {
    let p = arr.len();
    let k = arr.k;
    let mut coeff = Vec::with_capacity(p);
    for v in &arr.vectors {
        let qa = torus_power(q, v);
        let den = qa.minus(&F::one());
        if den.negligible() {
            return Err(HyperqError::QOnWall(format!("{:?}", v)));
        }
        coeff.push(qa.plus(&F::one()).over(&den).expect("nonzero"));
    }
    let vecs: Vec<Vec<F>> = (0..k)
        .map(|i| {
            let mut row = vec![F::zero(); p + k];
            row[p + i] = F::one();
            for (a, v) in arr.vectors.iter().enumerate() {
                if v[i] != 0 {
                    row[a] = hbar.times(&F::from_i64(v[i])).times(&coeff[a]);
                }
            }
            row
        })
        .collect();
    Ok(canonical_subspace(&vecs, p + k))
}

/// All maximal nested sets at `p`, deduplicated and sorted by their members.
pub fn maximal_nested_sets(arr: &Arrangement, p: &TorusPoint, cap: usize) -> Result<Vec<NestedSet>> {
    let local = phi_p(arr, p);
    if arr.rank_of(&local) < arr.k {
        return Err(HyperqError::RankDeficient);
    }
    let mut factor_cache: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    let mut children_cache: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    let mut found: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut stack: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]];
    while let Some(flag) = stack.pop() {
        let top = flag.last().unwrap().clone();
        if arr.rank_of(&top) == arr.k {
            let mut members = BTreeSet::new();
            for a in flag.iter().skip(1) {
                if !factor_cache.contains_key(a) {
                    factor_cache.insert(a.clone(), irreducible_factors(arr, a, p)?);
                }
                members.extend(factor_cache[a].iter().cloned());
            }
            found.insert(members.into_iter().collect());
            if found.len() > cap {
                return Err(HyperqError::TooManyNestedSets(cap));
            }
            continue;
        }
        let children = children_cache
            .entry(top.clone())
            .or_insert_with(|| {
                let mut set = BTreeSet::new();
                for &e in &local {
                    if !top.contains(&e) {
                        let mut g = top.clone();
                        g.push(e);
                        set.insert(completion(arr, &g, p));
                    }
                }
                set.into_iter().collect()
            })
            .clone();
        for c in children.into_iter().rev() {
            let mut f = flag.clone();
            f.push(c);
            stack.push(f);
        }
    }
    found.into_iter().map(|m| NestedSet::from_members(arr, p, m)).collect()
}

/// Maximal nested sets at every zero-dimensional layer.
pub fn all_nested_sets(arr: &Arrangement, cap: usize) -> Result<Vec<NestedSet>> {
    let mut out = Vec::new();
    for p in crate::toric_layers::zero_dim_layers(arr)? {
        out.extend(maximal_nested_sets(arr, &p, cap)?);
    }
    Ok(out)
}

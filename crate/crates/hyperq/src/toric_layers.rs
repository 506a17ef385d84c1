//! The toric arrangement `{H_α}` in `Tᵏ`: layers, torsion points, localized
//! circuit sets and their completions, irreducible factors, layer posets.
//!
//! Points are kept in log coordinates `x ∈ Qᵏ/Zᵏ` (`q = exp(2πi·x)`), so every
//! membership test is exact rational arithmetic.

use crate::circuit_matroid::{combinations, rank_of_i64, Arrangement};
use crate::error::{HyperqError, Result};
use crate::exact_core::int_matrix::{complete_to_unimodular, hermite, rows_saturated, saturation_rows, snf};
use crate::exact_core::{CycScalar, Int, IntMatrix, Rat};
use num_traits::{ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    log_coords: Vec<Rat>,
}

fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

impl TorusPoint {
    pub fn new(coords: Vec<Rat>) -> Self {
        TorusPoint { log_coords: coords.iter().map(frac).collect() }
    }

    pub fn identity(k: usize) -> Self {
        TorusPoint { log_coords: vec![Rat::zero(); k] }
    }

    pub fn k(&self) -> usize {
        self.log_coords.len()
    }

    pub fn log_coords(&self) -> &[Rat] {
        &self.log_coords
    }

    pub fn is_identity(&self) -> bool {
        self.log_coords.iter().all(|x| x.is_zero())
    }

    /// `⟨α, x⟩ mod 1`.
    pub fn pairing(&self, alpha: &[i64]) -> Rat {
        let s: Rat = alpha.iter().zip(&self.log_coords).map(|(&a, x)| x * Rat::from_integer(a.into())).sum();
        frac(&s)
    }

    /// `α(q) = 1`.
    pub fn on_hypersurface(&self, alpha: &[i64]) -> bool {
        self.pairing(alpha).is_zero()
    }

    /// `α(q)` as an exact root of unity.
    pub fn value(&self, alpha: &[i64]) -> CycScalar {
        CycScalar::exp_2pi_i(&self.pairing(alpha))
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.log_coords.iter().map(crate::exact_core::scalar::rat_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A connected component of an intersection of the `H_α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    /// Canonical representative point of the component.
    pub base_point: TorusPoint,
    /// `Φ_C = {α : α ≡ 1 on C}` (indices into the arrangement).
    pub complete_set: Vec<usize>,
    /// Hermite basis of `⟨Φ_C⟩_Z`.
    pub lattice: IntMatrix,
    /// Hermite basis of the saturation of `⟨Φ_C⟩`.
    pub saturation: IntMatrix,
}

fn hermite_rows(m: &IntMatrix) -> IntMatrix {
    let h = hermite(m);
    let r = h.pivots.len();
    IntMatrix::from_big_rows_with_cols((0..r).map(|i| h.h.row(i)).collect(), m.cols())
}

/// Canonical point of the coset `{y : s·y ≡ s·x mod Z}` for saturated rows `s`.
fn canonical_base(sat: &IntMatrix, x: &TorusPoint) -> TorusPoint {
    let k = x.k();
    let r = sat.rows();
    if r == 0 {
        return TorusPoint::identity(k);
    }
    let extra = complete_to_unimodular(sat).expect("saturated rows");
    let mut rows = sat.to_rows();
    rows.extend(extra.to_rows());
    let m = IntMatrix::from_big_rows_with_cols(rows, k);
    let minv = m.inverse_unimodular().expect("unimodular completion");
    let c: Vec<Rat> = (0..r)
        .map(|i| {
            let s: Rat = (0..k).map(|j| Rat::from_integer(sat.get(i, j).clone()) * &x.log_coords[j]).sum();
            frac(&s)
        })
        .collect();
    let coords = (0..k)
        .map(|i| (0..r).map(|j| Rat::from_integer(minv.get(i, j).clone()) * &c[j]).sum())
        .collect();
    TorusPoint::new(coords)
}

/// Whether `α` lies in the rational row span of `sat`.
fn in_span(sat: &IntMatrix, alpha: &[i64]) -> bool {
    let mut rows: Vec<Vec<i64>> = sat.to_i64_rows();
    let r = rows.len();
    rows.push(alpha.to_vec());
    let refs: Vec<&[i64]> = rows.iter().map(|v| v.as_slice()).collect();
    rank_of_i64(&refs) == r
}

impl Layer {
    /// The layer with saturated character lattice `sat` through `x`.
    pub fn through(arr: &Arrangement, sat: IntMatrix, x: &TorusPoint) -> Self {
        let base_point = canonical_base(&sat, x);
        let complete_set: Vec<usize> = (0..arr.len())
            .filter(|&a| in_span(&sat, &arr.vectors[a]) && base_point.on_hypersurface(&arr.vectors[a]))
            .collect();
        let lattice = hermite_rows(&arr.matrix_of(&complete_set));
        Layer { base_point, complete_set, lattice, saturation: sat }
    }

    pub fn k(&self) -> usize {
        self.base_point.k()
    }

    pub fn dim(&self) -> usize {
        self.k() - self.saturation.rows()
    }

    pub fn codim(&self) -> usize {
        self.saturation.rows()
    }

    pub fn contains_point(&self, x: &TorusPoint) -> bool {
        (0..self.saturation.rows()).all(|i| {
            let row: Vec<i64> = self.saturation.row(i).iter().map(|v| v.to_i64().expect("small")).collect();
            x.pairing(&row) == self.base_point.pairing(&row)
        })
    }

    /// `other ⊆ self`.
    pub fn contains_layer(&self, other: &Layer) -> bool {
        self.contains_point(&other.base_point)
            && self.saturation.to_i64_rows().iter().all(|r| in_span(&other.saturation, r))
    }

    /// Whether the character `α` is constant on the layer.
    pub fn is_constant(&self, alpha: &[i64]) -> bool {
        in_span(&self.saturation, alpha)
    }

    /// `α|_C` in log form, for characters constant on the layer.
    pub fn character_value(&self, alpha: &[i64]) -> Option<Rat> {
        self.is_constant(alpha).then(|| self.base_point.pairing(alpha))
    }
}

/// Connected components of `⋂_{α∈A} H_α`, ordered by base point.
pub fn components(arr: &Arrangement, a: &[usize]) -> Vec<Layer> {
    let k = arr.k;
    if a.is_empty() {
        return vec![Layer::through(arr, IntMatrix::zeros(0, k), &TorusPoint::identity(k))];
    }
    let m = arr.matrix_of(a);
    let sat = saturation_rows(&m);
    let dec = snf(&m);
    let divisors: Vec<i64> = dec.divisors().iter().map(|d| d.to_i64().expect("small divisor")).collect();
    let mut out = BTreeMap::new();
    let mut counter = vec![0i64; divisors.len()];
    loop {
        let mut y = vec![Rat::zero(); k];
        for (i, (&c, &d)) in counter.iter().zip(&divisors).enumerate() {
            y[i] = Rat::new(c.into(), d.into());
        }
        let x: Vec<Rat> = (0..k).map(|i| (0..k).map(|j| Rat::from_integer(dec.v.get(i, j).clone()) * &y[j]).sum()).collect();
        let layer = Layer::through(arr, sat.clone(), &TorusPoint::new(x));
        out.insert(layer.base_point.clone(), layer);
        // Odometer over ∏ Z/d_i.
        let mut i = 0;
        while i < counter.len() {
            counter[i] += 1;
            if counter[i] < divisors[i] {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
        if i == counter.len() {
            break;
        }
    }
    out.into_values().collect()
}

/// Product of the elementary divisors of the character matrix of `A`.
pub fn component_count(arr: &Arrangement, a: &[usize]) -> Int {
    if a.is_empty() {
        return Int::from(1);
    }
    snf(&arr.matrix_of(a)).divisors().iter().product()
}

/// `C₀(Φ)`: the zero-dimensional layers, sorted.
pub fn zero_dim_layers(arr: &Arrangement) -> Result<Vec<TorusPoint>> {
    if arr.rank() < arr.k {
        return Err(HyperqError::RankDeficient);
    }
    let mut pts = BTreeSet::new();
    for basis in combinations(arr.len(), arr.k) {
        if arr.rank_of(&basis) < arr.k {
            continue;
        }
        for layer in components(arr, &basis) {
            pts.insert(layer.base_point);
        }
    }
    Ok(pts.into_iter().collect())
}

/// `Φ_p = {α : p ∈ H_α}`.
pub fn phi_p(arr: &Arrangement, p: &TorusPoint) -> Vec<usize> {
    (0..arr.len()).filter(|&a| p.on_hypersurface(&arr.vectors[a])).collect()
}

/// `⟨A⟩_Q ∩ Φ_p`.
pub fn completion(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> Vec<usize> {
    let r = arr.rank_of(a);
    phi_p(arr, p)
        .into_iter()
        .filter(|&e| {
            let mut b = a.to_vec();
            b.push(e);
            arr.rank_of(&b) == r
        })
        .collect()
}

pub fn is_complete(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> bool {
    let mut s = a.to_vec();
    s.sort_unstable();
    s.dedup();
    let pp = phi_p(arr, p);
    s.iter().all(|e| pp.contains(e)) && completion(arr, &s, p) == s
}

/// Whether the disjoint parts form a direct-sum decomposition: ranks add up
/// and the saturated lattices of the parts sum to a saturated lattice.
pub fn is_direct_sum(arr: &Arrangement, parts: &[Vec<usize>]) -> bool {
    let all: Vec<usize> = parts.iter().flatten().copied().collect();
    let total = arr.rank_of(&all);
    if parts.iter().map(|p| arr.rank_of(p)).sum::<usize>() != total {
        return false;
    }
    let mut rows = Vec::new();
    for p in parts {
        if p.is_empty() {
            continue;
        }
        rows.extend(saturation_rows(&arr.matrix_of(p)).to_rows());
    }
    if rows.is_empty() {
        return true;
    }
    let m = IntMatrix::from_big_rows_with_cols(rows, arr.k);
    m.rank() == m.rows() && rows_saturated(&m)
}

/// Connected components of the matroid on `A`, each sorted, ordered by first element.
pub fn matroid_components(arr: &Arrangement, a: &[usize]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..a.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let n = p[j];
            p[j] = r;
            j = n;
        }
        r
    }
    let mut basis: Vec<usize> = Vec::new();
    for (pos, &e) in a.iter().enumerate() {
        let mut trial: Vec<usize> = basis.iter().map(|&b| a[b]).collect();
        trial.push(e);
        if arr.rank_of(&trial) > basis.len() {
            basis.push(pos);
            continue;
        }
        // Fundamental circuit of e: basis elements that cannot be dropped.
        for (bi, &b) in basis.iter().enumerate() {
            let mut rest: Vec<usize> = basis.iter().enumerate().filter(|&(j, _)| j != bi).map(|(_, &x)| a[x]).collect();
            rest.push(e);
            if arr.rank_of(&rest) == basis.len() {
                let (x, y) = (find(&mut parent, pos), find(&mut parent, b));
                parent[x] = y;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for pos in 0..a.len() {
        let r = find(&mut parent, pos);
        groups.entry(r).or_default().push(a[pos]);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().map(|mut g| {
        g.sort_unstable();
        g
    }).collect();
    out.sort();
    out
}

fn split_groups(arr: &Arrangement, groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let union = |mask: u64, want: bool| -> Vec<usize> {
        let mut v: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(i, _)| ((mask >> i) & 1 == 1) == want)
            .flat_map(|(_, g)| g.iter().copied())
            .collect();
        v.sort_unstable();
        v
    };
    let g = groups.len();
    if g <= 1 {
        return vec![union(u64::MAX, true)];
    }
    // Masks always contain group 0, so each bipartition is tried once.
    for mask in (1u64..(1u64 << g) - 1).filter(|m| m & 1 == 1) {
        let (a1, a2) = (union(mask, true), union(mask, false));
        if is_direct_sum(arr, &[a1, a2]) {
            let left: Vec<Vec<usize>> = groups.iter().enumerate().filter(|(i, _)| (mask >> i) & 1 == 1).map(|(_, x)| x.clone()).collect();
            let right: Vec<Vec<usize>> = groups.iter().enumerate().filter(|(i, _)| (mask >> i) & 1 == 0).map(|(_, x)| x.clone()).collect();
            let mut out = split_groups(arr, &left);
            out.extend(split_groups(arr, &right));
            return out;
        }
    }
    vec![union(u64::MAX, true)]
}

/// The finest decomposition of a complete set into irreducible factors.
pub fn irreducible_factors(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> Result<Vec<Vec<usize>>> {
    if !is_complete(arr, a, p) {
        return Err(HyperqError::NotComplete(format!("{:?}", a)));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = a.to_vec();
    s.sort_unstable();
    let groups = matroid_components(arr, &s);
    if groups.len() > 63 {
        return Err(HyperqError::InvalidInput("too many matroid components".into()));
    }
    let mut out = split_groups(arr, &groups);
    out.sort();
    Ok(out)
}

pub fn is_irreducible(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> Result<bool> {
    Ok(irreducible_factors(arr, a, p)?.len() == 1)
}

/// Layer through `p` corresponding to a complete set of `Φ_p`.
pub fn layer_from_complete_set(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> Result<Layer> {
    if !is_complete(arr, a, p) {
        return Err(HyperqError::NotComplete(format!("{:?}", a)));
    }
    Ok(Layer::through(arr, saturation_rows(&arr.matrix_of(a)), p))
}

pub fn complete_set_from_layer(arr: &Arrangement, layer: &Layer) -> Vec<usize> {
    (0..arr.len())
        .filter(|&a| layer.is_constant(&arr.vectors[a]) && layer.base_point.on_hypersurface(&arr.vectors[a]))
        .collect()
}

/// Layers through `p`, with covering relations.
#[derive(Clone, Debug)]
pub struct LayerPoset {
    pub base_point: TorusPoint,
    pub nodes: Vec<Layer>,
    /// `(upper, lower)`: `nodes[lower] ⊂ nodes[upper]` is a cover.
    pub covers: Vec<(usize, usize)>,
}

impl LayerPoset {
    /// Number of nodes of each codimension.
    pub fn levels(&self) -> Vec<usize> {
        let top = self.nodes.iter().map(|n| n.codim()).max().unwrap_or(0);
        let mut out = vec![0; top + 1];
        for n in &self.nodes {
            out[n.codim()] += 1;
        }
        out
    }

    pub fn index_of(&self, complete_set: &[usize]) -> Option<usize> {
        self.nodes.iter().position(|n| n.complete_set == complete_set)
    }

    /// All maximal chains `T^k = C₀ ⊃ C₁ ⊃ … ⊃ C_top`, as node indices.
    pub fn maximal_chains(&self) -> Vec<Vec<usize>> {
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for &(u, l) in &self.covers {
            below[u].push(l);
        }
        let mut out = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(chain) = stack.pop() {
            let last = *chain.last().unwrap();
            if below[last].is_empty() {
                out.push(chain);
                continue;
            }
            for &l in below[last].iter().rev() {
                let mut c = chain.clone();
                c.push(l);
                stack.push(c);
            }
        }
        out
    }
}

/// `C_p(Φ)` as a poset, nodes sorted by codimension then complete set.
pub fn layer_poset(arr: &Arrangement, p: &TorusPoint) -> LayerPoset {
    let pp = phi_p(arr, p);
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut edges: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut frontier = vec![Vec::<usize>::new()];
    seen.insert((0, Vec::new()));
    while let Some(f) = frontier.pop() {
        for &e in &pp {
            if f.contains(&e) {
                continue;
            }
            let mut g = f.clone();
            g.push(e);
            let g = completion(arr, &g, p);
            edges.insert((f.clone(), g.clone()));
            if seen.insert((arr.rank_of(&g), g.clone())) {
                frontier.push(g);
            }
        }
    }
    let order: Vec<Vec<usize>> = seen.into_iter().map(|(_, s)| s).collect();
    let nodes: Vec<Layer> =
        order.iter().map(|s| Layer::through(arr, saturation_rows(&arr.matrix_of(s)), p)).collect();
    let pos = |s: &Vec<usize>| order.iter().position(|x| x == s).expect("known node");
    let covers = edges.iter().map(|(u, l)| (pos(u), pos(l))).collect();
    LayerPoset { base_point: p.clone(), nodes, covers }
}

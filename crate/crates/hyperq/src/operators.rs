//! Steinberg operators in the stable basis, cup-product and quantum
//! multiplication matrices, the holonomy relations they satisfy, and the
//! Grassmannian-valued maps built from them.

use crate::circuit_matroid::{circuits, combinations, one_based, rank2_flats, Arrangement, CircuitVector, HypertoricData};
use crate::error::{HyperqError, Result};
use crate::exact_core::{
    canonical_subspace, rat, var_names, LaurentPoly, Matrix, Rat, Scalar, SubspacePoint,
};
use crate::sampling::q_power;
use crate::stable_basis::{is_generic, local_signs, normalized_tau, StabFactor, StableBasisModel};
use std::sync::Arc;

/// `[L_S]` in the stable basis, columns and rows in fixed-point order.
#[derive(Clone, Debug, PartialEq)]
pub struct SteinbergMatrix {
    pub circuit: CircuitVector,
    pub matrix: Matrix<Rat>,
    pub tau: Vec<i64>,
}

impl SteinbergMatrix {
    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        self.matrix
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|x| i64::try_from(x.to_integer()).expect("small entry")).collect())
            .collect()
    }
}

pub fn steinberg_matrix(
    data: &HypertoricData,
    tau: &[i64],
    fixed_points: &[Vec<usize>],
    s: &CircuitVector,
) -> Result<SteinbergMatrix> {
    let m = fixed_points.len();
    let mut mat = Matrix::<Rat>::zeros(m, m);
    for (col, q) in fixed_points.iter().enumerate() {
        let outside: Vec<usize> = s.support.iter().copied().filter(|i| !q.contains(i)).collect();
        if outside.len() != 1 {
            continue;
        }
        let j = outside[0];
        let tq = normalized_tau(data, q, tau)?;
        let signs = local_signs(data, q, j, &tq).map_err(HyperqError::NotStronglyGeneric)?;
        let xj = signs.iter().find(|(l, _)| *l == j).expect("j present").1;
        for &(l, xl) in &signs {
            let mut row_set: Vec<usize> = q.iter().copied().filter(|&i| i != l).collect();
            if l != j {
                row_set.push(j);
            }
            row_set.sort();
            let row = fixed_points
                .iter()
                .position(|p| *p == row_set)
                .ok_or_else(|| HyperqError::NotSmooth(format!("{:?} is not a fixed point", one_based(&row_set))))?;
            mat.set(row, col, rat(-xj * xl, 1));
        }
    }
    Ok(SteinbergMatrix { circuit: s.clone(), matrix: mat, tau: tau.to_vec() })
}

/// Steinberg matrices for every circuit, in circuit order.
pub fn steinberg_matrices(data: &HypertoricData, tau: &[i64]) -> Result<Vec<SteinbergMatrix>> {
    let g = is_generic(data, tau)?;
    if !g.strong {
        return Err(HyperqError::NotStronglyGeneric(g.witness.unwrap_or_default()));
    }
    let fps = crate::circuit_matroid::fixed_points(data)?;
    circuits(data)?.iter().map(|s| steinberg_matrix(data, tau, &fps, s)).collect()
}

/// Checks that column `Q` is nonzero iff `|S \ Q| = 1`, and that nonzero
/// columns have `|S|` nonzero entries.
pub fn check_column_support(l: &SteinbergMatrix, fixed_points: &[Vec<usize>]) -> std::result::Result<(), String> {
    let s = &l.circuit.support;
    for (c, q) in fixed_points.iter().enumerate() {
        let outside = s.iter().filter(|i| !q.contains(i)).count();
        let nz = (0..fixed_points.len()).filter(|&r| !Scalar::is_zero(l.matrix.get(r, c))).count();
        let want = if outside == 1 { s.len() } else { 0 };
        if nz != want {
            return Err(format!(
                "column {:?} of L_{} has {} nonzero entries, expected {}",
                one_based(q),
                l.circuit.label(),
                nz,
                want
            ));
        }
    }
    Ok(())
}

/// Variables `u1 … un, h`.
pub fn u_vars(n: usize) -> Arc<Vec<String>> {
    let mut names: Vec<String> = (*var_names("u", n)).clone();
    names.push("h".into());
    Arc::new(names)
}

/// `ħ·L_S(u_M)` as a polynomial in `u1..un, h`.
pub fn evaluate_l_polynomial(data: &HypertoricData, s: &CircuitVector, m: &[usize]) -> Result<LaurentPoly<Rat>> {
    let n = data.n();
    let vars = u_vars(n);
    if !m.is_empty() && data.submatrix(m).rank() != m.len() {
        return Err(HyperqError::DependentM);
    }
    let outside: Vec<usize> = s.support.iter().copied().filter(|i| !m.contains(i)).collect();
    if outside.len() != 1 {
        return Ok(LaurentPoly::zero_in(vars));
    }
    let i = outside[0];
    let u = |l: usize| LaurentPoly::<Rat>::var(vars.clone(), l);
    let h = LaurentPoly::<Rat>::var(vars.clone(), n);
    let mut acc = LaurentPoly::constant_in(vars.clone(), rat(s.beta[i], 1));
    for &l in &s.support {
        let z = if s.beta[l] > 0 { u(l).minus(&h) } else { u(l) };
        acc = acc.times(&z);
    }
    for &r in m.iter().filter(|r| !s.support.contains(r)) {
        acc = acc.times(&u(r));
    }
    Ok(acc)
}

/// `ħ·L_S(v_Q)` for a stable-basis monomial, expanding every `ħ − u_i`.
pub fn l_of_monomial(data: &HypertoricData, s: &CircuitVector, mono: &[StabFactor]) -> Result<LaurentPoly<Rat>> {
    let n = data.n();
    let vars = u_vars(n);
    let plain: Vec<usize> =
        mono.iter().filter_map(|f| if let StabFactor::U(i) = f { Some(*i) } else { None }).collect();
    let flipped: Vec<usize> =
        mono.iter().filter_map(|f| if let StabFactor::HbarMinusU(i) = f { Some(*i) } else { None }).collect();
    let h = LaurentPoly::<Rat>::var(vars.clone(), n);
    let mut total = LaurentPoly::zero_in(vars.clone());
    for r in 0..=flipped.len() {
        for pick in combinations(flipped.len(), r) {
            let mut m = plain.clone();
            m.extend(pick.iter().map(|&p| flipped[p]));
            m.sort();
            let sign = if r % 2 == 0 { 1 } else { -1 };
            let coeff = h.pow((flipped.len() - r) as u32).scale(&rat(sign, 1));
            total = total.plus(&coeff.times(&evaluate_l_polynomial(data, s, &m)?));
        }
    }
    Ok(total)
}

/// Consistency of the matrix and polynomial models: `ħ·(T·L)_{P,Q}` equals
/// `φ_P(ħ L_S(v_Q))` for all `P, Q`.
pub fn check_l_consistency(
    data: &HypertoricData,
    model: &StableBasisModel,
    l: &SteinbergMatrix,
) -> std::result::Result<(), String> {
    let d = data.d();
    let n = data.n();
    let t = model.transition_poly();
    let tl = t.mul(&l.matrix.map(|x| LaurentPoly::constant(x.clone())));
    let tvars = crate::stable_basis::tau_vars(d);
    let h = LaurentPoly::<Rat>::var(tvars.clone(), d);
    for (p, _) in model.fixed_points.iter().enumerate() {
        // φ_P on u-variables; ħ maps to ħ.
        let mut images: Vec<LaurentPoly<Rat>> =
            (0..n).map(|i| model.restrictions.forms[p][i].to_poly()).collect();
        images.push(h.clone());
        for (c, q) in model.fixed_points.iter().enumerate() {
            let poly = l_of_monomial(data, &l.circuit, &model.monomials[c]).map_err(|e| e.to_string())?;
            let restricted = poly.compose(&images, tvars.clone()).expect("polynomial substitution");
            let want = h.times(tl.get(p, c));
            if restricted != want {
                return Err(format!(
                    "L_{} at (P={:?}, Q={:?}): polynomial model {} vs matrix model {}",
                    l.circuit.label(),
                    one_based(&model.fixed_points[p]),
                    one_based(q),
                    restricted.to_text(),
                    want.to_text()
                ));
            }
        }
    }
    Ok(())
}

/// Solves `T X = B` for `T` upper triangular after reordering rows and
/// columns by the moment order.
fn solve_in_order<F: Scalar>(t: &Matrix<F>, b: &Matrix<F>, order: &[usize]) -> Option<Matrix<F>> {
    let m = t.rows();
    let mut tp = Matrix::zeros(m, m);
    for (i, &oi) in order.iter().enumerate() {
        for (j, &oj) in order.iter().enumerate() {
            tp.set(i, j, t.get(oi, oj).clone());
        }
    }
    let mut x = Matrix::zeros(m, b.cols());
    for c in 0..b.cols() {
        let rhs: Vec<F> = order.iter().map(|&oi| b.get(oi, c).clone()).collect();
        let sol = tp.back_substitute(&rhs)?;
        for (i, &oi) in order.iter().enumerate() {
            x.set(oi, c, sol[i].clone());
        }
    }
    Some(x)
}

/// Cup-product matrices `C_i = T⁻¹ diag(φ_P(u_i)) T` for all `i`, at `vals`.
pub fn cup_matrices<F: Scalar>(model: &StableBasisModel, n: usize, vals: &[F]) -> Result<Vec<Matrix<F>>> {
    let t = model.transition_at(vals);
    let m = t.rows();
    (0..n)
        .map(|i| {
            let mut dt = Matrix::zeros(m, m);
            for p in 0..m {
                let phi = model.restrictions.forms[p][i].eval(vals);
                for c in 0..m {
                    dt.set(p, c, phi.times(t.get(p, c)));
                }
            }
            solve_in_order(&t, &dt, &model.order)
                .ok_or_else(|| HyperqError::DenominatorZero("transition matrix singular at the evaluation point".into()))
        })
        .collect()
}

/// `Σ_i w_i C_i + w_ħ ħ·I` for `w ∈ Qⁿ ⊕ Qħ`.
pub fn cup_of<F: Scalar>(cups: &[Matrix<F>], w: &[Rat], hbar: &F) -> Matrix<F> {
    let m = cups[0].rows();
    let mut acc = Matrix::scalar_identity(m, &hbar.times(&F::from_rat(&w[cups.len()])));
    for (c, wi) in cups.iter().zip(w) {
        if !Scalar::is_zero(wi) {
            acc = acc.add(&c.scale(&F::from_rat(wi)));
        }
    }
    acc
}

/// `q^β / (1 − q^β)`, or an error on a wall.
pub fn quantum_coefficient(q: &[Rat], beta_k: &[i64]) -> Result<Rat> {
    let qb = q_power(q, beta_k);
    let one = rat(1, 1);
    if qb == one {
        return Err(HyperqError::QOnWall(format!("q^beta = 1 for beta = {:?}", beta_k)));
    }
    Ok(&qb / (&one - &qb))
}

/// Everything needed to assemble quantum operators for one instance.
#[derive(Clone, Debug)]
pub struct OperatorContext {
    pub data: HypertoricData,
    pub tau: Vec<i64>,
    pub circuits: Vec<CircuitVector>,
    pub arrangement: Arrangement,
    pub model: StableBasisModel,
    pub steinberg: Vec<SteinbergMatrix>,
}

impl OperatorContext {
    pub fn new(data: &HypertoricData, tau: &[i64]) -> Result<Self> {
        let model = crate::stable_basis::transition_matrix(data, tau)?;
        let steinberg = steinberg_matrices(data, tau)?;
        Ok(OperatorContext {
            data: data.clone(),
            tau: tau.to_vec(),
            circuits: circuits(data)?,
            arrangement: Arrangement::from_hypertoric(data)?,
            model,
            steinberg,
        })
    }

    pub fn size(&self) -> usize {
        self.model.fixed_points.len()
    }

    pub fn l_matrices<F: Scalar>(&self) -> Vec<Matrix<F>> {
        self.steinberg.iter().map(|l| l.matrix.map(F::from_rat)).collect()
    }

    /// `M_i = C_i + ħ Σ_β q^β/(1−q^β) β_i L_β` for all `i`.
    pub fn quantum_operators<F: Scalar>(&self, cups: &[Matrix<F>], q: &[Rat], vals: &[F]) -> Result<Vec<Matrix<F>>> {
        let hbar = &vals[self.data.d()];
        let ls = self.l_matrices::<F>();
        let coeffs: Vec<Rat> =
            self.arrangement.vectors.iter().map(|b| quantum_coefficient(q, b)).collect::<Result<_>>()?;
        Ok((0..self.data.n())
            .map(|i| {
                let mut acc = cups[i].clone();
                for (b, (l, c)) in self.circuits.iter().zip(ls.iter().zip(&coeffs)) {
                    if b.beta[i] != 0 {
                        let s = hbar.times(&F::from_rat(&(c * rat(b.beta[i], 1))));
                        acc = acc.add(&l.scale(&s));
                    }
                }
                acc
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

impl CheckOutcome {
    pub fn pass(name: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), passed: true, witness: None }
    }

    pub fn fail(name: impl Into<String>, w: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), passed: false, witness: Some(w.into()) }
    }

    pub fn from_result(name: impl Into<String>, r: std::result::Result<(), String>) -> Self {
        match r {
            Ok(()) => Self::pass(name),
            Err(w) => Self::fail(name, w),
        }
    }
}

/// `[L_α, Σ_{β∈F} L_β] = 0` for every rank-2 flat `F` and `α ∈ F`.
pub fn check_flat_relations(ctx: &OperatorContext) -> Result<std::result::Result<(), String>> {
    let flats = rank2_flats(&ctx.arrangement.vectors)?;
    let ls = ctx.l_matrices::<Rat>();
    for f in &flats {
        let m = ls[f.members[0]].rows();
        let mut sum = Matrix::zeros(m, m);
        for &b in &f.members {
            sum = sum.add(&ls[b]);
        }
        for &a in &f.members {
            if !ls[a].commutator(&sum).is_zero() {
                let labels: Vec<String> = f.members.iter().map(|&b| ctx.circuits[b].label()).collect();
                return Ok(Err(format!("[L_{}, sum over flat {{{}}}] != 0", ctx.circuits[a].label(), labels.join(","))));
            }
        }
    }
    Ok(Ok(()))
}

/// Basis of `Ker(α̃) ⊂ Qⁿ ⊕ Qħ`.
fn kernel_of_lift(beta: &[i64]) -> Vec<Vec<Rat>> {
    let mut row: Vec<Rat> = beta.iter().map(|&b| rat(b, 1)).collect();
    row.push(rat(0, 1));
    Matrix::from_rows(vec![row]).nullspace()
}

/// `[L_α, C_w − ½ħ Σ_β (β, w) L_β] = 0` for `w ∈ Ker(α̃)`, at the given point.
pub fn check_delta_relations<F: Scalar>(ctx: &OperatorContext, cups: &[Matrix<F>], vals: &[F]) -> std::result::Result<(), String> {
    let hbar = &vals[ctx.data.d()];
    let ls = ctx.l_matrices::<F>();
    let half = rat(1, 2);
    for (a, alpha) in ctx.circuits.iter().enumerate() {
        for w in kernel_of_lift(&alpha.beta) {
            let mut delta = cup_of(cups, &w, hbar);
            for (b, beta) in ctx.circuits.iter().enumerate() {
                let pair: Rat = beta.beta.iter().zip(&w).map(|(&x, y)| rat(x, 1) * y).sum();
                if !Scalar::is_zero(&pair) {
                    let s = hbar.times(&F::from_rat(&(-(&half * &pair))));
                    delta = delta.add(&ls[b].scale(&s));
                }
            }
            if !ls[a].commutator(&delta).is_zero() {
                let ws: Vec<String> = w.iter().map(crate::exact_core::scalar::rat_string).collect();
                return Err(format!("[L_{}, delta(w)] != 0 for w = ({})", alpha.label(), ws.join(",")));
            }
        }
    }
    Ok(())
}

/// Pairwise commutators of the given matrices vanish.
pub fn check_commuting<F: Scalar>(ms: &[Matrix<F>], what: &str) -> std::result::Result<(), String> {
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            if !ms[i].commutator(&ms[j]).is_zero() {
                return Err(format!("[{}_{}, {}_{}] != 0", what, i + 1, what, j + 1));
            }
        }
    }
    Ok(())
}

/// Rank of the flattened matrices stacked as rows.
pub fn independence_rank(ls: &[SteinbergMatrix]) -> usize {
    if ls.is_empty() {
        return 0;
    }
    Matrix::from_rows(ls.iter().map(|l| l.matrix.flatten()).collect()).rank()
}

/// Standard lift basis of `H²(X)/H²(pt)`: the `u_j` with `j` outside the first fixed point.
pub fn default_lifts(ctx: &OperatorContext) -> Vec<Vec<Rat>> {
    let n = ctx.data.n();
    let q0 = &ctx.model.fixed_points[0];
    (0..n)
        .filter(|j| !q0.contains(j))
        .map(|j| {
            let mut w = vec![rat(0, 1); n + 1];
            w[j] = rat(1, 1);
            w
        })
        .collect()
}

/// `Span{u ⋆_q}` over the given lifts (vectors in `Qⁿ ⊕ Qħ`), flattened.
pub fn subspace_q<F: Scalar>(
    ctx: &OperatorContext,
    cups: &[Matrix<F>],
    q: &[Rat],
    vals: &[F],
    lifts: &[Vec<Rat>],
) -> Result<SubspacePoint<F>> {
    let ms = ctx.quantum_operators(cups, q, vals)?;
    let hbar = &vals[ctx.data.d()];
    let m = ctx.size();
    let vecs: Vec<Vec<F>> = lifts.iter().map(|w| cup_of(&ms, w, hbar).flatten()).collect();
    Ok(canonical_subspace(&vecs, m * m))
}

/// Flattened identity, for comparisons modulo `H²(pt)`.
pub fn identity_line<F: Scalar>(m: usize) -> Vec<F> {
    Matrix::<F>::identity(m).flatten()
}

/// Coordinates on `𝔲¹`: `|Φ⁺|` entries for the `t_α`, then `k` for `𝔱`.
#[derive(Clone, Debug, PartialEq)]
pub struct FgMaps {
    pub f: Vec<Rat>,
    pub g: Vec<Rat>,
    pub difference: Vec<Rat>,
}

pub fn fg_maps(arr: &Arrangement, q: &[Rat], v: &[Rat]) -> Result<FgMaps> {
    let p = arr.len();
    let k = arr.k;
    let mut f = vec![rat(0, 1); p + k];
    let mut g = vec![rat(0, 1); p + k];
    for (a, alpha) in arr.vectors.iter().enumerate() {
        let qa = q_power(q, alpha);
        if qa == rat(1, 1) {
            return Err(HyperqError::QOnWall(format!("alpha = {:?}", alpha)));
        }
        let av: Rat = alpha.iter().zip(v).map(|(&x, y)| rat(x, 1) * y).sum();
        let den = &qa - rat(1, 1);
        f[a] = &av / &den;
        g[a] = &qa * &av / &den;
    }
    let difference = g.iter().zip(&f).map(|(x, y)| x - y).collect();
    Ok(FgMaps { f, g, difference })
}

/// `δ(v) = v − ½ Σ α(v) t_α` on `v ∈ 𝔱`, extended by `δ(t_α) = 0`.
pub fn delta(arr: &Arrangement, x: &[Rat]) -> Vec<Rat> {
    let p = arr.len();
    let mut out = vec![rat(0, 1); p + arr.k];
    for l in 0..arr.k {
        out[p + l] = x[p + l].clone();
    }
    for (a, alpha) in arr.vectors.iter().enumerate() {
        let av: Rat = alpha.iter().enumerate().map(|(l, &c)| rat(c, 1) * &x[p + l]).sum();
        out[a] -= rat(1, 2) * av;
    }
    out
}

/// The subspace map induced by `x ↦ 2δ(x) − x`.
pub fn delta_star(arr: &Arrangement, s: &SubspacePoint<Rat>) -> SubspacePoint<Rat> {
    let vecs: Vec<Vec<Rat>> = s
        .basis()
        .to_rows()
        .iter()
        .map(|x| delta(arr, x).iter().zip(x).map(|(d, v)| rat(2, 1) * d - v).collect())
        .collect();
    canonical_subspace(&vecs, s.ambient_dim())
}

/// Projection `𝔱ⁿ ⊕ Cħ → 𝔱ᵏ` along `a^T(𝔱ᵈ) ⊕ Cħ`, in kernel-basis coordinates.
pub fn project_to_k(data: &HypertoricData, w: &[Rat]) -> Vec<Rat> {
    let n = data.n();
    let iota = data.iota().to_rat();
    let at = data.a.to_rat().transpose();
    let k = iota.cols();
    let d = at.cols();
    let mut m = Matrix::<Rat>::zeros(n, n);
    for i in 0..n {
        for j in 0..k {
            m.set(i, j, iota.get(i, j).clone());
        }
        for j in 0..d {
            m.set(i, k + j, at.get(i, j).clone());
        }
    }
    let sol = m.solve(&w[..n]).expect("complementary subspaces");
    sol[..k].to_vec()
}

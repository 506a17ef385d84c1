//! Cocharacter genericity, stable-basis monomials, fixed-point restrictions
//! and the transition matrix between the stable basis and fixed-point classes.

use crate::circuit_matroid::{
    affine_value, circuits, combinations, fixed_points, one_based, vertex, HypertoricData,
};
use crate::error::{HyperqError, Result};
use crate::exact_core::scalar::sign_of;
use crate::exact_core::{var_names, LaurentPoly, Matrix, Rat, RationalFunction, Scalar};

/// Linear form in `(t₁, …, t_d, ħ)`; the last coefficient belongs to `ħ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm(pub Vec<Rat>);

impl LinearForm {
    pub fn zero(d: usize) -> Self {
        LinearForm(vec![Rat::zero(); d + 1])
    }

    pub fn hbar(d: usize) -> Self {
        let mut v = vec![Rat::zero(); d + 1];
        v[d] = Rat::from_integer(1.into());
        LinearForm(v)
    }

    pub fn plus(&self, o: &Self) -> Self {
        LinearForm(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, o: &Self) -> Self {
        LinearForm(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        LinearForm(self.0.iter().map(|a| a * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// Value at `(t, ħ)` given as `vals = [t₁, …, t_d, ħ]`.
    pub fn eval<F: Scalar>(&self, vals: &[F]) -> F {
        let mut acc = F::zero();
        for (c, v) in self.0.iter().zip(vals) {
            if !c.is_zero() {
                acc = acc.plus(&F::from_rat(c).times(v));
            }
        }
        acc
    }

    pub fn to_poly(&self) -> LaurentPoly<Rat> {
        let vars = tau_vars(self.0.len() - 1);
        self.eval(&symbolic_point_poly(&vars))
    }
}

/// Variables `t1 … td, h`.
pub fn tau_vars(d: usize) -> std::sync::Arc<Vec<String>> {
    let mut names: Vec<String> = (*var_names("t", d)).clone();
    names.push("h".into());
    std::sync::Arc::new(names)
}

fn symbolic_point_poly(vars: &std::sync::Arc<Vec<String>>) -> Vec<LaurentPoly<Rat>> {
    (0..vars.len()).map(|i| LaurentPoly::var(vars.clone(), i)).collect()
}

/// `[t₁, …, t_d, ħ]` as rational functions.
pub fn symbolic_point(d: usize) -> Vec<RationalFunction<Rat>> {
    let vars = tau_vars(d);
    symbolic_point_poly(&vars).into_iter().map(RationalFunction::from_poly).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genericity {
    pub generic: bool,
    pub strong: bool,
    pub witness: Option<String>,
}

fn tau_rat(tau: &[i64]) -> Vec<Rat> {
    tau.iter().map(|&x| Rat::from_integer(x.into())).collect()
}

/// `a_Q⁻¹ τ`.
pub fn normalized_tau(data: &HypertoricData, q: &[usize], tau: &[i64]) -> Result<Vec<Rat>> {
    let inv = data
        .inverse_on(q)
        .ok_or_else(|| HyperqError::InvalidInput(format!("{:?} is not a basis", one_based(q))))?;
    Ok(inv.mul_vec(&tau_rat(tau)))
}

/// Local model of the circuit through `Q` and `j`: returns `(S, x)` where
/// `x_l = (−1)^{pos(l)}` for the descending order of the values `ε_l τ'_l`
/// (with `0` for `j`), or the reason strong genericity fails.
pub(crate) fn local_signs(
    data: &HypertoricData,
    q: &[usize],
    j: usize,
    tau_q: &[Rat],
) -> std::result::Result<Vec<(usize, i64)>, String> {
    let inv = data.inverse_on(q).expect("basis");
    let aj: Vec<Rat> = data.column(j).into_iter().map(Rat::from_integer).collect();
    let c = inv.mul_vec(&aj);
    let mut vals: Vec<(usize, Rat)> = vec![(j, Rat::zero())];
    for (pos, &i) in q.iter().enumerate() {
        if c[pos].is_zero() {
            continue;
        }
        let v = -&c[pos] * &tau_q[pos];
        if v.is_zero() {
            return Err(format!("value for index {} at basis {:?} vanishes", i + 1, one_based(q)));
        }
        vals.push((i, v));
    }
    for a in 0..vals.len() {
        for b in a + 1..vals.len() {
            if vals[a].1 == vals[b].1 {
                return Err(format!(
                    "indices {} and {} tie at basis {:?}, j = {}",
                    vals[a].0 + 1,
                    vals[b].0 + 1,
                    one_based(q),
                    j + 1
                ));
            }
        }
    }
    vals.sort_by(|x, y| y.1.cmp(&x.1));
    Ok(vals.iter().enumerate().map(|(p, (l, _))| (*l, if (p + 1) % 2 == 0 { 1 } else { -1 })).collect())
}

pub fn is_generic(data: &HypertoricData, tau: &[i64]) -> Result<Genericity> {
    let fps = fixed_points(data)?;
    for q in &fps {
        let tq = normalized_tau(data, q, tau)?;
        if let Some(p) = tq.iter().position(|x| x.is_zero()) {
            return Ok(Genericity {
                generic: false,
                strong: false,
                witness: Some(format!("entry {} of a_Q^-1 tau vanishes at {:?}", p + 1, one_based(q))),
            });
        }
    }
    for q in &fps {
        let tq = normalized_tau(data, q, tau)?;
        for j in (0..data.n()).filter(|j| !q.contains(j)) {
            if let Err(w) = local_signs(data, q, j, &tq) {
                return Ok(Genericity { generic: true, strong: false, witness: Some(w) });
            }
        }
    }
    Ok(Genericity { generic: true, strong: true, witness: None })
}

/// Sign vectors of `a_Q⁻¹ τ` for every fixed point.
pub fn polarization(data: &HypertoricData, tau: &[i64]) -> Result<Vec<Vec<i32>>> {
    fixed_points(data)?
        .iter()
        .map(|q| {
            let tq = normalized_tau(data, q, tau)?;
            if tq.iter().any(|x| x.is_zero()) {
                return Err(HyperqError::NotGeneric(format!("at {:?}", one_based(q))));
            }
            Ok(tq.iter().map(sign_of).collect())
        })
        .collect()
}

/// Factor of a stable-basis monomial: `u_i` or `ħ − u_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabFactor {
    U(usize),
    HbarMinusU(usize),
}

impl StabFactor {
    pub fn index(&self) -> usize {
        match self {
            StabFactor::U(i) | StabFactor::HbarMinusU(i) => *i,
        }
    }

    pub fn text(&self) -> String {
        match self {
            StabFactor::U(i) => format!("u{}", i + 1),
            StabFactor::HbarMinusU(i) => format!("(h-u{})", i + 1),
        }
    }
}

pub fn monomial_text(m: &[StabFactor]) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter().map(|f| f.text()).collect::<Vec<_>>().join("*")
}

pub fn stab_monomial(data: &HypertoricData, tau: &[i64], q: &[usize]) -> Result<Vec<StabFactor>> {
    let tq = normalized_tau(data, q, tau)?;
    q.iter()
        .zip(&tq)
        .map(|(&i, v)| match sign_of(v) {
            1 => Ok(StabFactor::U(i)),
            -1 => Ok(StabFactor::HbarMinusU(i)),
            _ => Err(HyperqError::NotGeneric(format!("entry for u{} vanishes at {:?}", i + 1, one_based(q)))),
        })
        .collect()
}

/// Orientation of the restriction rule, fixed by the sign of
/// `c_S = Σ β_i χ_i` (uniform over all circuits).
fn orientation(data: &HypertoricData, chi: &[i64]) -> Result<i32> {
    let cs = circuits(data)?;
    let mut sign = 0;
    for c in &cs {
        let v: i64 = c.beta.iter().zip(chi).map(|(b, x)| b * x).sum();
        let s = v.signum() as i32;
        if s == 0 {
            return Err(HyperqError::ChiNotGeneric(format!("circuit {} has zero chi-value", c.label())));
        }
        if sign == 0 {
            sign = s;
        } else if sign != s {
            return Err(HyperqError::ChiOrientation(format!("circuit {} disagrees", c.label())));
        }
    }
    Ok(if sign == 0 { 1 } else { sign })
}

/// Restriction data: `φ_Q(u_i)` for every fixed point and index.
#[derive(Clone, Debug)]
pub struct Restrictions {
    pub fixed_points: Vec<Vec<usize>>,
    pub forms: Vec<Vec<LinearForm>>,
}

pub fn restrictions(data: &HypertoricData) -> Result<Restrictions> {
    let chi = data.chi.clone().ok_or(HyperqError::ChiMissing)?;
    let sm = crate::circuit_matroid::validate_smooth(data)?;
    if !sm.unimodular {
        return Err(HyperqError::NotSmooth(sm.witness.unwrap_or_default()));
    }
    if !sm.simple {
        return Err(HyperqError::ChiNotGeneric(sm.witness.unwrap_or_default()));
    }
    let orient = orientation(data, &chi)?;
    let fps = fixed_points(data)?;
    let forms = fps.iter().map(|q| restriction_at(data, q, &chi, orient)).collect::<Result<Vec<_>>>()?;
    Ok(Restrictions { fixed_points: fps, forms })
}

/// `φ_Q(u_i)`.
pub fn restriction(data: &HypertoricData, q: &[usize], i: usize) -> Result<LinearForm> {
    let chi = data.chi.clone().ok_or(HyperqError::ChiMissing)?;
    let orient = orientation(data, &chi)?;
    Ok(restriction_at(data, q, &chi, orient)?[i].clone())
}

fn restriction_at(data: &HypertoricData, q: &[usize], chi: &[i64], orient: i32) -> Result<Vec<LinearForm>> {
    let d = data.d();
    let n = data.n();
    let v = vertex(data, q, chi).ok_or_else(|| HyperqError::InvalidInput(format!("{:?} is not a basis", q)))?;
    let mut forms = vec![LinearForm::zero(d); n];
    for j in (0..n).filter(|j| !q.contains(j)) {
        let lam = affine_value(data, j, &v, chi);
        let s = sign_of(&lam) * orient;
        forms[j] = match s {
            1 => LinearForm::zero(d),
            -1 => LinearForm::hbar(d),
            _ => return Err(HyperqError::ChiNotGeneric(format!("vertex {:?} lies on H{}", one_based(q), j + 1))),
        };
    }
    // a_Q φ_Q = t − Σ_{j∉Q} a_j φ_j, solved row by row through a_Q⁻¹.
    let inv = data.inverse_on(q).expect("basis");
    let mut rhs: Vec<LinearForm> = (0..d)
        .map(|r| {
            let mut f = LinearForm::zero(d);
            f.0[r] = Rat::from_integer(1.into());
            f
        })
        .collect();
    for j in (0..n).filter(|j| !q.contains(j)) {
        for (r, f) in rhs.iter_mut().enumerate() {
            let c = Rat::from_integer(data.a.get(r, j).clone());
            *f = f.minus(&forms[j].scale(&c));
        }
    }
    for (pos, &i) in q.iter().enumerate() {
        let mut f = LinearForm::zero(d);
        for (r, g) in rhs.iter().enumerate() {
            f = f.plus(&g.scale(inv.get(pos, r)));
        }
        forms[i] = f;
    }
    Ok(forms)
}

#[derive(Clone, Debug)]
pub struct StableBasisModel {
    pub d: usize,
    pub fixed_points: Vec<Vec<usize>>,
    pub monomials: Vec<Vec<StabFactor>>,
    pub restrictions: Restrictions,
    /// Moment values `⟨v_Q, τ⟩` in fixed-point order.
    pub moments: Vec<Rat>,
    /// Fixed-point indices sorted by increasing moment value.
    pub order: Vec<usize>,
}

impl StableBasisModel {
    /// `φ_P` applied to a product of factors, at `vals = [t, ħ]`.
    pub fn restrict_product<F: Scalar>(&self, p: usize, m: &[StabFactor], vals: &[F]) -> F {
        let hbar = vals[self.d].clone();
        let mut acc = F::one();
        for f in m {
            let u = self.restrictions.forms[p][f.index()].eval(vals);
            let factor = match f {
                StabFactor::U(_) => u,
                StabFactor::HbarMinusU(_) => hbar.minus(&u),
            };
            acc = acc.times(&factor);
        }
        acc
    }

    /// `T_{P,Q} = φ_P(v_Q)`.
    pub fn transition_at<F: Scalar>(&self, vals: &[F]) -> Matrix<F> {
        let m = self.fixed_points.len();
        let mut t = Matrix::zeros(m, m);
        for p in 0..m {
            for q in 0..m {
                t.set(p, q, self.restrict_product(p, &self.monomials[q], vals));
            }
        }
        t
    }

    /// The transition matrix with polynomial entries in `t1..td, h`.
    pub fn transition_poly(&self) -> Matrix<LaurentPoly<Rat>> {
        let vars = tau_vars(self.d);
        self.transition_at(&symbolic_point_poly(&vars))
    }

    /// Checks `T_{P,Q} ≠ 0 ⇒ ⟨v_P,τ⟩ ≤ ⟨v_Q,τ⟩`; returns a witness on failure.
    pub fn check_triangular(&self) -> std::result::Result<(), String> {
        let t = self.transition_poly();
        for p in 0..t.rows() {
            for q in 0..t.cols() {
                if !Scalar::is_zero(t.get(p, q)) && self.moments[p] > self.moments[q] {
                    return Err(format!(
                        "T[{:?},{:?}] = {} but moments {} > {}",
                        one_based(&self.fixed_points[p]),
                        one_based(&self.fixed_points[q]),
                        t.get(p, q).to_text(),
                        self.moments[p],
                        self.moments[q]
                    ));
                }
            }
            if Scalar::is_zero(t.get(p, p)) {
                return Err(format!("diagonal entry at {:?} vanishes", one_based(&self.fixed_points[p])));
            }
        }
        Ok(())
    }

    /// Position of each fixed point in the moment order.
    pub fn rank_in_order(&self) -> Vec<usize> {
        let mut r = vec![0; self.order.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            r[i] = pos;
        }
        r
    }
}

pub fn transition_matrix(data: &HypertoricData, tau: &[i64]) -> Result<StableBasisModel> {
    let g = is_generic(data, tau)?;
    if !g.generic {
        return Err(HyperqError::NotGeneric(g.witness.unwrap_or_default()));
    }
    let chi = data.chi.clone().ok_or(HyperqError::ChiMissing)?;
    let restr = restrictions(data)?;
    let fps = restr.fixed_points.clone();
    let monomials = fps.iter().map(|q| stab_monomial(data, tau, q)).collect::<Result<Vec<_>>>()?;
    let mut moments = Vec::new();
    for q in &fps {
        let v = vertex(data, q, &chi).expect("basis");
        let m: Rat = v.iter().zip(tau).map(|(x, &t)| x * Rat::from_integer(t.into())).sum();
        moments.push(m);
    }
    let mut order: Vec<usize> = (0..fps.len()).collect();
    order.sort_by(|&x, &y| moments[x].cmp(&moments[y]));
    for w in order.windows(2) {
        if moments[w[0]] == moments[w[1]] {
            return Err(HyperqError::MomentOrderTie(format!(
                "{:?} and {:?}",
                one_based(&fps[w[0]]),
                one_based(&fps[w[1]])
            )));
        }
    }
    Ok(StableBasisModel { d: data.d(), fixed_points: fps, monomials, restrictions: restr, moments, order })
}

/// Checks that every circuit relation `Π_{S⁺} u_i · Π_{S⁻} (ħ − u_i)` restricts
/// to zero at every fixed point.
pub fn check_circuit_relations(data: &HypertoricData, restr: &Restrictions) -> std::result::Result<(), String> {
    let cs = circuits(data).map_err(|e| e.to_string())?;
    let d = data.d();
    let vars = tau_vars(d);
    let pt = symbolic_point_poly(&vars);
    for (p, q) in restr.fixed_points.iter().enumerate() {
        for c in &cs {
            let mut acc = LaurentPoly::constant(Rat::from_integer(1.into()));
            for &i in &c.support {
                let u = restr.forms[p][i].eval(&pt);
                let f = if c.beta[i] > 0 { u } else { pt[d].minus(&u) };
                acc = acc.times(&f);
            }
            if !LaurentPoly::is_zero(&acc) {
                return Err(format!("relation {} restricts to {} at {:?}", c.label(), acc.to_text(), one_based(q)));
            }
        }
    }
    Ok(())
}

/// Checks `Σ_i a_{ji} φ_Q(u_i) = t_j` for every fixed point.
pub fn check_module_constraint(data: &HypertoricData, restr: &Restrictions) -> std::result::Result<(), String> {
    let d = data.d();
    for (p, q) in restr.fixed_points.iter().enumerate() {
        for j in 0..d {
            let mut acc = LinearForm::zero(d);
            for i in 0..data.n() {
                acc = acc.plus(&restr.forms[p][i].scale(&Rat::from_integer(data.a.get(j, i).clone())));
            }
            let mut want = LinearForm::zero(d);
            want.0[j] = Rat::from_integer(1.into());
            if acc != want {
                return Err(format!("row {} fails at {:?}", j + 1, one_based(q)));
            }
        }
    }
    Ok(())
}

/// Deterministic generic character: `χ = (2^{n−1}, …, 2, 1)`.
pub fn default_chi(n: usize) -> Vec<i64> {
    (0..n).map(|i| 1i64 << (n - 1 - i)).collect()
}

/// Searches small integer cocharacters for a strongly generic one whose
/// moment order has no ties for the given character.
pub fn find_generic_tau(data: &HypertoricData) -> Result<Vec<i64>> {
    let d = data.d();
    let chi = data.chi.clone();
    let mut cand: Vec<Vec<i64>> = Vec::new();
    // τ = (p_1, …, p_d) with distinct odd-ish magnitudes first, then a wider search.
    let base: Vec<i64> = (0..d).map(|i| (3 * d as i64 + 1).pow((d - 1 - i) as u32 + 1) - i as i64).collect();
    cand.push(base);
    for r in 1..=6i64 {
        for v in combinations((2 * r + 1) as usize, d) {
            cand.push(v.iter().map(|&x| x as i64 - r).collect());
        }
    }
    for t in cand {
        let g = is_generic(data, &t)?;
        if !g.strong {
            continue;
        }
        if let Some(chi) = &chi {
            let d2 = data.clone().with_chi(chi.clone())?.with_tau(t.clone())?;
            if transition_matrix(&d2, &t).is_err() {
                continue;
            }
        }
        return Ok(t);
    }
    Err(HyperqError::NotStronglyGeneric("no small strongly generic cocharacter found".into()))
}

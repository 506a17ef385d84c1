//! Input parsing, canonical JSON, the check pipelines behind each CLI
//! subcommand, and the fixture corpus.

use crate::circuit_matroid::{
    check_circuit_axioms, circuits, fixed_points, one_based, rank2_flats, validate_smooth, Arrangement, FlatKind,
    HypertoricData,
};
use crate::error::{HyperqError, Result};
use crate::exact_core::scalar::rat_string;
use crate::exact_core::{CycScalar, Int, IntMatrix, LaurentPoly, Rat, RationalFunction, Scalar};
use crate::fan_compactify::{stratified_chart_count, stratified_charts, Fan};
use crate::nested_charts::{interior_family, max_nested_from_env, maximal_nested_sets, ChartDomain, NestedSet};
use crate::operators::{
    check_column_support, check_commuting, check_delta_relations, check_flat_relations, check_l_consistency,
    cup_matrices, independence_rank, OperatorContext,
};
use crate::sampling::{nonzero_rat, regular_q, rng, tau_point};
use crate::stable_basis::{
    check_circuit_relations, check_module_constraint, default_chi, find_generic_tau, monomial_text, symbolic_point,
    transition_matrix,
};
use crate::toric_layers::{irreducible_factors, layer_poset, phi_p, zero_dim_layers, TorusPoint};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Evaluate,
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub name: String,
    pub a: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<i64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Expected results per command: `{command: {json-pointer: value}}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<BTreeMap<String, BTreeMap<String, Value>>>,
}

impl InputSpec {
    pub fn parse(text: &str) -> Result<(Self, String)> {
        let spec: InputSpec =
            serde_json::from_str(text).map_err(|e| HyperqError::InvalidInput(format!("input: {}", e)))?;
        if spec.a.is_empty() || spec.a[0].is_empty() || spec.a.iter().any(|r| r.len() != spec.a[0].len()) {
            return Err(HyperqError::InvalidInput("a must be a nonempty rectangular integer grid".into()));
        }
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{:02x}", b)).collect();
        Ok((spec, hex))
    }

    pub fn data(&self) -> Result<HypertoricData> {
        HypertoricData::new(IntMatrix::from_rows(&self.a), self.chi.clone(), self.tau.clone())
    }

    /// Data with a character, generating the default one when absent.
    pub fn data_with_chi(&self) -> Result<HypertoricData> {
        let d = self.data()?;
        match &self.chi {
            Some(_) => Ok(d),
            None => d.with_chi(default_chi(self.a[0].len())),
        }
    }

    /// `(τ, generated?)`.
    pub fn tau_or_generic(&self, data: &HypertoricData) -> Result<(Vec<i64>, bool)> {
        match &self.tau {
            Some(t) => Ok((t.clone(), false)),
            None => Ok((find_generic_tau(data)?, true)),
        }
    }
}

// ---- canonical JSON ----

const SAFE: i64 = 1 << 53;

pub fn int_json(x: &Int) -> Value {
    match i64::try_from(x) {
        Ok(v) if v.abs() <= SAFE => json!(v),
        _ => Value::String(x.to_string()),
    }
}

pub fn i64_json(x: i64) -> Value {
    int_json(&Int::from(x))
}

pub fn rat_json(r: &Rat) -> Value {
    if r.is_integer() {
        int_json(r.numer())
    } else {
        Value::String(rat_string(r))
    }
}

pub fn vec_json(v: &[i64]) -> Value {
    Value::Array(v.iter().map(|&x| i64_json(x)).collect())
}

pub fn rows_json(rows: &[Vec<i64>]) -> Value {
    Value::Array(rows.iter().map(|r| vec_json(r)).collect())
}

pub fn rat_vec_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

/// Sorted `[[exponents], "coefficient"]` pairs.
pub fn poly_terms<C: Scalar>(p: &LaurentPoly<C>) -> Value {
    let mut terms: Vec<(&Vec<i64>, &C)> = p.terms().collect();
    terms.sort_by(|a, b| a.0.cmp(b.0));
    Value::Array(terms.into_iter().map(|(e, c)| json!([vec_json(e), c.render()])).collect())
}

pub fn poly_json<C: Scalar>(p: &LaurentPoly<C>) -> Value {
    json!({"terms": poly_terms(p), "text": p.to_text()})
}

pub fn ratfun_json<C: Scalar>(f: &RationalFunction<C>) -> Value {
    json!({"num": poly_terms(f.numer()), "den": poly_terms(f.denom()), "text": f.to_text()})
}

pub fn point_json(p: &TorusPoint) -> Value {
    rat_vec_json(p.log_coords())
}

fn key_of(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Serializes with sorted keys (serde_json's default map is ordered).
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

// ---- reports ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Option<String>,
    pub timing_ms: f64,
}

impl Check {
    pub fn from_result(name: impl Into<String>, r: std::result::Result<(), String>, timing_ms: f64) -> Self {
        let (status, witness) = match r {
            Ok(()) => (Status::Pass, None),
            Err(w) => (Status::Fail, Some(w)),
        };
        Check { name: name.into(), status, witness, timing_ms: round_ms(timing_ms) }
    }

    pub fn skip(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Skip, witness: Some(why.into()), timing_ms: 0.0 }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn round_ms(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Runs `f`, returning its value and the elapsed milliseconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64() * 1e3)
}

/// A flat table for `--format csv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub name: String,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub table: Option<Table>,
    pub input_sha256: String,
    pub seed: u64,
    pub mode: Mode,
}

impl Report {
    fn new(command: &str, spec: &InputSpec, sha: &str, mode: Mode) -> Self {
        Report {
            command: command.into(),
            name: spec.name.clone(),
            checks: Vec::new(),
            results: Map::new(),
            table: None,
            input_sha256: sha.into(),
            seed: spec.seed,
            mode,
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn to_json(&self) -> Value {
        let count = |s: Status| self.checks.iter().filter(|c| c.status == s).count();
        json!({
            "command": self.command,
            "name": self.name,
            "checks": self.checks,
            "summary": {
                "pass": count(Status::Pass),
                "fail": count(Status::Fail),
                "skip": count(Status::Skip),
                "total": self.checks.len(),
            },
            "provenance": {
                "input_sha256": self.input_sha256,
                "seed": self.seed,
                "mode": self.mode,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "results": Value::Object(self.results.clone()),
        })
    }

    /// The command's table, or the checks when it has none.
    pub fn to_csv(&self) -> String {
        let table = self.table.clone().unwrap_or_else(|| Table {
            headers: vec!["name".into(), "status".into(), "witness".into(), "timing_ms".into()],
            rows: self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        serde_json::to_value(c.status).unwrap().as_str().unwrap().to_string(),
                        c.witness.clone().unwrap_or_default(),
                        c.timing_ms.to_string(),
                    ]
                })
                .collect(),
        });
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.headers).expect("in-memory write");
        for r in &table.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Compares `expected[command]` entries (JSON pointers into the results).
    fn check_expected(&mut self, spec: &InputSpec) {
        let Some(exp) = spec.expected.as_ref().and_then(|e| e.get(&self.command)) else { return };
        let results = Value::Object(self.results.clone());
        for (ptr, want) in exp {
            let got = results.pointer(ptr);
            let r = match got {
                Some(g) if g == want => Ok(()),
                Some(g) => Err(format!("expected {} got {}", want, g)),
                None => Err(format!("no result at {}", ptr)),
            };
            self.push(Check::from_result(format!("expected:{}", ptr), r, 0.0));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Stab,
    Steinberg,
    Verify,
    Layers,
    Nested,
    Chart,
    Extend,
    Fan,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Stab => "stab",
            Command::Steinberg => "steinberg",
            Command::Verify => "verify",
            Command::Layers => "layers",
            Command::Nested => "nested",
            Command::Chart => "chart",
            Command::Extend => "extend",
            Command::Fan => "fan",
        }
    }
}

/// Runs one subcommand. Errors carry the process exit code.
pub fn run(command: Command, spec: &InputSpec, sha: &str, force_exact: bool) -> Result<Report> {
    let mode = if force_exact { Mode::Exact } else { spec.mode };
    let mut rep = Report::new(command.name(), spec, sha, mode);
    match command {
        Command::Analyze => analyze(spec, &mut rep)?,
        Command::Stab => stab(spec, &mut rep)?,
        Command::Steinberg => steinberg(spec, &mut rep)?,
        Command::Verify => {
            let data = spec.data_with_chi()?;
            let (tau, generated) = spec.tau_or_generic(&data)?;
            rep.results.insert("tau".into(), vec_json(&tau));
            rep.results.insert("tau_generated".into(), json!(generated));
            let out = verify_instance(&data, &tau, spec.seed, mode)?;
            rep.results.insert("independence_rank".into(), json!(out.independence_rank));
            rep.results.insert("phi_plus_count".into(), json!(out.phi_plus));
            rep.checks.extend(out.checks);
        }
        Command::Layers => layers(spec, &mut rep)?,
        Command::Nested => nested(spec, &mut rep)?,
        Command::Chart => chart(spec, mode, &mut rep)?,
        Command::Extend => extend(spec, mode, &mut rep)?,
        Command::Fan => fan(spec, &mut rep)?,
    }
    rep.check_expected(spec);
    Ok(rep)
}

fn smooth_data(spec: &InputSpec) -> Result<HypertoricData> {
    let data = spec.data()?;
    let sm = validate_smooth(&data)?;
    if !sm.unimodular {
        return Err(HyperqError::NotSmooth(sm.witness.unwrap_or_default()));
    }
    Ok(data)
}

fn arrangement(spec: &InputSpec) -> Result<Arrangement> {
    Arrangement::from_hypertoric(&smooth_data(spec)?)
}

fn analyze(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let data = spec.data()?;
    let (sm, ms) = timed(|| validate_smooth(&data));
    let sm = sm?;
    rep.push(Check::from_result(
        "smooth",
        if sm.smooth() { Ok(()) } else { Err(sm.witness.clone().unwrap_or_default()) },
        ms,
    ));
    if !sm.unimodular {
        return Err(HyperqError::NotSmooth(sm.witness.unwrap_or_default()));
    }
    let cs = circuits(&data)?;
    let supports: Vec<Vec<usize>> = cs.iter().map(|c| c.support.clone()).collect();
    let (ax, ms) = timed(|| check_circuit_axioms(&supports));
    rep.push(Check::from_result("circuit_axioms", ax, ms));
    let arr = Arrangement::from_hypertoric(&data)?;
    let flats = rank2_flats(&cs.iter().map(|c| c.beta.clone()).collect::<Vec<_>>())?;
    let fps = fixed_points(&data)?;
    let mut phi: Vec<Vec<i64>> = cs.iter().map(|c| c.beta.clone()).collect();
    phi.sort();
    let r = &mut rep.results;
    r.insert("d".into(), json!(data.d()));
    r.insert("n".into(), json!(data.n()));
    r.insert("k".into(), json!(data.k()));
    r.insert("smoothness".into(), json!({"simple": sm.simple, "unimodular": sm.unimodular, "witness": sm.witness}));
    r.insert(
        "circuits".into(),
        Value::Array(
            cs.iter()
                .map(|c| json!({"label": c.label(), "beta": vec_json(&c.beta), "support": one_based(&c.support)}))
                .collect(),
        ),
    );
    r.insert("phi_plus".into(), rows_json(&phi));
    r.insert("kernel_coordinates".into(), rows_json(&arr.vectors));
    r.insert(
        "rank2_flats".into(),
        Value::Array(
            flats
                .iter()
                .map(|f| {
                    json!({
                        "members": f.members.iter().map(|&i| cs[i].label()).collect::<Vec<_>>(),
                        "kind": match f.kind { FlatKind::Pair => "pair", FlatKind::Triple => "triple" },
                    })
                })
                .collect(),
        ),
    );
    r.insert("fixed_points".into(), json!(fps.iter().map(|q| one_based(q)).collect::<Vec<_>>()));
    let mut headers = vec!["label".to_string()];
    headers.extend((1..=data.n()).map(|i| format!("beta{}", i)));
    rep.table = Some(Table {
        headers,
        rows: cs
            .iter()
            .map(|c| std::iter::once(c.label()).chain(c.beta.iter().map(|x| x.to_string())).collect())
            .collect(),
    });
    Ok(())
}

fn stab(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let data = spec.data_with_chi()?;
    let (tau, generated) = spec.tau_or_generic(&data)?;
    let model = transition_matrix(&data, &tau)?;
    let (tri, ms) = timed(|| model.check_triangular());
    rep.push(Check::from_result("triangular", tri, ms));
    let (rel, ms) = timed(|| check_circuit_relations(&data, &model.restrictions));
    rep.push(Check::from_result("circuit_relations", rel, ms));
    let (modc, ms) = timed(|| check_module_constraint(&data, &model.restrictions));
    rep.push(Check::from_result("module_constraint", modc, ms));
    let t = model.transition_poly();
    let r = &mut rep.results;
    r.insert("tau".into(), vec_json(&tau));
    r.insert("tau_generated".into(), json!(generated));
    r.insert("chi".into(), vec_json(data.chi.as_deref().unwrap_or(&[])));
    r.insert("fixed_points".into(), json!(model.fixed_points.iter().map(|q| one_based(q)).collect::<Vec<_>>()));
    r.insert("monomials".into(), json!(model.monomials.iter().map(|m| monomial_text(m)).collect::<Vec<_>>()));
    r.insert("moments".into(), rat_vec_json(&model.moments));
    r.insert("order".into(), json!(model.order.iter().map(|i| i + 1).collect::<Vec<_>>()));
    r.insert(
        "transition".into(),
        Value::Array((0..t.rows()).map(|i| Value::Array((0..t.cols()).map(|j| poly_json(t.get(i, j))).collect())).collect()),
    );
    rep.table = Some(Table {
        headers: vec!["fixed_point".into(), "monomial".into(), "moment".into()],
        rows: model
            .fixed_points
            .iter()
            .zip(&model.monomials)
            .zip(&model.moments)
            .map(|((q, m), v)| {
                vec![format!("{:?}", one_based(q)), monomial_text(m), rat_string(v)]
            })
            .collect(),
    });
    Ok(())
}

fn steinberg(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let data = spec.data_with_chi()?;
    let (tau, generated) = spec.tau_or_generic(&data)?;
    let ctx = OperatorContext::new(&data, &tau)?;
    let (sup, ms) = timed(|| ctx.steinberg.iter().try_for_each(|l| check_column_support(l, &ctx.model.fixed_points)));
    rep.push(Check::from_result("column_support", sup, ms));
    let (cons, ms) = timed(|| ctx.steinberg.iter().try_for_each(|l| check_l_consistency(&data, &ctx.model, l)));
    rep.push(Check::from_result("restriction_consistency", cons, ms));
    let mut rows = Vec::new();
    let mats: Vec<Value> = ctx
        .steinberg
        .iter()
        .map(|l| {
            let m = l.to_i64_rows();
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    rows.push(vec![l.circuit.label(), (i + 1).to_string(), (j + 1).to_string(), x.to_string()]);
                }
            }
            json!({"circuit": l.circuit.label(), "beta": vec_json(&l.circuit.beta), "matrix": rows_json(&m)})
        })
        .collect();
    let r = &mut rep.results;
    r.insert("tau".into(), vec_json(&tau));
    r.insert("tau_generated".into(), json!(generated));
    r.insert("fixed_points".into(), json!(ctx.model.fixed_points.iter().map(|q| one_based(q)).collect::<Vec<_>>()));
    let by_label: Map<String, Value> =
        ctx.steinberg.iter().map(|l| (l.circuit.label(), rows_json(&l.to_i64_rows()))).collect();
    r.insert("matrices".into(), Value::Array(mats));
    r.insert("by_circuit".into(), Value::Object(by_label));
    rep.table = Some(Table { headers: vec!["circuit".into(), "row".into(), "col".into(), "value".into()], rows });
    Ok(())
}

/// Outcome of the holonomy / commutativity / independence pipeline.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
    pub independence_rank: usize,
    pub phi_plus: usize,
}

/// Number of seeded `q` used for the commutativity check.
pub const COMMUTATIVITY_POINTS: usize = 20;
/// Number of seeded `(t, ħ)` used for the δ-relations.
pub const DELTA_POINTS: usize = 3;

/// Flat relations, δ-relations, commutativity of the quantum operators and
/// linear independence of the Steinberg operators.
pub fn verify_instance(data: &HypertoricData, tau: &[i64], seed: u64, mode: Mode) -> Result<VerifyOutcome> {
    let ctx = OperatorContext::new(data, tau)?;
    let d = data.d();
    let n = data.n();
    let mut checks = Vec::new();
    let (hol, ms) = timed(|| check_flat_relations(&ctx));
    checks.push(Check::from_result("holonomy", hol?, ms));

    let (delta, ms) = timed(|| -> Result<std::result::Result<(), String>> {
        if mode == Mode::Exact {
            let vals = symbolic_point(d);
            let cups = cup_matrices(&ctx.model, n, &vals)?;
            return Ok(check_delta_relations(&ctx, &cups, &vals));
        }
        let mut r = rng(seed, 1);
        for _ in 0..DELTA_POINTS {
            let vals = tau_point(&mut r, d, 9);
            let cups = match cup_matrices(&ctx.model, n, &vals) {
                Ok(c) => c,
                Err(HyperqError::DenominatorZero(_)) => continue,
                Err(e) => return Err(e),
            };
            if let Err(w) = check_delta_relations(&ctx, &cups, &vals) {
                return Ok(Err(w));
            }
        }
        Ok(Ok(()))
    });
    checks.push(Check::from_result("delta_relations", delta?, ms));

    let (comm, ms) = timed(|| -> Result<std::result::Result<(), String>> {
        let mut r = rng(seed, 2);
        let mut done = 0;
        while done < COMMUTATIVITY_POINTS {
            let q = regular_q(&mut r, data.k(), &ctx.arrangement.vectors);
            let vals = tau_point(&mut r, d, 9);
            let cups = match cup_matrices(&ctx.model, n, &vals) {
                Ok(c) => c,
                Err(HyperqError::DenominatorZero(_)) => continue,
                Err(e) => return Err(e),
            };
            let ms = ctx.quantum_operators(&cups, &q, &vals)?;
            if let Err(w) = check_commuting(&ms, "M") {
                let qs: Vec<String> = q.iter().map(rat_string).collect();
                return Ok(Err(format!("{} at q = ({})", w, qs.join(","))));
            }
            done += 1;
        }
        Ok(Ok(()))
    });
    checks.push(Check::from_result(format!("commutativity ({} q)", COMMUTATIVITY_POINTS), comm?, ms));

    let (rank, ms) = timed(|| independence_rank(&ctx.steinberg));
    let phi = ctx.circuits.len();
    checks.push(Check::from_result(
        "independence",
        if rank == phi { Ok(()) } else { Err(format!("rank {} < |Phi+| = {}", rank, phi)) },
        ms,
    ));
    Ok(VerifyOutcome { checks, independence_rank: rank, phi_plus: phi })
}

fn layers(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let arr = arrangement(spec)?;
    let (pts, ms) = timed(|| zero_dim_layers(&arr));
    let pts = pts?;
    rep.push(Check::from_result(
        "zero_dim_layers",
        if pts.iter().any(|p| p.is_identity()) { Ok(()) } else { Err("identity missing".into()) },
        ms,
    ));
    let mut per_point = Vec::new();
    let mut incomplete = None;
    let t = Instant::now();
    for p in &pts {
        let local = phi_p(&arr, p);
        let poset = layer_poset(&arr, p);
        let mut nodes = Vec::new();
        for node in &poset.nodes {
            let factors = irreducible_factors(&arr, &node.complete_set, p)?;
            if !crate::toric_layers::is_complete(&arr, &node.complete_set, p) {
                incomplete.get_or_insert_with(|| format!("{:?} at {:?}", node.complete_set, p));
            }
            nodes.push(json!({
                "complete_set": node.complete_set,
                "codim": node.codim(),
                "irreducible": factors.len() <= 1,
                "factors": factors,
            }));
        }
        per_point.push(json!({
            "point": point_json(p),
            "phi_p": local,
            "phi_p_vectors": rows_json(&local.iter().map(|&i| arr.vectors[i].clone()).collect::<Vec<_>>()),
            "levels": poset.levels(),
            "covers": poset.covers,
            "nodes": nodes,
        }));
    }
    rep.push(Check::from_result(
        "poset_nodes_complete",
        incomplete.map_or(Ok(()), Err),
        t.elapsed().as_secs_f64() * 1e3,
    ));
    rep.results.insert("arrangement".into(), rows_json(&arr.vectors));
    rep.results.insert("zero_dim_layers".into(), Value::Array(pts.iter().map(point_json).collect()));
    rep.results.insert("posets".into(), Value::Array(per_point));
    rep.table = Some(Table {
        headers: (1..=arr.k).map(|i| format!("x{}", i)).collect(),
        rows: pts.iter().map(|p| p.log_coords().iter().map(rat_string).collect()).collect(),
    });
    Ok(())
}

fn nested_sets_all(arr: &Arrangement) -> Result<Vec<(TorusPoint, Vec<NestedSet>)>> {
    let cap = max_nested_from_env();
    zero_dim_layers(arr)?.into_iter().map(|p| Ok((p.clone(), maximal_nested_sets(arr, &p, cap)?))).collect()
}

fn nested_json(ns: &NestedSet) -> Value {
    json!({
        "members": ns.members,
        "adapted_basis": rows_json(&ns.adapted_basis),
        "successor": ns.successor,
        "constants": ns.constants.iter().map(|c| c.pretty()).collect::<Vec<_>>(),
    })
}

fn nested(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let arr = arrangement(spec)?;
    let (all, ms) = timed(|| nested_sets_all(&arr));
    let all = all?;
    let bad = all.iter().flat_map(|(_, v)| v).find_map(|ns| {
        crate::nested_charts::check_adapted_basis(ns, &ns.adapted_basis).err().map(|w| format!("{:?}: {}", ns.members, w))
    });
    rep.push(Check::from_result("adapted_bases", bad.map_or(Ok(()), Err), ms));
    let mut rows = Vec::new();
    let per: Vec<Value> = all
        .iter()
        .map(|(p, sets)| {
            for (i, ns) in sets.iter().enumerate() {
                rows.push(vec![format!("{:?}", p), i.to_string(), format!("{:?}", ns.members), format!("{:?}", ns.adapted_basis)]);
            }
            json!({"point": point_json(p), "count": sets.len(), "nested_sets": sets.iter().map(nested_json).collect::<Vec<_>>()})
        })
        .collect();
    rep.results.insert("arrangement".into(), rows_json(&arr.vectors));
    rep.results.insert("points".into(), Value::Array(per));
    rep.table = Some(Table {
        headers: vec!["point".into(), "index".into(), "members".into(), "adapted_basis".into()],
        rows,
    });
    Ok(())
}

fn random_complex(r: &mut impl Rng, k: usize) -> Vec<Complex64> {
    (0..k).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

fn random_rational(r: &mut impl Rng, k: usize) -> Vec<CycScalar> {
    (0..k).map(|_| CycScalar::rational(nonzero_rat(r, 5))).collect()
}

/// Torus ↔ chart round trip at `count` seeded points of `V_S⁰`.
pub fn round_trip_check(ns: &NestedSet, seed: u64, count: usize, mode: Mode) -> std::result::Result<(), String> {
    let mut r = rng(seed, 3);
    let mut done = 0;
    let mut tries = 0;
    while done < count {
        tries += 1;
        if tries > 100 * count {
            return Err("could not sample interior chart points".into());
        }
        if mode == Mode::Exact {
            let z = random_rational(&mut r, ns.k());
            let Ok(q) = ns.chart_to_torus(&z) else { continue };
            let back = ns.torus_to_chart(&q).map_err(|e| e.to_string())?;
            if back != z {
                return Err(format!("round trip moved {:?} to {:?}", z, back));
            }
        } else {
            let z = random_complex(&mut r, ns.k());
            let Ok(q) = ns.chart_to_torus(&z) else { continue };
            let back = ns.torus_to_chart(&q).map_err(|e| e.to_string())?;
            let err = z.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if err > 1e-9 {
                return Err(format!("round trip error {:e}", err));
            }
        }
        done += 1;
    }
    Ok(())
}

fn chart(spec: &InputSpec, mode: Mode, rep: &mut Report) -> Result<()> {
    let arr = arrangement(spec)?;
    let all = nested_sets_all(&arr)?;
    let mut charts = Vec::new();
    let mut p_fail = None;
    let mut rt_fail = None;
    let (mut p_ms, mut rt_ms) = (0.0, 0.0);
    for (p, sets) in &all {
        for ns in sets {
            let local = phi_p(&arr, p);
            let t = Instant::now();
            let mut pa = Map::new();
            for &a in &local {
                match ns.p_alpha(&arr.vectors[a]) {
                    Ok(f) => {
                        pa.insert(key_of(&arr.vectors[a]), ratfun_json(&f));
                    }
                    Err(e) => {
                        p_fail.get_or_insert_with(|| format!("{:?} in {:?}: {}", arr.vectors[a], ns.members, e));
                    }
                }
            }
            let psi: Vec<Value> = ns
                .layers
                .iter()
                .zip(&ns.members)
                .map(|(l, m)| match ns.psi(l, None) {
                    Ok(map) => json!({"layer": m, "generators": rows_json(&map.generators), "coords": map.texts()}),
                    Err(e) => json!({"layer": m, "error": e.to_string()}),
                })
                .collect();
            p_ms += t.elapsed().as_secs_f64() * 1e3;
            let (rt, ms) = timed(|| round_trip_check(ns, spec.seed, 10, mode));
            rt_ms += ms;
            if let Err(w) = rt {
                rt_fail.get_or_insert_with(|| format!("{:?}: {}", ns.members, w));
            }
            charts.push(json!({
                "point": point_json(p),
                "members": ns.members,
                "adapted_basis": rows_json(&ns.adapted_basis),
                "units": ns.units().iter().map(|u| u.to_text()).collect::<Vec<_>>(),
                "p_alpha": Value::Object(pa),
                "psi": psi,
            }));
        }
    }
    rep.push(Check::from_result("p_alpha_regular", p_fail.map_or(Ok(()), Err), p_ms));
    rep.push(Check::from_result("round_trip (10 points)", rt_fail.map_or(Ok(()), Err), rt_ms));
    rep.results.insert("arrangement".into(), rows_json(&arr.vectors));
    rep.results.insert("charts".into(), Value::Array(charts));
    Ok(())
}

/// Interior agreement of the boundary extension with the direct family at
/// `count` seeded points of `V_S⁰`.
pub fn interior_agreement(ns: &NestedSet, seed: u64, count: usize, mode: Mode) -> std::result::Result<(), String> {
    let mut r = rng(seed, 4);
    let mut done = 0;
    let mut tries = 0;
    while done < count {
        tries += 1;
        if tries > 100 * count {
            return Err("could not sample interior chart points".into());
        }
        if mode == Mode::Exact {
            let z = random_rational(&mut r, ns.k());
            let h = CycScalar::rational(nonzero_rat(&mut r, 5));
            if ns.domain(&z).map_err(|e| e.to_string())? != ChartDomain::V0 {
                continue;
            }
            let q = ns.chart_to_torus(&z).map_err(|e| e.to_string())?;
            let a = ns.boundary_extension(&z, &h).map_err(|e| e.to_string())?;
            let b = interior_family(&ns.arrangement, &q, &h).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("extension differs from the interior family at z = {:?}", z));
            }
        } else {
            let z = random_complex(&mut r, ns.k());
            let h = Complex64::new(r.gen_range(0.5..2.0), 0.0);
            if ns.domain(&z).map_err(|e| e.to_string())? != ChartDomain::V0 {
                continue;
            }
            let q = ns.chart_to_torus(&z).map_err(|e| e.to_string())?;
            let a = ns.boundary_extension(&z, &h).map_err(|e| e.to_string())?;
            let b = interior_family(&ns.arrangement, &q, &h).map_err(|e| e.to_string())?;
            if !a.approx_eq(&b, 1e-9) {
                return Err(format!("extension differs from the interior family at z = {:?}", z));
            }
        }
        done += 1;
    }
    Ok(())
}

fn extend(spec: &InputSpec, mode: Mode, rep: &mut Report) -> Result<()> {
    let arr = arrangement(spec)?;
    let all = nested_sets_all(&arr)?;
    let mut out = Vec::new();
    let (mut rank_fail, mut agree_fail) = (None, None);
    let (mut rank_ms, mut agree_ms) = (0.0, 0.0);
    for (p, sets) in &all {
        for ns in sets {
            let zero = vec![CycScalar::zero(); arr.k];
            let (v, ms) = timed(|| ns.boundary_extension(&zero, &CycScalar::one()));
            rank_ms += ms;
            let v = v?;
            if v.rank() != arr.k {
                rank_fail.get_or_insert_with(|| format!("{:?}: rank {} at z = 0", ns.members, v.rank()));
            }
            let (ag, ms) = timed(|| interior_agreement(ns, spec.seed, 5, mode));
            agree_ms += ms;
            if let Err(w) = ag {
                agree_fail.get_or_insert_with(|| format!("{:?}: {}", ns.members, w));
            }
            out.push(json!({
                "point": point_json(p),
                "members": ns.members,
                "rank_at_zero": v.rank(),
                "value_at_zero": v.basis().to_rows().iter().map(|r| r.iter().map(|c| c.pretty()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "pivots": v.pivots(),
            }));
        }
    }
    rep.push(Check::from_result("rank_at_zero", rank_fail.map_or(Ok(()), Err), rank_ms));
    rep.push(Check::from_result("interior_agreement (5 points)", agree_fail.map_or(Ok(()), Err), agree_ms));
    rep.results.insert("arrangement".into(), rows_json(&arr.vectors));
    rep.results.insert("hbar".into(), json!(1));
    rep.results.insert("extensions".into(), Value::Array(out));
    Ok(())
}

fn fan(spec: &InputSpec, rep: &mut Report) -> Result<()> {
    let arr = arrangement(spec)?;
    let (fan, ms) = timed(|| Fan::from_arrangement(&arr));
    let fan = fan?;
    let complete = fan.is_complete();
    rep.push(Check::from_result("complete", if complete { Ok(()) } else { Err("facet not shared by two cones".into()) }, ms));
    let reg = fan.is_regular();
    rep.results.insert("rays".into(), rows_json(&fan.rays));
    rep.results.insert(
        "cones".into(),
        Value::Array(fan.cones.iter().map(|c| json!({"rays": c.rays, "signs": c.signs})).collect()),
    );
    rep.results.insert("regular".into(), json!(reg.regular));
    if !reg.regular {
        let (c, det) = reg.witness.expect("witness");
        return Err(HyperqError::NotRegular(format!("cone {} with rays {:?} (det {})", c, fan.ray_matrix(c), det)));
    }
    rep.push(Check::from_result("regular", Ok(()), 0.0));
    let (strata, ms) = timed(|| stratified_charts(&arr, &fan, max_nested_from_env()));
    let strata = strata?;
    rep.push(Check::from_result("strata", Ok(()), ms));
    rep.results.insert("stratum_count".into(), json!(strata.len()));
    rep.results.insert("chart_count".into(), json!(stratified_chart_count(&strata)));
    rep.table = Some(Table {
        headers: vec!["cone".into(), "rays".into(), "signs".into()],
        rows: fan
            .cones
            .iter()
            .enumerate()
            .map(|(i, c)| {
                vec![
                    i.to_string(),
                    format!("{:?}", c.rays.iter().map(|&r| fan.rays[r].clone()).collect::<Vec<_>>()),
                    format!("{:?}", c.signs.clone().unwrap_or_default()),
                ]
            })
            .collect(),
    });
    Ok(())
}

// ---- fixtures ----

fn tpn_matrix(n: usize) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for row in &mut a {
        row.push(-1);
    }
    a
}

/// The worked examples with their printed results, as `(file name, spec)`.
pub fn fixtures() -> Vec<(String, InputSpec)> {
    let mut out = Vec::new();
    for n in 1..=4usize {
        let m = n + 1;
        let l: Vec<Vec<i64>> =
            (0..m).map(|i| (0..m).map(|j| if (1 + i + j) % 2 == 0 { 1 } else { -1 }).collect()).collect();
        let mut exp = BTreeMap::new();
        exp.insert("steinberg".to_string(), BTreeMap::from([("/matrices/0/matrix".to_string(), rows_json(&l))]));
        out.push((
            format!("tpn_{}.json", n),
            InputSpec {
                name: format!("T*P^{}", n),
                a: tpn_matrix(n),
                chi: None,
                tau: Some((1..=n as i64).rev().collect()),
                seed: 0,
                mode: Mode::Evaluate,
                expected: Some(exp),
            },
        ));
    }
    // τ₂ > 0 > τ₃ > τ₁: the ordering is permuted and [L] is conjugated by it.
    let sigma = vec![vec![-1, 1, 1, -1], vec![1, -1, -1, 1], vec![1, -1, -1, 1], vec![-1, 1, 1, -1]];
    out.push((
        "tpn_sigma.json".into(),
        InputSpec {
            name: "T*P^3 permuted".into(),
            a: tpn_matrix(3),
            chi: None,
            tau: Some(vec![-3, 2, -1]),
            seed: 0,
            mode: Mode::Evaluate,
            expected: Some(BTreeMap::from([(
                "steinberg".to_string(),
                BTreeMap::from([("/matrices/0/matrix".to_string(), rows_json(&sigma))]),
            )])),
        },
    ));
    let l124 = vec![
        vec![-1, 0, 1, -1, 0],
        vec![0, 0, 0, 0, 0],
        vec![1, 0, -1, 1, 0],
        vec![-1, 0, 1, -1, 0],
        vec![0, 0, 0, 0, 0],
    ];
    let l23 = vec![
        vec![-1, 1, 0, 0, 0],
        vec![1, -1, 0, 0, 0],
        vec![0, 0, 0, 0, 0],
        vec![0, 0, 0, -1, 1],
        vec![0, 0, 0, 1, -1],
    ];
    let l134 = vec![
        vec![0, 0, 0, 0, 0],
        vec![0, -1, 1, 0, -1],
        vec![0, 1, -1, 0, 1],
        vec![0, 0, 0, 0, 0],
        vec![0, -1, 1, 0, -1],
    ];
    let mut phi = vec![vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, -1, 1]];
    phi.sort();
    let mut exp = BTreeMap::new();
    exp.insert(
        "analyze".to_string(),
        BTreeMap::from([
            ("/phi_plus".to_string(), rows_json(&phi)),
            ("/fixed_points".to_string(), json!([[1, 2], [1, 3], [1, 4], [2, 4], [3, 4]])),
        ]),
    );
    exp.insert(
        "stab".to_string(),
        BTreeMap::from([(
            "/monomials".to_string(),
            json!(["u1*u2", "u1*(h-u3)", "u1*(h-u4)", "(h-u2)*(h-u4)", "u3*(h-u4)"]),
        )]),
    );
    exp.insert(
        "steinberg".to_string(),
        BTreeMap::from([
            ("/by_circuit/124".to_string(), rows_json(&l124)),
            ("/by_circuit/23".to_string(), rows_json(&l23)),
            ("/by_circuit/134".to_string(), rows_json(&l134)),
        ]),
    );
    exp.insert("verify".to_string(), BTreeMap::from([("/independence_rank".to_string(), json!(3))]));
    out.push((
        "worked_example.json".into(),
        InputSpec {
            name: "worked_example".into(),
            a: vec![vec![1, 0, 0, -1], vec![0, 1, -1, -1]],
            chi: None,
            tau: Some(vec![2, 1]),
            seed: 0,
            mode: Mode::Evaluate,
            expected: Some(exp),
        },
    ));
    let mut exp = BTreeMap::new();
    exp.insert(
        "layers".to_string(),
        BTreeMap::from([
            ("/zero_dim_layers".to_string(), json!([[0, 0, 0], ["1/2", "1/2", "1/2"]])),
            ("/posets/0/levels".to_string(), json!([1, 7, 9, 1])),
            ("/posets/1/levels".to_string(), json!([1, 3, 3, 1])),
        ]),
    );
    // S₁ = {ε₁} ⊂ {ε₁, ε₂, ε₁+ε₂} ⊂ Φ is the eighth nested set at the identity
    // in the enumeration order; its default adapted basis is (ε₁, ε₂, ε₃).
    exp.insert(
        "chart".to_string(),
        BTreeMap::from([("/charts/7/p_alpha/1,1,0/text".to_string(), json!("1+z1+z1*z2*z3"))]),
    );
    out.push((
        "cube.json".into(),
        InputSpec {
            name: "cube".into(),
            a: vec![vec![1, 0, 0, 0, -1, 1], vec![0, 1, 0, 1, 0, -1], vec![0, 0, 1, -1, 1, 0]],
            chi: None,
            tau: None,
            seed: 0,
            mode: Mode::Evaluate,
            expected: Some(exp),
        },
    ));
    out
}

pub fn export_fixtures(dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HyperqError::Io(e.to_string()))?;
    let mut written = Vec::new();
    for (file, spec) in fixtures() {
        let path = dir.join(file);
        let v = serde_json::to_value(&spec).expect("serializable");
        std::fs::write(&path, to_canonical_string(&v)).map_err(|e| HyperqError::Io(e.to_string()))?;
        written.push(path);
    }
    Ok(written)
}

/// Error body printed on failure, with the exit code it maps to.
pub fn error_json(e: &HyperqError) -> Value {
    json!({"error": {"message": e.to_string(), "exit_code": e.exit_code(), "kind": format!("{:?}", e).split('(').next().unwrap_or("").to_string()}})
}

//! One line per acceptance criterion; exits nonzero if any fails or runs
//! over its time budget.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use hyperq::circuit_matroid::{circuits, Arrangement};
use hyperq::cli_reporting::{interior_agreement, round_trip_check, verify_instance, Check, Mode, Status};
use hyperq::exact_core::{canonical_subspace, rat, ri, snf, CycScalar, LaurentPoly, Rat, RationalFunction, Scalar};
use hyperq::fan_compactify::*;
use hyperq::nested_charts::{all_nested_sets, DEFAULT_MAX_NESTED};
use hyperq::operators::{independence_rank, steinberg_matrices};
use hyperq::toric_layers::*;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn criterion_1() -> Outcome {
    let got: BTreeSet<Vec<i64>> = circuits(&worked_example()).map_err(|e| e.to_string())?.into_iter().map(|c| c.beta).collect();
    let want: BTreeSet<Vec<i64>> = [vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, -1, 1]].into();
    ensure!(got == want, "circuits {:?}", got);
    Ok("three circuits of the worked example".into())
}

fn alternating(m: usize) -> Vec<Vec<i64>> {
    (0..m).map(|i| (0..m).map(|j| if (i + j) % 2 == 0 { -1 } else { 1 }).collect()).collect()
}

fn criterion_2() -> Outcome {
    let data = worked_example();
    let ls = steinberg_matrices(&data, &[2, 1]).map_err(|e| e.to_string())?;
    let want: [(&str, Vec<Vec<i64>>); 3] = [
        (
            "124",
            vec![
                vec![-1, 0, 1, -1, 0],
                vec![0, 0, 0, 0, 0],
                vec![1, 0, -1, 1, 0],
                vec![-1, 0, 1, -1, 0],
                vec![0, 0, 0, 0, 0],
            ],
        ),
        (
            "23",
            vec![
                vec![-1, 1, 0, 0, 0],
                vec![1, -1, 0, 0, 0],
                vec![0, 0, 0, 0, 0],
                vec![0, 0, 0, -1, 1],
                vec![0, 0, 0, 1, -1],
            ],
        ),
        (
            "134",
            vec![
                vec![0, 0, 0, 0, 0],
                vec![0, -1, 1, 0, -1],
                vec![0, 1, -1, 0, 1],
                vec![0, 0, 0, 0, 0],
                vec![0, -1, 1, 0, -1],
            ],
        ),
    ];
    ensure!(ls.len() == 3, "{} matrices", ls.len());
    for (label, m) in &want {
        let l = ls.iter().find(|l| l.circuit.label() == *label).ok_or(format!("no circuit {}", label))?;
        ensure!(&l.to_i64_rows() == m, "L_{} = {:?}", label, l.to_i64_rows());
    }
    for n in 1..=5usize {
        let tau: Vec<i64> = (1..=n as i64).rev().collect();
        let ls = steinberg_matrices(&tpn(n), &tau).map_err(|e| e.to_string())?;
        ensure!(ls.len() == 1, "T*P^{}: {} circuits", n, ls.len());
        ensure!(ls[0].to_i64_rows() == alternating(n + 1), "T*P^{}: {:?}", n, ls[0].to_i64_rows());
        let m = &ls[0].matrix;
        ensure!(m.mul(m) == m.scale(&ri(-(n as i64 + 1))), "T*P^{}: M² ≠ −(n+1)M", n);
    }
    let sigma = steinberg_matrices(&tpn(3), &[-3, 2, -1]).map_err(|e| e.to_string())?;
    let want = vec![vec![-1, 1, 1, -1], vec![1, -1, -1, 1], vec![1, -1, -1, 1], vec![-1, 1, 1, -1]];
    ensure!(sigma[0].to_i64_rows() == want, "permuted T*P^3: {:?}", sigma[0].to_i64_rows());
    Ok("worked example, T*P^1..5, permuted T*P^3".into())
}

fn all_pass(checks: &[Check]) -> Result<(), String> {
    match checks.iter().find(|c| c.status != Status::Pass) {
        Some(c) => Err(format!("{}: {}", c.name, c.witness.clone().unwrap_or_default())),
        None => Ok(()),
    }
}

fn criterion_3(corpus: &[Instance]) -> Outcome {
    let random = corpus.iter().filter(|i| i.name.starts_with("random")).count();
    ensure!(random >= 10, "only {} random instances", random);
    for inst in corpus {
        ensure!(inst.data.d() <= 4 && inst.data.n() <= 8, "{} is too large", inst.name);
        let out = verify_instance(&inst.data, &inst.tau, 0, Mode::Evaluate).map_err(|e| format!("{}: {}", inst.name, e))?;
        all_pass(&out.checks).map_err(|w| format!("{}: {}", inst.name, w))?;
        for want in ["holonomy", "delta_relations", "commutativity (20 q)"] {
            ensure!(out.checks.iter().any(|c| c.name == want), "{}: no {} check", inst.name, want);
        }
    }
    Ok(format!("{} instances: flat, 3 δ points, 20 q", corpus.len()))
}

fn criterion_4(corpus: &[Instance]) -> Outcome {
    for inst in corpus {
        let ls = steinberg_matrices(&inst.data, &inst.tau).map_err(|e| e.to_string())?;
        let phi = circuits(&inst.data).map_err(|e| e.to_string())?.len();
        let flat: Vec<Vec<i128>> =
            ls.iter().map(|l| l.to_i64_rows().concat().into_iter().map(i128::from).collect()).collect();
        let lib = independence_rank(&ls);
        let oracle = rank_i128(&flat);
        ensure!(lib == phi && oracle == phi, "{}: rank {} / {} vs |Φ⁺| = {}", inst.name, lib, oracle, phi);
    }
    Ok(format!("rank = |Φ⁺| on {} instances", corpus.len()))
}

fn criterion_5() -> Outcome {
    let arr = cube_epsilon();
    let pts = zero_dim_layers(&arr).map_err(|e| e.to_string())?;
    let coords: Vec<Vec<Rat>> = pts.iter().map(|p| p.log_coords().to_vec()).collect();
    ensure!(coords == vec![vec![ri(0); 3], vec![rat(1, 2); 3]], "layers {:?}", coords);
    ensure!(phi_p(&arr, &half()) == vec![3, 4, 5], "Φ⁺_(−1) = {:?}", phi_p(&arr, &half()));
    let divs: Vec<i64> = snf(&arr.matrix_of(&[3, 4, 5])).divisors().iter().map(|x| x.to_i64().unwrap()).collect();
    ensure!(divs == vec![1, 1, 2], "SNF {:?}", divs);
    for (p, at_identity, levels) in [(TorusPoint::identity(3), true, vec![1, 7, 9, 1]), (half(), false, vec![1, 3, 3, 1])] {
        let poset = layer_poset(&arr, &p);
        ensure!(poset.levels() == levels, "levels {:?}", poset.levels());
        let nodes: BTreeSet<BTreeSet<usize>> = poset.nodes.iter().map(|n| set(&n.complete_set)).collect();
        ensure!(nodes == printed_complete_sets(at_identity), "nodes differ at {:?}", p);
        let covers: BTreeSet<_> = poset
            .covers
            .iter()
            .map(|&(u, l)| (set(&poset.nodes[u].complete_set), set(&poset.nodes[l].complete_set)))
            .collect();
        ensure!(covers == printed_covers(at_identity), "covers differ at {:?}", p);
    }
    Ok("layers, Φ⁺_(−1), SNF diag(1,1,2), posets (1,7,9,1) and (1,3,3,1)".into())
}

fn criterion_6() -> Outcome {
    let e = |x: hyperq::HyperqError| x.to_string();
    let s1 = cube_chart_at_one();
    let vars = s1.vars();
    let z = |i| LaurentPoly::var(vars.clone(), i);
    let one = LaurentPoly::constant_in(vars.clone(), CycScalar::one());
    let p12 = one.plus(&z(0)).plus(&z(0).times(&z(1)).times(&z(2)));
    ensure!(s1.p_alpha(&[1, 1, 0]).map_err(e)?.as_poly() == Some(p12.clone()), "p_(ε1+ε2) wrong");
    let t = s1.psi(&s1.layers[2], None).map_err(e)?.texts();
    ensure!(t == ["z1*z2", "z2", "1"], "ψ on the full layer: {:?}", t);
    let layer = layer_from_complete_set(&cube_epsilon(), &[2, 3, 6], &TorusPoint::identity(3)).map_err(e)?;
    let psi = s1.psi(&layer, Some(&[vec![1, 1, 0], vec![0, 0, 1]])).map_err(e)?;
    ensure!(psi.coords[0] == RationalFunction::from_poly(p12.times(&z(1))), "ψ: {:?}", psi.texts());
    ensure!(psi.texts()[1] == "1", "ψ: {:?}", psi.texts());

    let sm = cube_chart_at_minus_one();
    let vars = sm.vars();
    let z = |i| LaurentPoly::var(vars.clone(), i);
    let one = LaurentPoly::constant_in(vars.clone(), CycScalar::one());
    let p1 = sm.p_alpha(&[1, 0, 0]).map_err(e)?;
    ensure!(p1.numer().times(&z(1).minus(&one)) == one.plus(&z(0)).times(p1.denom()), "p_ε1 = {}", p1.to_text());
    let full = &sm.layers[sm.members.iter().position(|m| m.len() == 3).unwrap()];
    let t = sm.psi(full, Some(&sm.adapted_basis)).map_err(e)?.texts();
    ensure!(t == ["z1", "1", "z3"], "ψ at −1: {:?}", t);

    for ns in [&s1, &sm] {
        round_trip_check(ns, 6, 10, Mode::Evaluate)?;
    }
    Ok("p_α, three ψ maps, round trip at 10 points".into())
}

fn criterion_7() -> Outcome {
    for ns in [cube_chart_at_one(), cube_chart_at_minus_one()] {
        interior_agreement(&ns, 7, 5, Mode::Exact)?;
        let zero = vec![CycScalar::zero(); 3];
        let ext = ns.boundary_extension(&zero, &CycScalar::rational(ri(2))).map_err(|e| e.to_string())?;
        ensure!(ext.rank() == 3, "rank {} at z = 0", ext.rank());
    }
    Ok("exact agreement at 5 points, rank 3 at z = 0, on the charts at 1 and −1".into())
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn criterion_8() -> Outcome {
    let e = |x: hyperq::HyperqError| x.to_string();
    let a2 = Arrangement::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]).map_err(e)?;
    let fan = Fan::from_arrangement(&a2).map_err(e)?;
    ensure!(fan.cones.len() == 6 && zaslavsky(&a2) == 6, "{} chambers", fan.cones.len());
    ensure!(fan.is_regular().regular && fan.is_complete(), "A2 fan not regular");

    let bad = Fan::from_cones(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]).map_err(e)?;
    ensure!(bad.is_regular().witness == Some((0, 2)), "witness {:?}", bad.is_regular());
    ensure!(matches!(stratified_charts(&a2, &bad, 100), Err(hyperq::HyperqError::NotRegular(_))), "bad fan accepted");

    let total = all_nested_sets(&a2, DEFAULT_MAX_NESTED).map_err(e)?.len();
    let h = CycScalar::rational(ri(3));
    for cone in 0..fan.cones.len() {
        let ch = chart_hypersurfaces(&a2, &fan, cone).map_err(e)?;
        let empty = boundary_supports(&ch, &[], 100).map_err(e)?;
        ensure!(empty.surviving.is_empty() && empty.reduced.is_none(), "S = ∅ keeps hypersurfaces");
        let pt = StratumPoint { nested: None, z: vec![], free: vec![], boundary: vec![CycScalar::zero(); 2] };
        let got = empty.extend(&pt, &h).map_err(e)?;
        let rows: Vec<Vec<CycScalar>> = ch
            .rays
            .iter()
            .map(|r| {
                let mut row: Vec<CycScalar> = a2.vectors.iter().map(|a| CycScalar::rational(ri(-3 * dot(a, r).abs()))).collect();
                row.extend(r.iter().map(|&x| CycScalar::rational(ri(x))));
                row
            })
            .collect();
        ensure!(got == canonical_subspace(&rows, 5), "S = ∅ extension differs on cone {}", cone);

        let full = boundary_supports(&ch, &[0, 1], DEFAULT_MAX_NESTED).map_err(e)?;
        ensure!(full.surviving == vec![0, 1, 2] && full.nested.len() == total, "S = [k] on cone {}", cone);
        let rho: Vec<Vec<i64>> = (0..2)
            .map(|l| (0..2).map(|x| (0..2).map(|a| full.reduction.m_inv[a][l] * ch.rays[a][x]).sum()).collect())
            .collect();
        for (i, ns) in full.nested.iter().enumerate() {
            let z = vec![CycScalar::zero(); 2];
            let pt = StratumPoint { nested: Some(i), z: z.clone(), free: vec![], boundary: vec![] };
            let got = full.extend(&pt, &h).map_err(e)?;
            let mapped: Vec<Vec<CycScalar>> = ns
                .boundary_extension(&z, &h)
                .map_err(e)?
                .basis()
                .to_rows()
                .iter()
                .map(|row| {
                    let mut v = vec![CycScalar::zero(); 5];
                    for a in 0..3 {
                        v[full.surviving[a]] = row[a].clone();
                    }
                    for (l, r) in rho.iter().enumerate() {
                        for x in 0..2 {
                            v[3 + x] = v[3 + x].plus(&row[3 + l].times(&CycScalar::rational(ri(r[x]))));
                        }
                    }
                    v
                })
                .collect();
            ensure!(got == canonical_subspace(&mapped, 5), "S = [k] extension differs on cone {}", cone);
        }
    }
    Ok("A2: 6 regular chambers; bad fan rejected; S = ∅ and S = [k] strata".into())
}

/// Incomparability and strong elimination, checked directly.
fn circuit_axioms(supports: &[BTreeSet<usize>]) -> Result<(), String> {
    for (i, a) in supports.iter().enumerate() {
        ensure!(!a.is_empty(), "empty circuit");
        for (j, b) in supports.iter().enumerate() {
            if i == j {
                continue;
            }
            ensure!(!a.is_subset(b), "{:?} ⊆ {:?}", a, b);
            for &x in a.intersection(b) {
                let mut u: BTreeSet<usize> = a.union(b).copied().collect();
                u.remove(&x);
                ensure!(supports.iter().any(|c| c.is_subset(&u)), "no circuit in {:?}", u);
            }
        }
    }
    Ok(())
}

fn completion_oracle(arr: &Arrangement, a: &[usize], p: &TorusPoint) -> Vec<usize> {
    let r = arr.rank_of(a);
    (0..arr.len()).filter(|&e| p.on_hypersurface(&arr.vectors[e]) && arr.rank_of(&[a, &[e]].concat()) == r).collect()
}

fn criterion_9(corpus: &[Instance]) -> Outcome {
    let e = |x: hyperq::HyperqError| x.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut arrs = vec![(cube_epsilon(), vec![TorusPoint::identity(3), half()])];
    for inst in corpus {
        let supports: Vec<BTreeSet<usize>> = circuits(&inst.data).map_err(e)?.iter().map(|c| set(&c.support)).collect();
        circuit_axioms(&supports).map_err(|w| format!("{}: {}", inst.name, w))?;
        let arr = Arrangement::from_hypertoric(&inst.data).map_err(e)?;
        let pts = zero_dim_layers(&arr).map_err(e)?;
        arrs.push((arr, pts));
    }
    let mut closures = 0;
    for (arr, pts) in &arrs {
        for p in pts {
            let pp = phi_p(arr, p);
            for _ in 0..8 {
                let a: Vec<usize> = pp.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
                let b: Vec<usize> = pp.iter().copied().filter(|e| a.contains(e) || rng.gen_bool(0.3)).collect();
                let ca = completion(arr, &a, p);
                ensure!(ca == completion_oracle(arr, &a, p), "completion of {:?} is {:?}", a, ca);
                ensure!(completion(arr, &ca, p) == ca, "completion of {:?} is not idempotent", a);
                let cb = completion(arr, &b, p);
                ensure!(ca.iter().all(|x| cb.contains(x)), "completion not monotone: {:?} ⊆ {:?}", a, b);
                closures += 1;
            }
        }
    }
    for trial in 0..100 {
        let dim = rng.gen_range(3..=6);
        let r = rng.gen_range(1..dim);
        let vs: Vec<Vec<Rat>> = (0..r).map(|_| (0..dim).map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4))).collect()).collect();
        let s = canonical_subspace(&vs, dim);
        // Random combinations, of which enough are independent.
        let mixed: Vec<Vec<Rat>> = (0..r + 2)
            .map(|_| {
                let c: Vec<Rat> = (0..r).map(|_| ri(rng.gen_range(-4..=4))).collect();
                (0..dim).map(|j| vs.iter().zip(&c).fold(ri(0), |acc, (v, x)| acc + &v[j] * x)).collect()
            })
            .collect();
        let m = canonical_subspace(&mixed, dim);
        if m.rank() == s.rank() {
            ensure!(m == s, "trial {}: canonical forms differ", trial);
        } else {
            ensure!(m.rank() < s.rank(), "trial {}: rank grew", trial);
            let all: Vec<Vec<Rat>> = mixed.iter().chain(&vs).cloned().collect();
            ensure!(canonical_subspace(&all, dim) == s, "trial {}: canonical forms differ", trial);
        }
    }
    Ok(format!("axioms on {} instances, {} closures, 100 subspace trials", corpus.len(), closures))
}

fn main() {
    let start = Instant::now();
    let corpus = corpus();
    let corpus_ms = start.elapsed();
    let criteria: Vec<(u32, u64, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, 1, Box::new(criterion_1)),
        (2, 5, Box::new(criterion_2)),
        (3, 120, Box::new(|| criterion_3(&corpus))),
        (4, 30, Box::new(|| criterion_4(&corpus))),
        (5, 1, Box::new(criterion_5)),
        (6, 5, Box::new(criterion_6)),
        (7, 10, Box::new(criterion_7)),
        (8, 5, Box::new(criterion_8)),
        (9, 30, Box::new(|| criterion_9(&corpus))),
    ];
    println!("corpus of {} instances built in {:.2}s", corpus.len(), corpus_ms.as_secs_f64());
    let mut failed = 0;
    for (n, limit, f) in &criteria {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let out = match out {
            Ok(msg) if took > Duration::from_secs(*limit) => Err(format!("{} (over the {}s limit)", msg, limit)),
            o => o,
        };
        match out {
            Ok(msg) => println!("criterion {}: PASS  {:>8.3}s  {}", n, took.as_secs_f64(), msg),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {:>8.3}s  {}", n, took.as_secs_f64(), msg);
            }
        }
    }
    if failed > 0 {
        println!("{} of {} criteria failed", failed, criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}

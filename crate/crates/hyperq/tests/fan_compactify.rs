mod common;

use std::collections::BTreeSet;

use common::{cube_epsilon, zaslavsky};
use hyperq::circuit_matroid::Arrangement;
use hyperq::exact_core::{canonical_subspace, ri, CycScalar, Scalar};
use hyperq::fan_compactify::*;
use hyperq::nested_charts::{all_nested_sets, interior_family, DEFAULT_MAX_NESTED};
use hyperq::HyperqError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn a2() -> Arrangement {
    Arrangement::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn test_arrangements() -> Vec<Arrangement> {
    let mut out = vec![Arrangement::new(1, vec![vec![1]]).unwrap(), a2(), cube_epsilon()];
    out.extend(common::corpus().iter().take(8).map(|i| Arrangement::from_hypertoric(&i.data).unwrap()));
    out
}

#[test]
fn chambers_match_zaslavsky() {
    assert_eq!(Fan::from_arrangement(&a2()).unwrap().cones.len(), 6);
    assert_eq!(Fan::from_arrangement(&cube_epsilon()).unwrap().cones.len(), 32);
    for arr in test_arrangements() {
        let fan = Fan::from_arrangement(&arr).unwrap();
        assert_eq!(fan.cones.len() as i64, zaslavsky(&arr), "{:?}", arr.vectors);
        assert!(fan.is_complete());
        assert!(fan.is_regular().regular);
        let mut seen = BTreeSet::new();
        for (i, cone) in fan.cones.iter().enumerate() {
            let signs = cone.signs.clone().unwrap();
            assert!(seen.insert(signs.clone()), "chambers are distinct");
            // Every ray lies in the closed chamber.
            for r in &fan.ray_matrix(i) {
                for (alpha, &s) in arr.vectors.iter().zip(&signs) {
                    let v = dot(alpha, r);
                    assert!(v == 0 || v.signum() as i8 == s);
                }
            }
        }
    }
}

#[test]
fn non_unimodular_fan_is_rejected() {
    let bad = Fan::from_cones(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]).unwrap();
    assert_eq!(bad.is_regular(), Regularity { regular: false, witness: Some((0, 2)) });
    let arr = a2();
    assert!(matches!(stratified_charts(&arr, &bad, 100), Err(HyperqError::NotRegular(_))));
    assert!(matches!(chart_hypersurfaces(&arr, &bad, 0), Err(HyperqError::NotRegular(_))));
    assert!(matches!(
        ToricChart::from_dual_basis(&arr, vec![vec![1, 0], vec![1, 1]]),
        Err(HyperqError::NotExpressible(_))
    ));
    assert!(matches!(
        ToricChart::from_dual_basis(&arr, vec![vec![1, 0], vec![1, 2]]),
        Err(HyperqError::NotRegular(_))
    ));
}

#[test]
fn chart_hypersurfaces_use_the_dual_basis() {
    for arr in test_arrangements().into_iter().take(3) {
        let fan = Fan::from_arrangement(&arr).unwrap();
        for cone in 0..fan.cones.len() {
            let ch = chart_hypersurfaces(&arr, &fan, cone).unwrap();
            for (i, b) in ch.dual_basis.iter().enumerate() {
                for (j, r) in ch.rays.iter().enumerate() {
                    assert_eq!(dot(b, r), i64::from(i == j));
                }
            }
            for h in &ch.hypersurfaces {
                assert!(h.lambda.iter().all(|&x| x >= 0));
                // α = sign · Σ λ_i β_i
                let back: Vec<i64> =
                    (0..arr.k).map(|x| h.sign as i64 * (0..arr.k).map(|i| h.lambda[i] * ch.dual_basis[i][x]).sum::<i64>()).collect();
                assert_eq!(back, arr.vectors[h.alpha]);
            }
            let q = vec![c(0.3, 0.8), c(-1.1, 0.2), c(0.5, -0.4)][..arr.k].to_vec();
            let u = ch.from_torus(&q);
            let back = ch.to_torus(&u).unwrap();
            assert!(back.iter().zip(&q).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }
}

#[test]
fn stratum_counts() {
    for (arr, strata, charts) in [
        (Arrangement::new(1, vec![vec![1]]).unwrap(), 4, 4),
        (a2(), 24, 36),
        (cube_epsilon(), 256, 1136),
    ] {
        let fan = Fan::from_arrangement(&arr).unwrap();
        let st = stratified_charts(&arr, &fan, DEFAULT_MAX_NESTED).unwrap();
        assert_eq!(st.len(), strata);
        assert_eq!(stratified_chart_count(&st), charts);
        assert_eq!(st.len(), fan.cones.len() << arr.k);
        // Each stratum contributes the nested sets of its surviving sub-arrangement.
        for s in &st {
            match &s.reduced {
                None => assert_eq!(s.chart_count(), 1),
                Some(red) => assert_eq!(s.nested.len(), all_nested_sets(red, DEFAULT_MAX_NESTED).unwrap().len()),
            }
        }
        let again = stratified_charts(&arr, &fan, DEFAULT_MAX_NESTED).unwrap();
        let key = |v: &[StratumChart]| -> Vec<(Vec<usize>, Vec<usize>, usize)> {
            v.iter().map(|s| (s.support.clone(), s.surviving.clone(), s.nested.len())).collect()
        };
        assert_eq!(key(&st), key(&again));
    }
}

#[test]
fn empty_support_is_the_regular_stratum() {
    for arr in [a2(), cube_epsilon()] {
        let fan = Fan::from_arrangement(&arr).unwrap();
        let k = arr.k;
        for cone in 0..fan.cones.len() {
            let ch = chart_hypersurfaces(&arr, &fan, cone).unwrap();
            let st = boundary_supports(&ch, &[], 100).unwrap();
            assert!(st.surviving.is_empty());
            assert!(st.reduced.is_none());
            assert_eq!(st.chart_count(), 1);
            let h = CycScalar::rational(ri(3));
            let pt = StratumPoint { nested: None, z: vec![], free: vec![], boundary: vec![CycScalar::zero(); k] };
            let e = st.extend(&pt, &h).unwrap();
            assert_eq!(e.rank(), k);
            // At u = 0 each ⟨α,r⟩(1+q^α)/(q^α−1) tends to −|⟨α,r⟩|.
            let rows: Vec<Vec<CycScalar>> = ch
                .rays
                .iter()
                .map(|r| {
                    let mut row: Vec<CycScalar> = arr
                        .vectors
                        .iter()
                        .map(|a| CycScalar::rational(ri(-3 * dot(a, r).abs())))
                        .collect();
                    row.extend(r.iter().map(|&x| CycScalar::rational(ri(x))));
                    row
                })
                .collect();
            assert_eq!(e, canonical_subspace(&rows, arr.len() + k));
        }
    }
}

#[test]
fn full_support_reduces_to_nested_charts() {
    for arr in [a2(), cube_epsilon()] {
        let fan = Fan::from_arrangement(&arr).unwrap();
        let k = arr.k;
        let total = all_nested_sets(&arr, DEFAULT_MAX_NESTED).unwrap().len();
        let all: Vec<usize> = (0..k).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut compared = 0;
        for cone in 0..fan.cones.len() {
            let ch = chart_hypersurfaces(&arr, &fan, cone).unwrap();
            let st = boundary_supports(&ch, &all, DEFAULT_MAX_NESTED).unwrap();
            assert_eq!(st.surviving, (0..arr.len()).collect::<Vec<_>>());
            assert!(st.removed.is_empty());
            assert_eq!(st.reduction.rank, k);
            assert_eq!(st.nested.len(), total);
            // ρ_l = Σ_a (M⁻¹)_{a l} r_a: the reduced 𝔱-coordinates in 𝔱.
            let rho: Vec<Vec<i64>> = (0..k)
                .map(|l| (0..k).map(|x| (0..k).map(|a| st.reduction.m_inv[a][l] * ch.rays[a][x]).sum()).collect())
                .collect();
            let h = CycScalar::rational(ri(2));
            for (i, ns) in st.nested.iter().enumerate() {
                let z: Vec<CycScalar> = if i % 2 == 0 {
                    vec![CycScalar::zero(); k]
                } else {
                    (0..k).map(|_| CycScalar::rational(hyperq::exact_core::rat(rng.gen_range(-9..=9), rng.gen_range(1..=7)))).collect()
                };
                let pt = StratumPoint { nested: Some(i), z: z.clone(), free: vec![], boundary: vec![] };
                let Ok(e) = st.extend(&pt, &h) else { continue };
                let nested = ns.boundary_extension(&z, &h).unwrap();
                let mapped: Vec<Vec<CycScalar>> = nested
                    .basis()
                    .to_rows()
                    .iter()
                    .map(|row| {
                        let mut v = vec![CycScalar::zero(); arr.len() + k];
                        for a in 0..arr.len() {
                            v[st.surviving[a]] = row[a].clone();
                        }
                        for (l, r) in rho.iter().enumerate() {
                            for x in 0..k {
                                v[arr.len() + x] = v[arr.len() + x].plus(&row[arr.len() + l].times(&CycScalar::rational(ri(r[x]))));
                            }
                        }
                        v
                    })
                    .collect();
                assert_eq!(e, canonical_subspace(&mapped, arr.len() + k), "cone {} nested {}", cone, i);
                compared += 1;
            }
        }
        assert!(compared >= fan.cones.len() * total / 2, "{}", compared);
    }
}

fn stratum_points(st: &StratumChart, k: usize, scale: f64) -> Vec<StratumPoint<Complex64>> {
    let r = st.reduction.rank;
    let s = st.support.len();
    (0..st.chart_count())
        .map(|ni| StratumPoint {
            nested: (r > 0).then_some(ni),
            z: (0..r).map(|i| c(0.3 + 0.1 * i as f64, -0.2) * scale).collect(),
            free: (0..s - r).map(|i| c(1.3, 0.4 - 0.3 * i as f64)).collect(),
            boundary: (0..k - s).map(|i| c(0.2, 0.35 + 0.1 * i as f64) * scale).collect(),
        })
        .collect()
}

#[test]
fn extension_agrees_inside_and_has_the_right_limit() {
    let h = c(0.7, 0.2);
    for arr in [a2(), cube_epsilon()] {
        let fan = Fan::from_arrangement(&arr).unwrap();
        let k = arr.k;
        for st in stratified_charts(&arr, &fan, DEFAULT_MAX_NESTED).unwrap() {
            let inside = stratum_points(&st, k, 1.0);
            let near = stratum_points(&st, k, 1e-12);
            let at = stratum_points(&st, k, 0.0);
            for ((p, pn), p0) in inside.iter().zip(&near).zip(&at) {
                let (Ok(e), Ok(en), Ok(e0)) = (st.extend(p, &h), st.extend(pn, &h), st.extend(p0, &h)) else {
                    continue;
                };
                let q = st.to_torus(p).unwrap();
                assert!(e.approx_eq(&interior_family(&arr, &q, &h).unwrap(), 1e-8));
                assert_eq!(e0.rank(), k);
                assert!(en.approx_eq(&e0, 1e-9));
            }
        }
    }
}

mod common;

use std::collections::BTreeSet;

use common::{cube_epsilon, half, printed_nested_sets, set, Members};
use hyperq::cli_reporting::{interior_agreement, round_trip_check, Mode};
use hyperq::exact_core::{ri, CycScalar, LaurentPoly, RationalFunction, Scalar};
use hyperq::nested_charts::*;
use hyperq::toric_layers::{layer_from_complete_set, TorusPoint};
use hyperq::HyperqError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn members_of(ns: &NestedSet) -> Members {
    ns.members.iter().map(|m| set(m)).collect()
}

#[test]
fn cube_nested_sets_match_the_printed_poset() {
    let arr = cube_epsilon();
    for (p, at_identity, count) in [(TorusPoint::identity(3), true, 21), (half(), false, 3)] {
        let sets = maximal_nested_sets(&arr, &p, DEFAULT_MAX_NESTED).unwrap();
        let got: BTreeSet<Members> = sets.iter().map(members_of).collect();
        assert_eq!(got.len(), count);
        assert_eq!(got, printed_nested_sets(at_identity));
        for ns in &sets {
            check_adapted_basis(ns, &ns.adapted_basis).unwrap();
        }
    }
    assert!(matches!(
        maximal_nested_sets(&arr, &TorusPoint::identity(3), 5),
        Err(HyperqError::TooManyNestedSets(_))
    ));
}

#[test]
fn chart_at_one() {
    let ns = common::cube_chart_at_one();
    assert_eq!(ns.adapted_basis, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    let vars = ns.vars();
    let z = |i| LaurentPoly::var(vars.clone(), i);
    let one = LaurentPoly::constant_in(vars.clone(), CycScalar::one());
    let want = one.plus(&z(0)).plus(&z(0).times(&z(1)).times(&z(2)));
    assert_eq!(ns.p_alpha(&[1, 1, 0]).unwrap().as_poly().unwrap(), want);
    assert_eq!(ns.psi(&ns.layers[2], None).unwrap().texts(), ["z1*z2", "z2", "1"]);
    let arr = cube_epsilon();
    let layer = layer_from_complete_set(&arr, &[2, 3, 6], &TorusPoint::identity(3)).unwrap();
    let psi = ns.psi(&layer, Some(&[vec![1, 1, 0], vec![0, 0, 1]])).unwrap();
    let first = RationalFunction::from_poly(want.times(&z(1)));
    assert_eq!(psi.coords[0], first);
    assert_eq!(psi.texts()[1], "1");
}

#[test]
fn chart_at_minus_one() {
    let ns = common::cube_chart_at_minus_one();
    let vars = ns.vars();
    let z = |i| LaurentPoly::var(vars.clone(), i);
    let one = LaurentPoly::constant_in(vars.clone(), CycScalar::one());
    // p_{ε₁}·(−1+z₂) = 1+z₁, compared by cross-multiplication.
    let p = ns.p_alpha(&[1, 0, 0]).unwrap();
    let lhs = p.numer().times(&z(1).minus(&one));
    let rhs = one.plus(&z(0)).times(p.denom());
    assert_eq!(lhs, rhs);
    let full = &ns.layers[ns.members.iter().position(|m| m.len() == 3).unwrap()];
    assert_eq!(ns.psi(full, Some(&ns.adapted_basis)).unwrap().texts(), ["z1", "1", "z3"]);
    assert!(check_adapted_basis(&ns, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).is_err());
}

fn random_z(r: &mut impl Rng, k: usize) -> Vec<Complex64> {
    (0..k).map(|_| Complex64::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))).collect()
}

/// `(q^α − α(p)) / p_α(z)` is a scalar times a monomial, so
/// `r(z)·r(w) = r(u)·r(zw/u)`.
#[test]
fn p_alpha_cofactor_leaves_a_monomial() {
    let arr = cube_epsilon();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for p in [TorusPoint::identity(3), half()] {
        for ns in maximal_nested_sets(&arr, &p, DEFAULT_MAX_NESTED).unwrap() {
            for alpha in arr.vectors.iter().filter(|v| p.on_hypersurface(v)) {
                let pa = ns.p_alpha(alpha).unwrap();
                let a = p.value(alpha).to_complex();
                let ratio = |z: &[Complex64]| -> Option<Complex64> {
                    let q = ns.chart_to_torus(z).ok()?;
                    let v = pa.eval_with(z, |c| c.to_complex())?;
                    Some((torus_power(&q, alpha) - a) / v)
                };
                let z = random_z(&mut rng, 3);
                let w = random_z(&mut rng, 3);
                let u = random_z(&mut rng, 3);
                let zwu: Vec<Complex64> = (0..3).map(|i| z[i] * w[i] / u[i]).collect();
                let (Some(rz), Some(rw), Some(ru), Some(rzwu)) = (ratio(&z), ratio(&w), ratio(&u), ratio(&zwu)) else {
                    continue;
                };
                let err = (rz * rw - ru * rzwu).norm() / (rz * rw).norm().max(1.0);
                assert!(err < 1e-9, "{:?} in {:?}: p = {}", alpha, ns.members, pa.to_text());
                let at_zero = pa.eval_with(&[Complex64::new(0.0, 0.0); 3], |c| c.to_complex()).unwrap();
                assert!(at_zero.norm() > 1e-12);
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "{}", checked);
}

#[test]
fn round_trips_on_every_chart() {
    let arr = cube_epsilon();
    for p in [TorusPoint::identity(3), half()] {
        for ns in maximal_nested_sets(&arr, &p, DEFAULT_MAX_NESTED).unwrap() {
            round_trip_check(&ns, 5, 10, Mode::Evaluate).unwrap();
        }
    }
    round_trip_check(&common::cube_chart_at_one(), 5, 10, Mode::Exact).unwrap();
    round_trip_check(&common::cube_chart_at_minus_one(), 5, 10, Mode::Exact).unwrap();
}

#[test]
fn domains() {
    let ns = common::cube_chart_at_minus_one();
    let zero = vec![CycScalar::zero(); 3];
    assert_eq!(ns.domain(&zero).unwrap(), ChartDomain::V);
    let z: Vec<CycScalar> = [2, 3, 5].iter().map(|&x| CycScalar::rational(ri(x))).collect();
    assert_eq!(ns.domain(&z).unwrap(), ChartDomain::V0);
    // z₂ = 1 makes the denominator of p_{ε₁} vanish.
    let bad: Vec<CycScalar> = [2, 1, 5].iter().map(|&x| CycScalar::rational(ri(x))).collect();
    assert_ne!(ns.domain(&bad).unwrap(), ChartDomain::V0);
}

/// `Span{e_i + ħ Σ α_i (1+q^α)/(q^α−1) t_α}` written out directly.
fn interior_oracle(vectors: &[Vec<i64>], q: &[Complex64], h: Complex64) -> Vec<Vec<Complex64>> {
    let p = vectors.len();
    let k = q.len();
    (0..k)
        .map(|i| {
            let mut row = vec![Complex64::new(0.0, 0.0); p + k];
            row[p + i] = Complex64::new(1.0, 0.0);
            for (a, v) in vectors.iter().enumerate() {
                let qa: Complex64 = v.iter().zip(q).map(|(&e, x)| x.powi(e as i32)).product();
                row[a] = h * v[i] as f64 * (qa + 1.0) / (qa - 1.0);
            }
            row
        })
        .collect()
}

#[test]
fn interior_family_matches_direct_formula() {
    let arr = cube_epsilon();
    let q = vec![Complex64::new(0.4, 0.3), Complex64::new(-1.2, 0.5), Complex64::new(0.7, -0.9)];
    let h = Complex64::new(1.3, -0.2);
    let lib = interior_family(&arr, &q, &h).unwrap();
    let direct = hyperq::exact_core::canonical_subspace(&interior_oracle(&arr.vectors, &q, h), arr.len() + 3);
    assert!(lib.approx_eq(&direct, 1e-9));
}

#[test]
fn boundary_extension_agrees_and_stays_full_rank() {
    for ns in [common::cube_chart_at_one(), common::cube_chart_at_minus_one()] {
        interior_agreement(&ns, 9, 5, Mode::Exact).unwrap();
        let zero = vec![CycScalar::zero(); 3];
        let h = CycScalar::rational(ri(2));
        assert_eq!(ns.boundary_extension(&zero, &h).unwrap().rank(), 3);
    }
    // Numerically, on every chart.
    let arr = cube_epsilon();
    for p in [TorusPoint::identity(3), half()] {
        for ns in maximal_nested_sets(&arr, &p, DEFAULT_MAX_NESTED).unwrap() {
            interior_agreement(&ns, 2, 3, Mode::Evaluate).unwrap();
        }
    }
}

#[test]
fn hypertoric_presentation_gives_the_same_chart_counts() {
    let arr = common::cube_arrangement();
    let all = all_nested_sets(&arr, DEFAULT_MAX_NESTED).unwrap();
    assert_eq!(all.len(), 24);
}

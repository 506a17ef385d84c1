mod common;

use std::collections::BTreeSet;

use common::{column_rank, rank_i128, subsets};
use hyperq::circuit_matroid::*;
use hyperq::HyperqError;
use proptest::prelude::*;

/// Minimal dependent column sets, with the sign vector found by searching
/// `{±1}^S` (circuits of unimodular matrices have entries in {0, ±1}).
fn brute_force_circuits(data: &HypertoricData) -> BTreeSet<Vec<i64>> {
    let n = data.n();
    let mut out = BTreeSet::new();
    for s in subsets(n).filter(|s| !s.is_empty()) {
        let r = column_rank(data, &s);
        if r + 1 != s.len() {
            continue;
        }
        let minimal = (0..s.len()).all(|i| {
            let t: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &c)| c).collect();
            column_rank(data, &t) == t.len()
        });
        if !minimal {
            continue;
        }
        let mut found = None;
        for signs in 0u32..1 << s.len() {
            if signs & 1 == 1 {
                continue; // first entry normalized to +1
            }
            let mut beta = vec![0i64; n];
            for (j, &c) in s.iter().enumerate() {
                beta[c] = if signs >> j & 1 == 1 { -1 } else { 1 };
            }
            let zero = (0..data.d()).all(|i| {
                let row: i64 = (0..n).map(|j| i64::try_from(&data.a.get(i, j).clone()).unwrap() * beta[j]).sum();
                row == 0
            });
            if zero {
                assert!(found.is_none(), "kernel of a circuit is one-dimensional");
                found = Some(beta);
            }
        }
        out.insert(found.expect("unimodular circuit has a ±1 kernel vector"));
    }
    out
}

#[test]
fn worked_example_circuits() {
    let data = common::worked_example();
    let got: BTreeSet<Vec<i64>> = circuits(&data).unwrap().into_iter().map(|c| c.beta).collect();
    let want: BTreeSet<Vec<i64>> = [vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, -1, 1]].into_iter().collect();
    assert_eq!(got, want);
    let labels: BTreeSet<String> = circuits(&data).unwrap().iter().map(|c| c.label()).collect();
    assert_eq!(labels, ["124", "134", "23"].iter().map(|s| s.to_string()).collect());
}

#[test]
fn circuits_match_brute_force_on_corpus() {
    for inst in common::corpus() {
        let got: BTreeSet<Vec<i64>> = circuits(&inst.data).unwrap().into_iter().map(|c| c.beta).collect();
        assert_eq!(got, brute_force_circuits(&inst.data), "{}", inst.name);
    }
}

#[test]
fn fixed_points_are_unimodular_bases() {
    for inst in common::corpus() {
        let fps = fixed_points(&inst.data).unwrap();
        let d = inst.data.d();
        let want: Vec<Vec<usize>> =
            subsets(inst.data.n()).filter(|s| s.len() == d && column_rank(&inst.data, s) == d).collect();
        let got: BTreeSet<Vec<usize>> = fps.iter().cloned().collect();
        assert_eq!(got, want.into_iter().collect(), "{}", inst.name);
    }
    for n in 1..=5 {
        assert_eq!(fixed_points(&common::tpn(n)).unwrap().len(), n + 1);
    }
}

#[test]
fn smoothness_rejections() {
    let bad = HypertoricData::from_rows(&[vec![1, 0, 1], vec![0, 1, 2]]).unwrap();
    let s = validate_smooth(&bad).unwrap();
    assert!(!s.unimodular);
    assert!(s.witness.unwrap().contains("determinant 2"));
    assert!(matches!(circuits(&bad), Err(HyperqError::NotSmooth(_))));

    let zero = HypertoricData::from_rows(&[vec![1, 0, -1], vec![0, 0, 0]]);
    assert!(zero.is_err() || !validate_smooth(&zero.unwrap()).unwrap().smooth());
}

#[test]
fn rank_two_flats_are_pairs_or_sums() {
    for inst in common::corpus() {
        let phi: Vec<Vec<i64>> = circuits(&inst.data).unwrap().into_iter().map(|c| c.beta).collect();
        let flats = rank2_flats(&phi).unwrap();
        let as_rows = |idx: &[usize]| -> Vec<Vec<i128>> {
            idx.iter().map(|&i| phi[i].iter().map(|&x| x as i128).collect()).collect()
        };
        // Oracle: the maximal rank-2 sets grown from every pair.
        let mut want = BTreeSet::new();
        for i in 0..phi.len() {
            for j in i + 1..phi.len() {
                let f: Vec<usize> = (0..phi.len()).filter(|&l| rank_i128(&as_rows(&[i, j, l])) == 2).collect();
                want.insert(f);
            }
        }
        let got: BTreeSet<Vec<usize>> = flats
            .iter()
            .map(|f| {
                let mut m = f.members.clone();
                m.sort_unstable();
                m
            })
            .collect();
        assert_eq!(got, want, "{}", inst.name);
        for f in &flats {
            match f.kind {
                FlatKind::Pair => assert_eq!(f.members.len(), 2),
                FlatKind::Triple => {
                    assert_eq!(f.members.len(), 3);
                    let [a, b, c] = [&phi[f.members[0]], &phi[f.members[1]], &phi[f.members[2]]];
                    let sums = |x: &Vec<i64>, y: &Vec<i64>, z: &Vec<i64>| {
                        [1i64, -1].iter().any(|&s| (0..x.len()).all(|i| x[i] + s * y[i] == z[i] || x[i] + s * y[i] == -z[i]))
                    };
                    assert!(sums(a, b, c) || sums(a, c, b) || sums(b, c, a));
                }
            }
        }
    }
}

#[test]
fn axioms_hold_on_corpus() {
    for inst in common::corpus() {
        let supports: Vec<Vec<usize>> = circuits(&inst.data).unwrap().into_iter().map(|c| c.support).collect();
        check_circuit_axioms(&supports).unwrap_or_else(|w| panic!("{}: {}", inst.name, w));
    }
}

#[test]
fn axiom_check_reports_violations() {
    assert!(check_circuit_axioms(&[vec![0, 1], vec![0, 1, 2]]).is_err());
    // {0,1} and {1,2} share 1, so some circuit must lie inside {0, 2}.
    assert!(check_circuit_axioms(&[vec![0, 1], vec![1, 2]]).is_err());
    assert!(check_circuit_axioms(&[vec![0, 1], vec![1, 2], vec![0, 2]]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_smooth_instances_satisfy_axioms(seed in any::<u64>(), d in 1usize..=3, extra in 1usize..=3) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let Some(data) = (0..200).find_map(|_| common::random_smooth(&mut rng, d, d + extra)) else {
            return Ok(());
        };
        let cs = circuits(&data).unwrap();
        let supports: Vec<Vec<usize>> = cs.iter().map(|c| c.support.clone()).collect();
        prop_assert!(check_circuit_axioms(&supports).is_ok());
        let got: BTreeSet<Vec<i64>> = cs.into_iter().map(|c| c.beta).collect();
        prop_assert_eq!(got, brute_force_circuits(&data));
    }
}

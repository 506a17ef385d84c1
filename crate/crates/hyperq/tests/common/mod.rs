#![allow(dead_code)]

use hyperq::circuit_matroid::{validate_smooth, Arrangement, HypertoricData};
use hyperq::stable_basis::{default_chi, find_generic_tau};
use hyperq::exact_core::rat;
use hyperq::nested_charts::{maximal_nested_sets, NestedSet, DEFAULT_MAX_NESTED};
use hyperq::toric_layers::TorusPoint;
use rand::{Rng, SeedableRng};
use std::collections::BTreeSet;
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub name: String,
    pub data: HypertoricData,
    pub tau: Vec<i64>,
}

pub fn worked_example() -> HypertoricData {
    HypertoricData::from_rows(&[vec![1, 0, 0, -1], vec![0, 1, -1, -1]]).unwrap().with_chi(default_chi(4)).unwrap()
}

pub fn cube_arrangement() -> Arrangement {
    let data =
        HypertoricData::from_rows(&[vec![1, 0, 0, 0, -1, 1], vec![0, 1, 0, 1, 0, -1], vec![0, 0, 1, -1, 1, 0]]).unwrap();
    Arrangement::from_hypertoric(&data).unwrap()
}

pub fn tpn(n: usize) -> HypertoricData {
    let rows: Vec<Vec<i64>> =
        (0..n).map(|i| (0..=n).map(|j| if j == n { -1 } else { i64::from(i == j) }).collect()).collect();
    HypertoricData::from_rows(&rows).unwrap().with_chi(default_chi(n + 1)).unwrap()
}

/// `[I | B]` with `B` in {-1,0,1}, kept only when every full minor is in
/// {0, ±1}, no column vanishes and a generic τ exists.
pub fn random_smooth(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Option<HypertoricData> {
    let mut rows = vec![vec![0i64; n]; d];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1;
    }
    for j in d..n {
        loop {
            for row in rows.iter_mut() {
                row[j] = rng.gen_range(-1..=1);
            }
            if rows.iter().any(|r| r[j] != 0) {
                break;
            }
        }
    }
    let data = HypertoricData::from_rows(&rows).ok()?.with_chi(default_chi(n)).ok()?;
    if !validate_smooth(&data).ok()?.smooth() {
        return None;
    }
    Arrangement::from_hypertoric(&data).ok()?;
    Some(data)
}

/// Twelve seeded smooth instances with `d ≤ 4`, `n ≤ 8`, plus the
/// two-dimensional worked example.
pub fn corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let shapes = [(1, 3), (2, 4), (2, 5), (2, 6), (3, 5), (3, 6), (3, 7), (4, 6), (4, 7), (4, 8), (2, 7), (3, 8)];
    let mut out = Vec::new();
    for (idx, &(d, n)) in shapes.iter().enumerate() {
        let data = (0..10_000).find_map(|_| random_smooth(&mut rng, d, n)).expect("smooth instance");
        let tau = find_generic_tau(&data).unwrap();
        out.push(Instance { name: format!("random_{}_{}x{}", idx, d, n), data, tau });
    }
    let data = worked_example();
    out.push(Instance { name: "worked_example".into(), data, tau: vec![2, 1] });
    out
}

/// Exact rank by fraction-free elimination.
pub fn rank_i128(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            for j in c + 1..cols {
                m[i][j] = (m[rank][c] * m[i][j] - m[i][c] * m[rank][j]) / prev;
            }
            m[i][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

pub fn column_rank(data: &HypertoricData, cols: &[usize]) -> usize {
    let rows: Vec<Vec<i128>> = cols
        .iter()
        .map(|&j| data.column(j).iter().map(|x| i128::try_from(x).unwrap()).collect())
        .collect();
    rank_i128(&rows)
}

pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// Laplace expansion; only for small matrices.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    if m.is_empty() {
        return 1;
    }
    let mut acc = 0;
    for j in 0..m.len() {
        let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
        let s = if j % 2 == 0 { 1 } else { -1 };
        acc += s * m[0][j] * det_i128(&minor);
    }
    acc
}

/// The cube arrangement `{0,1}³ ∖ 0` in the ε-basis, indexed ε₁, ε₂, ε₃, ε₁+ε₂, ε₁+ε₃, ε₂+ε₃, ε₁+ε₂+ε₃.
pub fn cube_epsilon() -> Arrangement {
    Arrangement::new(
        3,
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
    )
    .unwrap()
}

pub fn half() -> TorusPoint {
    TorusPoint::new(vec![rat(1, 2); 3])
}

pub fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

/// The printed complete sets at `1` and at `−1`.
pub fn printed_complete_sets(at_identity: bool) -> BTreeSet<BTreeSet<usize>> {
    let lists: Vec<Vec<usize>> = if at_identity {
        let mut v = vec![vec![]];
        v.extend((0..7).map(|i| vec![i]));
        // {εi, εj, εi+εj}, {εi+εj, εi+εk}, {εi, εj+εk, εi+εj+εk}
        v.extend([vec![0, 1, 3], vec![0, 2, 4], vec![1, 2, 5]]);
        v.extend([vec![3, 4], vec![3, 5], vec![4, 5]]);
        v.extend([vec![0, 5, 6], vec![1, 4, 6], vec![2, 3, 6]]);
        v.push((0..7).collect());
        v
    } else {
        vec![vec![], vec![3], vec![4], vec![5], vec![3, 4], vec![3, 5], vec![4, 5], vec![3, 4, 5]]
    };
    lists.iter().map(|l| set(l)).collect()
}

/// The printed Hasse diagram is inclusion between complete sets of
/// consecutive rank.
pub fn printed_covers(at_identity: bool) -> BTreeSet<(BTreeSet<usize>, BTreeSet<usize>)> {
    let sets = printed_complete_sets(at_identity);
    let mut out = BTreeSet::new();
    let rank = |s: &BTreeSet<usize>| -> usize {
        match s.len() {
            0 => 0,
            1 => 1,
            _ if s.len() == 7 || s == &set(&[3, 4, 5]) => 3,
            _ => 2,
        }
    };
    for a in &sets {
        for b in &sets {
            if rank(b) == rank(a) + 1 && a.is_subset(b) {
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    out
}

pub type Members = BTreeSet<BTreeSet<usize>>;

/// Nested sets read off the printed poset: every maximal flag of complete
/// sets, with each member replaced by its irreducible factors (only the
/// pairs `{εi+εj, εi+εk}` split).
pub fn printed_nested_sets(at_identity: bool) -> BTreeSet<Members> {
    let sets: Vec<BTreeSet<usize>> = printed_complete_sets(at_identity).into_iter().collect();
    let top = sets.iter().max_by_key(|s| s.len()).unwrap().clone();
    let factors = |s: &BTreeSet<usize>| -> Vec<BTreeSet<usize>> {
        if s.len() == 2 && s.iter().all(|i| (3..6).contains(i)) {
            s.iter().map(|&i| set(&[i])).collect()
        } else {
            vec![s.clone()]
        }
    };
    let mut out = BTreeSet::new();
    for a in sets.iter().filter(|s| s.len() == 1) {
        for b in sets.iter().filter(|s| s.len() > 1 && *s != &top && a.is_subset(s)) {
            let mut m: Members = BTreeSet::new();
            for s in [a, b, &top] {
                m.extend(factors(s));
            }
            out.insert(m);
        }
    }
    out
}

/// Number of chambers of a central arrangement, `Σ_{S ⊆ A} (−1)^{|S| − rk S}`.
pub fn zaslavsky(arr: &Arrangement) -> i64 {
    subsets(arr.len()).map(|s| if (s.len() - arr.rank_of(&s)) % 2 == 0 { 1 } else { -1 }).sum()
}

/// The chart at `1` through `ε₁ ⊂ {ε₁, ε₂, ε₁+ε₂} ⊂ Φ`.
pub fn cube_chart_at_one() -> NestedSet {
    let arr = cube_epsilon();
    let sets = maximal_nested_sets(&arr, &TorusPoint::identity(3), DEFAULT_MAX_NESTED).unwrap();
    sets.into_iter().find(|s| s.members == vec![vec![0], vec![0, 1, 3], (0..7).collect()]).unwrap()
}

/// The chart at `−1` with the basis `ε₁+ε₂, ε₂, ε₂+ε₃`.
pub fn cube_chart_at_minus_one() -> NestedSet {
    let arr = cube_epsilon();
    let sets = maximal_nested_sets(&arr, &half(), DEFAULT_MAX_NESTED).unwrap();
    let want: Members = [set(&[3]), set(&[5]), set(&[3, 4, 5])].into();
    let ns = sets.into_iter().find(|s| s.members.iter().map(|m| set(m)).collect::<Members>() == want).unwrap();
    ns.with_adapted_basis(vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 1, 1]]).unwrap()
}

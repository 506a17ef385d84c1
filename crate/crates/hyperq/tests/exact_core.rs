use hyperq::exact_core::int_matrix::{complete_to_unimodular, saturation_rows};
use hyperq::exact_core::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn det_i128(m: &[Vec<i128>]) -> i128 {
    // Laplace expansion; the matrices here are at most 4×4.
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut acc = 0;
    for j in 0..n {
        let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
        let s = if j % 2 == 0 { 1 } else { -1 };
        acc += s * m[0][j] * det_i128(&minor);
    }
    acc
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == r).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// gcd of all `r × r` minors.
fn determinantal_divisor(m: &[Vec<i64>], r: usize) -> i128 {
    let mut g = 0i128;
    for rows in subsets(m.len(), r) {
        for cols in subsets(m[0].len(), r) {
            let sub: Vec<Vec<i128>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j] as i128).collect()).collect();
            g = g.gcd(&det_i128(&sub));
        }
    }
    g
}

fn as_i128(x: &BigInt) -> i128 {
    x.to_i128().unwrap()
}

#[test]
fn snf_of_three_vector_matrix() {
    let m = IntMatrix::from_rows(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
    let s = snf(&m);
    assert_eq!(s.d.to_i64_rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
    assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
}

#[test]
fn kernel_basis_of_identity_block() {
    // For M = [I | A] the kernel basis is [-A; I].
    let m = IntMatrix::from_rows(&[vec![1, 0, 0, -1], vec![0, 1, -1, -1]]);
    let k = kernel_basis(&m);
    assert_eq!(k.to_i64_rows(), vec![vec![0, 1], vec![1, 1], vec![1, 0], vec![0, 1]]);
    assert!(m.mul(&k).is_zero());
}

#[test]
fn saturation_and_completion() {
    let l = saturation_rows(&IntMatrix::from_rows(&[vec![2, 2, 0], vec![0, 0, 3]]));
    assert_eq!(l.rank(), 2);
    let e = complete_to_unimodular(&l).unwrap();
    let mut rows = l.to_i64_rows();
    rows.extend(e.to_i64_rows());
    assert_eq!(IntMatrix::from_rows(&rows).det().abs(), BigInt::from(1));
}

#[test]
fn cyclotomic_identities() {
    let i = CycScalar::root_of_unity(4, 1);
    assert_eq!(i.times(&i), CycScalar::rational(ri(-1)));
    let z = CycScalar::root_of_unity(3, 1);
    let sum = CycScalar::one().plus(&z).plus(&z.times(&z));
    assert!(sum.is_zero());
    assert_eq!(CycScalar::exp_2pi_i(&rat(1, 2)), CycScalar::rational(ri(-1)));
    // Mixed conductors meet in a common field.
    let w = CycScalar::root_of_unity(6, 1);
    assert_eq!(w.times(&w), z);
    let c = z.to_complex();
    assert!((c.re + 0.5).abs() < 1e-12 && (c.im - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert_eq!(z.recip().unwrap(), z.times(&z));
}

#[test]
fn laurent_division_and_rational_functions() {
    let vars = var_names("z", 2);
    let x = LaurentPoly::<Rat>::var(vars.clone(), 0);
    let y = LaurentPoly::<Rat>::var(vars.clone(), 1);
    let one = LaurentPoly::constant_in(vars.clone(), ri(1));
    let a = one.plus(&x);
    let b = one.minus(&y);
    assert_eq!(exact_divide(&a.times(&b), &a).unwrap(), b);
    assert!(exact_divide(&b, &a).is_err());
    let f = RationalFunction::new(a.times(&b), a.times(&x)).unwrap();
    let g = RationalFunction::new(b.clone(), x.clone()).unwrap();
    assert_eq!(f, g);
    let p = [rat(3, 2), rat(-1, 5)];
    assert_eq!(f.eval(&p).unwrap(), b.eval(&p).unwrap() / rat(3, 2));
}

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, cols), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_matches_determinantal_divisors(m in small_matrix(3, 4)) {
        let im = IntMatrix::from_rows(&m);
        let s = snf(&im);
        prop_assert_eq!(s.u.mul(&im).mul(&s.v), s.d.clone());
        prop_assert_eq!(s.u.det().abs(), BigInt::from(1));
        prop_assert_eq!(s.v.det().abs(), BigInt::from(1));
        let divs: Vec<i128> = s.divisors().iter().map(as_i128).collect();
        let mut prod = 1i128;
        for r in 1..=3 {
            let dk = determinantal_divisor(&m, r);
            if dk == 0 {
                prop_assert!(divs.len() < r);
                break;
            }
            prod *= divs[r - 1];
            prop_assert!(divs[r - 1] > 0);
            prop_assert_eq!(prod, dk);
        }
        for w in divs.windows(2) {
            prop_assert!((w[1] % w[0]).is_zero());
        }
    }

    #[test]
    fn hermite_is_left_unimodular(m in small_matrix(3, 3)) {
        let im = IntMatrix::from_rows(&m);
        let h = hermite(&im);
        prop_assert_eq!(h.u.mul(&im), h.h.clone());
        prop_assert_eq!(h.u.det().abs(), BigInt::from(1));
        prop_assert_eq!(h.h.rank(), im.rank());
    }

    #[test]
    fn kernel_basis_is_saturated(m in small_matrix(2, 5)) {
        let im = IntMatrix::from_rows(&m);
        let k = kernel_basis(&im);
        prop_assert!(im.mul(&k).is_zero());
        prop_assert_eq!(k.cols(), 5 - im.rank());
        if k.cols() > 0 {
            // Saturated: the maximal minors of K have gcd 1.
            let kr: Vec<Vec<i64>> = k.to_i64_rows();
            prop_assert_eq!(determinantal_divisor(&kr, k.cols()), 1);
        }
    }

    #[test]
    fn canonical_subspace_ignores_the_spanning_set(
        vs in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..4),
        mix in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 4),
    ) {
        let rv: Vec<Vec<Rat>> = vs.iter().map(|v| v.iter().map(|&x| ri(x)).collect()).collect();
        let s = canonical_subspace(&rv, 4);
        // Random combinations of the originals, appended to them.
        let mut more = rv.clone();
        for c in &mix {
            let w: Vec<Rat> = (0..4)
                .map(|j| rv.iter().zip(c).fold(ri(0), |a, (v, &x)| a + &v[j] * ri(x)))
                .collect();
            more.push(w);
        }
        more.reverse();
        prop_assert_eq!(canonical_subspace(&more, 4), s.clone());
        prop_assert_eq!(canonical_subspace(&s.basis().to_rows(), 4), s);
    }
}

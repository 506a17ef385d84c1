//! Seeded evaluation points.

use crate::exact_core::{rat, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream per `(seed, purpose)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Nonzero rational `p/q` with `|p| ≤ range`, `1 ≤ q ≤ 7`.
pub fn nonzero_rat(r: &mut impl Rng, range: i64) -> Rat {
    loop {
        let p = r.gen_range(-range..=range);
        let q = r.gen_range(1..=7);
        if p != 0 {
            return rat(p, q);
        }
    }
}

/// Point `[t₁, …, t_d, ħ]` with all coordinates nonzero.
pub fn tau_point(r: &mut impl Rng, d: usize, range: i64) -> Vec<Rat> {
    (0..=d).map(|_| nonzero_rat(r, range)).collect()
}

/// `q^α` for a rational torus point.
pub fn q_power(q: &[Rat], alpha: &[i64]) -> Rat {
    let mut acc = rat(1, 1);
    for (x, &e) in q.iter().zip(alpha) {
        if e == 0 {
            continue;
        }
        let b = if e < 0 { x.recip() } else { x.clone() };
        for _ in 0..e.unsigned_abs() {
            acc *= &b;
        }
    }
    acc
}

/// Rational `q ∈ (Q^×)^k` with `q^α ≠ 1` for every listed `α`.
pub fn regular_q(r: &mut impl Rng, k: usize, phi: &[Vec<i64>]) -> Vec<Rat> {
    loop {
        let q: Vec<Rat> = (0..k).map(|_| nonzero_rat(r, 9)).collect();
        if phi.iter().all(|a| q_power(&q, a) != rat(1, 1)) {
            return q;
        }
    }
}

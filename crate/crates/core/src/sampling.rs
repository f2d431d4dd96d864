//! Seeded random rational points of a polytope, as convex combinations of a pool.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rat;
use crate::sdist::SDist;

/// `count` points, each a mixture of between 1 and `max_terms` distinct pool
/// elements with integer weights in `1..=10`, normalized.
pub fn random_convex_combinations(pool: &[SDist], count: usize, seed: u64, max_terms: usize) -> Vec<SDist> {
    assert!(!pool.is_empty(), "empty pool");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=max_terms.min(pool.len()));
            let picks = sample(&mut rng, pool.len(), k).into_vec();
            let raw: Vec<i64> = picks.iter().map(|_| rng.gen_range(1..=10)).collect();
            let total: i64 = raw.iter().sum();
            let weights: Vec<Rat> = raw.iter().map(|&w| Rat::new(w, total)).collect();
            SDist::mix(weights.iter().zip(picks.iter().map(|&i| &pool[i]))).expect("pool on one scenario")
        })
        .collect()
}

/// Random rational probability vector of length `n` with weights in `0..=bound`
/// (at least one positive).
pub fn random_weights(rng: &mut impl Rng, n: usize, bound: i64) -> Vec<Rat> {
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=bound)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.iter().map(|&w| Rat::new(w, total)).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_cycle;
    use std::sync::Arc;

    #[test]
    fn reproducible_by_seed() {
        let x = Arc::new(build_cycle(4).unwrap());
        let pool = crate::polytope::enumerate_vertices(&x, 2, Default::default()).unwrap();
        let a = random_convex_combinations(&pool, 5, 7, 3);
        let b = random_convex_combinations(&pool, 5, 7, 3);
        assert_eq!(a, b);
        assert_ne!(a, random_convex_combinations(&pool, 5, 8, 3));
    }
}

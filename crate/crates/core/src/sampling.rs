//! Small, allocation-free samplers for the tiny parameters that dominate the
//! inner loops (binomials with n < 64, Poisson means well below 1).

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

#[inline]
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> usize {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= 64 {
        (0..n).filter(|_| rng.random::<f64>() < p).count()
    } else {
        Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as usize
    }
}

pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 20.0 {
        // multiplication method
        let limit = (-mean).exp();
        let mut k = 0;
        let mut prod = rng.random::<f64>();
        while prod > limit {
            k += 1;
            prod *= rng.random::<f64>();
        }
        k
    } else {
        Poisson::new(mean).expect("valid poisson").sample(rng) as usize
    }
}

/// Choose `k` distinct entries of `pool` uniformly (partial Fisher-Yates;
/// the chosen entries end up in `pool[..k]`).
pub fn choose_in_place<'a, T, R: Rng + ?Sized>(rng: &mut R, pool: &'a mut [T], k: usize) -> &'a [T] {
    let n = pool.len();
    debug_assert!(k <= n);
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    &pool[..k]
}

//! Seeded complex structures and the within-complex contact rates.
//!
//! Groups are 0-based: `2j` holds the remainers of household `j`, `2j+1` its
//! movers-out and `2d` the movers-in. The seed sits in group 0 (type R),
//! group 1 (type H) or group `2d` (type W).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeedType {
    R,
    H,
    W,
}

impl SeedType {
    pub const ALL: [SeedType; 3] = [SeedType::R, SeedType::H, SeedType::W];

    pub fn label(self) -> &'static str {
        match self {
            SeedType::R => "R",
            SeedType::H => "H",
            SeedType::W => "W",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SeedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Group sizes of one complex (seed included) and where its seed sits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededComplexStructure {
    pub h: usize,
    pub d: usize,
    pub sizes: Vec<usize>,
    pub seed: SeedType,
}

impl SeededComplexStructure {
    /// Structure implied by movers-out counts `m[j]` of each household.
    /// For H and W seeds `m[0]` excludes the extra mover out of household 0.
    pub fn from_movers(h: usize, d: usize, seed: SeedType, m: &[usize]) -> Result<Self> {
        if m.len() != d {
            return Err(Error::InvalidParam(format!("need {d} mover counts, got {}", m.len())));
        }
        if m[0] > h - 1 || m.iter().skip(1).any(|&x| x > h) {
            return Err(Error::InvalidParam(format!("mover counts {m:?} exceed household size {h}")));
        }
        let mut sizes = vec![0; 2 * d + 1];
        for j in 0..d {
            sizes[2 * j] = h - m[j];
            sizes[2 * j + 1] = m[j];
        }
        let total: usize = m.iter().sum();
        sizes[2 * d] = total;
        if seed != SeedType::R {
            sizes[0] -= 1;
            sizes[1] += 1;
            sizes[2 * d] += 1;
        }
        Ok(SeededComplexStructure { h, d, sizes, seed })
    }

    pub fn seed_group(&self) -> usize {
        match self.seed {
            SeedType::R => 0,
            SeedType::H => 1,
            SeedType::W => 2 * self.d,
        }
    }

    pub fn n_groups(&self) -> usize {
        2 * self.d + 1
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Remainers plus movers-in; always `w`.
    pub fn workplace_size(&self) -> usize {
        (0..self.d).map(|j| self.sizes[2 * j]).sum::<usize>() + self.sizes[2 * self.d]
    }

    /// Non-seed members per group.
    pub fn susceptibles(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s[self.seed_group()] -= 1;
        s
    }

    /// Group label of every member, seed first.
    pub fn member_groups(&self) -> Vec<usize> {
        let g0 = self.seed_group();
        let mut out = vec![g0];
        for (g, &a) in self.sizes.iter().enumerate() {
            let k = if g == g0 { a - 1 } else { a };
            out.extend(std::iter::repeat(g).take(k));
        }
        out
    }
}

/// Draw the movers-out counts `(M_1, .., M_d)` by thresholding a fixed
/// number of uniforms against `theta`, so draws at different `theta` from
/// the same stream are coupled (and monotone in `theta`).
pub fn sample_mover_counts<R: Rng + ?Sized>(h: usize, d: usize, theta: f64, rng: &mut R) -> Vec<usize> {
    (0..d)
        .map(|j| {
            let trials = if j == 0 { h - 1 } else { h };
            (0..trials).filter(|_| rng.random::<f64>() < theta).count()
        })
        .collect()
}

pub fn sample_structure<R: Rng + ?Sized>(
    params: &ModelParams,
    seed: SeedType,
    rng: &mut R,
) -> Result<SeededComplexStructure> {
    if seed != SeedType::R && params.theta() == 0.0 {
        return Err(Error::NoMovers(seed.label()));
    }
    let m = sample_mover_counts(params.h(), params.d(), params.theta(), rng);
    SeededComplexStructure::from_movers(params.h(), params.d(), seed, &m)
}

fn binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    binomial_coeff(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

pub fn binomial_coeff(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Mover-count vectors with `m[1..]` sorted (those households are
/// exchangeable), each with the multinomial multiplicity of its orbit.
/// The structure of a complex depends only on this canonical vector.
pub fn canonical_mover_vectors(h: usize, d: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(h: usize, left: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in min..=h {
            cur.push(v);
            rec(h, left - 1, v, cur, out);
            cur.pop();
        }
    }
    let mut tails = Vec::new();
    rec(h, d - 1, 0, &mut Vec::new(), &mut tails);
    let mut out = Vec::new();
    for m1 in 0..h {
        for tail in &tails {
            // number of distinct orderings of the tail
            let mut mult = factorial(tail.len());
            let mut i = 0;
            while i < tail.len() {
                let mut j = i;
                while j < tail.len() && tail[j] == tail[i] {
                    j += 1;
                }
                mult /= factorial(j - i);
                i = j;
            }
            let mut m = vec![m1];
            m.extend_from_slice(tail);
            out.push((m, mult));
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Probability of the canonical mover vector `m` (with multiplicity `mult`).
pub fn mover_vector_weight(h: usize, theta: f64, m: &[usize], mult: f64) -> f64 {
    let mut w = mult * binom_pmf(h - 1, m[0], theta);
    for &x in &m[1..] {
        w *= binom_pmf(h, x, theta);
    }
    w
}

/// Per-pair infection rates between groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMatrix {
    pub d: usize,
    pub rates: Vec<Vec<f64>>,
}

impl ContactMatrix {
    pub fn new(d: usize, beta_h_pair: f64, beta_w_pair: f64) -> Self {
        let ng = 2 * d + 1;
        let movers_in = 2 * d;
        let mut rates = vec![vec![0.0; ng]; ng];
        for (g, row) in rates.iter_mut().enumerate() {
            for (g2, r) in row.iter_mut().enumerate() {
                let same_block = g < movers_in && g2 < movers_in && g / 2 == g2 / 2;
                let work_g = g == movers_in || g % 2 == 0;
                let work_g2 = g2 == movers_in || g2 % 2 == 0;
                *r = if g == g2 && g < movers_in && g % 2 == 0 {
                    beta_h_pair + beta_w_pair
                } else if same_block {
                    beta_h_pair
                } else if work_g && work_g2 {
                    beta_w_pair
                } else {
                    0.0
                };
            }
        }
        ContactMatrix { d, rates }
    }

    pub fn from_params(params: &ModelParams) -> Self {
        Self::new(params.d(), params.beta_h_pair(), params.beta_w_pair())
    }

    #[inline]
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[from][to]
    }

    /// True if groups share a household block.
    pub fn household_link(&self, g: usize, g2: usize) -> bool {
        g < 2 * self.d && g2 < 2 * self.d && g / 2 == g2 / 2
    }

    /// True if both groups belong to the realized workplace.
    pub fn workplace_link(&self, g: usize, g2: usize) -> bool {
        let w = |x: usize| x == 2 * self.d || x % 2 == 0;
        w(g) && w(g2)
    }
}

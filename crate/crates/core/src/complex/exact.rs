//! Exact multitype final-state distribution when every infectious period is 1.
//!
//! Edges are then independent: an infective in group `a` escapes infecting a
//! given member of group `b` with probability `q[a][b]`. Write `p(k)` for the
//! probability that, in a population holding only `k_g` susceptibles of each
//! group plus the initial infectives, everyone is infected. Then the final
//! state of a population of size `l` is `k` with probability
//!
//! ```text
//! prod_g C(l_g, k_g) * Q_g(k)^(l_g - k_g) * p(k),   Q_g(k) = prod_a q[a][g]^(k_a + m_a)
//! ```
//!
//! and these masses sum to 1 for every `l`. The coefficient of `p(l)` is 1,
//! so the equations are solved in increasing order of `l`.

use crate::complex::structure::binomial_coeff;
use crate::error::{Error, Result};

/// Rough operation count of [`final_state_pmf`] for the given sizes.
pub fn exact_cost(susceptibles: &[usize]) -> u64 {
    susceptibles
        .iter()
        .map(|&n| ((n as u64 + 1) * (n as u64 + 2)) / 2)
        .product()
}

/// Final-state PMF over per-group infected counts (initial infectives not
/// counted). `ln_q[a][b]` is the log escape probability from one group-`a`
/// infective to one group-`b` susceptible. The result is indexed in mixed
/// radix with the last group varying fastest; see [`state_index`].
pub fn final_state_pmf(susceptibles: &[usize], initial: &[usize], ln_q: &[Vec<f64>]) -> Result<Vec<f64>> {
    let ng = susceptibles.len();
    if initial.len() != ng || ln_q.len() != ng {
        return Err(Error::InvalidParam("group count mismatch".into()));
    }
    // Only groups with susceptibles carry a state coordinate.
    let active: Vec<usize> = (0..ng).filter(|&g| susceptibles[g] > 0).collect();
    let sizes: Vec<usize> = active.iter().map(|&g| susceptibles[g]).collect();
    let radix: Vec<usize> = sizes.iter().map(|&n| n + 1).collect();
    let n_states: usize = radix.iter().product();

    // Base log-escape into each active group from the initial infectives.
    let base: Vec<f64> = active
        .iter()
        .map(|&g| (0..ng).map(|a| initial[a] as f64 * ln_q[a][g]).sum())
        .collect();
    let na = active.len();
    let mut coord = vec![0usize; na];

    // pow_table[s][i][e] = Q_i(k_s)^e
    let mut offsets = Vec::with_capacity(na);
    let mut stride = 0;
    for &n in &sizes {
        offsets.push(stride);
        stride += n + 1;
    }
    let mut pow_table = vec![0.0; n_states * stride];
    for s in 0..n_states {
        decode(s, &radix, &mut coord);
        for i in 0..na {
            let g = active[i];
            let mut lq = base[i];
            for (j, &a) in active.iter().enumerate() {
                lq += coord[j] as f64 * ln_q[a][g];
            }
            let q = lq.exp();
            let row = &mut pow_table[s * stride + offsets[i]..s * stride + offsets[i] + sizes[i] + 1];
            let mut acc = 1.0;
            for slot in row.iter_mut() {
                *slot = acc;
                acc *= q;
            }
        }
    }

    let max_n = sizes.iter().copied().max().unwrap_or(0);
    let binom: Vec<Vec<f64>> = (0..=max_n)
        .map(|n| (0..=n).map(|k| binomial_coeff(n, k)).collect())
        .collect();

    let mut x = vec![0.0; n_states];
    let mut l = vec![0usize; na];
    let mut k = vec![0usize; na];
    for s in 0..n_states {
        decode(s, &radix, &mut l);
        let mut sum = 0.0;
        // iterate k <= l coordinatewise, excluding k == l
        k.iter_mut().for_each(|v| *v = 0);
        loop {
            let ks = encode(&k, &radix);
            if ks == s {
                break;
            }
            let mut term = x[ks];
            if term != 0.0 {
                let base_idx = ks * stride;
                for i in 0..na {
                    term *= binom[l[i]][k[i]] * pow_table[base_idx + offsets[i] + (l[i] - k[i])];
                }
                sum += term;
            }
            // odometer over the box [0, l]
            let mut i = na;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if k[i] < l[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = 0;
            }
        }
        x[s] = 1.0 - sum;
    }

    let mut pmf_active = vec![0.0; n_states];
    for s in 0..n_states {
        decode(s, &radix, &mut k);
        let mut p = x[s];
        for i in 0..na {
            p *= binom[sizes[i]][k[i]] * pow_table[s * stride + offsets[i] + (sizes[i] - k[i])];
        }
        pmf_active[s] = p;
    }

    let total: f64 = pmf_active.iter().sum();
    if (total - 1.0).abs() > 1e-12 || pmf_active.iter().any(|&p| !(-1e-13..=1.0 + 1e-13).contains(&p)) {
        return Err(Error::NonConvergence {
            what: "exact final-state normalization",
            iterations: n_states,
            residual: (total - 1.0).abs(),
        });
    }

    // Re-embed into the full group layout (inactive groups are always 0).
    if na == ng {
        return Ok(pmf_active.into_iter().map(|p| p.clamp(0.0, 1.0)).collect());
    }
    let full_radix: Vec<usize> = susceptibles.iter().map(|&n| n + 1).collect();
    let mut full = vec![0.0; full_radix.iter().product()];
    let mut fcoord = vec![0usize; ng];
    for s in 0..n_states {
        decode(s, &radix, &mut k);
        fcoord.iter_mut().for_each(|v| *v = 0);
        for (i, &g) in active.iter().enumerate() {
            fcoord[g] = k[i];
        }
        full[encode(&fcoord, &full_radix)] = pmf_active[s].clamp(0.0, 1.0);
    }
    Ok(full)
}

#[inline]
fn decode(mut s: usize, radix: &[usize], out: &mut [usize]) {
    for i in (0..radix.len()).rev() {
        out[i] = s % radix[i];
        s /= radix[i];
    }
}

#[inline]
fn encode(c: &[usize], radix: &[usize]) -> usize {
    let mut s = 0;
    for i in 0..radix.len() {
        s = s * radix[i] + c[i];
    }
    s
}

/// Index of per-group counts `k` in a PMF returned by [`final_state_pmf`].
pub fn state_index(k: &[usize], susceptibles: &[usize]) -> usize {
    let radix: Vec<usize> = susceptibles.iter().map(|&n| n + 1).collect();
    encode(k, &radix)
}

/// Inverse of [`state_index`].
pub fn state_counts(s: usize, susceptibles: &[usize]) -> Vec<usize> {
    let radix: Vec<usize> = susceptibles.iter().map(|&n| n + 1).collect();
    let mut out = vec![0; radix.len()];
    decode(s, &radix, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_individuals() {
        let r: f64 = 0.7;
        let pmf = final_state_pmf(&[1], &[1], &[vec![-r]]).unwrap();
        assert!((pmf[1] - (1.0 - (-r).exp())).abs() < 1e-15);
    }

    #[test]
    fn reed_frost_single_type() {
        // classic: 1 initial, 2 susceptibles, escape q
        let q: f64 = 0.6;
        let pmf = final_state_pmf(&[2], &[1], &[vec![q.ln()]]).unwrap();
        let p0 = q * q;
        let p1 = 2.0 * (1.0 - q) * q * q;
        assert!((pmf[0] - p0).abs() < 1e-14);
        assert!((pmf[1] - p1).abs() < 1e-14);
        assert!((pmf[2] - (1.0 - p0 - p1)).abs() < 1e-14);
    }

    #[test]
    fn empty_groups_are_skipped() {
        let lq = vec![vec![-0.5, -0.2, -1.0]; 3];
        let pmf = final_state_pmf(&[2, 0, 1], &[1, 0, 0], &lq).unwrap();
        assert_eq!(pmf.len(), 3 * 1 * 2);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

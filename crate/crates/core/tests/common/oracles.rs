//! Enumeration oracles for single-complex epidemics, shared by test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hwsim_core::complex::exact::{final_state_pmf, state_counts};
use hwsim_core::complex::structure::canonical_mover_vectors;
use hwsim_core::complex::*;
use hwsim_core::stats::empirical_pmf;

pub fn structures(h: usize, d: usize) -> Vec<SeededComplexStructure> {
    let mut out = Vec::new();
    for x in SeedType::ALL {
        for (m, _) in canonical_mover_vectors(h, d) {
            out.push(SeededComplexStructure::from_movers(h, d, x, &m).unwrap());
        }
    }
    out
}

/// Directed pairs `(u, v, rate)` with positive rate, seed is member 0.
pub fn edges(s: &SeededComplexStructure, cm: &ContactMatrix, into_seed: bool) -> Vec<(usize, usize, f64)> {
    let g = s.member_groups();
    let mut e = Vec::new();
    for u in 0..g.len() {
        for v in 0..g.len() {
            if u != v && (into_seed || v != 0) {
                let r = cm.rate(g[u], g[v]);
                if r > 0.0 {
                    e.push((u, v, r));
                }
            }
        }
    }
    e
}

pub fn reachable(m: usize, present: &[(usize, usize)], from: usize, reverse: bool) -> Vec<bool> {
    let mut seen = vec![false; m];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for &(u, v) in present {
            let (a, b) = if reverse { (v, u) } else { (u, v) };
            if a == x && !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

pub fn per_group(s: &SeededComplexStructure, hit: &[bool]) -> Vec<usize> {
    let g = s.member_groups();
    let mut c = vec![0; s.n_groups()];
    for v in 1..g.len() {
        if hit[v] {
            c[g[v]] += 1;
        }
    }
    c
}

/// Forward final-state PMF at unit infectious period by summing over every
/// subset of directed edges.
pub fn brute_force_constant(s: &SeededComplexStructure, cm: &ContactMatrix) -> BTreeMap<Vec<usize>, f64> {
    let e = edges(s, cm, false);
    let m = s.total();
    let mut pmf = BTreeMap::new();
    for mask in 0u64..(1 << e.len()) {
        let mut p = 1.0;
        let mut present = Vec::new();
        for (k, &(u, v, r)) in e.iter().enumerate() {
            let q = (-r).exp();
            if mask >> k & 1 == 1 {
                p *= 1.0 - q;
                present.push((u, v));
            } else {
                p *= q;
            }
        }
        *pmf.entry(per_group(s, &reachable(m, &present, 0, false))).or_insert(0.0) += p;
    }
    pmf
}

/// `E[prod_{v in on} (1 - e^{-r_v I}) prod_{v in off} e^{-r_v I}]` for
/// `I ~ Exp(1)`, by inclusion-exclusion over `on` and `E[e^{-sI}] = 1/(1+s)`.
pub fn exp_out_set_prob(on: &[f64], off: &[f64]) -> f64 {
    let base: f64 = off.iter().sum();
    let mut total = 0.0;
    for sub in 0u32..(1 << on.len()) {
        let mut s = base;
        let mut sign = 1.0;
        for (k, &r) in on.iter().enumerate() {
            if sub >> k & 1 == 1 {
                s += r;
                sign = -sign;
            }
        }
        total += sign / (1.0 + s);
    }
    total
}

/// Final-state PMF with exponential periods: each member's out-edge set is
/// drawn jointly (shared period), independently across members. `reverse`
/// gives the susceptibility set of the seed; the seed's own out-edges are
/// then irrelevant and skipped.
pub fn oracle_exponential(s: &SeededComplexStructure, cm: &ContactMatrix, reverse: bool) -> BTreeMap<Vec<usize>, f64> {
    let g = s.member_groups();
    let m = g.len();
    let outs: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|u| {
            if reverse && u == 0 {
                return Vec::new();
            }
            (0..m)
                .filter(|&v| v != u && (reverse || v != 0))
                .map(|v| (v, cm.rate(g[u], g[v])))
                .filter(|&(_, r)| r > 0.0)
                .collect()
        })
        .collect();
    let mut pmf = BTreeMap::new();
    let mut choice = vec![0u32; m];
    loop {
        let mut p = 1.0;
        let mut present = Vec::new();
        for u in 0..m {
            let (mut on, mut off) = (Vec::new(), Vec::new());
            for (k, &(v, r)) in outs[u].iter().enumerate() {
                if choice[u] >> k & 1 == 1 {
                    on.push(r);
                    present.push((u, v));
                } else {
                    off.push(r);
                }
            }
            p *= exp_out_set_prob(&on, &off);
        }
        *pmf.entry(per_group(s, &reachable(m, &present, 0, reverse))).or_insert(0.0) += p;
        // odometer over out-edge subsets
        let mut u = 0;
        loop {
            if u == m {
                return pmf;
            }
            choice[u] += 1;
            if choice[u] < 1 << outs[u].len() {
                break;
            }
            choice[u] = 0;
            u += 1;
        }
    }
}

pub fn exact_as_map(s: &SeededComplexStructure, cm: &ContactMatrix) -> BTreeMap<Vec<usize>, f64> {
    let ng = s.n_groups();
    let ln_q: Vec<Vec<f64>> = (0..ng).map(|a| (0..ng).map(|b| -cm.rate(a, b)).collect()).collect();
    let sus = s.susceptibles();
    let mut init = vec![0; ng];
    init[s.seed_group()] = 1;
    let pmf = final_state_pmf(&sus, &init, &ln_q).unwrap();
    let mut out = BTreeMap::new();
    for (idx, &p) in pmf.iter().enumerate() {
        if p > 0.0 {
            out.insert(state_counts(idx, &sus), p);
        }
    }
    out
}

pub fn mc_map(draws: impl Iterator<Item = Vec<u32>>) -> BTreeMap<Vec<usize>, f64> {
    empirical_pmf(draws.map(|v| v.into_iter().map(|x| x as usize).collect::<Vec<_>>()))
}

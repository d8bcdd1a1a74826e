//! Final-outcome simulation of the epidemic on a realized population.
//!
//! The continuous-time process is never simulated. Instead the random graph
//! of potential local contacts is explored lazily from the initial case: the
//! first time an individual is reached it draws its infectious period, its
//! household/workplace out-edges and a Poisson number of global contacts.
//! The set reached this way has the law of the final outcome.

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Population;
use crate::params::{ModelParams, PeriodSampler};
use crate::rng::{tag, SeedSpec, SimRng};
use crate::sampling::poisson;
use crate::stats::normal_ci;

pub const NO_INFECTOR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCase {
    Fixed(usize),
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub final_size: usize,
    /// Sum of the infectious periods of everyone infected.
    pub severity: f64,
    pub infected: Vec<bool>,
    /// Who infected each individual (`NO_INFECTOR` for the initial case and
    /// for those never infected).
    pub infector: Vec<u32>,
    pub initial: usize,
}

/// Compact per-run record kept by batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: u64,
    pub final_size: usize,
    pub severity: f64,
    pub initial: usize,
}

struct Rates {
    bh: f64,
    bw: f64,
    bg: f64,
}

impl Rates {
    fn of(params: &ModelParams) -> Self {
        Rates {
            bh: params.beta_h_pair(),
            bw: params.beta_w_pair(),
            bg: params.beta_g(),
        }
    }
}

fn pick_initial<R: Rng + ?Sized>(pop: &Population, initial: InitialCase, rng: &mut R) -> usize {
    match initial {
        InitialCase::Fixed(i) => i,
        InitialCase::UniformRandom => rng.random_range(0..pop.n()),
    }
}

fn check_consistent(pop: &Population, params: &ModelParams) -> Result<()> {
    if pop.h() != params.h() || pop.d() != params.d() {
        return Err(Error::InvalidParam(format!(
            "population has h={}, d={} but params have h={}, d={}",
            pop.h(),
            pop.d(),
            params.h(),
            params.d()
        )));
    }
    Ok(())
}

/// Core BFS. `infector` doubles as the visited marker when `track` is set;
/// otherwise only `infected` is maintained.
fn explore<R: Rng + ?Sized>(
    pop: &Population,
    rates: &Rates,
    sampler: &PeriodSampler,
    rng: &mut R,
    initial: usize,
    infected: &mut [bool],
    mut infector: Option<&mut [u32]>,
    stack: &mut Vec<u32>,
) -> (usize, f64) {
    let n = pop.n();
    stack.clear();
    infected[initial] = true;
    stack.push(initial as u32);
    let mut size = 1usize;
    let mut severity = 0.0;
    while let Some(u) = stack.pop() {
        let u = u as usize;
        let period = sampler.sample(rng);
        severity += period;
        let p_h = 1.0 - (-rates.bh * period).exp();
        let p_w = 1.0 - (-rates.bw * period).exp();
        let p_hw = 1.0 - (-(rates.bh + rates.bw) * period).exp();
        let wp = pop.final_workplace(u);
        let hh = pop.household(u);
        let mut infect = |v: usize, infected: &mut [bool], stack: &mut Vec<u32>| {
            infected[v] = true;
            if let Some(inf) = infector.as_deref_mut() {
                inf[v] = u as u32;
            }
            stack.push(v as u32);
        };
        for v in pop.household_members(u) {
            if v == u || infected[v] {
                continue;
            }
            let p = if pop.final_workplace(v) == wp { p_hw } else { p_h };
            if rng.random::<f64>() < p {
                infect(v, infected, stack);
                size += 1;
            }
        }
        if p_w > 0.0 {
            for &v in pop.workplace_members(wp) {
                let v = v as usize;
                if v == u || infected[v] || pop.household(v) == hh {
                    continue;
                }
                if rng.random::<f64>() < p_w {
                    infect(v, infected, stack);
                    size += 1;
                }
            }
        }
        let k = poisson(rng, rates.bg * period);
        for _ in 0..k {
            let v = rng.random_range(0..n);
            if !infected[v] {
                infect(v, infected, stack);
                size += 1;
            }
        }
    }
    (size, severity)
}

pub fn simulate_final(
    pop: &Population,
    params: &ModelParams,
    seed: SeedSpec,
    initial: InitialCase,
) -> Result<Outcome> {
    check_consistent(pop, params)?;
    let mut rng = seed.rng();
    let init = pick_initial(pop, initial, &mut rng);
    if init >= pop.n() {
        return Err(Error::InvalidParam(format!("initial case {init} out of range")));
    }
    let mut infected = vec![false; pop.n()];
    let mut infector = vec![NO_INFECTOR; pop.n()];
    let mut stack = Vec::new();
    let (final_size, severity) = explore(
        pop,
        &Rates::of(params),
        &params.infectious_period().sampler(),
        &mut rng,
        init,
        &mut infected,
        Some(&mut infector),
        &mut stack,
    );
    Ok(Outcome {
        final_size,
        severity,
        infected,
        infector,
        initial: init,
    })
}

fn unit_uniform(key: u64, a: u64, b: u64) -> f64 {
    use crate::rng::mix64;
    let h = mix64(key ^ mix64(a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ mix64(b)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Variant of [`simulate_final`] where all randomness is attached to
/// individuals and directed pairs through `key`: the infectious period of `u`,
/// a uniform threshold for every local pair `(u, v)`, and a unit-rate stream
/// of global contact times for `u` that is read up to `beta_G * I_u`.
/// Runs sharing a key are coupled, so raising any rate can only enlarge the
/// infected set.
pub fn simulate_final_coupled(
    pop: &Population,
    params: &ModelParams,
    key: u64,
    initial: usize,
) -> Result<Outcome> {
    check_consistent(pop, params)?;
    let rates = Rates::of(params);
    let sampler = params.infectious_period().sampler();
    let n = pop.n();
    let mut infected = vec![false; n];
    let mut infector = vec![NO_INFECTOR; n];
    let mut stack = vec![initial as u32];
    infected[initial] = true;
    let mut size = 1;
    let mut severity = 0.0;
    while let Some(u) = stack.pop() {
        let u = u as usize;
        let mut own = SeedSpec::new(key, u as u64).rng();
        let period = sampler.sample(&mut own);
        severity += period;
        let wp = pop.final_workplace(u);
        let hh = pop.household(u);
        let mut targets: Vec<usize> = Vec::new();
        for v in pop.household_members(u) {
            if v == u {
                continue;
            }
            let rate = if pop.final_workplace(v) == wp {
                rates.bh + rates.bw
            } else {
                rates.bh
            };
            if unit_uniform(key, u as u64, v as u64) < 1.0 - (-rate * period).exp() {
                targets.push(v);
            }
        }
        for &v in pop.workplace_members(wp) {
            let v = v as usize;
            if v == u || pop.household(v) == hh {
                continue;
            }
            if unit_uniform(key, u as u64, v as u64) < 1.0 - (-rates.bw * period).exp() {
                targets.push(v);
            }
        }
        let horizon = rates.bg * period;
        let mut t = 0.0;
        loop {
            t += -(1.0 - own.random::<f64>()).ln();
            let v = own.random_range(0..n);
            if t > horizon {
                break;
            }
            targets.push(v);
        }
        for v in targets {
            if !infected[v] {
                infected[v] = true;
                infector[v] = u as u32;
                stack.push(v as u32);
                size += 1;
            }
        }
    }
    Ok(Outcome {
        final_size: size,
        severity,
        infected,
        infector,
        initial,
    })
}

/// Options for a batch of independent runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchOptions {
    pub initial: InitialCase,
    /// Draw a new population for every run (otherwise one shared network).
    pub fresh_network: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            initial: InitialCase::UniformRandom,
            fresh_network: true,
        }
    }
}

fn single_run(
    params: &ModelParams,
    n: usize,
    shared: Option<&Population>,
    seed: SeedSpec,
    run: u64,
    opts: &BatchOptions,
) -> Result<RunRecord> {
    let mut rng: SimRng = seed.with_stream(run).rng();
    let owned;
    let pop = match shared {
        Some(p) => p,
        None => {
            owned = Population::generate_with(params.h(), params.d(), n, params.theta(), &mut rng)?;
            &owned
        }
    };
    let init = pick_initial(pop, opts.initial, &mut rng);
    let mut infected = vec![false; n];
    let mut stack = Vec::new();
    let (final_size, severity) = explore(
        pop,
        &Rates::of(params),
        &params.infectious_period().sampler(),
        &mut rng,
        init,
        &mut infected,
        None,
        &mut stack,
    );
    Ok(RunRecord {
        run,
        final_size,
        severity,
        initial: init,
    })
}

fn shared_network(params: &ModelParams, seed: SeedSpec, opts: &BatchOptions) -> Result<Option<Population>> {
    if opts.fresh_network {
        return Ok(None);
    }
    Population::generate(params, seed.derive(tag("shared-network"))).map(Some)
}

/// Run `n_sims` independent epidemics; run `k` uses stream `k` of `seed`, so
/// the records are identical for any thread count.
pub fn run_batch(
    params: &ModelParams,
    n_sims: u64,
    seed: SeedSpec,
    opts: &BatchOptions,
) -> Result<Vec<RunRecord>> {
    let n = params.n().ok_or_else(|| Error::InvalidParam("population size n not set".into()))?;
    let shared = shared_network(params, seed, opts)?;
    (0..n_sims)
        .into_par_iter()
        .map(|k| single_run(params, n, shared.as_ref(), seed, k, opts))
        .collect()
}

/// Keep running (in stream order) until `target` runs with final size
/// `>= cutoff` have been seen; returns those runs and the number attempted.
pub fn run_until_major(
    params: &ModelParams,
    target: usize,
    cutoff: usize,
    seed: SeedSpec,
    opts: &BatchOptions,
    max_runs: u64,
) -> Result<(Vec<RunRecord>, u64)> {
    let n = params.n().ok_or_else(|| Error::InvalidParam("population size n not set".into()))?;
    let shared = shared_network(params, seed, opts)?;
    let mut majors = Vec::with_capacity(target);
    let mut next = 0u64;
    const BLOCK: u64 = 512;
    while majors.len() < target {
        if next >= max_runs {
            return Err(Error::NonConvergence {
                what: "major-outbreak sampling",
                iterations: next as usize,
                residual: (target - majors.len()) as f64,
            });
        }
        let end = (next + BLOCK).min(max_runs);
        let block: Vec<RunRecord> = (next..end)
            .into_par_iter()
            .map(|k| single_run(params, n, shared.as_ref(), seed, k, opts))
            .collect::<Result<_>>()?;
        for r in block {
            if r.final_size >= cutoff && majors.len() < target {
                majors.push(r);
                if majors.len() == target {
                    next = r.run + 1;
                    return Ok((majors, next));
                }
            }
        }
        next = end;
    }
    Ok((majors, next))
}

/// `ceil(ln n)`, the default minor/major cutoff.
pub fn default_cutoff(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n: usize,
    pub cutoff: usize,
    pub runs: usize,
    pub minor: usize,
    pub major: usize,
    pub rho_hat: f64,
    pub rho_ci: (f64, f64),
    /// Mean final fraction among major outbreaks; `None` if there were none.
    pub z_hat: Option<f64>,
    pub z_sd: Option<f64>,
    pub z_ci: Option<(f64, f64)>,
}

pub fn estimate_rho_z(final_sizes: &[usize], n: usize, cutoff: usize) -> Result<BatchSummary> {
    if cutoff < 1 {
        return Err(Error::InvalidParam("cutoff must be >= 1".into()));
    }
    if final_sizes.is_empty() {
        return Err(Error::InvalidParam("no runs to summarize".into()));
    }
    let runs = final_sizes.len();
    let fractions: Vec<f64> = final_sizes
        .iter()
        .filter(|&&z| z >= cutoff)
        .map(|&z| z as f64 / n as f64)
        .collect();
    let major = fractions.len();
    let rho_hat = major as f64 / runs as f64;
    let half = 1.96 * (rho_hat * (1.0 - rho_hat) / runs as f64).sqrt();
    let (z_hat, z_sd, z_ci) = if major == 0 {
        (None, None, None)
    } else {
        let (mean, sd) = crate::stats::mean_sd(&fractions);
        (Some(mean), Some(sd), Some(normal_ci(mean, sd, major)))
    };
    Ok(BatchSummary {
        n,
        cutoff,
        runs,
        minor: runs - major,
        major,
        rho_hat,
        rho_ci: (rho_hat - half, rho_hat + half),
        z_hat,
        z_sd,
        z_ci,
    })
}

/// Draw one realization of the local contact graph (every infectious period
/// and every household/workplace edge) and return, for each individual, the
/// size of its local infectious clump (out-component) and local
/// susceptibility set (in-component). Global contacts play no part.
pub fn clump_susset_census(
    pop: &Population,
    params: &ModelParams,
    seed: SeedSpec,
) -> Result<(Vec<u32>, Vec<u32>)> {
    check_consistent(pop, params)?;
    let graph = local_graph(pop, params, &mut seed.rng());
    let n = pop.n();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (u, outs) in graph.iter().enumerate() {
        for &v in outs {
            rev[v as usize].push(u as u32);
        }
    }
    let clumps = reach_counts(&graph);
    let sussets = reach_counts(&rev);
    Ok((clumps, sussets))
}

/// Out-adjacency lists of one realization of the local contact graph.
pub fn local_graph<R: Rng + ?Sized>(pop: &Population, params: &ModelParams, rng: &mut R) -> Vec<Vec<u32>> {
    let rates = Rates::of(params);
    let sampler = params.infectious_period().sampler();
    (0..pop.n())
        .map(|u| {
            let period = sampler.sample(rng);
            let p_h = 1.0 - (-rates.bh * period).exp();
            let p_w = 1.0 - (-rates.bw * period).exp();
            let p_hw = 1.0 - (-(rates.bh + rates.bw) * period).exp();
            let wp = pop.final_workplace(u);
            let hh = pop.household(u);
            let mut outs = Vec::new();
            for v in pop.household_members(u) {
                if v == u {
                    continue;
                }
                let p = if pop.final_workplace(v) == wp { p_hw } else { p_h };
                if rng.random::<f64>() < p {
                    outs.push(v as u32);
                }
            }
            for &v in pop.workplace_members(wp) {
                if v as usize == u || pop.household(v as usize) == hh {
                    continue;
                }
                if rng.random::<f64>() < p_w {
                    outs.push(v);
                }
            }
            outs
        })
        .collect()
}

/// Above this many vertices the census falls back to one search per vertex
/// instead of holding a reachability bitset per strong component.
const BITSET_LIMIT: usize = 20_000;

/// Number of vertices reachable from each vertex (itself included).
fn reach_counts(adj: &[Vec<u32>]) -> Vec<u32> {
    if adj.len() > BITSET_LIMIT {
        return reach_counts_search(adj);
    }
    let n = adj.len();
    let mut graph: DiGraph<(), ()> = DiGraph::from_edges(
        adj.iter()
            .enumerate()
            .flat_map(|(u, outs)| outs.iter().map(move |&v| (u as u32, v))),
    );
    while graph.node_count() < n {
        graph.add_node(());
    }
    // reverse topological order: successor components come first
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut reach: Vec<FixedBitSet> = Vec::with_capacity(sccs.len());
    let mut counts = vec![0u32; n];
    for (c, members) in sccs.iter().enumerate() {
        let mut set = FixedBitSet::with_capacity(n);
        for v in members {
            set.insert(v.index());
            for &t in &adj[v.index()] {
                let tc = comp[t as usize];
                if tc != c {
                    set.union_with(&reach[tc]);
                }
            }
        }
        let k = set.count_ones(..) as u32;
        for v in members {
            counts[v.index()] = k;
        }
        reach.push(set);
    }
    counts
}

fn reach_counts_search(adj: &[Vec<u32>]) -> Vec<u32> {
    let n = adj.len();
    let mut mark = vec![u32::MAX; n];
    let mut stack = Vec::new();
    (0..n)
        .map(|s| {
            let stamp = s as u32;
            mark[s] = stamp;
            stack.clear();
            stack.push(s as u32);
            let mut count = 1u32;
            while let Some(u) = stack.pop() {
                for &v in &adj[u as usize] {
                    if mark[v as usize] != stamp {
                        mark[v as usize] = stamp;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
            count
        })
        .collect()
}

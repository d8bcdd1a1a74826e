//! Joint offspring PMFs `(Z_XR, Z_XH, Z_XW)` per seed type, mixed over the
//! random complex structure. Built either exactly (constant infectious
//! period) or by Monte Carlo with replicate batches for standard errors.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::exact::{exact_cost, final_state_pmf, state_counts};
use crate::complex::structure::{
    binomial_coeff, canonical_mover_vectors, mover_vector_weight, sample_mover_counts, ContactMatrix,
    SeedType, SeededComplexStructure,
};
use crate::complex::within::{coarse_counts, ComplexRunner, SeedConstraint};
use crate::error::{Error, Result};
use crate::params::{InfectiousPeriod, ModelParams};
use crate::rng::{tag, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableKind {
    Clump,
    Susset,
}

impl TableKind {
    pub fn label(self) -> &'static str {
        match self {
            TableKind::Clump => "clump",
            TableKind::Susset => "susset",
        }
    }
}

/// Dense joint PMF of `(z_r, z_h, z_w)`, each in `0..dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseTable {
    pub dim: usize,
    pub probs: Vec<f64>,
    /// Number of Monte Carlo samples behind the table; 0 when exact.
    pub samples: u64,
}

impl CoarseTable {
    pub fn zeros(dim: usize) -> Self {
        CoarseTable {
            dim,
            probs: vec![0.0; dim * dim * dim],
            samples: 0,
        }
    }

    pub fn from_counts(dim: usize, counts: &[u64]) -> Self {
        let n: u64 = counts.iter().sum();
        CoarseTable {
            dim,
            probs: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            samples: n,
        }
    }

    #[inline]
    pub fn index(&self, z: [usize; 3]) -> usize {
        (z[0] * self.dim + z[1]) * self.dim + z[2]
    }

    pub fn prob(&self, z: [usize; 3]) -> f64 {
        if z.iter().any(|&v| v >= self.dim) {
            return 0.0;
        }
        self.probs[self.index(z)]
    }

    /// Nonzero cells.
    pub fn cells(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        let d = self.dim;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| ([i / (d * d), (i / d) % d, i % d], p))
    }

    pub fn means(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for (z, p) in self.cells() {
            for k in 0..3 {
                m[k] += p * z[k] as f64;
            }
        }
        m
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Binomial standard error of one cell (0 for exact tables).
    pub fn stderr(&self, z: [usize; 3]) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let p = self.prob(z);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

/// One table per seed type; H and W are absent when `theta = 0`.
pub type TableTriple = [Option<CoarseTable>; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TableSource {
    Exact,
    MonteCarlo { n_mc: u64, seed: SeedSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSet {
    pub kind: TableKind,
    pub source: TableSource,
    pub tables: TableTriple,
    /// Independent replicate tables (Monte Carlo only), used to attach
    /// standard errors to anything computed from the tables.
    pub replicates: Vec<TableTriple>,
}

impl TableSet {
    pub fn get(&self, x: SeedType) -> Option<&CoarseTable> {
        self.tables[x.index()].as_ref()
    }

    pub fn require(&self, x: SeedType) -> Result<&CoarseTable> {
        self.get(x).ok_or(match x {
            SeedType::R => Error::MissingTable("R"),
            SeedType::H => Error::MissingTable("H"),
            SeedType::W => Error::MissingTable("W"),
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.source, TableSource::Exact)
    }

    pub fn n_mc(&self) -> u64 {
        match self.source {
            TableSource::Exact => 0,
            TableSource::MonteCarlo { n_mc, .. } => n_mc,
        }
    }

    /// Each replicate as a stand-alone table set.
    pub fn replicate_sets(&self) -> Vec<TableSet> {
        self.replicates
            .iter()
            .map(|t| TableSet {
                kind: self.kind,
                source: self.source.clone(),
                tables: t.clone(),
                replicates: Vec::new(),
            })
            .collect()
    }
}

fn seed_types(theta: f64) -> Vec<SeedType> {
    if theta > 0.0 {
        SeedType::ALL.to_vec()
    } else {
        vec![SeedType::R]
    }
}

fn table_dim(params: &ModelParams) -> usize {
    params.w() + 1
}

/// Sparse coarse PMF of one structure: `(cell index, prob)`.
type SparsePmf = Vec<(usize, f64)>;

/// Exact tables for constant infectious period. Structure PMFs do not depend
/// on `theta`, so a builder can be reused across a `theta` sweep.
#[derive(Debug, Default)]
pub struct ExactTableBuilder {
    cache: Mutex<HashMap<(SeedType, Vec<usize>), SparsePmf>>,
    rates_key: Mutex<Option<(usize, usize, u64, u64)>>,
}

/// Above this many triangular-system operations per table set, `auto` mode
/// switches to Monte Carlo.
pub const EXACT_COST_LIMIT: u64 = 20_000_000_000;

pub fn exact_total_cost(params: &ModelParams) -> u64 {
    let mut total = 0u64;
    for x in SeedType::ALL {
        for (m, _) in canonical_mover_vectors(params.h(), params.d()) {
            let s = SeededComplexStructure::from_movers(params.h(), params.d(), x, &m).expect("valid movers");
            total = total.saturating_add(exact_cost(&s.susceptibles()));
        }
    }
    total
}

impl ExactTableBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn structure_pmf(&self, s: &SeededComplexStructure, cm: &ContactMatrix, dim: usize) -> Result<SparsePmf> {
        let key = (s.seed, s.sizes.clone());
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let ng = s.n_groups();
        let ln_q: Vec<Vec<f64>> = (0..ng).map(|a| (0..ng).map(|b| -cm.rate(a, b)).collect()).collect();
        let sus = s.susceptibles();
        let mut initial = vec![0; ng];
        initial[s.seed_group()] = 1;
        let pmf = final_state_pmf(&sus, &initial, &ln_q)?;
        let mut coarse: HashMap<usize, f64> = HashMap::new();
        for (idx, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let k: Vec<u32> = state_counts(idx, &sus).into_iter().map(|v| v as u32).collect();
            let c = coarse_counts(s.d, &k);
            let cell = ((c[0] as usize * dim) + c[1] as usize) * dim + c[2] as usize;
            *coarse.entry(cell).or_insert(0.0) += p;
        }
        let mut sparse: SparsePmf = coarse.into_iter().collect();
        sparse.sort_by_key(|&(i, _)| i);
        self.cache.lock().unwrap().insert(key, sparse.clone());
        Ok(sparse)
    }

    /// Exact coarse tables. Clump and susceptibility tables coincide in law
    /// here, so `kind` is only a label.
    pub fn build(&self, params: &ModelParams, kind: TableKind) -> Result<TableSet> {
        if !params.infectious_period().is_constant() {
            return Err(Error::NonConstantPeriod);
        }
        let key = (
            params.h(),
            params.d(),
            params.beta_h().to_bits(),
            params.beta_w().to_bits(),
        );
        {
            let mut rk = self.rates_key.lock().unwrap();
            if rk.as_ref() != Some(&key) {
                self.cache.lock().unwrap().clear();
                *rk = Some(key);
            }
        }
        let cm = ContactMatrix::from_params(params);
        let dim = table_dim(params);
        let vectors = canonical_mover_vectors(params.h(), params.d());
        let mut tables: TableTriple = [None, None, None];
        for x in seed_types(params.theta()) {
            let parts: Vec<(f64, SparsePmf)> = vectors
                .par_iter()
                .map(|(m, mult)| {
                    let w = mover_vector_weight(params.h(), params.theta(), m, *mult);
                    if w == 0.0 {
                        return Ok((0.0, Vec::new()));
                    }
                    let s = SeededComplexStructure::from_movers(params.h(), params.d(), x, m)?;
                    Ok((w, self.structure_pmf(&s, &cm, dim)?))
                })
                .collect::<Result<_>>()?;
            let mut t = CoarseTable::zeros(dim);
            for (w, pmf) in parts {
                for (cell, p) in pmf {
                    t.probs[cell] += w * p;
                }
            }
            tables[x.index()] = Some(t);
        }
        Ok(TableSet {
            kind,
            source: TableSource::Exact,
            tables,
            replicates: Vec::new(),
        })
    }
}

/// Runners for every canonical structure of one seed type.
pub(crate) struct RunnerBank {
    runners: HashMap<Vec<usize>, ComplexRunner>,
    h: usize,
    d: usize,
    seed: SeedType,
}

impl RunnerBank {
    pub(crate) fn new(params: &ModelParams, seed: SeedType) -> Self {
        let runners = canonical_mover_vectors(params.h(), params.d())
            .into_iter()
            .map(|(m, _)| {
                let s = SeededComplexStructure::from_movers(params.h(), params.d(), seed, &m).expect("valid movers");
                (m, ComplexRunner::new(&s, params))
            })
            .collect();
        RunnerBank {
            runners,
            h: params.h(),
            d: params.d(),
            seed,
        }
    }

    /// Draw a structure (households after the first are exchangeable, so
    /// their counts are sorted before lookup).
    pub(crate) fn sample<R: rand::Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> &ComplexRunner {
        let mut m = sample_mover_counts(self.h, self.d, theta, rng);
        m[1..].sort_unstable();
        &self.runners[&m]
    }

    pub(crate) fn seed(&self) -> SeedType {
        self.seed
    }
}

/// Streams used for sample `k` of seed type `x`: one for the structure,
/// one for the epidemic. Structure streams do not depend on the rates or
/// on `theta`, which couples tables across a parameter sweep.
pub(crate) fn sample_streams(seed: SeedSpec, purpose: &str, x: SeedType, k: u64) -> (SeedSpec, SeedSpec) {
    let s = seed.derive(tag("structure")).derive(x.index() as u64).with_stream(k);
    let r = seed.derive(tag(purpose)).derive(x.index() as u64).with_stream(k);
    (s, r)
}

pub const DEFAULT_REPLICATES: usize = 10;

/// Monte Carlo coarse tables with `n_mc` samples per seed type, split into
/// `replicates` interleaved batches.
pub fn estimate_tables(
    params: &ModelParams,
    kind: TableKind,
    n_mc: u64,
    seed: SeedSpec,
    replicates: usize,
) -> Result<TableSet> {
    if n_mc == 0 {
        return Err(Error::InvalidParam("n_mc must be >= 1".into()));
    }
    let k_rep = replicates.max(1);
    let dim = table_dim(params);
    let cells = dim * dim * dim;
    let mut tables: TableTriple = [None, None, None];
    let mut reps: Vec<TableTriple> = vec![[None, None, None]; if k_rep > 1 { k_rep } else { 0 }];
    for x in seed_types(params.theta()) {
        let bank = RunnerBank::new(params, x);
        let purpose = kind.label();
        let counts = (0..n_mc)
            .into_par_iter()
            .fold(
                || vec![0u64; k_rep * cells],
                |mut acc, k| {
                    let (ss, rs) = sample_streams(seed, purpose, bank.seed(), k);
                    let runner = bank.sample(params.theta(), &mut ss.rng());
                    let mut rng = rs.rng();
                    let c = match kind {
                        TableKind::Clump => runner.run(&mut rng, SeedConstraint::None, false).expect("no constraint").coarse,
                        TableKind::Susset => runner.susset(&mut rng).coarse,
                    };
                    let cell = ((c[0] as usize * dim) + c[1] as usize) * dim + c[2] as usize;
                    acc[(k as usize % k_rep) * cells + cell] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; k_rep * cells],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let mut total = vec![0u64; cells];
        for r in 0..k_rep {
            let part = &counts[r * cells..(r + 1) * cells];
            total.iter_mut().zip(part).for_each(|(t, &c)| *t += c);
            if k_rep > 1 {
                reps[r][x.index()] = Some(CoarseTable::from_counts(dim, part));
            }
        }
        tables[x.index()] = Some(CoarseTable::from_counts(dim, &total));
    }
    Ok(TableSet {
        kind,
        source: TableSource::MonteCarlo { n_mc, seed },
        tables,
        replicates: reps,
    })
}

/// How coarse tables are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactMode {
    Auto,
    Force,
    Off,
}

impl std::str::FromStr for ExactMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ExactMode::Auto),
            "force" => Ok(ExactMode::Force),
            "off" => Ok(ExactMode::Off),
            _ => Err(Error::Config(format!("unknown exact mode `{s}`"))),
        }
    }
}

/// Whether `mode` resolves to the exact engine for these parameters.
pub fn use_exact(params: &ModelParams, mode: ExactMode) -> Result<bool> {
    match mode {
        ExactMode::Off => Ok(false),
        ExactMode::Force => {
            if !params.infectious_period().is_constant() {
                return Err(Error::NonConstantPeriod);
            }
            Ok(true)
        }
        ExactMode::Auto => Ok(params.infectious_period().is_constant() && exact_total_cost(params) <= EXACT_COST_LIMIT),
    }
}

/// `p_H(i)` for `i = 0..h-1` and `p_W(i)` for `i = 0..w-1`: the law of the
/// number a mover infects, from its own infectious period, among its
/// `h-1` housemates (resp. `w-1` colleagues) in its other complex.
pub fn fine_type_probs(params: &ModelParams) -> (Vec<f64>, Vec<f64>) {
    let ip = params.infectious_period();
    (
        mixed_binomial_pmf(ip, params.h() - 1, params.beta_h_pair()),
        mixed_binomial_pmf(ip, params.w() - 1, params.beta_w_pair()),
    )
}

/// `E[C(n,i) (1-e^{-aI})^i e^{-(n-i) a I}]` for `i = 0..=n`.
pub fn mixed_binomial_pmf(ip: InfectiousPeriod, n: usize, a: f64) -> Vec<f64> {
    if ip.is_constant() {
        let p = 1.0 - (-a).exp();
        return (0..=n)
            .map(|i| binomial_coeff(n, i) * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32))
            .collect();
    }
    (0..=n)
        .map(|i| {
            let mut s = 0.0;
            for u in 0..=i {
                let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * binomial_coeff(i, u) * ip.laplace(a * (n - i + u) as f64);
            }
            (binomial_coeff(n, i) * s).max(0.0)
        })
        .collect()
}

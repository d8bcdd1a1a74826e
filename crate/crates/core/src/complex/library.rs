//! Libraries of paired (severity, fine offspring vector) draws for seeded
//! complex epidemics, grouped by offspring vector.
//!
//! Fine type slots: `k-1` for (H,k), `k = 1..h-1`; `h-1+k-1` for (W,k),
//! `k = 1..w-1`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::structure::SeedType;
use crate::complex::tables::{sample_streams, RunnerBank};
use crate::complex::within::SeedConstraint;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::SeedSpec;
use crate::sampling::binomial;

/// Which seeded epidemic a library describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LibraryKey {
    /// Mover seed of type H or W infecting exactly `l` partners.
    Mover(SeedType, usize),
    /// Remainer seed with its own infectious period and contacts drawn;
    /// its severity includes the seed's own period.
    Remainer,
}

/// All draws sharing one offspring vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryGroup {
    /// Sparse offspring vector: `(slot, count)`.
    pub z: Vec<(u16, u16)>,
    pub severities: Vec<f64>,
    /// Replicate batch of each draw.
    pub reps: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineLibrary {
    pub key: LibraryKey,
    pub samples: u64,
    pub groups: Vec<LibraryGroup>,
}

impl FineLibrary {
    /// Sub-library holding only replicate `r`.
    pub fn replicate(&self, r: u8) -> FineLibrary {
        let mut samples = 0;
        let groups = self
            .groups
            .iter()
            .filter_map(|g| {
                let sev: Vec<f64> = g
                    .severities
                    .iter()
                    .zip(&g.reps)
                    .filter(|(_, &q)| q == r)
                    .map(|(&a, _)| a)
                    .collect();
                if sev.is_empty() {
                    return None;
                }
                samples += sev.len() as u64;
                Some(LibraryGroup {
                    z: g.z.clone(),
                    reps: vec![r; sev.len()],
                    severities: sev,
                })
            })
            .collect();
        FineLibrary {
            key: self.key,
            samples,
            groups,
        }
    }

    /// Mean count per fine slot.
    pub fn mean_offspring(&self, n_slots: usize) -> Vec<f64> {
        let mut m = vec![0.0; n_slots];
        for g in &self.groups {
            for &(slot, c) in &g.z {
                m[slot as usize] += c as f64 * g.severities.len() as f64;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.samples as f64);
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibrarySet {
    pub h: usize,
    pub w: usize,
    /// Libraries for (H,1..h-1); empty when `theta = 0`.
    pub movers_h: Vec<FineLibrary>,
    /// Libraries for (W,1..w-1); empty when `theta = 0`.
    pub movers_w: Vec<FineLibrary>,
    /// Absent when `theta = 1`.
    pub remainer: Option<FineLibrary>,
    pub per_library: u64,
    pub replicates: usize,
    pub unprimed_seed_rates: bool,
}

impl LibrarySet {
    pub fn n_slots(&self) -> usize {
        self.h - 1 + self.w - 1
    }

    /// Library for slot index (see module docs).
    pub fn mover(&self, slot: usize) -> Option<&FineLibrary> {
        if slot < self.h - 1 {
            self.movers_h.get(slot)
        } else {
            self.movers_w.get(slot - (self.h - 1))
        }
    }

    pub fn replicate(&self, r: u8) -> LibrarySet {
        LibrarySet {
            h: self.h,
            w: self.w,
            movers_h: self.movers_h.iter().map(|l| l.replicate(r)).collect(),
            movers_w: self.movers_w.iter().map(|l| l.replicate(r)).collect(),
            remainer: self.remainer.as_ref().map(|l| l.replicate(r)),
            per_library: self.per_library / self.replicates as u64,
            replicates: 1,
            unprimed_seed_rates: self.unprimed_seed_rates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LibraryOptions {
    pub per_library: u64,
    pub replicates: usize,
    /// Draw the initial case's contact counts with `beta_H`, `beta_W` in
    /// place of the per-pair rates.
    pub unprimed_seed_rates: bool,
}

impl Default for LibraryOptions {
    fn default() -> Self {
        LibraryOptions {
            per_library: 100_000,
            replicates: 8,
            unprimed_seed_rates: false,
        }
    }
}

/// Contact-probability rates used for the initial case of a clump.
pub fn seed_rates(params: &ModelParams, unprimed: bool) -> (f64, f64) {
    if unprimed {
        (params.beta_h(), params.beta_w())
    } else {
        (params.beta_h_pair(), params.beta_w_pair())
    }
}

fn group_draws(key: LibraryKey, draws: Vec<(Vec<u16>, f64)>, k_rep: usize) -> FineLibrary {
    let samples = draws.len() as u64;
    let mut map: BTreeMap<Vec<(u16, u16)>, LibraryGroup> = BTreeMap::new();
    for (k, (fine, a)) in draws.into_iter().enumerate() {
        let z: Vec<(u16, u16)> = fine
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s as u16, c))
            .collect();
        let g = map.entry(z.clone()).or_insert_with(|| LibraryGroup {
            z,
            severities: Vec::new(),
            reps: Vec::new(),
        });
        g.severities.push(a);
        g.reps.push((k % k_rep) as u8);
    }
    FineLibrary {
        key,
        samples,
        groups: map.into_values().collect(),
    }
}

pub fn build_library(params: &ModelParams, key: LibraryKey, seed: SeedSpec, opts: &LibraryOptions) -> Result<FineLibrary> {
    let n = opts.per_library;
    let k_rep = opts.replicates.clamp(1, 255);
    let theta = params.theta();
    let draws: Vec<(Vec<u16>, f64)> = match key {
        LibraryKey::Mover(x, l) => {
            if x == SeedType::R {
                return Err(Error::InvalidParam("mover library needs an H or W seed".into()));
            }
            if theta == 0.0 {
                return Err(Error::NoMovers(x.label()));
            }
            let bank = RunnerBank::new(params, x);
            let purpose = format!("library-{}-{l}", x.label());
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let (ss, rs) = sample_streams(seed, &purpose, x, k);
                    let runner = bank.sample(theta, &mut ss.rng());
                    let out = runner.run(&mut rs.rng(), SeedConstraint::Exactly(l), true)?;
                    Ok((out.fine, out.severity))
                })
                .collect::<Result<_>>()?
        }
        LibraryKey::Remainer => {
            let bank = RunnerBank::new(params, SeedType::R);
            let sampler = params.infectious_period().sampler();
            let (rh, rw) = seed_rates(params, opts.unprimed_seed_rates);
            let (h, w) = (params.h(), params.w());
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let (ss, rs) = sample_streams(seed, "library-R", SeedType::R, k);
                    let runner = bank.sample(theta, &mut ss.rng());
                    let mut rng = rs.rng();
                    let period = sampler.sample(&mut rng);
                    let house = binomial(&mut rng, h - 1, 1.0 - (-rh * period).exp());
                    let work = binomial(&mut rng, w - 1, 1.0 - (-rw * period).exp());
                    let out = runner.run(&mut rng, SeedConstraint::HouseWork { house, work }, true)?;
                    Ok((out.fine, period + out.severity))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(group_draws(key, draws, k_rep))
}

pub fn build_library_set(params: &ModelParams, seed: SeedSpec, opts: &LibraryOptions) -> Result<LibrarySet> {
    let (h, w) = (params.h(), params.w());
    let theta = params.theta();
    let mut movers_h = Vec::new();
    let mut movers_w = Vec::new();
    if theta > 0.0 {
        for l in 1..h {
            movers_h.push(build_library(params, LibraryKey::Mover(SeedType::H, l), seed, opts)?);
        }
        for l in 1..w {
            movers_w.push(build_library(params, LibraryKey::Mover(SeedType::W, l), seed, opts)?);
        }
    }
    let remainer = if theta < 1.0 {
        Some(build_library(params, LibraryKey::Remainer, seed, opts)?)
    } else {
        None
    };
    Ok(LibrarySet {
        h,
        w,
        movers_h,
        movers_w,
        remainer,
        per_library: opts.per_library,
        replicates: opts.replicates.clamp(1, 255),
        unprimed_seed_rates: opts.unprimed_seed_rates,
    })
}

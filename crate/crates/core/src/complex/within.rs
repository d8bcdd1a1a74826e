//! Monte Carlo epidemics inside one complex: forward (infectious clump of the
//! seed) and backward (susceptibility set of the seed).

use rand::Rng;

use crate::complex::structure::{ContactMatrix, SeedType, SeededComplexStructure};
use crate::error::{Error, Result};
use crate::params::{ModelParams, PeriodSampler};
use crate::sampling::{binomial, choose_in_place};

/// How the seed's own contacts inside the complex are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedConstraint {
    /// The seed draws its infectious period and contacts like anyone else.
    None,
    /// H or W seed infecting exactly this many of its household (H) or
    /// workplace (W) partners.
    Exactly(usize),
    /// R seed contacting `house` housemates and `work` colleagues, drawn
    /// independently (the two sets may overlap on remaining housemates).
    HouseWork { house: usize, work: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithinOutcome {
    /// Infected count per group, seed excluded.
    pub per_group: Vec<u32>,
    /// Sum of infectious periods of the infected, seed excluded.
    pub severity: f64,
    /// `(Z_XR, Z_XH, Z_XW)`.
    pub coarse: [u32; 3],
    /// Fine offspring counts: slot `k-1` holds type (H,k), slot `h-1+k-1`
    /// type (W,k). Empty unless requested.
    pub fine: Vec<u16>,
    /// Seed's infectious period, if the seed drew one.
    pub seed_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SussetOutcome {
    pub per_group: Vec<u32>,
    pub coarse: [u32; 3],
    /// Number of infectious periods drawn. The seed never draws one.
    pub period_draws: usize,
}

/// Coarse offspring census from per-group counts (seed already excluded).
pub fn coarse_counts(d: usize, per_group: &[u32]) -> [u32; 3] {
    let mut c = [0u32; 3];
    for (g, &k) in per_group.iter().enumerate() {
        if g == 2 * d {
            c[1] += k;
        } else if g % 2 == 0 {
            c[0] += k;
        } else {
            c[2] += k;
        }
    }
    c
}

/// A complex with its members laid out and pairwise rates precomputed.
#[derive(Debug, Clone)]
pub struct ComplexRunner {
    structure: SeededComplexStructure,
    groups: Vec<usize>,
    rates: Vec<f64>,
    sampler: PeriodSampler,
    h: usize,
    w: usize,
    beta_h_pair: f64,
    beta_w_pair: f64,
    house_partners: Vec<usize>,
    work_partners: Vec<usize>,
}

impl ComplexRunner {
    pub fn new(structure: &SeededComplexStructure, params: &ModelParams) -> Self {
        let cm = ContactMatrix::from_params(params);
        let groups = structure.member_groups();
        let m = groups.len();
        let mut rates = vec![0.0; m * m];
        for u in 0..m {
            for v in 0..m {
                if u != v {
                    rates[u * m + v] = cm.rate(groups[u], groups[v]);
                }
            }
        }
        let g0 = groups[0];
        let house_partners = (1..m).filter(|&v| cm.household_link(g0, groups[v])).collect();
        let work_partners = (1..m).filter(|&v| cm.workplace_link(g0, groups[v])).collect();
        ComplexRunner {
            structure: structure.clone(),
            groups,
            rates,
            sampler: params.infectious_period().sampler(),
            h: params.h(),
            w: params.w(),
            beta_h_pair: params.beta_h_pair(),
            beta_w_pair: params.beta_w_pair(),
            house_partners,
            work_partners,
        }
    }

    pub fn structure(&self) -> &SeededComplexStructure {
        &self.structure
    }

    pub fn size(&self) -> usize {
        self.groups.len()
    }

    fn fine_slot<R: Rng + ?Sized>(&self, g: usize, period: f64, rng: &mut R) -> Option<usize> {
        let d = self.structure.d;
        if g == 2 * d {
            let k = binomial(rng, self.h - 1, 1.0 - (-self.beta_h_pair * period).exp());
            (k > 0).then(|| k - 1)
        } else if g % 2 == 1 {
            let k = binomial(rng, self.w - 1, 1.0 - (-self.beta_w_pair * period).exp());
            (k > 0).then(|| self.h - 1 + k - 1)
        } else {
            None
        }
    }

    /// Forward epidemic from the seed.
    pub fn run<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        constraint: SeedConstraint,
        want_fine: bool,
    ) -> Result<WithinOutcome> {
        let m = self.groups.len();
        let mut infected = vec![false; m];
        infected[0] = true;
        let mut stack: Vec<usize> = Vec::with_capacity(m);
        let mut seed_period = None;
        match constraint {
            SeedConstraint::None => {
                let period = self.sampler.sample(rng);
                seed_period = Some(period);
                for v in 1..m {
                    let r = self.rates[v];
                    if r > 0.0 && rng.random::<f64>() < 1.0 - (-r * period).exp() {
                        infected[v] = true;
                        stack.push(v);
                    }
                }
            }
            SeedConstraint::Exactly(l) => {
                let pool = match self.structure.seed {
                    SeedType::H => &self.house_partners,
                    SeedType::W => &self.work_partners,
                    SeedType::R => {
                        return Err(Error::InvalidParam("exactly-l constraint needs an H or W seed".into()))
                    }
                };
                if l > pool.len() {
                    return Err(Error::Constraint {
                        requested: l,
                        available: pool.len(),
                    });
                }
                let mut pool = pool.clone();
                for &v in choose_in_place(rng, &mut pool, l) {
                    infected[v] = true;
                    stack.push(v);
                }
            }
            SeedConstraint::HouseWork { house, work } => {
                if self.structure.seed != SeedType::R {
                    return Err(Error::InvalidParam("(j,l) constraint needs an R seed".into()));
                }
                for (pool, k) in [(&self.house_partners, house), (&self.work_partners, work)] {
                    if k > pool.len() {
                        return Err(Error::Constraint {
                            requested: k,
                            available: pool.len(),
                        });
                    }
                    let mut pool = pool.clone();
                    for &v in choose_in_place(rng, &mut pool, k) {
                        if !infected[v] {
                            infected[v] = true;
                            stack.push(v);
                        }
                    }
                }
            }
        }
        let mut severity = 0.0;
        let mut fine = if want_fine {
            vec![0u16; self.h - 1 + self.w - 1]
        } else {
            Vec::new()
        };
        while let Some(u) = stack.pop() {
            let period = self.sampler.sample(rng);
            severity += period;
            let row = &self.rates[u * m..(u + 1) * m];
            for v in 1..m {
                if infected[v] || row[v] == 0.0 {
                    continue;
                }
                if rng.random::<f64>() < 1.0 - (-row[v] * period).exp() {
                    infected[v] = true;
                    stack.push(v);
                }
            }
            if want_fine {
                if let Some(slot) = self.fine_slot(self.groups[u], period, rng) {
                    fine[slot] += 1;
                }
            }
        }
        let mut per_group = vec![0u32; self.structure.n_groups()];
        for v in 1..m {
            if infected[v] {
                per_group[self.groups[v]] += 1;
            }
        }
        Ok(WithinOutcome {
            coarse: coarse_counts(self.structure.d, &per_group),
            per_group,
            severity,
            fine,
            seed_period,
        })
    }

    /// Backward search: who, by local contacts inside this complex, would
    /// eventually infect the seed. Each member's infectious period is drawn
    /// the first time one of its out-edges is examined.
    pub fn susset<R: Rng + ?Sized>(&self, rng: &mut R) -> SussetOutcome {
        let m = self.groups.len();
        let mut in_set = vec![false; m];
        let mut period: Vec<f64> = vec![f64::NAN; m];
        in_set[0] = true;
        let mut stack = vec![0usize];
        let mut draws = 0;
        while let Some(v) = stack.pop() {
            for u in 1..m {
                if in_set[u] {
                    continue;
                }
                let r = self.rates[u * m + v];
                if r == 0.0 {
                    continue;
                }
                if period[u].is_nan() {
                    period[u] = self.sampler.sample(rng);
                    draws += 1;
                }
                if rng.random::<f64>() < 1.0 - (-r * period[u]).exp() {
                    in_set[u] = true;
                    stack.push(u);
                }
            }
        }
        let mut per_group = vec![0u32; self.structure.n_groups()];
        for u in 1..m {
            if in_set[u] {
                per_group[self.groups[u]] += 1;
            }
        }
        SussetOutcome {
            coarse: coarse_counts(self.structure.d, &per_group),
            per_group,
            period_draws: draws,
        }
    }
}

pub fn run_within_complex<R: Rng + ?Sized>(
    structure: &SeededComplexStructure,
    params: &ModelParams,
    rng: &mut R,
    constraint: SeedConstraint,
) -> Result<WithinOutcome> {
    ComplexRunner::new(structure, params).run(rng, constraint, true)
}

pub fn susset_within_complex<R: Rng + ?Sized>(
    structure: &SeededComplexStructure,
    params: &ModelParams,
    rng: &mut R,
) -> SussetOutcome {
    ComplexRunner::new(structure, params).susset(rng)
}

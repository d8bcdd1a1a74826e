//! Random population structure: households nested in workplaces, movers
//! reassigned uniformly onto vacated workplace spots, and the complex
//! decomposition built on top of it.
//!
//! Individual `i` lives in household `i / h`; household `k` originally
//! belongs to workplace `k / d`. Only the final workplace of movers is random.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::SeedSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    h: usize,
    d: usize,
    n: usize,
    mover: Vec<bool>,
    final_workplace: Vec<u32>,
    /// Members of final workplace `k` are `wp_members[k*w .. (k+1)*w]`.
    wp_members: Vec<u32>,
}

impl Population {
    pub fn generate(params: &ModelParams, seed: SeedSpec) -> Result<Self> {
        let n = params.n().ok_or_else(|| Error::InvalidParam("population size n not set".into()))?;
        Self::generate_with(params.h(), params.d(), n, params.theta(), &mut seed.rng())
    }

    pub fn generate_with<R: Rng + ?Sized>(
        h: usize,
        d: usize,
        n: usize,
        theta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let w = h * d;
        if n == 0 || n % w != 0 {
            return Err(Error::PopulationSize { n, w });
        }
        let mover: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < theta).collect();
        let movers: Vec<u32> = (0..n as u32).filter(|&i| mover[i as usize]).collect();
        // Each mover vacates exactly one spot in its original workplace; a
        // uniformly shuffled copy of the mover list fills those spots.
        let mut filling = movers.clone();
        filling.shuffle(rng);
        let mut final_workplace: Vec<u32> = (0..n).map(|i| (i / w) as u32).collect();
        for (spot_owner, &m) in movers.iter().zip(&filling) {
            final_workplace[m as usize] = (*spot_owner as usize / w) as u32;
        }
        Ok(Self::assemble(h, d, mover, final_workplace))
    }

    /// Build a population from explicit mover flags and final workplaces,
    /// checking every structural invariant.
    pub fn from_parts(h: usize, d: usize, mover: Vec<bool>, final_workplace: Vec<u32>) -> Result<Self> {
        let n = mover.len();
        let w = h * d;
        if h < 2 || d < 1 {
            return Err(Error::InvalidPopulation(format!("bad sizes h={h}, d={d}")));
        }
        if n == 0 || n % w != 0 {
            return Err(Error::PopulationSize { n, w });
        }
        if final_workplace.len() != n {
            return Err(Error::InvalidPopulation("length mismatch".into()));
        }
        let m = n / w;
        let mut counts = vec![0usize; m];
        for i in 0..n {
            let fw = final_workplace[i] as usize;
            if fw >= m {
                return Err(Error::InvalidPopulation(format!("individual {i}: workplace {fw} out of range")));
            }
            if !mover[i] && fw != i / w {
                return Err(Error::InvalidPopulation(format!(
                    "remainer {i} changed workplace"
                )));
            }
            counts[fw] += 1;
        }
        if let Some(k) = counts.iter().position(|&c| c != w) {
            return Err(Error::InvalidPopulation(format!(
                "workplace {k} has {} members, expected {w}",
                counts[k]
            )));
        }
        Ok(Self::assemble(h, d, mover, final_workplace))
    }

    fn assemble(h: usize, d: usize, mover: Vec<bool>, final_workplace: Vec<u32>) -> Self {
        let n = mover.len();
        let w = h * d;
        let m = n / w;
        let mut fill = vec![0usize; m];
        let mut wp_members = vec![0u32; n];
        for (i, &fw) in final_workplace.iter().enumerate() {
            let k = fw as usize;
            wp_members[k * w + fill[k]] = i as u32;
            fill[k] += 1;
        }
        Population {
            h,
            d,
            n,
            mover,
            final_workplace,
            wp_members,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> usize {
        self.h
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn w(&self) -> usize {
        self.h * self.d
    }
    pub fn n_workplaces(&self) -> usize {
        self.n / self.w()
    }

    #[inline]
    pub fn household(&self, i: usize) -> usize {
        i / self.h
    }
    #[inline]
    pub fn orig_workplace(&self, i: usize) -> usize {
        i / self.w()
    }
    #[inline]
    pub fn final_workplace(&self, i: usize) -> usize {
        self.final_workplace[i] as usize
    }
    #[inline]
    pub fn is_mover(&self, i: usize) -> bool {
        self.mover[i]
    }

    pub fn mover_count(&self) -> usize {
        self.mover.iter().filter(|&&m| m).count()
    }

    /// Ids of the household containing `i` (including `i`).
    #[inline]
    pub fn household_members(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.household(i) * self.h;
        start..start + self.h
    }

    #[inline]
    pub fn workplace_members(&self, wp: usize) -> &[u32] {
        let w = self.w();
        &self.wp_members[wp * w..(wp + 1) * w]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#schema=v1")?;
        writeln!(out, "individual,household,orig_workplace,final_workplace,mover")?;
        for i in 0..self.n {
            writeln!(
                out,
                "{},{},{},{},{}",
                i,
                self.household(i),
                self.orig_workplace(i),
                self.final_workplace(i),
                self.mover[i] as u8
            )?;
        }
        Ok(())
    }

    /// Load a population written by [`Population::write_csv`]; `h` and `d`
    /// are inferred from the household/workplace columns and every invariant
    /// is re-checked.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows: Vec<[u64; 5]> = Vec::new();
        let mut saw_header = false;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "individual,household,orig_workplace,final_workplace,mover" {
                    return Err(Error::InvalidPopulation(format!("unexpected header `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let mut rec = [0u64; 5];
            let mut fields = line.split(',');
            for slot in rec.iter_mut() {
                let f = fields
                    .next()
                    .ok_or_else(|| Error::InvalidPopulation(format!("short row `{line}`")))?;
                *slot = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidPopulation(format!("bad field in `{line}`")))?;
            }
            rows.push(rec);
        }
        if rows.is_empty() {
            return Err(Error::InvalidPopulation("no rows".into()));
        }
        for (k, r) in rows.iter().enumerate() {
            if r[0] != k as u64 {
                return Err(Error::InvalidPopulation(format!("row {k} has individual id {}", r[0])));
            }
            if r[4] > 1 {
                return Err(Error::InvalidPopulation(format!("row {k}: mover must be 0 or 1")));
            }
        }
        let h = rows.iter().take_while(|r| r[1] == 0).count();
        let w = rows.iter().take_while(|r| r[2] == 0).count();
        if h < 2 || w % h != 0 {
            return Err(Error::InvalidPopulation(format!("cannot infer sizes (h={h}, w={w})")));
        }
        let d = w / h;
        for (i, r) in rows.iter().enumerate() {
            if r[1] as usize != i / h || r[2] as usize != i / w {
                return Err(Error::InvalidPopulation(format!(
                    "row {i}: household/workplace ids do not follow the nested layout"
                )));
            }
        }
        let mover = rows.iter().map(|r| r[4] == 1).collect();
        let fw = rows.iter().map(|r| r[3] as u32).collect();
        Self::from_parts(h, d, mover, fw)
    }
}

/// One complex: the households originally attached to a workplace, split into
/// remainers and movers-out, plus the movers who came into the workplace.
///
/// `groups[2j]` holds the remainers of household `j` (counted from the
/// workplace's first household), `groups[2j+1]` its movers-out, and
/// `groups[2d]` the movers-in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub workplace: usize,
    pub groups: Vec<Vec<u32>>,
}

impl Complex {
    pub fn d(&self) -> usize {
        (self.groups.len() - 1) / 2
    }

    pub fn remainers(&self, j: usize) -> &[u32] {
        &self.groups[2 * j]
    }

    pub fn movers_out(&self, j: usize) -> &[u32] {
        &self.groups[2 * j + 1]
    }

    pub fn movers_in(&self) -> &[u32] {
        &self.groups[2 * self.d()]
    }

    /// Members of the realized workplace (remainers plus movers-in).
    pub fn workplace_size(&self) -> usize {
        (0..self.d()).map(|j| self.remainers(j).len()).sum::<usize>() + self.movers_in().len()
    }
}

pub fn extract_complexes(pop: &Population) -> Vec<Complex> {
    let (h, d) = (pop.h(), pop.d());
    let mut complexes: Vec<Complex> = (0..pop.n_workplaces())
        .map(|wp| Complex {
            workplace: wp,
            groups: vec![Vec::new(); 2 * d + 1],
        })
        .collect();
    for i in 0..pop.n() {
        let hh = pop.household(i);
        let home = hh / d;
        let j = hh % d;
        let c = &mut complexes[home];
        if pop.is_mover(i) {
            c.groups[2 * j + 1].push(i as u32);
            complexes[pop.final_workplace(i)].groups[2 * d].push(i as u32);
        } else {
            c.groups[2 * j].push(i as u32);
        }
    }
    debug_assert!(complexes.iter().all(|c| {
        (0..d).all(|j| c.remainers(j).len() + c.movers_out(j).len() == h)
    }));
    complexes
}

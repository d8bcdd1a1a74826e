//! Offspring PGFs and the progeny fixed points built on them.

use serde::{Deserialize, Serialize};

use crate::complex::tables::{CoarseTable, TableSet};
use crate::complex::SeedType;
use crate::error::{Error, Result};

pub const PAIR_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 100_000;

/// `g(s1,s2,s3) = E[s1^Z_R s2^Z_H s3^Z_W]` over a sparse joint PMF.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringPgf {
    cells: Vec<([i32; 3], f64)>,
    means: [f64; 3],
}

impl OffspringPgf {
    pub fn from_table(t: &CoarseTable) -> Self {
        let cells = t
            .cells()
            .map(|(z, p)| ([z[0] as i32, z[1] as i32, z[2] as i32], p))
            .collect();
        OffspringPgf { cells, means: t.means() }
    }

    /// The PGF of no offspring at all.
    pub fn none() -> Self {
        OffspringPgf {
            cells: vec![([0, 0, 0], 1.0)],
            means: [0.0; 3],
        }
    }

    pub fn eval(&self, s1: f64, s2: f64, s3: f64) -> f64 {
        self.cells
            .iter()
            .map(|&(z, p)| p * s1.powi(z[0]) * s2.powi(z[1]) * s3.powi(z[2]))
            .sum()
    }

    pub fn means(&self) -> [f64; 3] {
        self.means
    }
}

/// PGFs for the three seed types; missing H/W tables (no movers) behave
/// as "no offspring".
#[derive(Debug, Clone, PartialEq)]
pub struct PgfTriple {
    pub r: OffspringPgf,
    pub h: OffspringPgf,
    pub w: OffspringPgf,
    pub theta: f64,
}

impl PgfTriple {
    pub fn from_tables(tables: &TableSet, theta: f64) -> Result<Self> {
        let get = |x| tables.get(x).map(OffspringPgf::from_table).unwrap_or_else(OffspringPgf::none);
        if theta < 1.0 && tables.get(SeedType::R).is_none() {
            return Err(Error::MissingTable("R"));
        }
        if theta > 0.0 && (tables.get(SeedType::H).is_none() || tables.get(SeedType::W).is_none()) {
            return Err(Error::MissingTable("H/W"));
        }
        Ok(PgfTriple {
            r: get(SeedType::R),
            h: get(SeedType::H),
            w: get(SeedType::W),
            theta,
        })
    }
}

/// Update order of a coordinatewise monotone iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sweep {
    #[default]
    Jacobi,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSolution {
    pub x: f64,
    pub y: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Smallest solution of `x = s g_H(s,x,y)`, `y = s g_W(s,x,y)` by monotone
/// iteration from `(0,0)`. On non-convergence the last iterate is returned
/// with `converged = false`.
pub fn solve_progeny_pair(gh: &OffspringPgf, gw: &OffspringPgf, s: f64, sweep: Sweep) -> PairSolution {
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let mut change = f64::INFINITY;
    for it in 1..=MAX_ITER {
        let nx = s * gh.eval(s, x, y);
        let ny = match sweep {
            Sweep::Jacobi => s * gw.eval(s, x, y),
            Sweep::GaussSeidel => s * gw.eval(s, nx, y),
        };
        change = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if change < PAIR_TOL {
            return PairSolution {
                x,
                y,
                iterations: it,
                residual: change,
                converged: true,
            };
        }
    }
    PairSolution {
        x,
        y,
        iterations: MAX_ITER,
        residual: change,
        converged: false,
    }
}

/// `f(s) = (1-theta) s g_R(s,x,y) + theta g_H(s,x,y) y` with `(x,y)` the
/// progeny pair at `s`.
pub fn progeny_pgf(pgfs: &PgfTriple, s: f64, sweep: Sweep) -> (f64, PairSolution) {
    let pair = solve_progeny_pair(&pgfs.h, &pgfs.w, s, sweep);
    let theta = pgfs.theta;
    let mut f = 0.0;
    if theta < 1.0 {
        f += (1.0 - theta) * s * pgfs.r.eval(s, pair.x, pair.y);
    }
    if theta > 0.0 {
        f += theta * pgfs.h.eval(s, pair.x, pair.y) * pair.y;
    }
    (f, pair)
}

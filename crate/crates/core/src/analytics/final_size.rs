//! Limiting final size from `1 - z = f_S(exp(-beta_G z))`, and a generic
//! leftmost-root search used for extinction probabilities.

use serde::{Deserialize, Serialize};

use crate::analytics::pgf::{progeny_pgf, PgfTriple, Sweep};
use crate::error::{Error, Result};

pub const Z_EPS: f64 = 1e-9;
pub const Z_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZSolution {
    pub z: f64,
    /// `|1 - z - f_S(exp(-beta_G z))|` at the returned root.
    pub residual: f64,
    pub bisections: usize,
    /// Largest pair-iteration count seen while evaluating `f_S`.
    pub max_pair_iterations: usize,
}

/// Solve for `z`; returns 0 when `r_star <= 1`.
pub fn solve_final_size_z(beta_g: f64, r_star: f64, pgfs: &PgfTriple, sweep: Sweep) -> Result<ZSolution> {
    if r_star <= 1.0 {
        return Ok(ZSolution {
            z: 0.0,
            residual: 0.0,
            bisections: 0,
            max_pair_iterations: 0,
        });
    }
    let mut max_it = 0;
    let mut f = |z: f64| -> Result<f64> {
        let (v, pair) = progeny_pgf(pgfs, (-beta_g * z).exp(), sweep);
        max_it = max_it.max(pair.iterations);
        if !pair.converged {
            return Err(Error::NonConvergence {
                what: "progeny pair",
                iterations: pair.iterations,
                residual: pair.residual,
            });
        }
        Ok(1.0 - z - v)
    };
    let (mut lo, mut hi) = (Z_EPS, 1.0);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracketing(format!(
            "F({lo:e}) = {f_lo:e}, F(1) = {f_hi:e}; tables inconsistent with R* = {r_star}"
        )));
    }
    let mut n = 0;
    while hi - lo > Z_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        n += 1;
    }
    let z = 0.5 * (lo + hi);
    let residual = f(z)?.abs();
    Ok(ZSolution {
        z,
        residual,
        bisections: n,
        max_pair_iterations: max_it,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub root: f64,
    pub evaluations: usize,
}

/// Smallest root in `[0,1]` of `phi(s) = s`, where `phi` is increasing with
/// `phi(0) > 0` and `phi(1) <= 1`. Scans a grid for the first sign change
/// of `phi(s) - s`, refines geometrically towards 1 when needed, then
/// bisects to `tol`. Returns 1 if there is no root short of 1.
pub fn leftmost_fixed_point<F>(mut phi: F, tol: f64) -> Result<RootResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    const GRID: usize = 64;
    const NEG: f64 = -1e-9;
    let mut evals = 0;
    let mut g = |s: f64| -> Result<f64> {
        evals += 1;
        Ok(phi(s)? - s)
    };
    let mut lo = 0.0;
    if g(lo)? <= 0.0 {
        return Ok(RootResult {
            root: 0.0,
            evaluations: evals,
        });
    }
    let mut hi = None;
    for i in 1..GRID {
        let s = i as f64 / GRID as f64;
        if g(s)? <= 0.0 {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    if hi.is_none() {
        if g(1.0)? < NEG {
            hi = Some(1.0);
        } else {
            // phi(1) = 1: look for a dip just below 1
            for k in 1..=30 {
                let s = 1.0 - (1.0 - lo) * 0.5f64.powi(k);
                let v = g(s)?;
                if v < 0.0 {
                    hi = Some(s);
                    break;
                }
                lo = s;
            }
        }
    }
    let Some(mut hi) = hi else {
        return Ok(RootResult {
            root: 1.0,
            evaluations: evals,
        });
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RootResult {
        root: 0.5 * (lo + hi),
        evaluations: evals,
    })
}

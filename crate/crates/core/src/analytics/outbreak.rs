//! Major-outbreak probability.
//!
//! Route A (constant infectious period): the clump severity equals the clump
//! size, so the global-contact offspring PGF is `f_C(exp(-beta_G (1-s)))`.
//! Route B (any law): Laplace transforms of branch severities solve a fixed
//! point over the fine-typed libraries, and are assembled into `phi_A`.

use serde::{Deserialize, Serialize};

use crate::analytics::final_size::{leftmost_fixed_point, RootResult};
use crate::analytics::pgf::{progeny_pgf, PgfTriple, Sweep, MAX_ITER};
use crate::complex::library::{seed_rates, FineLibrary, LibrarySet};
use crate::complex::structure::binomial_coeff;
use crate::error::{Error, Result};
use crate::params::ModelParams;

pub const XI_TOL: f64 = 1e-12;
pub const LAPLACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub rho: f64,
    pub xi: f64,
    pub evaluations: usize,
}

/// Route A with clump tables.
pub fn rho_route_a(beta_g: f64, clump: &PgfTriple, sweep: Sweep) -> Result<RhoResult> {
    let RootResult { root, evaluations } = leftmost_fixed_point(
        |s| {
            let (v, pair) = progeny_pgf(clump, (-beta_g * (1.0 - s)).exp(), sweep);
            if !pair.converged {
                return Err(Error::NonConvergence {
                    what: "progeny pair",
                    iterations: pair.iterations,
                    residual: pair.residual,
                });
            }
            Ok(v)
        },
        XI_TOL,
    )?;
    Ok(RhoResult {
        rho: 1.0 - root,
        xi: root,
        evaluations,
    })
}

/// One library with its per-group transform weights at a fixed `nu`.
struct Weighted<'a> {
    lib: &'a FineLibrary,
    weights: Vec<f64>,
}

impl<'a> Weighted<'a> {
    fn new(lib: &'a FineLibrary, nu: f64) -> Self {
        let n = lib.samples as f64;
        let weights = lib
            .groups
            .iter()
            .map(|g| g.severities.iter().map(|&a| (-nu * a).exp()).sum::<f64>() / n)
            .collect();
        Weighted { lib, weights }
    }

    /// `E[exp(-nu A) prod_slot phi[slot]^Z_slot]`.
    fn eval(&self, phi: &[f64]) -> f64 {
        self.lib
            .groups
            .iter()
            .zip(&self.weights)
            .map(|(g, &t)| {
                if t == 0.0 {
                    return 0.0;
                }
                let mut v = t;
                for &(slot, c) in &g.z {
                    v *= phi[slot as usize].powi(c as i32);
                }
                v
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTransforms {
    /// `phi_hat` per fine slot.
    pub phi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Route B engine over one library set.
pub struct RouteB<'a> {
    params: &'a ModelParams,
    libs: &'a LibrarySet,
    sweep: Sweep,
}

impl<'a> RouteB<'a> {
    pub fn new(params: &'a ModelParams, libs: &'a LibrarySet, sweep: Sweep) -> Result<Self> {
        if libs.h != params.h() || libs.w != params.w() {
            return Err(Error::InvalidParam("library set does not match parameters".into()));
        }
        if params.theta() > 0.0 && (libs.movers_h.len() != libs.h - 1 || libs.movers_w.len() != libs.w - 1) {
            return Err(Error::MissingTable("mover libraries"));
        }
        if params.theta() < 1.0 && libs.remainer.is_none() {
            return Err(Error::MissingTable("remainer library"));
        }
        Ok(RouteB { params, libs, sweep })
    }

    /// Smallest solution of the branch-severity system at `nu`, by monotone
    /// iteration from zero.
    pub fn branch_transforms(&self, nu: f64) -> Result<BranchTransforms> {
        let n = self.libs.n_slots();
        let weighted: Vec<Weighted> = self
            .libs
            .movers_h
            .iter()
            .chain(&self.libs.movers_w)
            .map(|l| Weighted::new(l, nu))
            .collect();
        if weighted.is_empty() {
            return Ok(BranchTransforms {
                phi: vec![0.0; n],
                iterations: 0,
                residual: 0.0,
            });
        }
        let mut phi = vec![0.0; n];
        let mut next = vec![0.0; n];
        for it in 1..=MAX_ITER {
            let mut change: f64 = 0.0;
            match self.sweep {
                Sweep::Jacobi => {
                    for (slot, w) in weighted.iter().enumerate() {
                        next[slot] = w.eval(&phi);
                    }
                    for slot in 0..n {
                        change = change.max((next[slot] - phi[slot]).abs());
                    }
                    std::mem::swap(&mut phi, &mut next);
                }
                Sweep::GaussSeidel => {
                    for (slot, w) in weighted.iter().enumerate() {
                        let v = w.eval(&phi);
                        change = change.max((v - phi[slot]).abs());
                        phi[slot] = v;
                    }
                }
            }
            if change < LAPLACE_TOL {
                return Ok(BranchTransforms {
                    phi,
                    iterations: it,
                    residual: change,
                });
            }
        }
        Err(Error::NonConvergence {
            what: "branch severity transforms",
            iterations: MAX_ITER,
            residual: f64::NAN,
        })
    }

    /// `E[exp(-nu I) P(Q_H = j | I) P(Q_W = l | I)]` for the initial case.
    pub fn mover_seed_weights(&self, nu: f64) -> Vec<Vec<f64>> {
        let (h1, w1) = (self.libs.h - 1, self.libs.w - 1);
        let (a, b) = seed_rates(self.params, self.libs.unprimed_seed_rates);
        let ip = self.params.infectious_period();
        if ip.is_constant() {
            let ph = 1.0 - (-a).exp();
            let pw = 1.0 - (-b).exp();
            let e = (-nu).exp();
            return (0..=h1)
                .map(|j| {
                    let bj = binomial_coeff(h1, j) * ph.powi(j as i32) * (1.0 - ph).powi((h1 - j) as i32);
                    (0..=w1)
                        .map(|l| e * bj * binomial_coeff(w1, l) * pw.powi(l as i32) * (1.0 - pw).powi((w1 - l) as i32))
                        .collect()
                })
                .collect();
        }
        (0..=h1)
            .map(|j| {
                (0..=w1)
                    .map(|l| {
                        let mut s = 0.0;
                        for u in 0..=j {
                            for v in 0..=l {
                                let sign = if (u + v) % 2 == 0 { 1.0 } else { -1.0 };
                                let arg = nu + a * (h1 - j + u) as f64 + b * (w1 - l + v) as f64;
                                s += sign * binomial_coeff(j, u) * binomial_coeff(l, v) * ip.laplace(arg);
                            }
                        }
                        (binomial_coeff(h1, j) * binomial_coeff(w1, l) * s).max(0.0)
                    })
                    .collect()
            })
            .collect()
    }

    /// `phi_A(nu) = theta phi_M(nu) + (1-theta) phi_R(nu)`.
    pub fn phi_a(&self, nu: f64) -> Result<(f64, BranchTransforms)> {
        let br = self.branch_transforms(nu)?;
        let theta = self.params.theta();
        let mut total = 0.0;
        if theta > 0.0 {
            let h1 = self.libs.h - 1;
            let weights = self.mover_seed_weights(nu);
            let hat = |slot: Option<usize>| slot.map(|s| br.phi[s]).unwrap_or(1.0);
            let mut m = 0.0;
            for (j, row) in weights.iter().enumerate() {
                let ph = hat(j.checked_sub(1));
                for (l, &wt) in row.iter().enumerate() {
                    m += wt * ph * hat(l.checked_sub(1).map(|k| h1 + k));
                }
            }
            total += theta * m;
        }
        if theta < 1.0 {
            let lib = self.libs.remainer.as_ref().expect("checked in new");
            total += (1.0 - theta) * Weighted::new(lib, nu).eval(&br.phi);
        }
        Ok((total, br))
    }

    /// `xi`, the smallest root of `phi_A(beta_G (1-s)) = s`, and `rho = 1 - xi`.
    pub fn rho(&self) -> Result<RhoResult> {
        let bg = self.params.beta_g();
        let r = leftmost_fixed_point(|s| Ok(self.phi_a(bg * (1.0 - s))?.0), XI_TOL)?;
        Ok(RhoResult {
            rho: 1.0 - r.root,
            xi: r.root,
            evaluations: r.evaluations,
        })
    }
}

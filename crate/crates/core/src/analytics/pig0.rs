//! Purely local spread (`beta_G = 0`): `z` from the two-type susceptibility
//! process, `rho` from the fine-typed clump process.

use serde::{Deserialize, Serialize};

use crate::analytics::outbreak::RouteB;
use crate::analytics::pgf::{solve_progeny_pair, PgfTriple, Sweep};
use crate::complex::library::LibrarySet;
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pig0Z {
    pub eta_s: (f64, f64),
    pub z: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pig0Rho {
    pub eta_c: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn check(params: &ModelParams) -> Result<()> {
    if params.theta() == 0.0 {
        return Err(Error::InvalidParam("the purely local branch needs theta > 0".into()));
    }
    Ok(())
}

/// `1 - z = (1-theta) g_R(1, eta_H, eta_W) + theta eta_H eta_W`.
pub fn solve_pig0_z(params: &ModelParams, susset: &PgfTriple, sweep: Sweep) -> Result<Pig0Z> {
    check(params)?;
    let pair = solve_progeny_pair(&susset.h, &susset.w, 1.0, sweep);
    if !pair.converged {
        return Err(Error::NonConvergence {
            what: "susceptibility extinction pair",
            iterations: pair.iterations,
            residual: pair.residual,
        });
    }
    let theta = params.theta();
    let (eh, ew) = (pair.x, pair.y);
    let mut ext = theta * eh * ew;
    if theta < 1.0 {
        ext += (1.0 - theta) * susset.r.eval(1.0, eh, ew);
    }
    Ok(Pig0Z {
        eta_s: (eh, ew),
        z: (1.0 - ext).max(0.0),
        iterations: pair.iterations,
        residual: pair.residual,
    })
}

/// `1 - rho = (1-theta) g^R(eta_C) + theta E[g^{H,Q_H}(eta_C) g^{W,Q_W}(eta_C)]`,
/// which is the Route-B transform at `nu = 0`.
pub fn solve_pig0_rho(params: &ModelParams, libs: &LibrarySet, sweep: Sweep) -> Result<Pig0Rho> {
    check(params)?;
    let rb = RouteB::new(params, libs, sweep)?;
    let (ext, br) = rb.phi_a(0.0)?;
    Ok(Pig0Rho {
        eta_c: br.phi,
        rho: (1.0 - ext).max(0.0),
        iterations: br.iterations,
        residual: br.residual,
    })
}

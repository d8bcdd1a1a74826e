//! One-call analysis: thresholds, final size and outbreak probability with
//! Monte Carlo standard errors where tables are estimated.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytics::final_size::solve_final_size_z;
use crate::analytics::outbreak::{rho_route_a, RouteB};
use crate::analytics::pgf::{PgfTriple, Sweep};
use crate::analytics::pig0::{solve_pig0_rho, solve_pig0_z};
use crate::analytics::threshold::{compute_r_l, compute_r_star};
use crate::complex::cache::estimate_tables_cached;
use crate::complex::library::{build_library_set, LibraryOptions, LibrarySet};
use crate::complex::tables::{
    estimate_tables, use_exact, ExactMode, ExactTableBuilder, TableKind, TableSet, DEFAULT_REPLICATES,
};
use crate::error::Result;
use crate::params::ModelParams;
use crate::rng::{tag, SeedSpec};
use crate::stats::replicate_se;

/// Width of the band around a threshold value of 1 inside which the report
/// flags near-criticality instead of trusting the sign.
pub const CRITICAL_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoRoute {
    /// Route A for constant infectious period, Route B otherwise.
    Auto,
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub exact: ExactMode,
    pub n_mc: u64,
    pub seed: SeedSpec,
    pub replicates: usize,
    pub sweep: Sweep,
    pub want_z: bool,
    pub want_rho: bool,
    pub rho_route: RhoRoute,
    pub library: LibraryOptions,
    pub cache_dir: Option<PathBuf>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            exact: ExactMode::Auto,
            n_mc: 1_000_000,
            seed: SeedSpec::new(20_240_601, 0),
            replicates: DEFAULT_REPLICATES,
            sweep: Sweep::Jacobi,
            want_z: true,
            want_rho: true,
            rho_route: RhoRoute::Auto,
            library: LibraryOptions::default(),
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub r_l: f64,
    pub r_l_se: Option<f64>,
    #[serde(with = "unbounded")]
    pub r_star: f64,
    pub r_star_se: Option<f64>,
    pub z: Option<f64>,
    pub z_se: Option<f64>,
    pub z_residual: Option<f64>,
    pub rho: Option<f64>,
    pub rho_se: Option<f64>,
    pub xi: Option<f64>,
    pub rho_route: Option<String>,
    pub eta_s: Option<(f64, f64)>,
    pub eta_c: Option<Vec<f64>>,
    pub iterations: usize,
    pub near_critical: bool,
    pub exact_tables: bool,
    pub n_mc: u64,
    pub seed: SeedSpec,
}

fn finite_se(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(replicate_se(xs))
}

/// Susceptibility tables per the requested mode.
pub fn susset_tables(params: &ModelParams, opts: &AnalysisOptions) -> Result<TableSet> {
    if use_exact(params, opts.exact)? {
        return ExactTableBuilder::new().build(params, TableKind::Susset);
    }
    let seed = opts.seed.derive(tag("susset-tables"));
    match &opts.cache_dir {
        Some(dir) => estimate_tables_cached(dir, params, TableKind::Susset, opts.n_mc, seed, opts.replicates),
        None => estimate_tables(params, TableKind::Susset, opts.n_mc, seed, opts.replicates),
    }
}

pub fn clump_tables(params: &ModelParams, opts: &AnalysisOptions) -> Result<TableSet> {
    let seed = opts.seed.derive(tag("clump-tables"));
    match &opts.cache_dir {
        Some(dir) => estimate_tables_cached(dir, params, TableKind::Clump, opts.n_mc, seed, opts.replicates),
        None => estimate_tables(params, TableKind::Clump, opts.n_mc, seed, opts.replicates),
    }
}

pub fn libraries(params: &ModelParams, opts: &AnalysisOptions) -> Result<LibrarySet> {
    build_library_set(params, opts.seed.derive(tag("fine-libraries")), &opts.library)
}

/// `z` from one table set (0 when `R* <= 1`), for `beta_G > 0`.
pub fn z_from_tables(params: &ModelParams, tables: &TableSet, sweep: Sweep) -> Result<(f64, f64)> {
    let r_star = compute_r_star(params.beta_g(), params.theta(), tables)?;
    let pgfs = PgfTriple::from_tables(tables, params.theta())?;
    let sol = solve_final_size_z(params.beta_g(), r_star, &pgfs, sweep)?;
    Ok((sol.z, sol.residual))
}

/// Route-B `rho` with its replicate standard error.
pub fn rho_route_b(params: &ModelParams, libs: &LibrarySet, sweep: Sweep) -> Result<(f64, f64, Option<f64>)> {
    let full = RouteB::new(params, libs, sweep)?.rho()?;
    let reps: Vec<f64> = if libs.replicates > 1 {
        (0..libs.replicates as u8)
            .map(|r| {
                let sub = libs.replicate(r);
                RouteB::new(params, &sub, sweep)?.rho().map(|x| x.rho)
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok((full.rho, full.xi, finite_se(&reps)))
}

pub fn analyze(params: &ModelParams, opts: &AnalysisOptions) -> Result<AnalyticsReport> {
    let tables = susset_tables(params, opts)?;
    let reps = tables.replicate_sets();
    let theta = params.theta();
    let bg = params.beta_g();

    let r_l = compute_r_l(&tables);
    let r_star = compute_r_star(bg, theta, &tables)?;
    let r_l_se = finite_se(&reps.iter().map(compute_r_l).collect::<Vec<_>>());
    let r_star_se = finite_se(
        &reps
            .iter()
            .map(|t| compute_r_star(bg, theta, t))
            .collect::<Result<Vec<_>>>()?,
    );

    let mut report = AnalyticsReport {
        r_l,
        r_l_se,
        r_star,
        r_star_se,
        z: None,
        z_se: None,
        z_residual: None,
        rho: None,
        rho_se: None,
        xi: None,
        rho_route: None,
        eta_s: None,
        eta_c: None,
        iterations: 0,
        near_critical: false,
        exact_tables: tables.is_exact(),
        n_mc: tables.n_mc(),
        seed: opts.seed,
    };

    if bg > 0.0 {
        report.near_critical = (r_star - 1.0).abs() <= CRITICAL_BAND;
        if opts.want_z || opts.want_rho {
            let (z, res) = z_from_tables(params, &tables, opts.sweep)?;
            report.z = Some(z);
            report.z_residual = Some(res);
            if !reps.is_empty() {
                let zs = reps
                    .iter()
                    .map(|t| z_from_tables(params, t, opts.sweep).map(|x| x.0))
                    .collect::<Result<Vec<_>>>()?;
                report.z_se = finite_se(&zs);
            }
        }
        if opts.want_rho {
            let route = match opts.rho_route {
                RhoRoute::Auto if params.infectious_period().is_constant() => RhoRoute::A,
                RhoRoute::Auto => RhoRoute::B,
                r => r,
            };
            match route {
                RhoRoute::A => {
                    if !params.infectious_period().is_constant() {
                        return Err(crate::error::Error::NonConstantPeriod);
                    }
                    // severity equals clump size, and clump tables equal
                    // susceptibility tables in law
                    let z = report.z.expect("computed above");
                    report.rho = Some(z);
                    report.xi = Some(1.0 - z);
                    report.rho_se = report.z_se;
                    report.rho_route = Some("A".into());
                }
                _ => {
                    let libs = libraries(params, opts)?;
                    let (rho, xi, se) = rho_route_b(params, &libs, opts.sweep)?;
                    report.rho = Some(rho);
                    report.xi = Some(xi);
                    report.rho_se = se;
                    report.rho_route = Some("B".into());
                }
            }
        }
    } else {
        report.near_critical = (r_l - 1.0).abs() <= CRITICAL_BAND;
        if theta == 0.0 {
            // spread never leaves the initial workplace
            report.z = Some(0.0);
            report.rho = Some(0.0);
            return Ok(report);
        }
        if opts.want_z {
            let pgfs = PgfTriple::from_tables(&tables, theta)?;
            let sol = solve_pig0_z(params, &pgfs, opts.sweep)?;
            report.z = Some(sol.z);
            report.eta_s = Some(sol.eta_s);
            report.iterations = sol.iterations;
            report.z_residual = Some(sol.residual);
            if !reps.is_empty() {
                let zs = reps
                    .iter()
                    .map(|t| {
                        let p = PgfTriple::from_tables(t, theta)?;
                        solve_pig0_z(params, &p, opts.sweep).map(|s| s.z)
                    })
                    .collect::<Result<Vec<_>>>()?;
                report.z_se = finite_se(&zs);
            }
        }
        if opts.want_rho {
            let libs = libraries(params, opts)?;
            let sol = solve_pig0_rho(params, &libs, opts.sweep)?;
            let reps: Vec<f64> = if libs.replicates > 1 {
                (0..libs.replicates as u8)
                    .map(|r| solve_pig0_rho(params, &libs.replicate(r), opts.sweep).map(|s| s.rho))
                    .collect::<Result<_>>()?
            } else {
                Vec::new()
            };
            report.rho = Some(sol.rho);
            report.rho_se = finite_se(&reps);
            report.xi = Some(1.0 - sol.rho);
            report.eta_c = Some(sol.eta_c);
            report.rho_route = Some("fine".into());
        }
    }
    Ok(report)
}

/// Route-A cross-check from Monte Carlo clump tables (constant period):
/// `(rho, replicate standard error)`.
pub fn rho_route_a_mc(params: &ModelParams, opts: &AnalysisOptions) -> Result<(f64, Option<f64>)> {
    let clumps = clump_tables(params, opts)?;
    let theta = params.theta();
    let bg = params.beta_g();
    let full = rho_route_a(bg, &PgfTriple::from_tables(&clumps, theta)?, opts.sweep)?;
    let reps = clumps
        .replicate_sets()
        .iter()
        .map(|t| rho_route_a(bg, &PgfTriple::from_tables(t, theta)?, opts.sweep).map(|r| r.rho))
        .collect::<Result<Vec<_>>>()?;
    Ok((full.rho, finite_se(&reps)))
}

// JSON has no infinity; an unbounded R* is written as null.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

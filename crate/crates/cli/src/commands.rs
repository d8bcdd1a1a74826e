use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hwsim_core::analytics::{analyze, clump_tables, libraries, susset_tables, AnalysisOptions, AnalyticsReport, RhoRoute};
use hwsim_core::complex::{use_exact, SeedType, ExactMode, ExactTableBuilder, LibraryKey, LibraryOptions, TableKind, TableSet};
use hwsim_core::rng::tag;
use hwsim_core::sim::{clump_susset_census, default_cutoff, estimate_rho_z, run_batch, run_until_major, RunRecord};
use hwsim_core::{BatchOptions, Config, Error, InfectiousPeriod, InitialCase, ModelParams, Population, SeedSpec};

use crate::args::*;
use crate::table::{cell, opt, CsvTable};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Simulation and Monte Carlo counts for one scale.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub n_sims: u64,
    pub n_mc: u64,
    pub library: u64,
    pub majors: usize,
}

impl Scale {
    pub fn new(paper: bool) -> Self {
        if paper {
            Scale {
                n_sims: 100_000,
                n_mc: 10_000_000,
                library: 400_000,
                majors: 10_000,
            }
        } else {
            Scale {
                n_sims: 10_000,
                n_mc: 1_000_000,
                library: 100_000,
                majors: 2_000,
            }
        }
    }
}

/// What a subcommand produced, for the manifest.
pub struct Done {
    pub config: Option<String>,
    pub seed: u64,
    pub outputs: Vec<String>,
}

pub fn dispatch(cmd: &Command, scale: Scale) -> Result<Done, CliError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a, scale),
        Command::Census(a) => census(a),
        Command::Tables(a) => tables(a, scale),
        Command::Analyze(a) => analyze_cmd(a, scale),
        Command::Sweep(a) => sweep(a, scale),
        Command::Fig1(a) => fig1(a, scale),
        Command::Fig2(a) => fig2(a, scale),
        Command::Fig3(a) => fig3(a, scale),
        Command::Replay(_) => unreachable!("replay is handled by the caller"),
    }
}

fn load(common: &Common) -> Result<(Config, u64), CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required for this command".into()))?;
    let cfg = Config::load(path)?;
    let seed = common.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    Ok((cfg, seed))
}

fn snapshot(params: &ModelParams, seed: u64) -> String {
    Config {
        params: params.clone(),
        seed: Some(seed),
    }
    .to_text()
}

fn need_n(params: &ModelParams) -> Result<usize, CliError> {
    params
        .n()
        .ok_or_else(|| CliError::Core(Error::Config("population size `n` is required".into())))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn save(dir: &Path, name: &str, t: &CsvTable, outputs: &mut Vec<String>) -> Result<(), CliError> {
    t.save(&dir.join(name))?;
    outputs.push(name.to_string());
    Ok(())
}

/// `params` with a new `d` and `theta`, population size cleared.
fn reshape(p: &ModelParams, d: usize, theta: f64) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(p.h(), d, theta, p.rates(), p.infectious_period())?)
}

pub fn analysis_options(e: &EngineArgs, seed: u64, scale: Scale) -> AnalysisOptions {
    AnalysisOptions {
        exact: match e.exact {
            ExactArg::Auto => ExactMode::Auto,
            ExactArg::Force => ExactMode::Force,
            ExactArg::Off => ExactMode::Off,
        },
        n_mc: e.n_mc.unwrap_or(scale.n_mc),
        seed: SeedSpec::new(seed, 0).derive(tag("analysis")),
        replicates: e.replicates,
        rho_route: match e.route {
            RouteArg::Auto => RhoRoute::Auto,
            RouteArg::A => RhoRoute::A,
            RouteArg::B => RhoRoute::B,
        },
        library: LibraryOptions {
            per_library: e.library_size.unwrap_or(scale.library),
            replicates: 8,
            unprimed_seed_rates: e.unprimed_seed_rates,
        },
        cache_dir: e.cache_dir.clone(),
        ..AnalysisOptions::default()
    }
}

fn generate(a: &GenerateArgs) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    need_n(&cfg.params)?;
    prepare(&a.common.out)?;
    let pop = Population::generate(&cfg.params, SeedSpec::new(seed, 0).derive(tag("population")))?;
    let mut buf = Vec::new();
    pop.write_csv(&mut buf)?;
    fs::write(a.common.out.join("population.csv"), buf)?;
    Ok(Done {
        config: Some(snapshot(&cfg.params, seed)),
        seed,
        outputs: vec!["population.csv".into()],
    })
}

pub const RUN_COLUMNS: [&str; 6] = ["run", "n", "final_size", "severity", "initial", "major"];
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "n", "cutoff", "runs", "minor", "major", "rho_hat", "rho_lo", "rho_hi", "z_hat", "z_sd", "z_lo", "z_hi",
];

fn simulate(a: &SimulateArgs, scale: Scale) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    let n = need_n(&cfg.params)?;
    if let Some(i) = a.initial {
        if i >= n {
            return Err(CliError::Usage(format!("--initial {i} is outside 0..{n}")));
        }
    }
    let cutoff = a.cutoff.unwrap_or_else(|| default_cutoff(n));
    prepare(&a.common.out)?;
    let opts = BatchOptions {
        initial: a.initial.map_or(InitialCase::UniformRandom, InitialCase::Fixed),
        fresh_network: !a.fixed_network,
    };
    let runs = run_batch(
        &cfg.params,
        a.runs.unwrap_or(scale.n_sims),
        SeedSpec::new(seed, 0).derive(tag("simulate")),
        &opts,
    )?;
    let mut t = CsvTable::new(&RUN_COLUMNS);
    for r in &runs {
        t.row(&[
            cell(r.run),
            cell(n),
            cell(r.final_size),
            cell(r.severity),
            cell(r.initial),
            cell(u8::from(r.final_size >= cutoff)),
        ]);
    }
    let mut s = CsvTable::new(&SUMMARY_COLUMNS);
    if !runs.is_empty() {
        let sizes: Vec<usize> = runs.iter().map(|r| r.final_size).collect();
        let b = estimate_rho_z(&sizes, n, cutoff)?;
        s.row(&[
            cell(b.n),
            cell(b.cutoff),
            cell(b.runs),
            cell(b.minor),
            cell(b.major),
            cell(b.rho_hat),
            cell(b.rho_ci.0),
            cell(b.rho_ci.1),
            opt(b.z_hat),
            opt(b.z_sd),
            opt(b.z_ci.map(|c| c.0)),
            opt(b.z_ci.map(|c| c.1)),
        ]);
    }
    let mut outputs = Vec::new();
    save(&a.common.out, "runs.csv", &t, &mut outputs)?;
    save(&a.common.out, "summary.csv", &s, &mut outputs)?;
    Ok(Done {
        config: Some(snapshot(&cfg.params, seed)),
        seed,
        outputs,
    })
}

fn census(a: &CensusArgs) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    need_n(&cfg.params)?;
    prepare(&a.common.out)?;
    let base = SeedSpec::new(seed, 0);
    let pop = Population::generate(&cfg.params, base.derive(tag("population")))?;
    let (c, s) = clump_susset_census(&pop, &cfg.params, base.derive(tag("census")))?;
    let mut t = CsvTable::new(&["individual", "clump_size", "susset_size"]);
    for (i, (c, s)) in c.iter().zip(&s).enumerate() {
        t.row(&[cell(i), cell(c), cell(s)]);
    }
    let mut outputs = Vec::new();
    save(&a.common.out, "census.csv", &t, &mut outputs)?;
    Ok(Done {
        config: Some(snapshot(&cfg.params, seed)),
        seed,
        outputs,
    })
}

pub fn table_csv(t: &TableSet) -> CsvTable {
    let mut out = CsvTable::new(&["seed_type", "z_r", "z_h", "z_w", "prob", "stderr"]);
    for x in SeedType::ALL {
        let Some(table) = t.get(x) else { continue };
        for (z, p) in table.cells() {
            out.row(&[cell(x), cell(z[0]), cell(z[1]), cell(z[2]), cell(p), cell(table.stderr(z))]);
        }
    }
    out
}

fn tables(a: &TablesArgs, scale: Scale) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    let p = &cfg.params;
    let opts = analysis_options(&a.engine, seed, scale);
    prepare(&a.common.out)?;
    let set = match a.kind {
        KindArg::Susset => susset_tables(p, &opts)?,
        KindArg::Clump if use_exact(p, opts.exact)? => ExactTableBuilder::new().build(p, TableKind::Clump)?,
        KindArg::Clump => clump_tables(p, &opts)?,
    };
    let mut outputs = Vec::new();
    save(&a.common.out, "tables.csv", &table_csv(&set), &mut outputs)?;
    if a.fine {
        let libs = libraries(p, &opts)?;
        let mut t = CsvTable::new(&["seed_type", "l", "y", "k", "count_mean"]);
        let slots = libs.n_slots();
        let named = |slot: usize| {
            if slot < libs.h - 1 {
                ("H", slot + 1)
            } else {
                ("W", slot - (libs.h - 1) + 1)
            }
        };
        let all = libs.movers_h.iter().chain(&libs.movers_w).chain(libs.remainer.as_ref());
        for lib in all {
            let (x, l) = match lib.key {
                LibraryKey::Mover(x, l) => (x.label(), l),
                LibraryKey::Remainer => ("R", 0),
            };
            for (slot, m) in lib.mean_offspring(slots).into_iter().enumerate() {
                let (y, k) = named(slot);
                t.row(&[cell(x), cell(l), cell(y), cell(k), cell(m)]);
            }
        }
        save(&a.common.out, "fine.csv", &t, &mut outputs)?;
    }
    Ok(Done {
        config: Some(snapshot(p, seed)),
        seed,
        outputs,
    })
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "theta", "d", "ip_law", "R_L", "R_L_se", "R_star", "R_star_se", "z", "z_se", "rho", "rho_se", "residual",
    "exact", "n_mc",
];

fn sweep_row(t: &mut CsvTable, p: &ModelParams, r: &AnalyticsReport) {
    t.row(&[
        cell(p.theta()),
        cell(p.d()),
        cell(p.infectious_period()),
        cell(r.r_l),
        opt(r.r_l_se),
        cell(r.r_star),
        opt(r.r_star_se),
        opt(r.z),
        opt(r.z_se),
        opt(r.rho),
        opt(r.rho_se),
        opt(r.z_residual),
        cell(u8::from(r.exact_tables)),
        cell(r.n_mc),
    ]);
}

fn report_json(r: &AnalyticsReport) -> Result<String, CliError> {
    serde_json::to_string_pretty(r)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(std::io::Error::other(e)))
}

fn analyze_cmd(a: &AnalyzeArgs, scale: Scale) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    let opts = AnalysisOptions {
        want_z: matches!(a.quantity, Quantity::Z | Quantity::All),
        want_rho: matches!(a.quantity, Quantity::Rho | Quantity::All),
        ..analysis_options(&a.engine, seed, scale)
    };
    prepare(&a.common.out)?;
    let r = analyze(&cfg.params, &opts)?;
    if r.near_critical {
        eprintln!("warning: threshold within the critical band; limits are unreliable here");
    }
    let mut t = CsvTable::new(&SWEEP_COLUMNS);
    sweep_row(&mut t, &cfg.params, &r);
    let mut outputs = Vec::new();
    save(&a.common.out, "analysis.csv", &t, &mut outputs)?;
    fs::write(a.common.out.join("analysis.json"), report_json(&r)?)?;
    outputs.push("analysis.json".into());
    Ok(Done {
        config: Some(snapshot(&cfg.params, seed)),
        seed,
        outputs,
    })
}

/// `start:step:end` (inclusive) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("bad grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let (a, step, b) = (v[0], v[1], v[2]);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let k = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=k).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

/// Theta where `R*` crosses 1, by linear interpolation of `1/R*`.
pub fn threshold_crossing(points: &[(f64, f64)]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((t0, r0), (t1, r1)) = (w[0], w[1]);
        if r0 < 1.0 && r1 >= 1.0 {
            let (u0, u1) = (1.0 / r0, 1.0 / r1);
            Some(t0 + (u0 - 1.0) / (u0 - u1) * (t1 - t0))
        } else {
            None
        }
    })
}

struct GridOut {
    sweep: CsvTable,
    thresholds: CsvTable,
}

fn run_grid(
    base: &ModelParams,
    grid: &GridArgs,
    default_theta: &str,
    opts: &AnalysisOptions,
    with_rho: bool,
) -> Result<GridOut, CliError> {
    let thetas = parse_grid(grid.theta.as_deref().unwrap_or(default_theta))?;
    let opts = AnalysisOptions {
        want_rho: with_rho,
        ..opts.clone()
    };
    let mut sweep = CsvTable::new(&SWEEP_COLUMNS);
    let mut thresholds = CsvTable::new(&["d", "ip_law", "theta_hat"]);
    for law in &grid.laws {
        let ip: InfectiousPeriod = law.parse()?;
        for &d in &grid.d {
            let mut curve = Vec::new();
            for &theta in &thetas {
                let p = reshape(base, d, theta)?.with_infectious_period(ip)?;
                let r = analyze(&p, &opts)?;
                sweep_row(&mut sweep, &p, &r);
                curve.push((theta, r.r_star));
            }
            thresholds.row(&[cell(d), cell(ip), opt(threshold_crossing(&curve))]);
        }
    }
    Ok(GridOut { sweep, thresholds })
}

fn sweep(a: &SweepArgs, scale: Scale) -> Result<Done, CliError> {
    let (cfg, seed) = load(&a.common)?;
    let opts = analysis_options(&a.engine, seed, scale);
    prepare(&a.common.out)?;
    let g = run_grid(&cfg.params, &a.grid, "0:0.025:1", &opts, true)?;
    let mut outputs = Vec::new();
    save(&a.common.out, "sweep.csv", &g.sweep, &mut outputs)?;
    save(&a.common.out, "thresholds.csv", &g.thresholds, &mut outputs)?;
    Ok(Done {
        config: Some(snapshot(&cfg.params, seed)),
        seed,
        outputs,
    })
}

fn fig_base(c: &FigCommon, h: usize, theta: f64) -> Result<(ModelParams, u64), CliError> {
    match &c.config {
        Some(path) => {
            let cfg = Config::load(path)?;
            let seed = c.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
            Ok((cfg.params, seed))
        }
        None => {
            let p = ModelParams::from_reparam(h, 1, theta, 3.0, 0.025, 0.5, InfectiousPeriod::Constant)?;
            Ok((p, c.seed.unwrap_or(DEFAULT_SEED)))
        }
    }
}

pub const FIG1_PANELS: [(f64, usize); 4] = [(0.075, 1000), (0.4, 1000), (0.4, 600), (0.4, 200)];
pub const FIG1_COLUMNS: [&str; 5] = ["run", "n", "theta", "final_size", "fraction"];

fn fig1(a: &Fig1Args, scale: Scale) -> Result<Done, CliError> {
    let (base, seed) = fig_base(&a.common, 4, 0.075)?;
    prepare(&a.common.out)?;
    let n_sims = a.n_sims.unwrap_or(scale.n_sims);
    let mut outputs = Vec::new();
    for (k, &(theta, n)) in FIG1_PANELS.iter().enumerate() {
        let p = reshape(&base, base.d(), theta)?.with_n(n)?;
        let runs = run_batch(
            &p,
            n_sims,
            SeedSpec::new(seed, 0).derive(tag("fig1")).derive(k as u64),
            &BatchOptions::default(),
        )?;
        let mut t = CsvTable::new(&FIG1_COLUMNS);
        for r in &runs {
            t.row(&[cell(r.run), cell(n), cell(theta), cell(r.final_size), cell(r.final_size as f64 / n as f64)]);
        }
        save(&a.common.out, &format!("fig1_panel{}.csv", k + 1), &t, &mut outputs)?;
    }
    Ok(Done {
        config: Some(snapshot(&base, seed)),
        seed,
        outputs,
    })
}

const FIG2_CUTOFFS: &str = include_str!("../data/fig2_cutoffs.csv");

/// Standard population grid and cutoffs: `d -> [(n, cutoff)]`.
pub fn fig2_cutoffs() -> BTreeMap<usize, Vec<(usize, usize)>> {
    let (_, rows) = crate::table::parse(FIG2_CUTOFFS).expect("bundled cutoff table is valid");
    let mut map: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for r in rows {
        let v: Vec<usize> = r.iter().map(|x| x.parse().expect("integer cutoff table")).collect();
        map.entry(v[0]).or_default().push((v[1], v[2]));
    }
    map
}

/// Cutoff for `(d, n)`: the bundled value, else 200 above 480, else `ceil(ln n)`.
pub fn fig2_cutoff(d: usize, n: usize) -> usize {
    fig2_cutoffs()
        .get(&d)
        .and_then(|v| v.iter().find(|&&(m, _)| m == n).map(|&(_, c)| c))
        .unwrap_or(if n > 480 { 200 } else { default_cutoff(n) })
}

pub const FIG2_COLUMNS: [&str; 15] = [
    "n", "d", "cutoff", "rho_runs", "rho_hat", "rho_lo", "rho_hi", "majors", "z_runs", "z_hat", "z_sd", "z_lo",
    "z_hi", "rho_analytic", "z_analytic",
];

pub struct Fig2Point {
    pub n: usize,
    pub cutoff: usize,
    pub rho: hwsim_core::BatchSummary,
    pub z: hwsim_core::BatchSummary,
    pub z_runs: u64,
}

/// Two independent batches at one `(n, d)`: plain runs for `rho`, and runs
/// until `majors` major outbreaks for `z`.
pub fn fig2_point(p: &ModelParams, cutoff: usize, rho_runs: u64, majors: usize, seed: SeedSpec) -> Result<Fig2Point, CliError> {
    let n = need_n(p)?;
    let opts = BatchOptions::default();
    let runs = run_batch(p, rho_runs, seed.derive(tag("fig2-rho")), &opts)?;
    let sizes: Vec<usize> = runs.iter().map(|r| r.final_size).collect();
    let rho = estimate_rho_z(&sizes, n, cutoff)?;
    let (maj, used): (Vec<RunRecord>, u64) =
        run_until_major(p, majors, cutoff, seed.derive(tag("fig2-z")), &opts, majors as u64 * 1000)?;
    let sizes: Vec<usize> = maj.iter().map(|r| r.final_size).collect();
    let z = estimate_rho_z(&sizes, n, cutoff)?;
    Ok(Fig2Point {
        n,
        cutoff,
        rho,
        z,
        z_runs: used,
    })
}

fn fig2(a: &Fig2Args, scale: Scale) -> Result<Done, CliError> {
    let (base, seed) = fig_base(&a.common, 4, 0.4)?;
    let opts = analysis_options(&a.engine, seed, scale);
    prepare(&a.common.out)?;
    let grid = fig2_cutoffs();
    let rho_runs = a.rho_runs.unwrap_or(scale.n_sims);
    let majors = a.majors.unwrap_or(scale.majors);
    let mut t = CsvTable::new(&FIG2_COLUMNS);
    for &d in &a.d {
        let p = reshape(&base, d, base.theta())?;
        let w = p.w();
        let ns: Vec<usize> = if a.n.is_empty() {
            grid.get(&d).map(|v| v.iter().map(|&(n, _)| n).collect()).unwrap_or_default()
        } else {
            a.n.iter()
                .map(|&n| {
                    let m = n / w * w;
                    if m != n {
                        eprintln!("warning: n={n} is not a multiple of w={w}; using n={m}");
                    }
                    m
                })
                .filter(|&m| m > 0)
                .collect()
        };
        let lim = analyze(&p, &opts)?;
        for n in ns {
            let pn = p.clone().with_n(n)?;
            let cutoff = fig2_cutoff(d, n);
            let s = SeedSpec::new(seed, 0).derive(tag("fig2")).derive((d * 1_000_000 + n) as u64);
            let pt = fig2_point(&pn, cutoff, rho_runs, majors, s)?;
            t.row(&[
                cell(n),
                cell(d),
                cell(cutoff),
                cell(pt.rho.runs),
                cell(pt.rho.rho_hat),
                cell(pt.rho.rho_ci.0),
                cell(pt.rho.rho_ci.1),
                cell(pt.z.major),
                cell(pt.z_runs),
                opt(pt.z.z_hat),
                opt(pt.z.z_sd),
                opt(pt.z.z_ci.map(|c| c.0)),
                opt(pt.z.z_ci.map(|c| c.1)),
                opt(lim.rho),
                opt(lim.z),
            ]);
        }
    }
    let mut outputs = Vec::new();
    save(&a.common.out, "fig2.csv", &t, &mut outputs)?;
    Ok(Done {
        config: Some(snapshot(&base, seed)),
        seed,
        outputs,
    })
}

fn fig3(a: &Fig3Args, scale: Scale) -> Result<Done, CliError> {
    let (base, seed) = fig_base(&a.common, 3, 0.0)?;
    let opts = analysis_options(&a.engine, seed, scale);
    prepare(&a.common.out)?;
    let g = run_grid(&base, &a.grid, "0:0.05:1", &opts, false)?;
    let mut outputs = Vec::new();
    save(&a.common.out, "fig3.csv", &g.sweep, &mut outputs)?;
    save(&a.common.out, "fig3_thresholds.csv", &g.thresholds, &mut outputs)?;
    Ok(Done {
        config: Some(snapshot(&base, seed)),
        seed,
        outputs,
    })
}

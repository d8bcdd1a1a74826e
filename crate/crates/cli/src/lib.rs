//! The `hwsim` command-line harness: subcommands, manifests and replay.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

pub use args::{Cli, Command};
use commands::{dispatch, Scale};
pub use manifest::{differing_outputs, hash_outputs, Manifest, MANIFEST_FILE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hwsim_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("replayed outputs differ: {}", .0.join(", "))]
    Mismatch(Vec<String>),
}

impl CliError {
    /// 2 for configuration errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Simulate(_) => "simulate",
            Command::Census(_) => "census",
            Command::Tables(_) => "tables",
            Command::Analyze(_) => "analyze",
            Command::Sweep(_) => "sweep",
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Fig3(_) => "fig3",
            Command::Replay(_) => "replay",
        }
    }

    fn paths_mut(&mut self) -> (&mut PathBuf, Option<&mut Option<PathBuf>>) {
        match self {
            Command::Generate(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Simulate(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Census(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Tables(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Analyze(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Sweep(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Fig1(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Fig2(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Fig3(a) => (&mut a.common.out, Some(&mut a.common.config)),
            Command::Replay(a) => (&mut a.out, None),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.clone().paths_mut().0.clone()
    }
}

/// Run a parsed command line. `argv` (without the program name) is recorded
/// in the manifest.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<Manifest, CliError> {
    match &cli.command {
        Command::Replay(a) => replay(cli.threads, &a.manifest, &a.out),
        _ => execute(cli, argv),
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<Manifest, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();
    let scale = Scale::new(cli.paper_scale);
    let done = pool.install(|| dispatch(&cli.command, scale))?;
    let dir = cli.command.out_dir();
    let manifest = Manifest {
        schema: "v1".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        argv,
        config: done.config,
        seed: done.seed,
        paper_scale: cli.paper_scale,
        threads: pool.current_num_threads(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
        outputs: hash_outputs(&dir, &done.outputs)?,
    };
    manifest.write(&dir)?;
    Ok(manifest)
}

/// Replace the values of `--out`/`-o` and (if given) `--config`/`-c`, and
/// drop any `--threads`.
fn rewrite_argv(argv: &[String], out: &Path, config: Option<&Path>) -> Vec<String> {
    let mut res = Vec::with_capacity(argv.len());
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let (flag, inline) = match a.split_once('=') {
            Some((f, v)) if f.starts_with("--") => (f, Some(v)),
            _ => (a.as_str(), None),
        };
        let replacement = match flag {
            "--out" | "-o" => Some(Some(out.display().to_string())),
            "--config" | "-c" => Some(config.map(|c| c.display().to_string())),
            "--threads" => Some(None),
            _ => None,
        };
        match replacement {
            None => res.push(a.clone()),
            Some(new) => {
                if inline.is_none() {
                    it.next();
                }
                if let Some(v) = new {
                    res.push(flag.to_string());
                    res.push(v);
                }
            }
        }
    }
    res
}

fn replay(threads: Option<usize>, manifest: &Path, out: &Path) -> Result<Manifest, CliError> {
    let old = Manifest::load(manifest)?;
    let mut full = vec!["hwsim".to_string()];
    full.extend(old.argv.iter().cloned());
    let mut cli = Cli::try_parse_from(&full).map_err(|e| CliError::Usage(format!("manifest argv: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    fs::create_dir_all(out)?;
    let (out_slot, config_slot) = cli.command.paths_mut();
    *out_slot = out.to_path_buf();
    let mut config_path = None;
    if let (Some(slot), Some(text)) = (config_slot, &old.config) {
        if slot.is_some() {
            let path = out.join("replay_config.txt");
            fs::write(&path, text)?;
            *slot = Some(path.clone());
            config_path = Some(path);
        }
    }
    cli.threads = threads;
    let argv = rewrite_argv(&old.argv, out, config_path.as_deref());
    let new = execute(cli, argv)?;
    let diff = differing_outputs(&old, &new);
    for (name, hash) in &new.outputs {
        let status = if diff.contains(name) { "DIFFERS" } else { "identical" };
        println!("{name}: {status} ({})", &hash[..12]);
    }
    if diff.is_empty() {
        Ok(new)
    } else {
        Err(CliError::Mismatch(diff))
    }
}

//! On-disk cache of Monte Carlo table sets, keyed by everything that
//! determines their contents.

use std::path::{Path, PathBuf};

use crate::complex::tables::{estimate_tables, TableKind, TableSet};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{tag, SeedSpec};

/// Hex key for `(params, kind, n_mc, seed, replicates)`.
pub fn cache_key(params: &ModelParams, kind: TableKind, n_mc: u64, seed: SeedSpec, replicates: usize) -> Result<String> {
    let bytes = bincode::serialize(&(params, kind, n_mc, seed, replicates as u64))
        .map_err(|e| Error::Cache(e.to_string()))?;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("{:016x}-{:016x}", h, tag(kind.label()) ^ n_mc))
}

fn entry_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("tables-{key}.bin"))
}

pub fn load(dir: &Path, key: &str) -> Result<Option<TableSet>> {
    let path = entry_path(dir, key);
    if !path.exists() {
        return Ok(None);
    }
    let bytes = std::fs::read(&path)?;
    bincode::deserialize(&bytes)
        .map(Some)
        .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
}

pub fn store(dir: &Path, key: &str, tables: &TableSet) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let bytes = bincode::serialize(tables).map_err(|e| Error::Cache(e.to_string()))?;
    let path = entry_path(dir, key);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

/// [`estimate_tables`] through the cache in `dir`.
pub fn estimate_tables_cached(
    dir: &Path,
    params: &ModelParams,
    kind: TableKind,
    n_mc: u64,
    seed: SeedSpec,
    replicates: usize,
) -> Result<TableSet> {
    let key = cache_key(params, kind, n_mc, seed, replicates)?;
    if let Some(t) = load(dir, &key)? {
        return Ok(t);
    }
    let t = estimate_tables(params, kind, n_mc, seed, replicates)?;
    store(dir, &key, &t)?;
    Ok(t)
}

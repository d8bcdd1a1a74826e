//! Flat `key=value` configuration files.
//!
//! ```text
//! # Figure 1, top-left panel
//! h=4
//! d=1
//! theta=0.075
//! beta=3
//! pi_g=0.025
//! pi_h_given_gc=0.5
//! infectious_period=constant
//! n=1000
//! seed=7
//! ```
//!
//! Rates are given either as `beta, pi_g, pi_h_given_gc` or as
//! `beta_h, beta_w, beta_g`; mixing the two is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{from_reparam, InfectiousPeriod, ModelParams, Rates};

const KNOWN_KEYS: &[&str] = &[
    "h",
    "d",
    "theta",
    "beta",
    "pi_g",
    "pi_h_given_gc",
    "beta_h",
    "beta_w",
    "beta_g",
    "infectious_period",
    "n",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ModelParams,
    pub seed: Option<u64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let k = k.trim().to_ascii_lowercase();
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
            }
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{k}`")));
            }
        }
        Self::from_map(&kv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_map(kv: &BTreeMap<String, String>) -> Result<Self> {
        fn num<T: std::str::FromStr>(kv: &BTreeMap<String, String>, k: &str) -> Result<Option<T>> {
            kv.get(k)
                .map(|v| {
                    v.parse::<T>()
                        .map_err(|_| Error::Config(format!("cannot parse {k}={v}")))
                })
                .transpose()
        }
        let h: usize = num(kv, "h")?.ok_or_else(|| Error::Config("missing h".into()))?;
        let d: usize = num(kv, "d")?.ok_or_else(|| Error::Config("missing d".into()))?;
        let theta: f64 = num(kv, "theta")?.ok_or_else(|| Error::Config("missing theta".into()))?;

        let reparam = ["beta", "pi_g", "pi_h_given_gc"].map(|k| kv.contains_key(k));
        let direct = ["beta_h", "beta_w", "beta_g"].map(|k| kv.contains_key(k));
        let any_re = reparam.iter().any(|&b| b);
        let any_direct = direct.iter().any(|&b| b);
        let rates = match (any_re, any_direct) {
            (true, true) => {
                return Err(Error::Config(
                    "give either beta/pi_g/pi_h_given_gc or beta_h/beta_w/beta_g, not both".into(),
                ))
            }
            (false, false) => return Err(Error::Config("no contact rates given".into())),
            (true, false) => {
                if !reparam.iter().all(|&b| b) {
                    return Err(Error::Config("need all of beta, pi_g, pi_h_given_gc".into()));
                }
                from_reparam(
                    num(kv, "beta")?.unwrap(),
                    num(kv, "pi_g")?.unwrap(),
                    num(kv, "pi_h_given_gc")?.unwrap(),
                )
                .map_err(|e| Error::Config(e.to_string()))?
            }
            (false, true) => {
                if !direct.iter().all(|&b| b) {
                    return Err(Error::Config("need all of beta_h, beta_w, beta_g".into()));
                }
                Rates {
                    beta_h: num(kv, "beta_h")?.unwrap(),
                    beta_w: num(kv, "beta_w")?.unwrap(),
                    beta_g: num(kv, "beta_g")?.unwrap(),
                }
            }
        };
        let ip = match kv.get("infectious_period") {
            Some(s) => s.parse::<InfectiousPeriod>()?,
            None => InfectiousPeriod::Constant,
        };
        let mut params = ModelParams::new(h, d, theta, rates, ip)
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(n) = num::<usize>(kv, "n")? {
            params = params.with_n(n).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(Config {
            params,
            seed: num(kv, "seed")?,
        })
    }

    /// Canonical text form: direct rates, full precision. Parsing it back
    /// yields an identical `Config`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "h={}", p.h());
        let _ = writeln!(s, "d={}", p.d());
        let _ = writeln!(s, "theta={:?}", p.theta());
        let _ = writeln!(s, "beta_h={:?}", p.beta_h());
        let _ = writeln!(s, "beta_w={:?}", p.beta_w());
        let _ = writeln!(s, "beta_g={:?}", p.beta_g());
        let _ = writeln!(s, "infectious_period={}", p.infectious_period());
        if let Some(n) = p.n() {
            let _ = writeln!(s, "n={n}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        s
    }
}

//! Model constants, the two rate parametrizations and the infectious-period law.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the infectious period. Every variant has mean exactly 1, so time
/// is measured in units of the mean infectious period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfectiousPeriod {
    Constant,
    Exponential,
    /// Gamma with the given shape and scale `1/shape`.
    Gamma { shape: f64 },
}

impl InfectiousPeriod {
    pub fn gamma(shape: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::InvalidParam(format!("gamma shape must be > 0, got {shape}")));
        }
        Ok(InfectiousPeriod::Gamma { shape })
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InfectiousPeriod::Constant => 0.0,
            InfectiousPeriod::Exponential => 1.0,
            InfectiousPeriod::Gamma { shape } => 1.0 / shape,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, InfectiousPeriod::Constant)
    }

    /// Laplace transform `E[exp(-nu I)]`, `nu >= 0`.
    pub fn laplace(&self, nu: f64) -> f64 {
        match *self {
            InfectiousPeriod::Constant => (-nu).exp(),
            InfectiousPeriod::Exponential => 1.0 / (1.0 + nu),
            InfectiousPeriod::Gamma { shape } => (1.0 + nu / shape).powf(-shape),
        }
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            InfectiousPeriod::Constant => "constant".into(),
            InfectiousPeriod::Exponential => "exponential".into(),
            InfectiousPeriod::Gamma { shape } => format!("gamma:{shape}"),
        }
    }

    pub fn sampler(&self) -> PeriodSampler {
        match *self {
            InfectiousPeriod::Constant => PeriodSampler::Constant,
            InfectiousPeriod::Exponential => PeriodSampler::Exponential,
            InfectiousPeriod::Gamma { shape } => {
                PeriodSampler::Gamma(Gamma::new(shape, 1.0 / shape).expect("validated gamma shape"))
            }
        }
    }
}

impl fmt::Display for InfectiousPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for InfectiousPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "constant" => Ok(InfectiousPeriod::Constant),
            "exponential" => Ok(InfectiousPeriod::Exponential),
            _ => match s.strip_prefix("gamma:") {
                Some(k) => {
                    let shape = k.parse::<f64>().map_err(|_| {
                        Error::Config(format!("bad gamma shape in infectious_period={s}"))
                    })?;
                    InfectiousPeriod::gamma(shape)
                }
                None => Err(Error::Config(format!("unknown infectious_period `{s}`"))),
            },
        }
    }
}

/// Pre-built sampler for an [`InfectiousPeriod`].
#[derive(Debug, Clone)]
pub enum PeriodSampler {
    Constant,
    Exponential,
    Gamma(Gamma<f64>),
}

impl PeriodSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PeriodSampler::Constant => 1.0,
            PeriodSampler::Exponential => Exp1.sample(rng),
            PeriodSampler::Gamma(g) => g.sample(rng),
        }
    }
}

/// Draw one infectious period from `ip`.
pub fn sample_infectious_period<R: Rng + ?Sized>(ip: &InfectiousPeriod, rng: &mut R) -> f64 {
    ip.sampler().sample(rng)
}

/// Household, workplace and global contact rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub beta_h: f64,
    pub beta_w: f64,
    pub beta_g: f64,
}

/// Overall contact rate, global fraction, and household fraction of the local rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reparam {
    pub beta: f64,
    pub pi_g: f64,
    pub pi_h_given_gc: f64,
}

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParam(format!("{name} must lie in [0,1], got {x}")));
    }
    Ok(())
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidParam(format!("{name} must be finite and >= 0, got {x}")));
    }
    Ok(())
}

pub fn from_reparam(beta: f64, pi_g: f64, pi_h_given_gc: f64) -> Result<Rates> {
    check_rate("beta", beta)?;
    check_fraction("pi_g", pi_g)?;
    check_fraction("pi_h_given_gc", pi_h_given_gc)?;
    let local = beta * (1.0 - pi_g);
    Ok(Rates {
        beta_h: local * pi_h_given_gc,
        beta_w: local * (1.0 - pi_h_given_gc),
        beta_g: beta * pi_g,
    })
}

/// Inverse of [`from_reparam`]. When there is no local rate the household
/// share is vacuous and reported as 0.5.
pub fn to_reparam(beta_h: f64, beta_w: f64, beta_g: f64) -> Result<Reparam> {
    check_rate("beta_h", beta_h)?;
    check_rate("beta_w", beta_w)?;
    check_rate("beta_g", beta_g)?;
    let local = beta_h + beta_w;
    let beta = local + beta_g;
    if beta == 0.0 {
        return Err(Error::InvalidParam("all contact rates are zero".into()));
    }
    let pi_h_given_gc = if local == 0.0 { 0.5 } else { beta_h / local };
    Ok(Reparam {
        beta,
        pi_g: beta_g / beta,
        pi_h_given_gc,
    })
}

/// All model constants. Immutable once built; `w`, `beta_h'` and `beta_w'`
/// are derived on demand so they can never drift from their inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    h: usize,
    d: usize,
    theta: f64,
    rates: Rates,
    infectious_period: InfectiousPeriod,
    n: Option<usize>,
}

impl ModelParams {
    pub fn new(
        h: usize,
        d: usize,
        theta: f64,
        rates: Rates,
        infectious_period: InfectiousPeriod,
    ) -> Result<Self> {
        if h < 2 {
            return Err(Error::InvalidParam(format!("household size h must be >= 2, got {h}")));
        }
        if d < 1 {
            return Err(Error::InvalidParam("d must be >= 1".into()));
        }
        check_fraction("theta", theta)?;
        check_rate("beta_h", rates.beta_h)?;
        check_rate("beta_w", rates.beta_w)?;
        check_rate("beta_g", rates.beta_g)?;
        if let InfectiousPeriod::Gamma { shape } = infectious_period {
            InfectiousPeriod::gamma(shape)?;
        }
        Ok(ModelParams {
            h,
            d,
            theta,
            rates,
            infectious_period,
            n: None,
        })
    }

    /// Convenience constructor from `(beta, pi_G, pi_{H|G^c})`.
    pub fn from_reparam(
        h: usize,
        d: usize,
        theta: f64,
        beta: f64,
        pi_g: f64,
        pi_h_given_gc: f64,
        infectious_period: InfectiousPeriod,
    ) -> Result<Self> {
        let rates = from_reparam(beta, pi_g, pi_h_given_gc)?;
        Self::new(h, d, theta, rates, infectious_period)
    }

    pub fn with_n(mut self, n: usize) -> Result<Self> {
        let w = self.w();
        if n == 0 || n % w != 0 {
            return Err(Error::PopulationSize { n, w });
        }
        self.n = Some(n);
        Ok(self)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_fraction("theta", theta)?;
        let mut p = self.clone();
        p.theta = theta;
        Ok(p)
    }

    pub fn with_d(&self, d: usize) -> Result<Self> {
        let mut p = Self::new(self.h, d, self.theta, self.rates, self.infectious_period)?;
        if let Some(n) = self.n {
            p = p.with_n(n)?;
        }
        Ok(p)
    }

    pub fn with_rates(&self, rates: Rates) -> Result<Self> {
        let mut p = Self::new(self.h, self.d, self.theta, rates, self.infectious_period)?;
        p.n = self.n;
        Ok(p)
    }

    pub fn with_infectious_period(&self, ip: InfectiousPeriod) -> Result<Self> {
        let mut p = Self::new(self.h, self.d, self.theta, self.rates, ip)?;
        p.n = self.n;
        Ok(p)
    }

    pub fn h(&self) -> usize {
        self.h
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn w(&self) -> usize {
        self.d * self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn rates(&self) -> Rates {
        self.rates
    }
    pub fn beta_h(&self) -> f64 {
        self.rates.beta_h
    }
    pub fn beta_w(&self) -> f64 {
        self.rates.beta_w
    }
    pub fn beta_g(&self) -> f64 {
        self.rates.beta_g
    }
    pub fn infectious_period(&self) -> InfectiousPeriod {
        self.infectious_period
    }
    pub fn n(&self) -> Option<usize> {
        self.n
    }

    /// Per-pair household rate `beta_H / (h-1)`.
    pub fn beta_h_pair(&self) -> f64 {
        self.rates.beta_h / (self.h - 1) as f64
    }

    /// Per-pair workplace rate `beta_W / (w-1)`.
    pub fn beta_w_pair(&self) -> f64 {
        self.rates.beta_w / (self.w() - 1) as f64
    }

    pub fn reparam(&self) -> Result<Reparam> {
        to_reparam(self.rates.beta_h, self.rates.beta_w, self.rates.beta_g)
    }
}

//! SIR epidemics on a population partitioned into households and into
//! workplaces, where a fraction `theta` of individuals work away from their
//! household's original workplace.
//!
//! * [`network`]: population generation and complex decomposition
//! * [`sim`]: final-outcome simulation and batch estimates
//! * [`complex`]: single-complex epidemics, exact and Monte Carlo tables
//! * [`analytics`]: `R_L`, `R*`, `z` and `rho`

pub mod analytics;
pub mod complex;
pub mod config;
pub mod error;
pub mod network;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod sim;
pub mod stats;

pub use config::Config;
pub use error::{Error, Result};
pub use network::{extract_complexes, Complex, Population};
pub use params::{from_reparam, to_reparam, InfectiousPeriod, ModelParams, Rates, Reparam};
pub use rng::{SeedSpec, SimRng};
pub use sim::{simulate_final, BatchOptions, BatchSummary, InitialCase, Outcome, RunRecord};

//! Limiting quantities from the branching approximations: thresholds,
//! final size, outbreak probability.

pub mod final_size;
pub mod outbreak;
pub mod pgf;
pub mod pig0;
pub mod report;
pub mod threshold;

pub use final_size::{leftmost_fixed_point, solve_final_size_z, ZSolution};
pub use outbreak::{rho_route_a, RhoResult, RouteB};
pub use pgf::{progeny_pgf, solve_progeny_pair, OffspringPgf, PairSolution, PgfTriple, Sweep};
pub use pig0::{solve_pig0_rho, solve_pig0_z};
pub use report::{
    analyze, clump_tables, libraries, rho_route_a_mc, rho_route_b, susset_tables, z_from_tables, AnalysisOptions,
    AnalyticsReport, RhoRoute,
};
pub use threshold::{compute_r_l, compute_r_star, mean_matrix, perron_root};

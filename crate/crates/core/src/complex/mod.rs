//! Single-complex epidemics: structures, Monte Carlo and exact engines,
//! offspring tables and fine-typed libraries.

pub mod cache;
pub mod exact;
pub mod library;
pub mod structure;
pub mod tables;
pub mod within;

pub use exact::{exact_cost, final_state_pmf};
pub use library::{build_library, build_library_set, FineLibrary, LibraryKey, LibraryOptions, LibrarySet};
pub use structure::{sample_structure, ContactMatrix, SeedType, SeededComplexStructure};
pub use tables::{
    estimate_tables, exact_total_cost, fine_type_probs, use_exact, CoarseTable, ExactMode, ExactTableBuilder, TableKind, TableSet,
    TableSource,
};
pub use within::{run_within_complex, susset_within_complex, ComplexRunner, SeedConstraint, WithinOutcome};

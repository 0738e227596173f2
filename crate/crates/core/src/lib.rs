//! Universal norm distributions, the Anderson resolution and the cohomology
//! of the associated Hom complexes, computed exactly.

pub mod anderson;
pub mod cohomology;
pub mod complex;
pub mod config;
pub mod error;
pub mod formal_products;
pub mod linalg;
pub mod norm_distribution;
pub mod system;

pub use anderson::{koszul_truncated, Anderson, LSymbol};
pub use cohomology::{
    build_p, cohomology_u, cohomology_u_direct, cohomology_u_mod, predicted_theorem_a, predicted_theorem_b,
    predicted_trivial, trivial_cohomology, CohomologyReport, Convention, DegreeReport, KComplex,
};
pub use complex::GradedComplex;
pub use config::{load_config, parse_config, preset, PRESETS};
pub use error::{Error, Result};
pub use formal_products::{omega, FormalProduct, PrimeSymbol};
pub use linalg::{Coefficients, HomologyGroup, SparseMatrix};
pub use norm_distribution::{connecting_map, corestriction, enumerate_a, ASymbol, Coords, Distribution};
pub use system::{Frame, GroupElement, GroupRingElement, NormSystem};

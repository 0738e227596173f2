//! Exact sparse linear algebra over `ℤ`, `ℤ/M`, `𝔽_p` and `ℚ`.

pub mod field;
pub mod homology;
pub mod matrix;
pub mod smith;

pub use field::{rank_over_field, rational_rank, solve_rational, RationalEchelon};
pub use homology::{degree_data, homology_at, Coefficients, DegreeData, HomologyGroup};
pub use matrix::SparseMatrix;
pub use smith::{invariant_factors, smith_normal_form, Smith};

//! Lower-bound certificates for per-feature attributions of boolean polynomials, and
//! checks that grouped attributions escape them.

mod fit;
mod l1;
mod polynomial;
mod program;
pub mod simplex;
mod verify;

pub use fit::{fit_exponential, ExponentialFit, OFFSET_STEP};
pub use l1::{solve_l1, L1Route, L1Solution, MAX_LIFT_ROWS};
pub use polynomial::PolynomialSpec;
pub use program::{build_program, L1Program, MAX_PROGRAM_DIM};
pub use verify::{
    max_grouped_errors, min_deletion_error_monomial, min_insertion_error_binomial,
    symmetric_monomial_deletion, term_groups, zero_attribution_insertion_error_at,
    zero_attribution_monomial_insertion, MAX_GROUPED_DIM, MAX_SCAN_DIM,
};

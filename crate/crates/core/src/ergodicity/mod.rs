//! Transition matrices, connectivity matrices and coefficients of
//! ergodicity, used to check convergence of recorded executions.

pub mod certify;
pub mod coefficients;
pub mod connectivity;
pub mod transition;

pub use certify::{certify_convergence, BlockReport, Certificate, PropertyCheck, RoundReport, Status};
pub use coefficients::{ergodicity, ErgodicityStats};
pub use connectivity::{connectivity_matrix, dominates, has_nonzero_column, BoolMatrix};
pub use transition::{beta, build_transition_matrix, build_transition_row, Case, TransitionMatrix, TransitionRow};

//! Discrete generators and the semigroups they produce.
//!
//! A finite-dimensional generator produces a positive semigroup (`e^{tA} >= 0` for all
//! `t >= 0`) exactly when it is Metzler. Shifting by `lambda` only rescales the semigroup:
//! `T_{A - lambda I}(t) = e^{-lambda t} T_A(t)`.

mod expmv;
mod growth;
mod matrix;
mod matrix_market;

pub use expmv::{apply_semigroup, shifted_apply, Propagator};
pub use growth::{growth_bound, GrowthBound, GrowthMethod};
pub use matrix::{is_metzler, GeneratorMatrix};
pub use matrix_market::{read_matrix_market, write_matrix_market};

//! Independent references for testing: dense matrix exponential, explicit RK4 on the
//! discretized system, and closed-form solutions.
//!
//! Nothing here shares numerical kernels with the production path.

mod closed_forms;
mod expm;
mod rk4;

pub use closed_forms::{blow_up_square, linear_relax, logistic};
pub use expm::{dense_expm, dense_shifted_action, expm, to_dense, MAX_DENSE_DIM};
pub use rk4::{rk4_solve, sample};

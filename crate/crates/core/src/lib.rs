//! Positivity-certified mild solutions of `y' = A y + f(y, t)` on discretized Banach lattices.
//!
//! The generator `A` is a Metzler matrix, so `e^{tA}` keeps the nonnegative cone invariant.
//! The nonlinearity is made cone-preserving by a certified shift `lambda` with
//! `f(z, t) + lambda z >= 0` on the ball of radius `m`, and the shifted mild-solution map is
//! iterated to its fixed point on successive time windows.

pub mod benchmarks;
pub mod certify;
pub mod error;
pub mod lattice;
pub mod models;
pub mod oracle;
pub mod semigroup;
pub mod solver;

pub use certify::{quasi_positivity_report, CertificationReport, CertifyConfig, FnField, NonlinearField};
pub use error::{Error, Result};
pub use lattice::{Component, ComponentKind, NormKind, SpaceSpec, StateVector};
pub use semigroup::{GeneratorMatrix, GrowthBound};
pub use solver::{solve, CauchyProblem, SolverConfig, Trajectory};

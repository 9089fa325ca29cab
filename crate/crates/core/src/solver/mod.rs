//! Mild-solution integrator: the shifted fixed-point map on a window, Picard iteration,
//! window chaining and blow-up detection.

mod export;
mod problem;
mod solve;
mod window;

pub use export::{format_f64, read_trajectory_csv, write_trajectory_csv, CsvColumns, CsvTable, RunMetadata, WindowSummary};
pub use problem::{CauchyProblem, PicardStart, SolverConfig};
pub use solve::{solve, source_bound, BlowUp, BlowUpReason, Trajectory};
pub use window::{
    contraction_bound, exp_step, picard_window, picard_window_from, psi_apply, window_length, window_length_capped,
    Window, WindowParams, WindowResult,
};

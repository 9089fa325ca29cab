//! Fixtures shared by the benchmark targets.

use posmild::models::{build_epidemic, build_oncology, BuiltModel, EpidemicParams, OncologyGrid, OncologyParams};
use posmild::solver::{source_bound, SolverConfig, WindowParams};
use posmild::{quasi_positivity_report, CertifyConfig, Result};

pub fn epidemic(cells: usize) -> BuiltModel {
    build_epidemic(&EpidemicParams::default(), cells).expect("default epidemic parameters are valid")
}

pub fn oncology_square(n: usize) -> BuiltModel {
    let grid = OncologyGrid::Rectangle {
        lx: 1.0,
        ly: 1.0,
        nx: n,
        ny: n,
    };
    build_oncology(&OncologyParams::default(), &grid).expect("default oncology parameters are valid")
}

/// Window parameters certified at twice the norm of the model's default initial state.
pub fn certified_params(model: &BuiltModel) -> Result<WindowParams> {
    let space = &model.problem.space;
    let m = 2.0 * space.norm_of(&model.default_initial);
    let cfg = CertifyConfig {
        samples: 256,
        ..Default::default()
    };
    let report = quasi_positivity_report(model.problem.field.as_ref(), space, m, &cfg)?;
    Ok(WindowParams {
        lambda: report.lambda_hat,
        k: report.k_hat,
        radius: m,
        certified_radius: m,
        gamma_f: source_bound(&model.problem),
    })
}

pub fn window_config(nodes: usize) -> SolverConfig {
    SolverConfig {
        quadrature_nodes_per_window: nodes,
        ..Default::default()
    }
}

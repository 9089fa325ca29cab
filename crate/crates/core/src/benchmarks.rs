//! Reduction benchmarks: model configurations whose discrete solution has an exact
//! low-dimensional description, compared against closed forms or RK4 on that description.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::StateVector;
use crate::models::{
    build_epidemic, build_oncology, build_predator_prey, Control, EpidemicParams, OncologyGrid, OncologyParams,
    PredatorPreyParams, Profile,
};
use crate::oracle::{linear_relax, rk4_solve, sample};
use crate::solver::{solve, SolverConfig, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    /// Total mass of the epidemic model with `mu = mu0` against `N' = gamma - mu0 N`.
    EpidemicMassBalance,
    /// Predator-prey with no births and constant rates against the 2-ODE reduction.
    PredatorReduction,
    /// Oncology with homogeneous data against the 3-ODE reduction.
    OncologyReduction,
}

impl BenchmarkKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "epidemic_mass_balance" => Ok(Self::EpidemicMassBalance),
            "predator_reduction" => Ok(Self::PredatorReduction),
            "oncology_reduction" => Ok(Self::OncologyReduction),
            other => Err(Error::Parameter(format!(
                "unknown benchmark `{other}`; expected epidemic_mass_balance, predator_reduction or oncology_reduction"
            ))),
        }
    }

    /// Default refinement ladder: cell counts for the epidemic, nodes per window otherwise.
    pub fn default_ladder(self) -> Vec<usize> {
        match self {
            Self::EpidemicMassBalance => vec![50, 100, 200, 400],
            Self::PredatorReduction => vec![250, 500, 1000, 2000],
            Self::OncologyReduction => vec![1250, 2500, 5000, 10000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub resolution: usize,
    pub error: f64,
    /// Largest `ratio - contraction_bound` over all windows.
    pub contraction_excess: f64,
    pub min_scaled_component: f64,
    pub windows: usize,
}

fn finish(resolution: usize, error: f64, traj: &Trajectory) -> BenchmarkRun {
    BenchmarkRun {
        resolution,
        error,
        contraction_excess: traj.worst_contraction_excess(),
        min_scaled_component: traj.min_scaled_component,
        windows: traj.windows.len(),
    }
}

/// Epidemic parameters for the mass-balance check: `mu = mu0` and a load range wide
/// enough that no infected mass reaches `i_max` before `t = 5`.
pub fn mass_balance_params() -> EpidemicParams {
    EpidemicParams {
        mu: Profile::Constant(0.2),
        beta: 0.2,
        i_max: 30.0,
        ..Default::default()
    }
}

/// Quadrature nodes per window tied to the cell count, so the time step halves with the mesh.
pub fn mass_balance_nodes(cells: usize) -> usize {
    4 * cells
}

/// `max_t |N(t) - N_exact(t)| / N0` on `[0, horizon]`, where `N = S + sum w I`.
pub fn epidemic_mass_balance(cells: usize, nodes: usize, horizon: f64) -> Result<BenchmarkRun> {
    let p = mass_balance_params();
    let built = build_epidemic(&p, cells)?;
    let y0 = &built.default_initial;
    let cfg = SolverConfig {
        horizon,
        quadrature_nodes_per_window: nodes,
        ..Default::default()
    };
    let traj = solve(&built.problem, y0, &cfg)?;
    let space = &built.problem.space;
    let n0 = space.norm_of(y0);
    let error = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| (space.norm_of(s) - linear_relax(p.gamma, p.mu0, n0, *t)).abs())
        .fold(0.0, f64::max)
        / n0;
    Ok(finish(cells, error, &traj))
}

/// Rates for the predator reduction: `beta = 0`, constant `mu` and `gamma`.
pub fn predator_reduction_params() -> PredatorPreyParams {
    PredatorPreyParams {
        mu: Profile::Constant(0.1),
        gamma_pred: Profile::Constant(0.5),
        beta: Profile::Constant(0.0),
        ..Default::default()
    }
}

/// Prey mass and predator initial values for the reduction benchmarks.
pub const PREDATOR_INITIAL: (f64, f64) = (0.5, 0.2);

/// Relative sup-norm error of `(X, y)` against RK4 on
/// `X' = -mu X - gamma y X`, `y' = alpha gamma y X - delta y`.
pub fn predator_reduction(cells: usize, nodes: usize, horizon: f64) -> Result<BenchmarkRun> {
    let p = predator_reduction_params();
    let built = build_predator_prey(&p, cells)?;
    let space = &built.problem.space;
    let w = p.a_max / cells as f64;
    // Prey concentrated on young ages so no mass reaches a_max before the horizon.
    let (mass, pred) = PREDATOR_INITIAL;
    let shape: Vec<f64> = built.centers[0].iter().map(|a| (-a).exp()).collect();
    let total: f64 = shape.iter().sum::<f64>() * w;
    let mut y0: Vec<f64> = shape.iter().map(|v| v * mass / total).collect();
    y0.push(pred);

    let cfg = SolverConfig {
        horizon,
        quadrature_nodes_per_window: nodes,
        ..Default::default()
    };
    let traj = solve(&built.problem, &y0, &cfg)?;

    let (mu, gamma, alpha, delta) = (0.1, 0.5, p.alpha, p.delta);
    let reference = rk4_solve(
        |y: &[f64], _t: f64, out: &mut [f64]| {
            out[0] = -mu * y[0] - gamma * y[1] * y[0];
            out[1] = alpha * gamma * y[1] * y[0] - delta * y[1];
        },
        &[mass, pred],
        1e-3,
        horizon,
    )?;
    let reduced = |s: &StateVector| [space.component_norms(s)[0], s[cells]];
    let error = relative_sup_error(&traj, &reference, reduced);
    Ok(finish(nodes, error, &traj))
}

/// Oncology parameters for the homogeneous reduction, on a coarse interval.
pub fn oncology_reduction_params() -> (OncologyParams, OncologyGrid) {
    let grid = OncologyGrid::Interval {
        length: 1.0,
        cells: 4,
    };
    let p = OncologyParams {
        u: Control::Constant(0.05),
        grid: grid.clone(),
        ..Default::default()
    };
    (p, grid)
}

pub const ONCOLOGY_INITIAL: [f64; 3] = [0.5, 0.8, 0.1];

/// Relative sup-norm error of the cell-0 values against RK4 on the 3-ODE reduction, and the
/// largest spread between cells of one species.
pub fn oncology_reduction(nodes: usize, horizon: f64) -> Result<(BenchmarkRun, f64)> {
    let (p, grid) = oncology_reduction_params();
    let built = build_oncology(&p, &grid)?;
    let n = grid.cells();
    let y0: Vec<f64> = ONCOLOGY_INITIAL.iter().flat_map(|v| std::iter::repeat(*v).take(n)).collect();
    let cfg = SolverConfig {
        horizon,
        quadrature_nodes_per_window: nodes,
        ..Default::default()
    };
    let traj = solve(&built.problem, &y0, &cfg)?;

    let [a1, a2, a3] = p.a;
    let [k1, k2] = p.k;
    let (al12, al21, ka13, ka23) = (p.alpha12, p.alpha21, p.kappa13, p.kappa23);
    let u = 0.05;
    let reference = rk4_solve(
        |y: &[f64], _t: f64, out: &mut [f64]| {
            out[0] = a1 * (1.0 - y[0] / k1) * y[0] - (al12 * y[1] + ka13 * y[2]) * y[0];
            out[1] = a2 * (1.0 - y[1] / k2) * y[1] - (al21 * y[0] + ka23 * y[2]) * y[1];
            out[2] = -a3 * y[2] + u;
        },
        &ONCOLOGY_INITIAL,
        1e-3,
        horizon,
    )?;
    let error = relative_sup_error(&traj, &reference, |s| [s[0], s[n], s[2 * n]]);
    let spread = traj
        .states
        .iter()
        .flat_map(|s| {
            (0..3).map(move |c| {
                let block = &s[c * n..(c + 1) * n];
                let hi = block.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = block.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
        })
        .fold(0.0, f64::max);
    Ok((finish(nodes, error, &traj), spread))
}

/// `max_t |reduced(y(t)) - ref(t)|_inf / max_t |ref(t)|_inf` over the trajectory's times.
pub fn relative_sup_error<const N: usize>(
    traj: &Trajectory,
    reference: &[(f64, Vec<f64>)],
    reduced: impl Fn(&StateVector) -> [f64; N],
) -> f64 {
    let scale = reference
        .iter()
        .flat_map(|(_, v)| v.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let mut err: f64 = 0.0;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let want = sample(reference, *t);
        for (a, b) in reduced(s).iter().zip(&want) {
            err = err.max((a - b).abs());
        }
    }
    err / scale
}

/// Runs `kind` over `ladder`, one row per rung.
pub fn run_ladder(kind: BenchmarkKind, ladder: &[usize]) -> Result<Vec<BenchmarkRun>> {
    ladder
        .iter()
        .map(|&r| match kind {
            BenchmarkKind::EpidemicMassBalance => epidemic_mass_balance(r, mass_balance_nodes(r), 5.0),
            BenchmarkKind::PredatorReduction => predator_reduction(100, r, 10.0),
            BenchmarkKind::OncologyReduction => oncology_reduction(r, 2.0).map(|(run, _)| run),
        })
        .collect()
}

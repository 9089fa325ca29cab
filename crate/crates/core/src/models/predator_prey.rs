//! Age-structured prey `x(t, a)` with unstructured predator `y(t)`.
//!
//! ```text
//! x_t + x_a = -mu(a) x - y gamma(a) x,      x(t, 0) = int beta(a) x(t, a) da
//! y'        = alpha y int gamma(a) x(t, a) da - delta y
//! ```
//!
//! Ages `(0, a_max)` with unit-speed upwind transport; births enter the first age cell
//! through the generator.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::NonlinearField;
use crate::error::{Error, Result};
use crate::lattice::{Component, NormKind, SpaceSpec, StateVector};
use crate::semigroup::GeneratorMatrix;
use crate::solver::CauchyProblem;

use super::profile::{cell_centers, Profile};
use super::{positive, BuiltModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredatorPreyParams {
    /// Assimilation coefficient in `(0, 1)`.
    pub alpha: f64,
    pub delta: f64,
    pub mu0: f64,
    pub a_max: f64,
    pub mu: Profile,
    pub gamma_pred: Profile,
    pub beta: Profile,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for PredatorPreyParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            delta: 0.3,
            mu0: 0.1,
            a_max: 40.0,
            mu: Profile::Affine {
                at_start: 0.1,
                slope: 0.005,
            },
            gamma_pred: Profile::Constant(0.5),
            beta: Profile::Exponential {
                amplitude: 0.4,
                rate: 0.1,
            },
            base_dir: None,
        }
    }
}

impl PredatorPreyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        positive("delta", self.delta)?;
        positive("mu0", self.mu0)?;
        positive("a_max", self.a_max)?;
        Ok(())
    }

    /// Rate tables at the centers of `n_cells` age cells: `(mu, gamma, beta)`.
    pub fn resolve(&self, n_cells: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let centers = cell_centers(0.0, self.a_max, n_cells);
        let base = self.base_dir.as_deref();
        let mu = self.mu.resolve(&centers, 0.0, base)?;
        let gamma = self.gamma_pred.resolve(&centers, 0.0, base)?;
        let beta = self.beta.resolve(&centers, 0.0, base)?;
        if let Some(j) = mu.iter().position(|&v| v < self.mu0) {
            return Err(Error::Parameter(format!(
                "mu must be at least mu0 = {} on the grid, got {} in cell {j}",
                self.mu0, mu[j]
            )));
        }
        for (name, v) in [("gamma_pred", &gamma), ("beta", &beta)] {
            if let Some(j) = v.iter().position(|&x| x < 0.0) {
                return Err(Error::Parameter(format!("{name} must be nonnegative, got {} in cell {j}", v[j])));
            }
        }
        Ok((mu, gamma, beta))
    }
}

/// `m * max_j gamma_j` on an `n_cells` age grid.
pub fn predator_shift(p: &PredatorPreyParams, n_cells: usize, m: f64) -> Result<f64> {
    let (_, gamma, _) = p.resolve(n_cells)?;
    Ok(m * gamma.iter().copied().fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct PredatorPreyField {
    alpha: f64,
    width: f64,
    gamma: Vec<f64>,
    gamma_max: f64,
}

impl NonlinearField for PredatorPreyField {
    fn evaluate(&self, y: &[f64], _t: f64, out: &mut [f64]) {
        let n = self.gamma.len();
        let z = y[n];
        let mut eaten = 0.0;
        for j in 0..n {
            let loss = z * self.gamma[j] * y[j];
            out[j] = -loss;
            eaten += loss * self.width;
        }
        out[n] = self.alpha * eaten;
    }

    fn analytic_shift(&self, m: f64) -> Option<f64> {
        Some(m * self.gamma_max)
    }

    /// Bilinear in `(x, z)`: `|d(z gamma x)|_1 (1 + alpha)` with `|x|_1, z <= m`.
    fn analytic_lipschitz(&self, m: f64) -> Option<f64> {
        Some((1.0 + self.alpha) * self.gamma_max * m)
    }

    fn zero_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Generator and field over `[x, y]` with `n_cells` uniform age cells.
pub fn build_predator_prey(p: &PredatorPreyParams, n_cells: usize) -> Result<BuiltModel> {
    p.validate()?;
    if n_cells < 2 {
        return Err(Error::Parameter(format!("age grid needs at least 2 cells, got {n_cells}")));
    }
    let (mu, gamma, beta) = p.resolve(n_cells)?;
    let w = p.a_max / n_cells as f64;
    let space = SpaceSpec::new(vec![
        Component::grid_uniform("x", n_cells, w, NormKind::L1),
        Component::scalar("y"),
    ])?;
    let mut t = Vec::with_capacity(3 * n_cells + 1);
    for j in 0..n_cells {
        t.push((j, j, -1.0 / w - mu[j]));
        if j + 1 < n_cells {
            t.push((j + 1, j, 1.0 / w));
        }
        // Births sum_k w beta_k x_k enter cell 0 as a flux, i.e. divided by its width.
        if beta[j] != 0.0 {
            t.push((0, j, beta[j]));
        }
    }
    t.push((n_cells, n_cells, -p.delta));
    let generator = GeneratorMatrix::from_triplets(n_cells + 1, t)?;
    let field = PredatorPreyField {
        alpha: p.alpha,
        width: w,
        gamma_max: gamma.iter().copied().fold(0.0, f64::max),
        gamma,
    };
    let problem = CauchyProblem::new(space, generator, Arc::new(field))?;
    let centers = cell_centers(0.0, p.a_max, n_cells);
    let mut y0: Vec<f64> = centers.iter().map(|a| (-a / 2.0).exp()).collect();
    y0.push(0.5);
    Ok(BuiltModel {
        name: "predator_prey".into(),
        problem,
        default_initial: StateVector(y0),
        centers: vec![centers, vec![0.0]],
        domain_start: vec![0.0, 0.0],
    })
}

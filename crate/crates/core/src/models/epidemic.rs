//! Susceptible/infected model with the infected class structured by infection load.
//!
//! ```text
//! S'   = gamma - (mu0 + alpha) S - S T(beta I)
//! I_t  = -(nu i I)_i - mu(i) I + phi(i) S T(beta I),     nu kappa I(t, kappa) = alpha S
//! ```
//!
//! on loads `(kappa, i_max)`, with `T(h) = sum_j w_j h_j`. The transport is donor-cell upwind
//! and the boundary inflow `alpha S` enters the first load cell through the generator.

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
pub struct EpidemicParams {
    pub gamma: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub kappa: f64,
    pub i_max: f64,
    /// Infected mortality over loads, at least `mu0`.
    pub mu: Profile,
    /// Load distribution of new infections; renormalized to unit discrete integral.
    pub phi: Profile,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for EpidemicParams {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            mu0: 0.2,
            alpha: 0.3,
            beta: 0.5,
            nu: 0.2,
            kappa: 1.0,
            i_max: 20.0,
            mu: Profile::Affine {
                at_start: 0.2,
                slope: 0.01,
            },
            phi: Profile::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
            base_dir: None,
        }
    }
}

impl EpidemicParams {
    pub fn validate(&self) -> Result<()> {
        self.validate_with(false)
    }

    fn validate_with(&self, allow_zero_alpha: bool) -> Result<()> {
        positive("beta", self.beta)?;
        positive("mu0", self.mu0)?;
        positive("nu", self.nu)?;
        if allow_zero_alpha {
            if !(self.alpha >= 0.0) {
                return Err(Error::Parameter(format!("alpha must be nonnegative, got {}", self.alpha)));
            }
        } else {
            positive("alpha", self.alpha)?;
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        positive("kappa", self.kappa)?;
        if !(self.i_max > self.kappa) || !self.i_max.is_finite() {
            return Err(Error::Parameter(format!(
                "i_max must exceed kappa, got i_max = {} and kappa = {}",
                self.i_max, self.kappa
            )));
        }
        Ok(())
    }
}

/// `m beta`.
pub fn epidemic_shift(p: &EpidemicParams, m: f64) -> f64 {
    m * p.beta
}

#[derive(Clone, Debug)]
pub struct EpidemicField {
    gamma: f64,
    beta: f64,
    widths: Vec<f64>,
    phi: Vec<f64>,
}

impl EpidemicField {
    fn load(&self, infected: &[f64]) -> f64 {
        self.beta * infected.iter().zip(&self.widths).map(|(i, w)| i * w).sum::<f64>()
    }
}

impl NonlinearField for EpidemicField {
    fn evaluate(&self, y: &[f64], _t: f64, out: &mut [f64]) {
        let s = y[0];
        let force = s * self.load(&y[1..]);
        out[0] = self.gamma - force;
        for (o, phi) in out[1..].iter_mut().zip(&self.phi) {
            *o = phi * force;
        }
    }

    fn analytic_shift(&self, m: f64) -> Option<f64> {
        Some(m * self.beta)
    }

    /// `|d(S T)| (1 + sum w phi) beta` with `S, T <= m` and `sum w phi = 1`.
    fn analytic_lipschitz(&self, m: f64) -> Option<f64> {
        let mass: f64 = self.phi.iter().zip(&self.widths).map(|(p, w)| p * w).sum();
        Some((1.0 + mass) * self.beta * m)
    }

    fn zero_bound(&self) -> Option<f64> {
        Some(self.gamma)
    }
}

/// Generator and field over `[S, I]` with `n_cells` uniform load cells.
pub fn build_epidemic(p: &EpidemicParams, n_cells: usize) -> Result<BuiltModel> {
    p.validate()?;
    build(p, n_cells)
}

/// As [`build_epidemic`] but accepting `alpha = 0` (decoupled limit used in tests).
pub fn build_epidemic_unvalidated(p: &EpidemicParams, n_cells: usize) -> Result<BuiltModel> {
    p.validate_with(true)?;
    build(p, n_cells)
}

fn build(p: &EpidemicParams, n_cells: usize) -> Result<BuiltModel> {
    if n_cells < 2 {
        return Err(Error::Parameter(format!("epidemic grid needs at least 2 cells, got {n_cells}")));
    }
    let w = (p.i_max - p.kappa) / n_cells as f64;
    let centers = cell_centers(p.kappa, p.i_max, n_cells);
    let base = p.base_dir.as_deref();
    let mu = p.mu.resolve(&centers, p.kappa, base)?;
    if let Some(j) = mu.iter().position(|&m| m < p.mu0) {
        return Err(Error::Parameter(format!(
            "mu must be at least mu0 = {} on the grid, got {} in cell {j}",
            p.mu0, mu[j]
        )));
    }
    let mut phi = p.phi.resolve(&centers, p.kappa, base)?;
    if let Some(j) = phi.iter().position(|&v| v < 0.0) {
        return Err(Error::Parameter(format!("phi must be nonnegative, got {} in cell {j}", phi[j])));
    }
    let integral: f64 = phi.iter().map(|v| v * w).sum();
    if !(integral > 0.0) {
        return Err(Error::Parameter("phi must have positive integral on the grid".into()));
    }
    let factor = 1.0 / integral;
    phi.iter_mut().for_each(|v| *v *= factor);

    let space = SpaceSpec::new(vec![
        Component::scalar("S"),
        Component::grid_uniform("I", n_cells, w, NormKind::L1),
    ])?;
    let n = n_cells + 1;
    let mut t = Vec::with_capacity(3 * n);
    t.push((0, 0, -(p.mu0 + p.alpha)));
    t.push((1, 0, p.alpha / w));
    for j in 0..n_cells {
        let face = p.kappa + (j + 1) as f64 * w;
        let out_rate = p.nu * face / w;
        t.push((j + 1, j + 1, -out_rate - mu[j]));
        if j + 1 < n_cells {
            t.push((j + 2, j + 1, out_rate));
        }
    }
    let generator = GeneratorMatrix::from_triplets(n, t)?;
    let field = EpidemicField {
        gamma: p.gamma,
        beta: p.beta,
        widths: vec![w; n_cells],
        phi,
    };
    let mut problem = CauchyProblem::new(space, generator, Arc::new(field))?;
    if (factor - 1.0).abs() > 1e-8 {
        problem = problem.with_note(format!("phi renormalized by factor {factor} to unit discrete integral"));
    }

    let mut y0 = vec![1.0];
    y0.extend(centers.iter().map(|i| 0.2 * (-(i - p.kappa)).exp()));
    Ok(BuiltModel {
        name: "epidemic".into(),
        problem,
        default_initial: StateVector(y0),
        centers: vec![vec![0.0], centers],
        domain_start: vec![0.0, p.kappa],
    })
}

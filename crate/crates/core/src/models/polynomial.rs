//! Scalar `y' = a y + sum_k c_k y^k`, for blow-up and cone-boundary demonstrations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::NonlinearField;
use crate::error::{Error, Result};
use crate::lattice::{Component, SpaceSpec, StateVector};
use crate::semigroup::GeneratorMatrix;
use crate::solver::CauchyProblem;

use super::BuiltModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolynomialParams {
    /// Linear part, placed in the generator.
    pub a: f64,
    /// `c_0, c_1, ...` of the nonlinearity.
    pub coefficients: Vec<f64>,
}

impl Default for PolynomialParams {
    fn default() -> Self {
        Self {
            a: 0.0,
            coefficients: vec![0.0, 0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct PolynomialField {
    c: Vec<f64>,
}

impl NonlinearField for PolynomialField {
    fn evaluate(&self, y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.c.iter().rev().fold(0.0, |acc, c| acc * y[0] + c);
    }

    /// `-f(y)/y <= -c_1 + sum_{k >= 2} max(0, -c_k) m^{k-1}` on `(0, m]` when `c_0 >= 0`.
    fn analytic_shift(&self, m: f64) -> Option<f64> {
        let c1 = self.c.get(1).copied().unwrap_or(0.0);
        let tail: f64 = self
            .c
            .iter()
            .enumerate()
            .skip(2)
            .map(|(k, c)| (-c).max(0.0) * m.powi(k as i32 - 1))
            .sum();
        Some((-c1 + tail).max(0.0))
    }

    /// `sup |f'|` on `[0, m]`.
    fn analytic_lipschitz(&self, m: f64) -> Option<f64> {
        Some(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c.abs() * m.powi(k as i32 - 1))
                .sum(),
        )
    }

    fn zero_bound(&self) -> Option<f64> {
        Some(self.c.first().copied().unwrap_or(0.0).abs())
    }
}

pub fn build_polynomial(p: &PolynomialParams) -> Result<BuiltModel> {
    if !p.a.is_finite() || p.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parameter("polynomial coefficients must be finite".into()));
    }
    let space = SpaceSpec::new(vec![Component::scalar("y")])?;
    let generator = GeneratorMatrix::diagonal(&[p.a])?;
    let field = PolynomialField {
        c: p.coefficients.clone(),
    };
    let problem = CauchyProblem::new(space, generator, Arc::new(field))?;
    Ok(BuiltModel {
        name: "polynomial".into(),
        problem,
        default_initial: StateVector(vec![1.0]),
        centers: vec![vec![0.0]],
        domain_start: vec![0.0],
    })
}

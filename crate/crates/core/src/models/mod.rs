//! Builders for the three biological systems, plus a scalar polynomial model.
//!
//! Every builder validates its parameters, discretizes the linear part into an exactly
//! Metzler generator and attaches the nonlinearity with its analytic shift and Lipschitz
//! bounds.

mod epidemic;
mod oncology;
mod polynomial;
mod predator_prey;
mod profile;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::StateVector;
use crate::solver::CauchyProblem;

pub use epidemic::{build_epidemic, build_epidemic_unvalidated, epidemic_shift, EpidemicField, EpidemicParams};
pub use oncology::{build_oncology, oncology_shift, Control, OncologyField, OncologyGrid, OncologyParams};
pub use polynomial::{build_polynomial, PolynomialField, PolynomialParams};
pub use predator_prey::{build_predator_prey, predator_shift, PredatorPreyField, PredatorPreyParams};
pub use profile::{cell_centers, read_column, Profile};

/// A built problem with its default initial state and per-component cell centers.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub name: String,
    pub problem: CauchyProblem,
    pub default_initial: StateVector,
    pub centers: Vec<Vec<f64>>,
    /// Left end of each component's domain, the origin for profile shapes.
    pub domain_start: Vec<f64>,
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Epidemic,
    PredatorPrey,
    Oncology,
    Polynomial,
}

fn default_cells() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpidemicSection {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(flatten)]
    pub params: EpidemicParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredatorPreySection {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(flatten)]
    pub params: PredatorPreyParams,
}

impl Default for EpidemicSection {
    fn default() -> Self {
        Self {
            cells: default_cells(),
            params: EpidemicParams::default(),
        }
    }
}

impl Default for PredatorPreySection {
    fn default() -> Self {
        Self {
            cells: default_cells(),
            params: PredatorPreyParams::default(),
        }
    }
}

/// Initial state: a full `state` vector, or per-component profiles keyed by label
/// (components left out keep the model default).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSpec {
    pub state: Option<Vec<f64>>,
    #[serde(flatten)]
    pub components: BTreeMap<String, Profile>,
}

/// The model part of a TOML configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub epidemic: EpidemicSection,
    #[serde(default)]
    pub predator_prey: PredatorPreySection,
    #[serde(default)]
    pub oncology: OncologyParams,
    #[serde(default)]
    pub polynomial: PolynomialParams,
    #[serde(default)]
    pub initial: InitialSpec,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolves relative profile file paths against `dir`.
    pub fn with_base_dir(mut self, dir: &Path) -> Self {
        let dir = Some(PathBuf::from(dir));
        self.epidemic.params.base_dir = dir.clone();
        self.predator_prey.params.base_dir = dir.clone();
        self.oncology.base_dir = dir;
        self
    }

    fn base_dir(&self) -> Option<&Path> {
        self.epidemic.params.base_dir.as_deref()
    }

    pub fn build(&self) -> Result<BuiltModel> {
        match self.model {
            ModelKind::Epidemic => build_epidemic(&self.epidemic.params, self.epidemic.cells),
            ModelKind::PredatorPrey => build_predator_prey(&self.predator_prey.params, self.predator_prey.cells),
            ModelKind::Oncology => build_oncology(&self.oncology, &self.oncology.grid),
            ModelKind::Polynomial => build_polynomial(&self.polynomial),
        }
    }

    pub fn initial_state(&self, built: &BuiltModel) -> Result<StateVector> {
        initial_state(&self.initial, built, self.base_dir())
    }
}

pub fn initial_state(spec: &InitialSpec, built: &BuiltModel, base: Option<&Path>) -> Result<StateVector> {
    let space = &built.problem.space;
    let y = match &spec.state {
        Some(v) => {
            if !spec.components.is_empty() {
                return Err(Error::Parameter(
                    "initial state takes either `state` or per-component entries, not both".into(),
                ));
            }
            StateVector(v.clone())
        }
        None => {
            let mut y = built.default_initial.clone();
            for (label, profile) in &spec.components {
                let c = space
                    .components()
                    .iter()
                    .position(|c| &c.label == label)
                    .ok_or_else(|| Error::Parameter(format!("initial state names unknown component `{label}`")))?;
                let values = profile.resolve(&built.centers[c], built.domain_start[c], base)?;
                y[space.range(c)].copy_from_slice(&values);
            }
            y
        }
    };
    space.check(&y)?;
    if let Some(i) = y.iter().position(|v| *v < 0.0) {
        return Err(Error::Parameter(format!(
            "initial state must be nonnegative, got {} at index {i}",
            y[i]
        )));
    }
    Ok(y)
}

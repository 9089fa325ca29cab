use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::{CertifyConfig, NonlinearField};
use crate::error::{Error, Result};
use crate::lattice::SpaceSpec;
use crate::semigroup::{growth_bound, GeneratorMatrix, GrowthBound};

/// `y' = A y + f(y, t)` on a discrete lattice, with a Metzler-verified generator.
#[derive(Clone)]
pub struct CauchyProblem {
    pub space: SpaceSpec,
    pub generator: GeneratorMatrix,
    pub field: Arc<dyn NonlinearField>,
    pub growth: GrowthBound,
    /// Build-time remarks (renormalizations, formula discrepancies).
    pub notes: Vec<String>,
}

impl CauchyProblem {
    /// Checks dimensions and the Metzler property, then derives the growth bound.
    pub fn new(
        space: SpaceSpec,
        generator: GeneratorMatrix,
        field: Arc<dyn NonlinearField>,
    ) -> Result<Self> {
        if generator.dim() != space.dof() {
            return Err(Error::DimensionMismatch {
                expected: space.dof(),
                found: generator.dim(),
            });
        }
        if let Some((row, col, value)) = generator.first_negative_off_diagonal() {
            return Err(Error::NotMetzler { row, col, value });
        }
        let growth = growth_bound(&space, &generator)?;
        Ok(Self {
            space,
            generator,
            field,
            growth,
            notes: Vec::new(),
        })
    }

    pub fn with_growth(mut self, growth: GrowthBound) -> Self {
        self.growth = growth;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.space.dof()
    }

    /// `A y + f(y, t)`, the method-of-lines right-hand side.
    pub fn rhs(&self, y: &[f64], t: f64, out: &mut [f64]) {
        let mut fy = vec![0.0; y.len()];
        self.field.evaluate(y, t, &mut fy);
        self.generator.matvec(y, out);
        out.iter_mut().zip(&fy).for_each(|(o, f)| *o += f);
    }
}

impl fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("dof", &self.space.dof())
            .field("nnz", &self.generator.nnz())
            .field("growth", &self.growth)
            .field("notes", &self.notes)
            .finish()
    }
}

/// How the Picard iteration is seeded on each window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStart {
    /// The constant path `y(t) = y0`.
    #[default]
    Constant,
    /// The free orbit `t -> T_A(t) y0`.
    SemigroupOrbit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub quadrature_nodes_per_window: usize,
    pub window_cap: f64,
    pub blow_up_norm_threshold: f64,
    pub horizon: f64,
    /// Windows shorter than this count toward the blow-up declaration.
    pub short_window: f64,
    pub short_window_count: usize,
    pub max_windows: usize,
    pub picard_start: PicardStart,
    /// Keep every quadrature-node state in the window diagnostics.
    pub keep_node_states: bool,
    pub certify: CertifyConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            max_picard_iters: 200,
            quadrature_nodes_per_window: 16,
            window_cap: 1.0,
            blow_up_norm_threshold: 1e12,
            horizon: 1.0,
            short_window: 1e-8,
            short_window_count: 5,
            max_windows: 1_000_000,
            picard_start: PicardStart::Constant,
            keep_node_states: false,
            certify: CertifyConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("picard_tol", self.picard_tol),
            ("window_cap", self.window_cap),
            ("blow_up_norm_threshold", self.blow_up_norm_threshold),
            ("short_window", self.short_window),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.window_cap > 1.0 {
            return Err(Error::Parameter(format!(
                "window_cap must be at most 1, got {}",
                self.window_cap
            )));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::Parameter(format!(
                "horizon must be finite and nonnegative, got {}",
                self.horizon
            )));
        }
        if self.max_picard_iters == 0 || self.quadrature_nodes_per_window == 0 {
            return Err(Error::Parameter(
                "max_picard_iters and quadrature_nodes_per_window must be positive".into(),
            ));
        }
        Ok(())
    }
}

//! Tumour cells `y1`, normal tissue `y2` and drug `y3` on a 1D interval or 2D rectangle.
//!
//! ```text
//! y1_t = d1 Lap y1 + a1 (1 - y1/k1) y1 - (alpha12 y2 + kappa13 y3) y1
//! y2_t = d2 Lap y2 + a2 (1 - y2/k2) y2 - (alpha21 y1 + kappa23 y3) y2
//! y3_t = d3 Lap y3 - a3 y3 + u
//! ```
//!
//! with homogeneous Neumann conditions, closed by reflecting ghost cells.

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
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OncologyGrid {
    Interval { length: f64, cells: usize },
    Rectangle { lx: f64, ly: f64, nx: usize, ny: usize },
}

impl Default for OncologyGrid {
    fn default() -> Self {
        OncologyGrid::Interval {
            length: 1.0,
            cells: 100,
        }
    }
}

impl OncologyGrid {
    pub fn cells(&self) -> usize {
        match *self {
            OncologyGrid::Interval { cells, .. } => cells,
            OncologyGrid::Rectangle { nx, ny, .. } => nx * ny,
        }
    }

    /// Cell volume (length in 1D, area in 2D).
    pub fn cell_volume(&self) -> f64 {
        match *self {
            OncologyGrid::Interval { length, cells } => length / cells as f64,
            OncologyGrid::Rectangle { lx, ly, nx, ny } => (lx / nx as f64) * (ly / ny as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            OncologyGrid::Interval { length, cells } => {
                positive("length", length)?;
                if cells < 1 {
                    return Err(Error::Parameter("interval needs at least one cell".into()));
                }
            }
            OncologyGrid::Rectangle { lx, ly, nx, ny } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                if nx < 1 || ny < 1 {
                    return Err(Error::Parameter("rectangle needs at least one cell per axis".into()));
                }
            }
        }
        Ok(())
    }

    /// First-axis cell centers, repeated along the second axis in 2D (row-major, x fastest).
    fn x_centers(&self) -> Vec<f64> {
        match *self {
            OncologyGrid::Interval { length, cells } => cell_centers(0.0, length, cells),
            OncologyGrid::Rectangle { lx, nx, ny, .. } => {
                let c = cell_centers(0.0, lx, nx);
                (0..ny).flat_map(|_| c.iter().copied()).collect()
            }
        }
    }

    /// Neumann Laplacian stencil triplets `(row, col, coefficient)` for unit diffusivity.
    /// A missing neighbour is a reflecting ghost cell, which drops that face entirely.
    fn laplacian(&self) -> Vec<(usize, usize, f64)> {
        let (nx, ny, hx, hy) = match *self {
            OncologyGrid::Interval { length, cells } => (cells, 1, length / cells as f64, 1.0),
            OncologyGrid::Rectangle { lx, ly, nx, ny } => (nx, ny, lx / nx as f64, ly / ny as f64),
        };
        let (cx, cy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
        let mut t = Vec::with_capacity(5 * nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = iy * nx + ix;
                let mut face = |other: usize, c: f64| {
                    t.push((idx, other, c));
                    t.push((idx, idx, -c));
                };
                if ix > 0 {
                    face(idx - 1, cx);
                }
                if ix + 1 < nx {
                    face(idx + 1, cx);
                }
                if iy > 0 {
                    face(idx - nx, cy);
                }
                if iy + 1 < ny {
                    face(idx + nx, cy);
                }
            }
        }
        t
    }
}

/// Drug input `u(x, t) >= 0`, piecewise constant in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Control {
    Constant(f64),
    /// `values[i]` holds on `[times[i], times[i+1])`; before `times[0]` the first value applies.
    Samples { times: Vec<f64>, values: Vec<Profile> },
}

impl Default for Control {
    fn default() -> Self {
        Control::Constant(0.05)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OncologyParams {
    pub d: [f64; 3],
    pub a: [f64; 3],
    pub k: [f64; 2],
    pub alpha12: f64,
    pub alpha21: f64,
    pub kappa13: f64,
    pub kappa23: f64,
    pub u: Control,
    pub grid: OncologyGrid,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for OncologyParams {
    fn default() -> Self {
        Self {
            d: [1e-3, 1e-3, 2e-3],
            a: [0.5, 0.4, 0.5],
            k: [2.0, 2.0],
            alpha12: 0.2,
            alpha21: 0.1,
            kappa13: 0.3,
            kappa23: 0.05,
            u: Control::default(),
            grid: OncologyGrid::default(),
            base_dir: None,
        }
    }
}

impl OncologyParams {
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.d.iter().enumerate() {
            positive(&format!("d{}", i + 1), *v)?;
        }
        for (i, v) in self.a.iter().enumerate() {
            positive(&format!("a{}", i + 1), *v)?;
        }
        for (i, v) in self.k.iter().enumerate() {
            positive(&format!("k{}", i + 1), *v)?;
        }
        positive("alpha12", self.alpha12)?;
        positive("alpha21", self.alpha21)?;
        positive("kappa23", self.kappa23)?;
        if !(self.kappa13 > self.kappa23) {
            return Err(Error::Parameter(format!(
                "kappa13 must exceed kappa23, got kappa13 = {} and kappa23 = {}",
                self.kappa13, self.kappa23
            )));
        }
        self.grid.validate()
    }

    /// Pointwise bound on a grid function with L2 norm at most `m`: `m / sqrt(volume)`.
    pub fn pointwise_bound(&self, m: f64) -> f64 {
        m / self.grid.cell_volume().sqrt()
    }

    /// Reference formula `max{m(a1/k1 - alpha12 - kappa13), m(a2/k2 - alpha21 - kappa23), a3}`.
    /// It ignores that competition and drug kill enlarge the required shift.
    pub fn reference_shift(&self, m: f64) -> f64 {
        let [a1, a2, a3] = self.a;
        let [k1, k2] = self.k;
        (m * (a1 / k1 - self.alpha12 - self.kappa13))
            .max(m * (a2 / k2 - self.alpha21 - self.kappa23))
            .max(a3)
    }

    /// A shift valid on the whole cone ball: with `0 <= y_i <= c` pointwise,
    /// `-f1/y1 <= (a1/k1 + alpha12 + kappa13) c - a1`, likewise for `y2`, and `-f3/y3 <= a3`.
    pub fn sound_shift(&self, m: f64) -> f64 {
        let c = self.pointwise_bound(m);
        let [a1, a2, a3] = self.a;
        let [k1, k2] = self.k;
        ((a1 / k1 + self.alpha12 + self.kappa13) * c - a1)
            .max((a2 / k2 + self.alpha21 + self.kappa23) * c - a2)
            .max(a3)
            .max(0.0)
    }

    /// Largest Jacobian column sum of the pointwise reaction terms under the bound `c`.
    pub fn lipschitz(&self, m: f64) -> f64 {
        let c = self.pointwise_bound(m);
        let [a1, a2, a3] = self.a;
        let [k1, k2] = self.k;
        let col1 = a1 + c * (2.0 * a1 / k1 + self.alpha12 + self.kappa13) + c * self.alpha21;
        let col2 = c * self.alpha12 + a2 + c * (2.0 * a2 / k2 + self.alpha21 + self.kappa23);
        let col3 = c * (self.kappa13 + self.kappa23) + a3;
        col1.max(col2).max(col3)
    }
}

/// `max(reference formula, sound bound)`.
pub fn oncology_shift(p: &OncologyParams, m: f64) -> f64 {
    p.reference_shift(m).max(p.sound_shift(m))
}

#[derive(Clone, Debug)]
struct ControlTable {
    times: Vec<f64>,
    /// One per time, each with one value per cell.
    values: Vec<Vec<f64>>,
}

impl ControlTable {
    fn at(&self, t: f64) -> &[f64] {
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        &self.values[i]
    }
}

#[derive(Clone, Debug)]
pub struct OncologyField {
    params: OncologyParams,
    cells: usize,
    volume: f64,
    control: ControlTable,
}

impl NonlinearField for OncologyField {
    fn evaluate(&self, y: &[f64], t: f64, out: &mut [f64]) {
        let n = self.cells;
        let p = &self.params;
        let [a1, a2, a3] = p.a;
        let [k1, k2] = p.k;
        let u = self.control.at(t);
        let (y1, rest) = y.split_at(n);
        let (y2, y3) = rest.split_at(n);
        let (o1, rest) = out.split_at_mut(n);
        let (o2, o3) = rest.split_at_mut(n);
        for j in 0..n {
            o1[j] = a1 * (1.0 - y1[j] / k1) * y1[j] - (p.alpha12 * y2[j] + p.kappa13 * y3[j]) * y1[j];
            o2[j] = a2 * (1.0 - y2[j] / k2) * y2[j] - (p.alpha21 * y1[j] + p.kappa23 * y3[j]) * y2[j];
            o3[j] = -a3 * y3[j] + u[j];
        }
    }

    fn analytic_shift(&self, m: f64) -> Option<f64> {
        Some(oncology_shift(&self.params, m))
    }

    fn analytic_lipschitz(&self, m: f64) -> Option<f64> {
        Some(self.params.lipschitz(m))
    }

    fn zero_bound(&self) -> Option<f64> {
        let norm = |u: &Vec<f64>| (u.iter().map(|v| v * v).sum::<f64>() * self.volume).sqrt();
        Some(self.control.values.iter().map(norm).fold(0.0, f64::max))
    }

    fn time_grid(&self) -> Vec<f64> {
        self.control.times.clone()
    }

    fn reference_shift(&self, m: f64) -> Option<f64> {
        Some(self.params.reference_shift(m))
    }
}

fn control_table(p: &OncologyParams) -> Result<ControlTable> {
    let centers = p.grid.x_centers();
    let cells = centers.len();
    let base = p.base_dir.as_deref();
    let table = match &p.u {
        Control::Constant(v) => ControlTable {
            times: vec![0.0],
            values: vec![vec![*v; cells]],
        },
        Control::Samples { times, values } => {
            if times.is_empty() || times.len() != values.len() {
                return Err(Error::Parameter(format!(
                    "control needs matching nonempty times and values, got {} and {}",
                    times.len(),
                    values.len()
                )));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Parameter("control times must be strictly increasing".into()));
            }
            let values = values
                .iter()
                .map(|v| v.resolve(&centers, 0.0, base))
                .collect::<Result<Vec<_>>>()?;
            ControlTable {
                times: times.clone(),
                values,
            }
        }
    };
    for (i, v) in table.values.iter().enumerate() {
        if let Some(j) = v.iter().position(|x| !(*x >= 0.0)) {
            return Err(Error::Parameter(format!(
                "control u must be nonnegative, got {} at sample {i}, cell {j}",
                v[j]
            )));
        }
    }
    Ok(table)
}

/// Generator and field over `[y1, y2, y3]`, each an L2 grid on `grid`.
pub fn build_oncology(p: &OncologyParams, grid: &OncologyGrid) -> Result<BuiltModel> {
    let p = OncologyParams {
        grid: grid.clone(),
        ..p.clone()
    };
    p.validate()?;
    let n = grid.cells();
    let volume = grid.cell_volume();
    let control = control_table(&p)?;
    let space = SpaceSpec::new(
        ["y1", "y2", "y3"]
            .iter()
            .map(|l| Component::grid_uniform(*l, n, volume, NormKind::L2))
            .collect(),
    )?;
    let lap = grid.laplacian();
    let mut t = Vec::with_capacity(3 * lap.len());
    for (s, d) in p.d.iter().enumerate() {
        t.extend(lap.iter().map(|&(i, j, v)| (s * n + i, s * n + j, d * v)));
    }
    let generator = GeneratorMatrix::from_triplets(3 * n, t)?;

    let mut notes = Vec::new();
    let reference = p.reference_shift(1.0);
    let sound = p.sound_shift(1.0);
    if reference < sound {
        notes.push(format!(
            "reference oncology shift {reference} at m = 1 is below the sound bound {sound}; the larger value is used"
        ));
    }

    let centers = grid.x_centers();
    let span = match *grid {
        OncologyGrid::Interval { length, .. } => length,
        OncologyGrid::Rectangle { lx, .. } => lx,
    };
    let mut y0: Vec<f64> = centers
        .iter()
        .map(|x| 0.5 * (-((x - 0.5 * span) / (0.15 * span)).powi(2)).exp())
        .collect();
    y0.extend(std::iter::repeat(0.8).take(n));
    y0.extend(std::iter::repeat(0.0).take(n));

    let field = OncologyField {
        params: p.clone(),
        cells: n,
        volume,
        control,
    };
    let mut problem = CauchyProblem::new(space, generator, Arc::new(field))?;
    for note in notes {
        problem = problem.with_note(note);
    }
    Ok(BuiltModel {
        name: "oncology".into(),
        problem,
        default_initial: StateVector(y0),
        centers: vec![centers.clone(), centers.clone(), centers],
        domain_start: vec![0.0; 3],
    })
}

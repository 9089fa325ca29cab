//! Numerical certification of quasi-positivity.
//!
//! For a ball radius `m` the certifier estimates a shift `lambda_m` with
//! `f(z, t) + lambda_m z >= 0` on sampled states of the cone intersected with `B_m`,
//! and a Lipschitz constant `k_m` of `f` there. Sampling can only under-estimate both,
//! so analytic formulas supplied by a model always take precedence through a `max`.
//! A component that is zero while `f` is negative there cannot be fixed by any finite
//! shift; that is reported as an uncertifiable violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SpaceSpec, StateVector};

/// Right-hand side `f(y, t)` of the semilinear problem, plus optional analytic bounds.
pub trait NonlinearField: Send + Sync {
    /// Writes `f(y, t)` into `out` (same length as `y`).
    fn evaluate(&self, y: &[f64], t: f64, out: &mut [f64]);

    /// A shift valid on the cone intersected with the ball of radius `m`.
    fn analytic_shift(&self, _m: f64) -> Option<f64> {
        None
    }

    /// A Lipschitz constant valid on the ball of radius `m`.
    fn analytic_lipschitz(&self, _m: f64) -> Option<f64> {
        None
    }

    /// Bound on `sup_t |f(0, t)|`.
    fn zero_bound(&self) -> Option<f64> {
        None
    }

    /// Times at which certification samples are evaluated.
    fn time_grid(&self) -> Vec<f64> {
        vec![0.0]
    }

    /// A reference formula for the shift, reported alongside the certified value.
    fn reference_shift(&self, _m: f64) -> Option<f64> {
        None
    }
}

type EvalFn = dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync;
type BoundFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A [`NonlinearField`] assembled from closures.
pub struct FnField {
    eval: Box<EvalFn>,
    shift: Option<Box<BoundFn>>,
    lipschitz: Option<Box<BoundFn>>,
    zero_bound: Option<f64>,
    times: Vec<f64>,
}

impl FnField {
    pub fn new(eval: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            eval: Box::new(eval),
            shift: None,
            lipschitz: None,
            zero_bound: None,
            times: vec![0.0],
        }
    }

    pub fn with_shift(mut self, shift: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.shift = Some(Box::new(shift));
        self
    }

    pub fn with_lipschitz(mut self, k: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lipschitz = Some(Box::new(k));
        self
    }

    pub fn with_zero_bound(mut self, gamma: f64) -> Self {
        self.zero_bound = Some(gamma);
        self
    }

    pub fn with_time_grid(mut self, times: Vec<f64>) -> Self {
        self.times = times;
        self
    }
}

impl NonlinearField for FnField {
    fn evaluate(&self, y: &[f64], t: f64, out: &mut [f64]) {
        (self.eval)(y, t, out)
    }
    fn analytic_shift(&self, m: f64) -> Option<f64> {
        self.shift.as_ref().map(|s| s(m))
    }
    fn analytic_lipschitz(&self, m: f64) -> Option<f64> {
        self.lipschitz.as_ref().map(|k| k(m))
    }
    fn zero_bound(&self) -> Option<f64> {
        self.zero_bound
    }
    fn time_grid(&self) -> Vec<f64> {
        self.times.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Random samples drawn in addition to the deterministic corner cases.
    pub samples: usize,
    pub seed: u64,
    /// Overrides the field's own time grid.
    pub t_grid: Option<Vec<f64>>,
    /// Cap on the number of sample pairs used for the Lipschitz estimate.
    pub max_pairs: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            samples: 4096,
            seed: 0x5eed,
            t_grid: None,
            max_pairs: 8192,
        }
    }
}

/// States in the cone with norm at most `m`.
///
/// Always contains the zero state, each basis direction scaled to norm `m`, the all-ones
/// direction at norm `m`, and one state per component with that component zeroed. Then
/// `count` random states with random radii and sparse zero patterns.
pub fn sample_cone_ball(space: &SpaceSpec, m: f64, count: usize, seed: u64) -> Vec<StateVector> {
    let n = space.dof();
    let mut out = Vec::with_capacity(count + n + space.components().len() + 2);
    let fit = |mut v: Vec<f64>, radius: f64| -> StateVector {
        let norm = space.norm_of(&v);
        if norm > 0.0 {
            let s = radius / norm;
            v.iter_mut().for_each(|x| *x *= s);
            while space.norm_of(&v) > m {
                v.iter_mut().for_each(|x| *x *= 1.0 - 4.0 * f64::EPSILON);
            }
        }
        StateVector(v)
    };

    out.push(space.zeros());
    for j in 0..n {
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        out.push(fit(v, m));
    }
    out.push(fit(vec![1.0; n], m));
    if space.components().len() > 1 {
        for c in 0..space.components().len() {
            let mut v = vec![1.0; n];
            v[space.range(c)].fill(0.0);
            out.push(fit(v, 0.5 * m));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let mut v: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        for c in 0..space.components().len() {
            if space.components().len() > 1 && rng.gen_bool(0.1) {
                v[space.range(c)].fill(0.0);
            }
        }
        let radius = if rng.gen_bool(0.1) { m } else { m * rng.gen::<f64>() };
        out.push(fit(v, radius));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sample: usize,
    pub component: usize,
    pub time: f64,
    /// `f_i(z, t) + lambda z_i` (equal to `f_i` when `z_i = 0`).
    pub value: f64,
    pub state: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftEstimate {
    pub lambda_hat: f64,
    pub sampled: f64,
    pub analytic: Option<f64>,
}

fn boundary_violations(
    f: &dyn NonlinearField,
    space: &SpaceSpec,
    samples: &[StateVector],
    t_grid: &[f64],
) -> (f64, Vec<Violation>) {
    let mut sampled: f64 = 0.0;
    let mut violations = Vec::new();
    let mut out = vec![0.0; space.dof()];
    for (s, z) in samples.iter().enumerate() {
        let tau = space.tolerance(z);
        for &t in t_grid {
            f.evaluate(z, t, &mut out);
            for (i, (&zi, &fi)) in z.iter().zip(&out).enumerate() {
                if zi > 0.0 {
                    let r = -fi / zi;
                    if r > sampled {
                        sampled = r;
                    }
                } else if fi < -tau {
                    violations.push(Violation {
                        sample: s,
                        component: i,
                        time: t,
                        value: fi,
                        state: z.0.clone(),
                    });
                }
            }
        }
    }
    (sampled, violations)
}

/// Smallest nonnegative shift making `f + lambda z >= 0` on every sample, combined with
/// the field's analytic shift by `max`.
pub fn certify_shift(
    f: &dyn NonlinearField,
    space: &SpaceSpec,
    m: f64,
    samples: &[StateVector],
    t_grid: &[f64],
) -> Result<ShiftEstimate> {
    let (sampled, violations) = boundary_violations(f, space, samples, t_grid);
    if let Some(worst) = violations
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
    {
        return Err(Error::Uncertifiable {
            component: worst.component,
            value: worst.value,
            state: worst.state,
            time: worst.time,
        });
    }
    let analytic = f.analytic_shift(m);
    Ok(ShiftEstimate {
        lambda_hat: sampled.max(analytic.unwrap_or(0.0)).max(0.0),
        sampled,
        analytic,
    })
}

/// Number of `(sample, time, component)` triples with `f_i + lambda z_i < -tau`.
pub fn count_violations(
    f: &dyn NonlinearField,
    space: &SpaceSpec,
    samples: &[StateVector],
    t_grid: &[f64],
    lambda: f64,
) -> usize {
    let mut out = vec![0.0; space.dof()];
    let mut count = 0;
    for z in samples {
        let tau = space.tolerance(z);
        for &t in t_grid {
            f.evaluate(z, t, &mut out);
            count += z
                .iter()
                .zip(&out)
                .filter(|(zi, fi)| **fi + lambda * **zi < -tau)
                .count();
        }
    }
    count
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzEstimate {
    pub k_hat: f64,
    pub sampled: f64,
    pub analytic: Option<f64>,
    pub pairs: usize,
}

/// Largest sampled difference quotient `|f(z1,t) - f(z2,t)| / |z1 - z2|`, combined with the
/// field's analytic constant by `max`. Pairs closer than `1e-8 m` are skipped. All pairs are used when there are at most
/// `max_pairs` of them; otherwise consecutive pairs plus seeded random pairs.
pub fn lipschitz_estimate(
    f: &dyn NonlinearField,
    space: &SpaceSpec,
    m: f64,
    samples: &[StateVector],
    t_grid: &[f64],
    max_pairs: usize,
) -> LipschitzEstimate {
    let n = samples.len();
    let dim = space.dof();
    let mut images = vec![0.0; n * t_grid.len() * dim];
    for (s, z) in samples.iter().enumerate() {
        for (k, &t) in t_grid.iter().enumerate() {
            let at = (s * t_grid.len() + k) * dim;
            f.evaluate(z, t, &mut images[at..at + dim]);
        }
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n >= 2 {
        if n * (n - 1) / 2 <= max_pairs {
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j));
                }
            }
        } else {
            pairs.extend((0..n - 1).map(|i| (i, i + 1)));
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            while pairs.len() < max_pairs {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    pairs.push((i, j));
                }
            }
        }
    }

    let mut diff_in = vec![0.0; dim];
    let mut diff_out = vec![0.0; dim];
    let mut sampled: f64 = 0.0;
    for &(i, j) in &pairs {
        for ((d, a), b) in diff_in.iter_mut().zip(&samples[i].0).zip(&samples[j].0) {
            *d = a - b;
        }
        let denom = space.norm_of(&diff_in);
        // Near-duplicate pairs give quotients dominated by rounding.
        if denom <= 1e-8 * m {
            continue;
        }
        for k in 0..t_grid.len() {
            let a = (i * t_grid.len() + k) * dim;
            let b = (j * t_grid.len() + k) * dim;
            for (d, (x, y)) in diff_out
                .iter_mut()
                .zip(images[a..a + dim].iter().zip(&images[b..b + dim]))
            {
                *d = x - y;
            }
            sampled = sampled.max(space.norm_of(&diff_out) / denom);
        }
    }
    let analytic = f.analytic_lipschitz(m);
    LipschitzEstimate {
        k_hat: sampled.max(analytic.unwrap_or(0.0)),
        sampled,
        analytic,
        pairs: pairs.len(),
    }
}

/// Serializable summary of a certification run at radius `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub m: f64,
    pub certified: bool,
    pub lambda_hat: f64,
    pub lambda_sampled: f64,
    pub lambda_analytic: Option<f64>,
    /// Reference formula for the shift, when the model has one; may disagree with the
    /// certified value.
    pub lambda_reference: Option<f64>,
    pub reference_discrepancy: bool,
    pub k_hat: f64,
    pub k_sampled: f64,
    pub k_analytic: Option<f64>,
    pub samples_used: usize,
    pub t_grid: Vec<f64>,
    pub worst_violation: Option<Violation>,
    /// Up to 32 boundary violations as `(sample, component, value)` entries.
    pub violations: Vec<Violation>,
    pub violation_count: usize,
}

/// Shift and Lipschitz estimates at radius `m`, bundled into a report. An uncertifiable
/// violation yields `certified = false` rather than an error.
pub fn quasi_positivity_report(
    f: &dyn NonlinearField,
    space: &SpaceSpec,
    m: f64,
    config: &CertifyConfig,
) -> Result<CertificationReport> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {m}")));
    }
    let samples = sample_cone_ball(space, m, config.samples, config.seed);
    let t_grid = config.t_grid.clone().unwrap_or_else(|| f.time_grid());
    let (sampled, mut violations) = boundary_violations(f, space, &samples, &t_grid);
    violations.sort_by(|a, b| a.value.total_cmp(&b.value));
    let violation_count = violations.len();
    let worst_violation = violations.first().cloned();
    violations.truncate(32);
    violations.iter_mut().for_each(|v| v.state.clear());

    let analytic = f.analytic_shift(m);
    let lambda_hat = sampled.max(analytic.unwrap_or(0.0)).max(0.0);
    let lip = lipschitz_estimate(f, space, m, &samples, &t_grid, config.max_pairs);
    let reference = f.reference_shift(m);
    let reference_discrepancy = reference.is_some_and(|r| r + 1e-12 < lambda_hat.max(sampled));

    Ok(CertificationReport {
        m,
        certified: violation_count == 0,
        lambda_hat,
        lambda_sampled: sampled,
        lambda_analytic: analytic,
        lambda_reference: reference,
        reference_discrepancy,
        k_hat: lip.k_hat,
        k_sampled: lip.sampled,
        k_analytic: lip.analytic,
        samples_used: samples.len(),
        t_grid,
        worst_violation,
        violations,
        violation_count,
    })
}

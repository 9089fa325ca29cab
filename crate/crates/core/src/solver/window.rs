//! One window of the fixed-point construction.
//!
//! On `[t_start, t_start + t_len]` the mild solution of the shifted problem is the fixed
//! point of
//!
//! ```text
//! psi(y)(t) = T_{A - lambda I}(t) y0 + int_0^t T_{A - lambda I}(t - s) [f(y(s)) + lambda y(s)] ds.
//! ```
//!
//! The integral uses a composite left-rectangle rule on uniform nodes. Its weights are
//! nonnegative and it only reads already-known nodes, so with a positive semigroup and a
//! nonnegative integrand every node of `psi(y)` stays in the cone. On uniform nodes the rule
//! collapses to the recursion `u_{i+1} = T(h) (u_i + h g_i)`, one semigroup action per node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{min_component, StateVector, CONE_TOL};
use crate::semigroup::{GrowthBound, Propagator};

use super::problem::{CauchyProblem, PicardStart, SolverConfig};

/// `(m, t0)` with `m = 2 M e^{omega} |y0|` and
/// `t0 = min{1, |y0| / (m k + gamma + m lambda)}`.
///
/// Negative `omega` is clamped to zero so the ball always contains `y0`. A vanishing
/// denominator gives `t0 = 1`; zero data with a source uses `min{1, 1 / (gamma (k + lambda + 1))}`.
pub fn window_length(
    y0_norm: f64,
    growth: &GrowthBound,
    k_m: f64,
    lambda_m: f64,
    gamma_f: f64,
) -> (f64, f64) {
    window_length_capped(y0_norm, growth, k_m, lambda_m, gamma_f, 1.0)
}

pub fn window_length_capped(
    y0_norm: f64,
    growth: &GrowthBound,
    k_m: f64,
    lambda_m: f64,
    gamma_f: f64,
    cap: f64,
) -> (f64, f64) {
    let c = growth.unit_window_constant();
    let m = 2.0 * c * y0_norm;
    let t0 = if y0_norm > 0.0 {
        let denom = m * k_m + gamma_f + m * lambda_m;
        if denom > 0.0 {
            (y0_norm / denom).min(cap)
        } else {
            cap
        }
    } else if gamma_f > 0.0 {
        (1.0 / (gamma_f * (k_m + lambda_m + 1.0))).min(cap)
    } else {
        cap
    };
    (m, t0)
}

/// `[M e^{omega} t (k + lambda)]^n / n!`.
pub fn contraction_bound(n: u32, t: f64, growth: &GrowthBound, k_m: f64, lambda_m: f64) -> f64 {
    let x = growth.unit_window_constant() * t * (k_m + lambda_m);
    (1..=n).fold(1.0, |acc, j| acc * x / j as f64)
}

/// Time span of a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub t_start: f64,
    pub t_len: f64,
}

/// Diagnostics of one converged window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub t_start: f64,
    pub t_len: f64,
    pub iterations: usize,
    pub residual: f64,
    /// `r_{n+1} / r_n` for successive Picard residuals above roundoff level.
    pub contraction_ratios: Vec<f64>,
    /// `contraction_bound(1, t_len, growth, k, lambda)`.
    pub contraction_bound: f64,
    /// Ball radius `m = 2 M e^omega |y0|`.
    pub radius: f64,
    /// Radius at which `lambda` and `k` were certified (`>= radius`).
    pub certified_radius: f64,
    pub lambda: f64,
    pub k: f64,
    pub gamma_f: f64,
    pub max_node_norm: f64,
    pub radius_exceeded: bool,
    pub min_component: f64,
    /// `min_component / (1 + |y|)` minimized over nodes.
    pub min_scaled_component: f64,
    pub node_times: Vec<f64>,
    #[serde(skip)]
    pub node_states: Vec<StateVector>,
    #[serde(skip)]
    pub end_state: StateVector,
}

/// Shift, Lipschitz constant and radii a window is run with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowParams {
    pub lambda: f64,
    pub k: f64,
    pub radius: f64,
    pub certified_radius: f64,
    pub gamma_f: f64,
}

struct Workspace<'a> {
    prop: Propagator<'a>,
    g: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a CauchyProblem) -> Self {
        let n = problem.dim();
        Self {
            prop: Propagator::new(&problem.generator),
            g: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// `g = f(y, t) + lambda y`, rejecting entries below the cone tolerance.
    fn integrand(&mut self, problem: &CauchyProblem, lambda: f64, y: &[f64], t: f64) -> Result<()> {
        problem.field.evaluate(y, t, &mut self.g);
        for (g, v) in self.g.iter_mut().zip(y) {
            *g += lambda * v;
        }
        let tau = CONE_TOL * (1.0 + problem.space.norm_of(y)) * lambda.max(1.0);
        let (value, component) = min_component(&self.g);
        if value < -tau {
            return Err(Error::CertificationMismatch {
                time: t,
                component,
                value,
                lambda,
            });
        }
        Ok(())
    }

    fn psi(
        &mut self,
        problem: &CauchyProblem,
        lambda: f64,
        path: &[Vec<f64>],
        y0: &[f64],
        window: Window,
        out: &mut [Vec<f64>],
    ) -> Result<()> {
        let nodes = path.len() - 1;
        let h = window.t_len / nodes as f64;
        out[0].copy_from_slice(y0);
        for i in 0..nodes {
            self.integrand(problem, lambda, &path[i], window.t_start + i as f64 * h)?;
            for ((t, u), g) in self.tmp.iter_mut().zip(&out[i]).zip(&self.g) {
                *t = u + h * g;
            }
            let (head, tail) = out.split_at_mut(i + 1);
            self.prop.apply_into(lambda, h, &self.tmp, &mut tail[0]);
            debug_assert_eq!(head.len(), i + 1);
        }
        Ok(())
    }
}

fn check_path(problem: &CauchyProblem, y0: &[f64], path: &[StateVector]) -> Result<()> {
    problem.space.check(y0)?;
    if path.len() < 2 {
        return Err(Error::Domain("a window path needs at least two nodes".into()));
    }
    for p in path {
        problem.space.check(p)?;
    }
    Ok(())
}

/// `psi(y)` at the nodes of `path` (node `i` at `t_start + i * t_len / (len - 1)`).
pub fn psi_apply(
    problem: &CauchyProblem,
    lambda_m: f64,
    path: &[StateVector],
    y0: &[f64],
    window: Window,
) -> Result<Vec<StateVector>> {
    check_path(problem, y0, path)?;
    let path: Vec<Vec<f64>> = path.iter().map(|p| p.0.clone()).collect();
    let mut out = vec![vec![0.0; problem.dim()]; path.len()];
    Workspace::new(problem).psi(problem, lambda_m, &path, y0, window, &mut out)?;
    Ok(out.into_iter().map(StateVector).collect())
}

/// `y+ = T_{A - lambda I}(h) y + h T_{A - lambda I}(h) (f(y, t) + lambda y)`.
pub fn exp_step(problem: &CauchyProblem, lambda: f64, y: &[f64], t: f64, h: f64) -> Result<StateVector> {
    problem.space.check(y)?;
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let mut ws = Workspace::new(problem);
    ws.integrand(problem, lambda, y, t)?;
    for ((t, u), g) in ws.tmp.iter_mut().zip(y).zip(&ws.g) {
        *t = u + h * g;
    }
    let mut out = vec![0.0; y.len()];
    ws.prop.apply_into(lambda, h, &ws.tmp, &mut out);
    Ok(out.into())
}

/// Picard iteration of `psi` on one window, seeded per `config.picard_start`, until the
/// sup-over-nodes residual drops below `picard_tol * (1 + max node norm)`.
pub fn picard_window(
    problem: &CauchyProblem,
    y0: &[f64],
    window: Window,
    params: WindowParams,
    config: &SolverConfig,
) -> Result<WindowResult> {
    picard_window_from(problem, y0, window, params, config, None)
}

/// As [`picard_window`], with an explicit initial path.
pub fn picard_window_from(
    problem: &CauchyProblem,
    y0: &[f64],
    window: Window,
    params: WindowParams,
    config: &SolverConfig,
    initial: Option<&[StateVector]>,
) -> Result<WindowResult> {
    problem.space.check(y0)?;
    let nodes = config.quadrature_nodes_per_window;
    let h = window.t_len / nodes as f64;
    let space = &problem.space;
    let mut ws = Workspace::new(problem);

    let mut path: Vec<Vec<f64>> = match initial {
        Some(p) => {
            if p.len() != nodes + 1 {
                return Err(Error::DimensionMismatch {
                    expected: nodes + 1,
                    found: p.len(),
                });
            }
            check_path(problem, y0, p)?;
            p.iter().map(|s| s.0.clone()).collect()
        }
        None => match config.picard_start {
            PicardStart::Constant => vec![y0.to_vec(); nodes + 1],
            PicardStart::SemigroupOrbit => {
                let mut p = vec![y0.to_vec()];
                for i in 0..nodes {
                    let mut next = vec![0.0; y0.len()];
                    ws.prop.apply_into(0.0, h, &p[i], &mut next);
                    p.push(next);
                }
                p
            }
        },
    };
    let mut next = vec![vec![0.0; y0.len()]; nodes + 1];

    let mut residuals: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    let mut diff = vec![0.0; y0.len()];
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < config.max_picard_iters {
        ws.psi(problem, params.lambda, &path, y0, window, &mut next)?;
        iterations += 1;
        residual = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in next.iter().zip(&path) {
            for ((d, x), y) in diff.iter_mut().zip(a).zip(b) {
                *d = x - y;
            }
            residual = residual.max(space.norm_of(&diff));
            scale = scale.max(space.norm_of(a));
        }
        if let Some(&prev) = residuals.last() {
            if prev > 1e3 * f64::EPSILON * (1.0 + scale) {
                ratios.push(residual / prev);
            }
        }
        residuals.push(residual);
        std::mem::swap(&mut path, &mut next);
        if residual <= config.picard_tol * (1.0 + scale) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationFailure {
            iterations,
            residual,
        });
    }

    let mut min_comp = f64::INFINITY;
    let mut min_scaled = f64::INFINITY;
    let mut max_norm: f64 = 0.0;
    for (i, p) in path.iter().enumerate() {
        let norm = space.norm_of(p);
        let (value, component) = min_component(p);
        if value < -CONE_TOL * (1.0 + norm) {
            return Err(Error::PositivityFailure {
                time: window.t_start + i as f64 * h,
                component,
                value,
            });
        }
        min_comp = min_comp.min(value);
        min_scaled = min_scaled.min(value / (1.0 + norm));
        max_norm = max_norm.max(norm);
    }

    let end_state = StateVector(path[nodes].clone());
    Ok(WindowResult {
        t_start: window.t_start,
        t_len: window.t_len,
        iterations,
        residual,
        contraction_ratios: ratios,
        contraction_bound: contraction_bound(1, window.t_len, &problem.growth, params.k, params.lambda),
        radius: params.radius,
        certified_radius: params.certified_radius,
        lambda: params.lambda,
        k: params.k,
        gamma_f: params.gamma_f,
        max_node_norm: max_norm,
        radius_exceeded: params.radius > 0.0 && max_norm > params.radius * (1.0 + 1e-9),
        min_component: min_comp,
        min_scaled_component: min_scaled,
        node_times: (0..=nodes).map(|i| window.t_start + i as f64 * h).collect(),
        node_states: if config.keep_node_states {
            path.into_iter().map(StateVector).collect()
        } else {
            Vec::new()
        },
        end_state,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::certify::FnField;
    use crate::lattice::{Component, SpaceSpec};
    use crate::oracle;
    use crate::semigroup::{apply_semigroup, GeneratorMatrix};

    fn scalar_problem(a: f64, f: FnField) -> CauchyProblem {
        let space = SpaceSpec::new(vec![Component::scalar("y")]).unwrap();
        let gen = GeneratorMatrix::diagonal(&[a]).unwrap();
        CauchyProblem::new(space, gen, Arc::new(f)).unwrap()
    }

    fn params(lambda: f64, k: f64) -> WindowParams {
        WindowParams {
            lambda,
            k,
            radius: 0.0,
            certified_radius: 0.0,
            gamma_f: 0.0,
        }
    }

    #[test]
    fn window_length_examples() {
        let g = GrowthBound::new(1.0, 0.0).unwrap();
        assert_eq!(window_length(1.0, &g, 1.0, 1.0, 0.0), (2.0, 0.25));
        assert_eq!(window_length(1.0, &g, 0.0, 0.0, 0.0), (2.0, 1.0));

        let g = GrowthBound::new(2.0, 1.0).unwrap();
        let e = 1f64.exp();
        let (m, t0) = window_length(0.5, &g, 1.0, 2.0, 1.0);
        assert!((m - 2.0 * e).abs() < 1e-15);
        let want = 0.5 / (2.0 * e * 1.0 + 1.0 + 2.0 * e * 2.0);
        assert!((t0 - want.min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn window_length_zero_data() {
        let g = GrowthBound::new(1.0, 0.0).unwrap();
        let (m, t0) = window_length(0.0, &g, 1.0, 1.0, 2.0);
        assert_eq!(m, 0.0);
        assert!((t0 - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(window_length(0.0, &g, 1.0, 1.0, 0.0).1, 1.0);
        assert_eq!(window_length_capped(0.0, &g, 1.0, 1.0, 0.0, 0.3).1, 0.3);
    }

    #[test]
    fn contraction_bound_examples() {
        let g = GrowthBound::new(1.0, 0.0).unwrap();
        assert_eq!(contraction_bound(0, 0.5, &g, 1.0, 1.0), 1.0);
        assert_eq!(contraction_bound(1, 0.5, &g, 1.0, 1.0), 1.0);
        assert_eq!(contraction_bound(2, 0.5, &g, 1.0, 1.0), 0.5);
    }

    #[test]
    fn psi_homogeneous_is_semigroup_orbit() {
        let space = SpaceSpec::new(vec![Component::scalar("a"), Component::scalar("b")]).unwrap();
        let gen = GeneratorMatrix::from_dense(&[vec![-1.0, 0.5], vec![0.3, -2.0]]).unwrap();
        let p = CauchyProblem::new(space, gen.clone(), Arc::new(FnField::new(|_, _, o| o.fill(0.0))))
            .unwrap();
        let y0 = [1.0, 2.0];
        let path = vec![StateVector(y0.to_vec()); 5];
        let w = Window { t_start: 0.0, t_len: 0.8 };
        let out = psi_apply(&p, 0.0, &path, &y0, w).unwrap();
        for (i, s) in out.iter().enumerate() {
            let want = apply_semigroup(&gen, 0.2 * i as f64, &y0).unwrap();
            for (a, b) in s.iter().zip(want.iter()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn psi_of_constant_source_is_exact() {
        let c = 0.7;
        let p = scalar_problem(0.0, FnField::new(move |_, _, o| o[0] = c));
        let y0 = [2.0];
        let path = vec![StateVector(y0.to_vec()); 9];
        let out = psi_apply(&p, 0.0, &path, &y0, Window { t_start: 0.0, t_len: 0.4 }).unwrap();
        for (i, s) in out.iter().enumerate() {
            assert!((s[0] - (2.0 + c * 0.05 * i as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn one_psi_step_reduces_residual_vs_closed_form() {
        // y' = -y + g; fixed point y(t) = g + (y0 - g) e^{-t}.
        let g = 3.0;
        let p = scalar_problem(-1.0, FnField::new(move |_, _, o| o[0] = g));
        let y0 = [1.0];
        let nodes = 64;
        let t_len = 0.5;
        let exact = |t: f64| oracle::linear_relax(g, 1.0, 1.0, t);
        let path = vec![StateVector(y0.to_vec()); nodes + 1];
        let err = |path: &[StateVector]| {
            path.iter()
                .enumerate()
                .map(|(i, s)| (s[0] - exact(i as f64 * t_len / nodes as f64)).abs())
                .fold(0.0, f64::max)
        };
        let out = psi_apply(&p, 0.0, &path, &y0, Window { t_start: 0.0, t_len }).unwrap();
        assert!(err(&out) < 0.1 * err(&path));
    }

    #[test]
    fn psi_rejects_insufficient_shift() {
        let p = scalar_problem(0.0, FnField::new(|y, _, o| o[0] = -2.0 * y[0]));
        let path = vec![StateVector(vec![1.0]); 3];
        let w = Window { t_start: 0.0, t_len: 0.1 };
        assert!(matches!(
            psi_apply(&p, 1.0, &path, &[1.0], w),
            Err(Error::CertificationMismatch { .. })
        ));
        assert!(psi_apply(&p, 2.0, &path, &[1.0], w).is_ok());
    }

    #[test]
    fn exp_step_examples() {
        let space = SpaceSpec::new(vec![Component::scalar("a"), Component::scalar("b")]).unwrap();
        let gen = GeneratorMatrix::from_dense(&[vec![-1.0, 0.5], vec![0.3, -2.0]]).unwrap();
        let zero = CauchyProblem::new(space.clone(), gen.clone(), Arc::new(FnField::new(|_, _, o| o.fill(0.0))))
            .unwrap();
        let y = [0.4, 1.2];
        let a = exp_step(&zero, 0.0, &y, 0.0, 0.3).unwrap();
        assert_eq!(a, apply_semigroup(&gen, 0.3, &y).unwrap());

        let src = CauchyProblem::new(
            space,
            GeneratorMatrix::zeros(2).unwrap(),
            Arc::new(FnField::new(|_, _, o| o.copy_from_slice(&[0.5, 2.0]))),
        )
        .unwrap();
        let b = exp_step(&src, 0.0, &y, 0.0, 0.1).unwrap();
        assert!((b[0] - 0.45).abs() < 1e-15 && (b[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn exp_step_shifted_scalar() {
        let p = scalar_problem(-1.0, FnField::new(|_, _, o| o[0] = 0.0));
        let (lambda, h, y) = (2.0, 0.1, 1.5);
        let out = exp_step(&p, lambda, &[y], 0.0, h).unwrap()[0];
        let want = (-0.3f64).exp() * y + 0.1 * (-0.3f64).exp() * 2.0 * y;
        assert!((out - want).abs() < 1e-14);
        // First order: local error against e^{-h} y is O(h^2).
        let local = |h: f64| (exp_step(&p, lambda, &[y], 0.0, h).unwrap()[0] - (-h).exp() * y).abs();
        let ratio = local(0.01) / local(0.005);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn picard_trivial_problem_converges_immediately() {
        let p = scalar_problem(0.0, FnField::new(|_, _, o| o[0] = 0.0));
        let cfg = SolverConfig::default();
        let w = picard_window(&p, &[1.3], Window { t_start: 0.0, t_len: 0.5 }, params(0.0, 0.0), &cfg).unwrap();
        assert_eq!(w.iterations, 1);
        assert_eq!(w.end_state.0, vec![1.3]);
    }

    #[test]
    fn picard_logistic_matches_closed_form() {
        let p = scalar_problem(0.0, FnField::new(|y, _, o| o[0] = y[0] * (1.0 - y[0])));
        let cfg = SolverConfig {
            quadrature_nodes_per_window: 20000,
            keep_node_states: true,
            ..Default::default()
        };
        // Shift 1 keeps y(1 - y) + y = y(2 - y) >= 0 on [0, 2].
        let w = picard_window(&p, &[0.1], Window { t_start: 0.0, t_len: 0.3 }, params(1.0, 3.0), &cfg).unwrap();
        for (t, s) in w.node_times.iter().zip(&w.node_states) {
            assert!((s[0] - oracle::logistic(1.0, 1.0, 0.1, *t)).abs() < 1e-6);
        }
        let g = GrowthBound::new(1.0, 0.0).unwrap();
        let bound = contraction_bound(1, 0.3, &g, 3.0, 1.0);
        assert!(w.contraction_ratios.iter().all(|r| *r <= bound + 0.05));
    }

    #[test]
    fn picard_start_does_not_change_fixed_point() {
        let space = SpaceSpec::new(vec![Component::scalar("a"), Component::scalar("b")]).unwrap();
        let gen = GeneratorMatrix::from_dense(&[vec![-1.0, 0.5], vec![0.3, -2.0]]).unwrap();
        let f = FnField::new(|y, _, o| {
            o[0] = 0.2 - y[0] * y[1];
            o[1] = y[0] * y[1];
        });
        let p = CauchyProblem::new(space, gen, Arc::new(f)).unwrap();
        let y0 = [0.8, 0.4];
        let w = Window { t_start: 0.0, t_len: 0.2 };
        let mut cfg = SolverConfig::default();
        let a = picard_window(&p, &y0, w, params(3.0, 3.0), &cfg).unwrap();
        cfg.picard_start = PicardStart::SemigroupOrbit;
        let b = picard_window(&p, &y0, w, params(3.0, 3.0), &cfg).unwrap();
        for (x, y) in a.end_state.iter().zip(b.end_state.iter()) {
            assert!((x - y).abs() < 10.0 * cfg.picard_tol);
        }
    }

    #[test]
    fn picard_reports_iteration_failure() {
        let p = scalar_problem(0.0, FnField::new(|y, _, o| o[0] = y[0] * y[0]));
        let cfg = SolverConfig {
            max_picard_iters: 2,
            ..Default::default()
        };
        let r = picard_window(&p, &[1.0], Window { t_start: 0.0, t_len: 0.5 }, params(0.0, 4.0), &cfg);
        assert!(matches!(r, Err(Error::IterationFailure { iterations: 2, .. })));
    }
}

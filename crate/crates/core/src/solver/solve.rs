use serde::{Deserialize, Serialize};

use crate::certify::{quasi_positivity_report, CertificationReport};
use crate::error::{Error, Result};
use crate::lattice::{min_component, StateVector, CONE_TOL};

use super::problem::{CauchyProblem, SolverConfig};
use super::window::{picard_window, window_length_capped, Window, WindowParams, WindowResult};

/// Retries of a window after a certification mismatch, an exceeded radius or a Picard failure.
const MAX_RETRIES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub time_estimate: f64,
    pub final_norm: f64,
    pub reason: BlowUpReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpReason {
    NormThreshold,
    ShrinkingWindows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub min_component_overall: f64,
    /// `min_component / (1 + |y|)` over all saved states.
    pub min_scaled_component: f64,
    pub blow_up: Option<BlowUp>,
    pub windows: Vec<WindowResult>,
    /// One report per radius bucket certified during the run.
    pub certifications: Vec<CertificationReport>,
    pub gamma_f: f64,
    pub notes: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("a trajectory always holds y0")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory always holds t = 0")
    }

    /// Largest Picard residual ratio minus its window's `contraction_bound`.
    pub fn worst_contraction_excess(&self) -> f64 {
        self.windows
            .iter()
            .flat_map(|w| w.contraction_ratios.iter().map(move |r| r - w.contraction_bound))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn push(&mut self, t: f64, y: StateVector, norm: f64) {
        let (value, _) = min_component(&y);
        self.min_component_overall = self.min_component_overall.min(value);
        self.min_scaled_component = self.min_scaled_component.min(value / (1.0 + norm));
        self.times.push(t);
        self.states.push(y);
    }
}

/// `max(zero_bound, max_t |f(0, t)|)` over the field's time grid.
pub fn source_bound(problem: &CauchyProblem) -> f64 {
    let zero = problem.space.zeros();
    let mut out = vec![0.0; problem.dim()];
    let mut gamma = problem.field.zero_bound().unwrap_or(0.0);
    for t in problem.field.time_grid() {
        problem.field.evaluate(&zero, t, &mut out);
        gamma = gamma.max(problem.space.norm_of(&out));
    }
    gamma
}

/// Smallest power of two at or above `m`.
fn bucket(m: f64) -> f64 {
    2f64.powi(m.log2().ceil() as i32)
}

struct Certifier<'a> {
    problem: &'a CauchyProblem,
    config: &'a SolverConfig,
    cached: Option<(f64, f64, f64)>,
    reports: Vec<CertificationReport>,
}

impl<'a> Certifier<'a> {
    /// `(lambda, k)` valid on the ball of radius `radius`, certified at `radius` (a power of two).
    fn at(&mut self, radius: f64) -> Result<(f64, f64)> {
        if let Some((r, lambda, k)) = self.cached {
            if r == radius {
                return Ok((lambda, k));
            }
        }
        let mut cfg = self.config.certify.clone();
        if cfg.t_grid.is_none() {
            cfg.t_grid = Some(self.problem.field.time_grid());
        }
        let mut report = quasi_positivity_report(self.problem.field.as_ref(), &self.problem.space, radius, &cfg)?;
        if let Some(worst) = report.worst_violation.clone() {
            return Err(Error::Uncertifiable {
                component: worst.component,
                value: worst.value,
                state: worst.state,
                time: worst.time,
            });
        }
        report.t_grid.clear();
        let out = (report.lambda_hat, report.k_hat);
        self.cached = Some((radius, out.0, out.1));
        self.reports.push(report);
        Ok(out)
    }
}

/// Chains Picard windows from `t = 0` to `config.horizon`.
///
/// Each window recomputes `m` and `t0` from the current norm. Shift and Lipschitz
/// constants are certified on the smallest power-of-two radius at or above `m` and reused
/// until `m` leaves that bucket. A window whose integrand turns negative (shift too small
/// for the states actually reached) or whose nodes leave the certified ball is retried
/// with a larger shift or radius. Blow-up is a flagged outcome, not an error.
pub fn solve(problem: &CauchyProblem, y0: &[f64], config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    problem.space.check(y0)?;
    let (value, component) = min_component(y0);
    let y0_norm = problem.space.norm_of(y0);
    if value < -CONE_TOL * (1.0 + y0_norm) {
        return Err(Error::PositivityFailure {
            time: 0.0,
            component,
            value,
        });
    }

    let gamma_f = source_bound(problem);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        min_component_overall: f64::INFINITY,
        min_scaled_component: f64::INFINITY,
        blow_up: None,
        windows: Vec::new(),
        certifications: Vec::new(),
        gamma_f,
        notes: problem.notes.clone(),
    };
    traj.push(0.0, StateVector(y0.to_vec()), y0_norm);

    let mut cert = Certifier {
        problem,
        config,
        cached: None,
        reports: Vec::new(),
    };
    let growth = &problem.growth;
    let c = growth.unit_window_constant();
    let horizon = config.horizon;
    let end_tol = 1e-14 * (1.0 + horizon);
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut short = 0;
    let mut zero_note = false;

    while horizon - t > end_tol {
        if traj.windows.len() >= config.max_windows {
            return Err(Error::Refused(format!(
                "window budget of {} exhausted at t = {t}",
                config.max_windows
            )));
        }
        let y_norm = problem.space.norm_of(&y);
        let mut m = 2.0 * c * y_norm;
        if y_norm == 0.0 && gamma_f > 0.0 {
            m = 2.0 * c * gamma_f * config.window_cap;
            if !zero_note {
                traj.notes.push(format!(
                    "zero state with source bound {gamma_f}: window length 1/(gamma (k + lambda + 1)) substituted"
                ));
                zero_note = true;
            }
        }

        let mut radius = if m > 0.0 { bucket(m) } else { 0.0 };
        let (mut lambda, mut k) = if radius > 0.0 { cert.at(radius)? } else { (0.0, 0.0) };
        let mut shrink = 1.0;
        let mut attempt = 0;
        let result = loop {
            let (_, t0) = window_length_capped(y_norm, growth, k, lambda, gamma_f, config.window_cap);
            let t0 = t0 * shrink;
            let t_len = t0.min(horizon - t);
            let window = Window { t_start: t, t_len };
            let params = WindowParams {
                lambda,
                k,
                radius: m,
                certified_radius: radius,
                gamma_f,
            };
            let outcome = picard_window(problem, &y, window, params, config);
            let retry_note = match outcome {
                Ok(w) if radius > 0.0 && w.max_node_norm > radius => {
                    let note = format!(
                        "window at t = {t}: node norm {} left the certified ball {radius}",
                        w.max_node_norm
                    );
                    if attempt >= MAX_RETRIES {
                        break Ok((w, t0 < horizon - t));
                    }
                    radius = bucket(w.max_node_norm * (1.0 + 1e-12));
                    (lambda, k) = cert.at(radius)?;
                    note
                }
                Ok(w) => break Ok((w, t0 < horizon - t)),
                Err(Error::CertificationMismatch { value, .. }) if attempt < MAX_RETRIES => {
                    let raised = (2.0 * lambda).max(lambda + value.abs()).max(1e-8);
                    let note = format!("window at t = {t}: shift {lambda} raised to {raised} after a negative integrand");
                    lambda = raised;
                    note
                }
                Err(Error::IterationFailure { .. }) if attempt < MAX_RETRIES => {
                    shrink *= 0.5;
                    format!("window at t = {t}: Picard iteration stalled, window halved")
                }
                Err(e) => break Err(e),
            };
            traj.notes.push(retry_note);
            attempt += 1;
        };
        let (w, truncated_by_cap) = result?;

        let end_norm = problem.space.norm_of(&w.end_state);
        if config.keep_node_states {
            for (time, state) in w.node_times.iter().zip(&w.node_states).skip(1) {
                let n = problem.space.norm_of(state);
                traj.push(*time, state.clone(), n);
            }
        } else {
            traj.push(t + w.t_len, w.end_state.clone(), end_norm);
        }
        let t_start = t;
        t += w.t_len;
        y.copy_from_slice(&w.end_state);
        let t_len = w.t_len;
        traj.windows.push(w);

        if !end_norm.is_finite() || end_norm > config.blow_up_norm_threshold {
            traj.blow_up = Some(BlowUp {
                time_estimate: t_start,
                final_norm: end_norm,
                reason: BlowUpReason::NormThreshold,
            });
            break;
        }
        if truncated_by_cap && t_len < config.short_window {
            short += 1;
            if short >= config.short_window_count {
                traj.blow_up = Some(BlowUp {
                    time_estimate: t_start,
                    final_norm: end_norm,
                    reason: BlowUpReason::ShrinkingWindows,
                });
                break;
            }
        } else {
            short = 0;
        }
    }
    traj.certifications = cert.reports;
    Ok(traj)
}

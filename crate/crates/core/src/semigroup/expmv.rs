//! Action of the semigroup `e^{tA}` on a vector.
//!
//! Uses uniformization: with `c = max(-A_ii, 0)` and `B = A + cI`,
//! `e^{tA} v = e^{-ct} sum_k (t^k / k!) B^k v`. For a Metzler `A` the matrix `B` is
//! entrywise nonnegative, so every term of the series is nonnegative when `v` is and
//! the computed image stays in the cone without any rounding-induced sign flips.
//! The interval is split into substeps so that `tau * |B|` stays bounded, which keeps the
//! series short and avoids underflow of `e^{-c tau}`.

use crate::error::{Error, Result};
use crate::lattice::StateVector;

use super::matrix::GeneratorMatrix;

/// Per-substep bound on `tau * |B|` when all terms are nonnegative.
const SUBSTEP_METZLER: f64 = 30.0;
/// Per-substep bound when cancellation between terms is possible.
const SUBSTEP_GENERAL: f64 = 1.0;
const SERIES_TOL: f64 = f64::EPSILON * 0.5;
const MAX_TERMS: usize = 1000;

/// Reusable workspace for repeated `e^{t(A - lambda I)} v` evaluations.
#[derive(Debug)]
pub struct Propagator<'a> {
    a: &'a GeneratorMatrix,
    term: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(a: &'a GeneratorMatrix) -> Self {
        let n = a.dim();
        Self {
            a,
            term: vec![0.0; n],
            next: vec![0.0; n],
            acc: vec![0.0; n],
        }
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        self.a
    }

    /// `out = e^{-lambda t} e^{tA} v`. No argument validation; see [`shifted_apply`].
    pub fn apply_into(&mut self, lambda: f64, t: f64, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        if t == 0.0 {
            return;
        }
        let c = self.a.diag_shift();
        let bnorm = self.a.shifted_norm();
        let theta = if self.a.metzler_verified() {
            SUBSTEP_METZLER
        } else {
            SUBSTEP_GENERAL
        };
        let steps = ((t * bnorm) / theta).ceil().max(1.0);
        let tau = t / steps;
        let rate = tau * bnorm;
        let decay = (-(c + lambda) * tau).exp();

        for _ in 0..steps as usize {
            self.term.copy_from_slice(out);
            self.acc.copy_from_slice(out);
            for k in 1..=MAX_TERMS {
                self.a
                    .shifted_matvec_scaled(tau / k as f64, &self.term, &mut self.next);
                let mut term_norm: f64 = 0.0;
                let mut acc_norm: f64 = 0.0;
                for ((a, n), t) in self.acc.iter_mut().zip(&self.next).zip(self.term.iter_mut()) {
                    *a += n;
                    *t = *n;
                    term_norm = term_norm.max(n.abs());
                    acc_norm = acc_norm.max(a.abs());
                }
                if term_norm == 0.0 {
                    break;
                }
                let ratio = rate / (k + 1) as f64;
                if ratio < 1.0 && term_norm * ratio / (1.0 - ratio) <= SERIES_TOL * acc_norm {
                    break;
                }
            }
            for (o, a) in out.iter_mut().zip(&self.acc) {
                *o = decay * a;
            }
        }
    }
}

fn validate(a: &GeneratorMatrix, t: f64, v: &[f64]) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.len(),
        });
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// `T_A(t) v = e^{tA} v`.
pub fn apply_semigroup(a: &GeneratorMatrix, t: f64, v: &[f64]) -> Result<StateVector> {
    shifted_apply(a, 0.0, t, v)
}

/// `T_{A - lambda I}(t) v = e^{-lambda t} e^{tA} v`. Negative shifts are allowed.
pub fn shifted_apply(a: &GeneratorMatrix, lambda: f64, t: f64, v: &[f64]) -> Result<StateVector> {
    validate(a, t, v)?;
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("shift must be finite, got {lambda}")));
    }
    let mut out = vec![0.0; v.len()];
    Propagator::new(a).apply_into(lambda, t, v, &mut out);
    Ok(out.into())
}

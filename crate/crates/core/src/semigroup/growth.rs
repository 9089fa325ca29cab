use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ComponentKind, NormKind, SpaceSpec};

use super::matrix::GeneratorMatrix;

/// Constants with `|T_A(t)| <= M e^{omega t}` in the space's norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    #[serde(rename = "M")]
    pub m: f64,
    pub omega: f64,
    pub method: GrowthMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMethod {
    /// Logarithmic norm of `A` in the whole (weighted L1) product norm; `M = 1`.
    LogNorm,
    /// `A` is block diagonal over the components; max of per-block logarithmic norms; `M = 1`.
    BlockLogNorm,
    /// Weighted-L1 logarithmic norm transported through norm-equivalence constants; `M >= 1`.
    NormEquivalence,
    /// Supplied by the caller.
    Given,
}

impl GrowthBound {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 1.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("invalid growth bound M = {m}, omega = {omega}")));
        }
        Ok(Self {
            m,
            omega,
            method: GrowthMethod::Given,
        })
    }

    /// `M e^{omega t}`.
    pub fn at(&self, t: f64) -> f64 {
        self.m * (self.omega * t).exp()
    }

    /// `M e^{max(omega, 0)}`: bounds `|T(t)|` uniformly on `t in [0, 1]`.
    pub fn unit_window_constant(&self) -> f64 {
        self.m * self.omega.max(0.0).exp()
    }
}

fn weights(space: &SpaceSpec) -> Vec<f64> {
    let mut w = Vec::with_capacity(space.dof());
    for c in space.components() {
        match &c.kind {
            ComponentKind::Scalar => w.push(1.0),
            ComponentKind::Grid { widths, .. } => w.extend_from_slice(widths),
        }
    }
    w
}

/// Weighted-L1 logarithmic norm restricted to indices in `range` (all when `None`):
/// `max_j (A_jj + sum_{i != j} w_i |A_ij| / w_j)`.
fn lognorm_l1(a: &GeneratorMatrix, w: &[f64], range: std::ops::Range<usize>) -> f64 {
    let mut col = vec![0.0; a.dim()];
    for (i, j, v) in a.triplets() {
        if !range.contains(&i) || !range.contains(&j) {
            continue;
        }
        col[j] += if i == j { v } else { w[i] * v.abs() / w[j] };
    }
    col[range].iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Row-sum logarithmic norm (max norm): `max_i (A_ii + sum_{j != i} |A_ij|)`.
fn lognorm_linf(a: &GeneratorMatrix, range: std::ops::Range<usize>) -> f64 {
    range
        .map(|i| {
            a.row(i)
                .map(|(j, v)| if i == j { v } else { v.abs() })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Gershgorin upper bound on the largest eigenvalue of the symmetric part of
/// `W^{1/2} A W^{-1/2}`, the logarithmic norm in the weighted L2 norm.
fn lognorm_l2(a: &GeneratorMatrix, w: &[f64], range: std::ops::Range<usize>) -> f64 {
    let mut diag = vec![0.0; a.dim()];
    let mut off = vec![0.0; a.dim()];
    for (i, j, v) in a.triplets() {
        if !range.contains(&i) || !range.contains(&j) {
            continue;
        }
        if i == j {
            diag[i] += v;
        } else {
            // A_ij contributes sqrt(w_i / w_j) A_ij / 2 to S_ij and S_ji.
            let s = 0.5 * (w[i] / w[j]).sqrt() * v.abs();
            off[i] += s;
            off[j] += s;
        }
    }
    range
        .map(|i| diag[i] + off[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Growth bound `(M, omega)` of `e^{tA}` in the product norm of `space`.
pub fn growth_bound(space: &SpaceSpec, a: &GeneratorMatrix) -> Result<GrowthBound> {
    if a.dim() != space.dof() {
        return Err(Error::DimensionMismatch {
            expected: space.dof(),
            found: a.dim(),
        });
    }
    let w = weights(space);
    let all_l1 = space.components().iter().all(|c| match &c.kind {
        ComponentKind::Scalar => true,
        ComponentKind::Grid { norm, .. } => *norm == NormKind::L1,
    });
    if all_l1 {
        return Ok(GrowthBound {
            m: 1.0,
            omega: lognorm_l1(a, &w, 0..a.dim()),
            method: GrowthMethod::LogNorm,
        });
    }

    let ranges: Vec<_> = (0..space.components().len()).map(|i| space.range(i)).collect();
    if a.is_block_diagonal(&ranges) {
        let omega = space
            .components()
            .iter()
            .zip(&ranges)
            .map(|(c, r)| match &c.kind {
                ComponentKind::Scalar => a.get(r.start, r.start),
                ComponentKind::Grid { norm, .. } => match norm {
                    NormKind::L1 => lognorm_l1(a, &w, r.clone()),
                    NormKind::L2 => lognorm_l2(a, &w, r.clone()),
                    NormKind::Linf => lognorm_linf(a, r.clone()),
                },
            })
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(GrowthBound {
            m: 1.0,
            omega,
            method: GrowthMethod::BlockLogNorm,
        });
    }

    // |v| <= upper |v|_{1,w} and |v|_{1,w} <= lower |v|, componentwise.
    let mut upper: f64 = 1.0;
    let mut lower: f64 = 1.0;
    for c in space.components() {
        if let ComponentKind::Grid { widths, norm } = &c.kind {
            let wmin = widths.iter().copied().fold(f64::INFINITY, f64::min);
            let total: f64 = widths.iter().sum();
            match norm {
                NormKind::L1 => {}
                NormKind::L2 => {
                    upper = upper.max(1.0 / wmin.sqrt());
                    lower = lower.max(total.sqrt());
                }
                NormKind::Linf => {
                    upper = upper.max(1.0 / wmin);
                    lower = lower.max(total);
                }
            }
        }
    }
    Ok(GrowthBound {
        m: (upper * lower).max(1.0),
        omega: lognorm_l1(a, &w, 0..a.dim()),
        method: GrowthMethod::NormEquivalence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Component;

    #[test]
    fn diagonal_l1() {
        let s = SpaceSpec::new(vec![Component::grid_uniform("g", 2, 1.0, NormKind::L1)]).unwrap();
        let a = GeneratorMatrix::diagonal(&[-1.0, -2.0]).unwrap();
        let g = growth_bound(&s, &a).unwrap();
        assert_eq!((g.m, g.omega), (1.0, -1.0));
        assert_eq!(g.method, GrowthMethod::LogNorm);
    }

    #[test]
    fn zero_generator() {
        let s = SpaceSpec::new(vec![Component::scalar("a"), Component::scalar("b")]).unwrap();
        let g = growth_bound(&s, &GeneratorMatrix::zeros(2).unwrap()).unwrap();
        assert_eq!((g.m, g.omega), (1.0, 0.0));
    }

    #[test]
    fn weighted_columns() {
        // Mass moving from a wide cell into a narrow one is conserved in weighted L1.
        let s = SpaceSpec::new(vec![Component::grid("g", vec![2.0, 0.5], NormKind::L1)]).unwrap();
        let a = GeneratorMatrix::from_dense(&[vec![-1.0, 0.0], vec![4.0, 0.0]]).unwrap();
        let g = growth_bound(&s, &a).unwrap();
        assert!((g.omega - 0.0).abs() < 1e-15);
    }

    #[test]
    fn neumann_laplacian_l2_is_contractive() {
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, 1.0));
                t.push((i, i, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, 1.0));
                t.push((i, i, -1.0));
            }
        }
        let a = GeneratorMatrix::from_triplets(n, t).unwrap();
        let s = SpaceSpec::new(vec![Component::grid_uniform("u", n, 0.1, NormKind::L2)]).unwrap();
        let g = growth_bound(&s, &a).unwrap();
        assert_eq!(g.method, GrowthMethod::BlockLogNorm);
        assert!(g.omega.abs() < 1e-15);
    }

    #[test]
    fn coupled_mixed_norms_fall_back() {
        let s = SpaceSpec::new(vec![
            Component::scalar("a"),
            Component::grid_uniform("g", 2, 0.25, NormKind::L2),
        ])
        .unwrap();
        let a = GeneratorMatrix::from_dense(&[
            vec![-1.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
        ])
        .unwrap();
        let g = growth_bound(&s, &a).unwrap();
        assert_eq!(g.method, GrowthMethod::NormEquivalence);
        assert!(g.m > 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = SpaceSpec::new(vec![Component::scalar("a")]).unwrap();
        assert!(growth_bound(&s, &GeneratorMatrix::zeros(2).unwrap()).is_err());
    }
}

//! Discrete Banach lattices.
//!
//! A [`SpaceSpec`] is an ordered product of scalar and grid components. States are flat
//! vectors partitioned by the space, ordered componentwise, and measured by the product
//! norm: the sum of the component norms. Grid values are cell averages, so the L1 norm
//! of a grid component is the total mass it carries.

use std::ops::{Deref, DerefMut, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative factor of the cone tolerance `tau(v) = CONE_TOL * (1 + |v|)`.
pub const CONE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentKind {
    Scalar,
    Grid { widths: Vec<f64>, norm: NormKind },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub label: String,
    pub kind: ComponentKind,
}

impl Component {
    pub fn scalar(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            kind: ComponentKind::Scalar,
        }
    }

    pub fn grid_uniform(label: impl Into<String>, cells: usize, width: f64, norm: NormKind) -> Self {
        Self::grid(label, vec![width; cells], norm)
    }

    pub fn grid(label: impl Into<String>, widths: Vec<f64>, norm: NormKind) -> Self {
        Self {
            label: label.into(),
            kind: ComponentKind::Grid { widths, norm },
        }
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            ComponentKind::Scalar => 1,
            ComponentKind::Grid { widths, .. } => widths.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Norm of this component's slice of a state.
    pub fn norm_of(&self, v: &[f64]) -> f64 {
        match &self.kind {
            ComponentKind::Scalar => v[0].abs(),
            ComponentKind::Grid { widths, norm } => match norm {
                NormKind::L1 => widths.iter().zip(v).map(|(w, x)| w * x.abs()).sum(),
                NormKind::L2 => widths
                    .iter()
                    .zip(v)
                    .map(|(w, x)| w * x * x)
                    .sum::<f64>()
                    .sqrt(),
                NormKind::Linf => v.iter().fold(0.0, |acc, x| acc.max(x.abs())),
            },
        }
    }

    /// Norm of the unit vector supported on local cell `j`.
    pub fn unit_norm(&self, j: usize) -> f64 {
        match &self.kind {
            ComponentKind::Scalar => 1.0,
            ComponentKind::Grid { widths, norm } => match norm {
                NormKind::L1 => widths[j],
                NormKind::L2 => widths[j].sqrt(),
                NormKind::Linf => 1.0,
            },
        }
    }
}

/// Layout and norm of a discretized product lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceSpec {
    components: Vec<Component>,
    offsets: Vec<usize>,
}

impl SpaceSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSpace("no components".into()));
        }
        let mut offsets = Vec::with_capacity(components.len() + 1);
        let mut acc = 0;
        for c in &components {
            offsets.push(acc);
            if let ComponentKind::Grid { widths, .. } = &c.kind {
                if widths.is_empty() {
                    return Err(Error::InvalidSpace(format!(
                        "grid '{}' has no cells",
                        c.label
                    )));
                }
                if let Some(w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::InvalidSpace(format!(
                        "grid '{}' has non-positive cell width {w}",
                        c.label
                    )));
                }
            }
            acc += c.len();
        }
        offsets.push(acc);
        Ok(Self {
            components,
            offsets,
        })
    }

    /// Total degrees of freedom.
    pub fn dof(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn range(&self, component: usize) -> Range<usize> {
        self.offsets[component]..self.offsets[component + 1]
    }

    /// Component index and local index of a flat degree of freedom.
    pub fn locate(&self, index: usize) -> (usize, usize) {
        let c = self.offsets.partition_point(|&o| o <= index) - 1;
        (c, index - self.offsets[c])
    }

    pub fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Product norm without the dimension check.
    pub fn norm_of(&self, v: &[f64]) -> f64 {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm_of(&v[self.range(i)]))
            .sum()
    }

    pub fn component_norms(&self, v: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm_of(&v[self.range(i)]))
            .collect()
    }

    /// Norm of the unit vector at flat index `index`.
    pub fn unit_norm(&self, index: usize) -> f64 {
        let (c, j) = self.locate(index);
        self.components[c].unit_norm(j)
    }

    /// Cone tolerance for a state: `CONE_TOL * (1 + |v|)`.
    pub fn tolerance(&self, v: &[f64]) -> f64 {
        CONE_TOL * (1.0 + self.norm_of(v))
    }

    /// Column labels: scalars by name, grid cells as `name[j]`.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dof());
        for c in &self.components {
            match &c.kind {
                ComponentKind::Scalar => out.push(c.label.clone()),
                ComponentKind::Grid { widths, .. } => {
                    out.extend((0..widths.len()).map(|j| format!("{}[{j}]", c.label)))
                }
            }
        }
        out
    }

    pub fn zeros(&self) -> StateVector {
        StateVector(vec![0.0; self.dof()])
    }
}

/// A point of the discrete lattice, laid out according to some [`SpaceSpec`].
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Product norm of `v` in `space`.
pub fn norm(space: &SpaceSpec, v: &[f64]) -> Result<f64> {
    space.check(v)?;
    Ok(space.norm_of(v))
}

/// Componentwise maximum.
pub fn lattice_sup(x: &[f64], y: &[f64]) -> Result<StateVector> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a.max(*b)).collect::<Vec<_>>().into())
}

/// `|v| = sup(v, -v)`.
pub fn lattice_abs(v: &[f64]) -> StateVector {
    v.iter().map(|x| x.abs()).collect::<Vec<_>>().into()
}

/// Smallest entry and its (first) index. An empty vector yields `(+inf, 0)`.
pub fn min_component(v: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, &x) in v.iter().enumerate() {
        if x < best.0 {
            best = (x, i);
        }
    }
    best
}

/// Cone membership up to the default tolerance.
pub fn in_cone(space: &SpaceSpec, v: &[f64]) -> bool {
    min_component(v).0 >= -space.tolerance(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> SpaceSpec {
        SpaceSpec::new(vec![
            Component::scalar("S"),
            Component::grid_uniform("I", 2, 1.0, NormKind::L1),
        ])
        .unwrap()
    }

    #[test]
    fn norm_examples() {
        let s = SpaceSpec::new(vec![Component::scalar("x")]).unwrap();
        assert_eq!(norm(&s, &[-3.0]).unwrap(), 3.0);

        let g = SpaceSpec::new(vec![Component::grid_uniform("g", 4, 0.5, NormKind::L1)]).unwrap();
        assert_eq!(norm(&g, &[1.0; 4]).unwrap(), 2.0);

        assert_eq!(norm(&mixed(), &[2.0, 1.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn l2_and_linf() {
        let g = SpaceSpec::new(vec![Component::grid_uniform("g", 2, 0.5, NormKind::L2)]).unwrap();
        assert!((norm(&g, &[2.0, 2.0]).unwrap() - 2.0).abs() < 1e-15);
        let g = SpaceSpec::new(vec![Component::grid_uniform("g", 3, 0.1, NormKind::Linf)]).unwrap();
        assert_eq!(norm(&g, &[1.0, -4.0, 2.0]).unwrap(), 4.0);
    }

    #[test]
    fn norm_rejects_wrong_length() {
        assert!(matches!(
            norm(&mixed(), &[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn invalid_spaces() {
        assert!(SpaceSpec::new(vec![]).is_err());
        assert!(SpaceSpec::new(vec![Component::grid("g", vec![], NormKind::L1)]).is_err());
        assert!(SpaceSpec::new(vec![Component::grid("g", vec![1.0, 0.0], NormKind::L1)]).is_err());
    }

    #[test]
    fn sup_and_abs() {
        assert_eq!(lattice_sup(&[1.0, -2.0], &[0.0, 3.0]).unwrap().0, vec![1.0, 3.0]);
        assert_eq!(lattice_abs(&[-1.0, 2.0]).0, vec![1.0, 2.0]);
        assert_eq!(lattice_abs(&[0.0, 0.0]).0, vec![0.0, 0.0]);
        assert!(lattice_sup(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn min_component_examples() {
        assert_eq!(min_component(&[0.5, 0.0, 2.0]), (0.0, 1));
        assert_eq!(min_component(&[1.0, -1e-9, 3.0]), (-1e-9, 1));
        assert_eq!(min_component(&[0.0, 0.0, 0.0]), (0.0, 0));
    }

    #[test]
    fn cone_tolerance_absorbs_roundoff() {
        let s = mixed();
        assert!(in_cone(&s, &[1.0, -1e-13, 0.0]));
        assert!(!in_cone(&s, &[1.0, -1e-9, 0.0]));
    }

    #[test]
    fn locate_and_labels() {
        let s = mixed();
        assert_eq!(s.locate(0), (0, 0));
        assert_eq!(s.locate(2), (1, 1));
        assert_eq!(s.labels(), vec!["S", "I[0]", "I[1]"]);
        assert_eq!(s.unit_norm(1), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn space(kind: NormKind) -> SpaceSpec {
            SpaceSpec::new(vec![
                Component::scalar("a"),
                Component::grid("g", vec![0.3, 0.7, 1.1, 0.2], kind),
            ])
            .unwrap()
        }

        fn kinds() -> impl Strategy<Value = NormKind> {
            prop_oneof![Just(NormKind::L1), Just(NormKind::L2), Just(NormKind::Linf)]
        }

        proptest! {
            #[test]
            fn norm_axioms(kind in kinds(),
                           x in prop::collection::vec(-10.0..10.0f64, 5),
                           y in prop::collection::vec(-10.0..10.0f64, 5),
                           c in -5.0..5.0f64) {
                let s = space(kind);
                let nx = s.norm_of(&x);
                let ny = s.norm_of(&y);
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                prop_assert!(s.norm_of(&sum) <= nx + ny + 1e-12);
                let scaled: Vec<f64> = x.iter().map(|a| c * a).collect();
                prop_assert!((s.norm_of(&scaled) - c.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
            }

            #[test]
            fn norm_monotone_on_cone(kind in kinds(),
                                     lo in prop::collection::vec(0.0..5.0f64, 5),
                                     gap in prop::collection::vec(0.0..5.0f64, 5)) {
                let s = space(kind);
                let hi: Vec<f64> = lo.iter().zip(&gap).map(|(a, b)| a + b).collect();
                prop_assert!(s.norm_of(&lo) <= s.norm_of(&hi) + 1e-12);
            }

            #[test]
            fn sup_laws(x in prop::collection::vec(-5.0..5.0f64, 6),
                        y in prop::collection::vec(-5.0..5.0f64, 6),
                        z in prop::collection::vec(-5.0..5.0f64, 6)) {
                let xy = lattice_sup(&x, &y).unwrap();
                prop_assert_eq!(&xy, &lattice_sup(&y, &x).unwrap());
                prop_assert_eq!(lattice_sup(&xy, &z).unwrap(),
                                lattice_sup(&x, &lattice_sup(&y, &z).unwrap()).unwrap());
                prop_assert_eq!(lattice_sup(&x, &x).unwrap().0, x.clone());
                prop_assert!(x.iter().zip(xy.iter()).all(|(a, b)| a <= b));
                let neg: Vec<f64> = x.iter().map(|a| -a).collect();
                prop_assert_eq!(lattice_abs(&x), lattice_sup(&x, &neg).unwrap());
            }
        }
    }
}

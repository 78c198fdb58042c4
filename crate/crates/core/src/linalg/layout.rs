use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One labelled tensor factor.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled tensor factors. The order fixes the Kronecker
/// index convention: the first factor is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct SubsystemLayout {
    factors: Vec<Factor>,
}

impl SubsystemLayout {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        if factors.is_empty() {
            return Err(Error::Label("layout has no factors".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::Shape(alloc::format!(
                    "factor `{}` has dimension 0",
                    f.label
                )));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::Label(alloc::format!(
                    "duplicate label `{}`",
                    f.label
                )));
            }
        }
        let mut total: usize = 1;
        for f in &factors {
            total = total.checked_mul(f.dim).ok_or(Error::Dimension {
                requested: usize::MAX,
                cap: usize::MAX,
            })?;
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Position of `label`, or a label error naming it.
    pub fn require(&self, label: &str) -> Result<usize> {
        self.position(label)
            .ok_or_else(|| Error::Label(alloc::format!("unknown label `{label}`")))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.require(label).map(|p| self.factors[p].dim)
    }

    /// New layout with `factor` placed immediately after `after`.
    pub fn insert_after(&self, after: &str, factor: Factor) -> Result<Self> {
        let pos = self.require(after)?;
        if self.contains(&factor.label) {
            return Err(Error::Label(alloc::format!(
                "duplicate label `{}`",
                factor.label
            )));
        }
        let mut factors = self.factors.clone();
        factors.insert(pos + 1, factor);
        Self::new(factors.into_iter().map(|f| (f.label, f.dim)))
    }

    /// Sub-layout of the kept labels, in this layout's order.
    pub fn retain<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let positions = self.positions_of(keep)?;
        Self::new(
            self.factors
                .iter()
                .enumerate()
                .filter(|(i, _)| positions.contains(i))
                .map(|(_, f)| (f.label.clone(), f.dim)),
        )
    }

    /// Positions of the given labels, in the order given. Unknown or repeated
    /// labels are rejected.
    pub fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.require(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::Label(alloc::format!(
                    "label `{}` listed twice",
                    l.as_ref()
                )));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn label_strings(&self) -> Vec<String> {
        self.labels().map(ToString::to_string).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            SubsystemLayout::new([("a", 2), ("a", 3)]),
            Err(Error::Label(_))
        ));
        assert!(matches!(
            SubsystemLayout::new([("a", 0)]),
            Err(Error::Shape(_))
        ));
        assert!(SubsystemLayout::new(Vec::<(String, usize)>::new()).is_err());
    }

    #[test]
    fn insert_and_retain_keep_order() {
        let l = SubsystemLayout::new([("alpha", 2), ("beta", 2)]).unwrap();
        let l = l
            .insert_after(
                "alpha",
                Factor {
                    label: "A".into(),
                    dim: 3,
                },
            )
            .unwrap();
        let l = l
            .insert_after(
                "beta",
                Factor {
                    label: "B".into(),
                    dim: 3,
                },
            )
            .unwrap();
        assert_eq!(l.label_strings(), ["alpha", "A", "beta", "B"]);
        assert_eq!(l.total_dim(), 36);
        let r = l.retain(&["B", "alpha"]).unwrap();
        assert_eq!(r.label_strings(), ["alpha", "B"]);
        assert!(matches!(l.retain(&["C"]), Err(Error::Label(_))));
        assert!(l
            .insert_after(
                "alpha",
                Factor {
                    label: "B".into(),
                    dim: 3
                }
            )
            .is_err());
    }
}

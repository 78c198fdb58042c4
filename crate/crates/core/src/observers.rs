//! Framed views of a shared register.
//!
//! An observer only ever holds the reduced state of the factors inside their
//! frame. Factors outside it are traced out, so nothing an observer computes
//! can depend on operations confined to factors they cannot access.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, ComplexMatrix, SubsystemLayout};
use crate::measurement::{MeasuredSystem, POINTER_DIM};
use crate::quantum::QuantumSystem;
use crate::{ALPHA, BETA, DEVICE_A, DEVICE_B};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverFrame {
    name: String,
    accessible: Vec<String>,
}

impl ObserverFrame {
    pub fn new<I, S>(name: impl Into<String>, accessible: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = Vec::new();
        for l in accessible {
            let l = l.into();
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
        if labels.is_empty() {
            return Err(Error::Frame(
                "an observer frame needs at least one label".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            accessible: labels,
        })
    }

    /// Alice: her particle and her device.
    pub fn alice() -> Self {
        Self::new("alice", [ALPHA, DEVICE_A]).expect("nonempty")
    }

    /// Bob: his particle and his device.
    pub fn bob() -> Self {
        Self::new("bob", [BETA, DEVICE_B]).expect("nonempty")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn accessible(&self) -> &[String] {
        &self.accessible
    }

    pub fn can_access(&self, label: &str) -> bool {
        self.accessible.iter().any(|l| l == label)
    }
}

/// Density matrix held by one observer, with the factors it lives on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ReducedState {
    pub observer: String,
    pub layout: SubsystemLayout,
    pub rho: ComplexMatrix,
}

impl ReducedState {
    /// Probability that the named factors are found in the given basis
    /// states, summed over all other factors of the view.
    pub fn basis_probability(&self, assignment: &[(&str, usize)]) -> Result<f64> {
        let dims = self.layout.dims();
        let mut fixed = Vec::with_capacity(assignment.len());
        for &(label, index) in assignment {
            let p = self.layout.require(label)?;
            if index >= dims[p] {
                return Err(Error::Argument(alloc::format!(
                    "basis index {index} out of range for `{label}`"
                )));
            }
            fixed.push((p, index));
        }
        let mut total = 0.0;
        for i in 0..self.rho.rows() {
            let mut rem = i;
            let mut digits = alloc::vec![0; dims.len()];
            for p in (0..dims.len()).rev() {
                digits[p] = rem % dims[p];
                rem /= dims[p];
            }
            if fixed.iter().all(|&(p, v)| digits[p] == v) {
                total += self.rho[(i, i)].re;
            }
        }
        Ok(total)
    }

    /// Traces this view further down to the factors in `frame`.
    pub fn restrict(&self, frame: &ObserverFrame) -> Result<ReducedState> {
        let system = QuantumSystem::from_parts(
            self.layout.clone(),
            crate::quantum::QuantumState::Mixed(self.rho.clone()),
        );
        reduced_view(&system, frame)
    }
}

/// The reduced state of `frame` on `sys`. Frame labels absent from the system
/// are ignored; a frame sharing no label with it is an error.
pub fn reduced_view(sys: &QuantumSystem, frame: &ObserverFrame) -> Result<ReducedState> {
    let keep: Vec<&str> = sys
        .layout()
        .labels()
        .filter(|l| frame.can_access(l))
        .collect();
    if keep.is_empty() {
        return Err(Error::Frame(alloc::format!(
            "frame `{}` shares no factor with the system",
            frame.name
        )));
    }
    let layout = sys.layout().retain(&keep)?;
    let rho = if keep.len() == sys.layout().len() {
        sys.density_matrix()
    } else {
        partial_trace(&sys.density_matrix(), sys.layout(), &keep)?
    };
    Ok(ReducedState {
        observer: frame.name.clone(),
        layout,
        rho,
    })
}

/// Carol's view of the two pointer records: the post-measurement register
/// with both particles traced out, one particle at a time.
pub fn carol_view(post: &QuantumSystem) -> Result<ReducedState> {
    let expected = [
        (ALPHA, 2),
        (DEVICE_A, POINTER_DIM),
        (BETA, 2),
        (DEVICE_B, POINTER_DIM),
    ];
    let layout = post.layout();
    let matches = layout.len() == expected.len()
        && layout
            .factors()
            .iter()
            .zip(expected)
            .all(|(f, (l, d))| f.label == l && f.dim == d);
    if !matches {
        return Err(Error::Frame(alloc::format!(
            "carol needs the register (alpha, A, beta, B), got {:?}",
            layout.label_strings()
        )));
    }
    // Sum over a' first, then over b'.
    let without_alpha = layout.retain(&[DEVICE_A, BETA, DEVICE_B])?;
    let rho = partial_trace(&post.density_matrix(), layout, &[DEVICE_A, BETA, DEVICE_B])?;
    let rho = partial_trace(&rho, &without_alpha, &[DEVICE_A, DEVICE_B])?;
    Ok(ReducedState {
        observer: "carol".into(),
        layout: layout.retain(&[DEVICE_A, DEVICE_B])?,
        rho,
    })
}

/// Largest entrywise change of `frame`'s reduced state between two runs that
/// differ only in stations outside the frame.
pub fn no_signaling_check(
    first: &MeasuredSystem,
    second: &MeasuredSystem,
    frame: &ObserverFrame,
) -> Result<f64> {
    let inside = |st: &crate::measurement::Station| {
        frame.can_access(&st.particle) || frame.can_access(&st.device)
    };
    let local = |m: &MeasuredSystem| -> Vec<crate::measurement::Station> {
        m.stations.iter().filter(|s| inside(s)).cloned().collect()
    };
    let (a, b) = (local(first), local(second));
    let same = a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            x.particle == y.particle
                && x.device == y.device
                && match (&x.axis, &y.axis) {
                    (None, None) => true,
                    (Some(p), Some(q)) => p.approx_eq(q),
                    _ => false,
                }
        });
    if !same {
        return Err(Error::Argument(alloc::format!(
            "the two runs differ in settings inside frame `{}`",
            frame.name
        )));
    }
    let va = reduced_view(&first.system, frame)?;
    let vb = reduced_view(&second.system, frame)?;
    if va.layout != vb.layout {
        return Err(Error::Argument(
            "the two runs expose different factors to the frame".into(),
        ));
    }
    Ok(va.rho.max_abs_diff(&vb.rho))
}

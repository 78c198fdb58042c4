//! Free evolution of spin states and the retrodicted pair description.
//!
//! The free Hamiltonian is `E·I` on spin space: it commutes with every spin
//! operator, so evolving a spin state over any interval only multiplies it by
//! the phase `e^{iE(t0 − t1)}`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::locality::LocalityModel;
use crate::quantum::{product_pair, MeasurementAxis, Outcome, QuantumState, QuantumSystem};
use crate::tol::ORACLE;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FreeEvolution {
    pub t0: f64,
    pub t1: f64,
    /// Spin-independent energy eigenvalue.
    pub energy: f64,
}

impl FreeEvolution {
    pub fn new(t0: f64, t1: f64, energy: f64) -> Self {
        Self { t0, t1, energy }
    }

    /// `e^{iE(t0 − t1)}`.
    pub fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.energy * (self.t0 - self.t1))
    }

    /// `E·I` on a space of dimension `dim`.
    pub fn hamiltonian(&self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::identity(dim).scale(C64::new(self.energy, 0.0))
    }

    /// `e^{iH(t0 − t1)}` on a space of dimension `dim`.
    pub fn operator(&self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::identity(dim).scale(self.phase())
    }

    /// The same interval traversed in the other direction.
    pub fn reversed(&self) -> Self {
        Self {
            t0: self.t1,
            t1: self.t0,
            energy: self.energy,
        }
    }
}

/// `A·B − B·A`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// Evolves a particles-only state from `t1` back to `t0`, returning the new
/// state and the global phase it picked up.
pub fn evolve_back(state: &QuantumSystem, ev: &FreeEvolution) -> Result<(QuantumSystem, C64)> {
    if let Some(f) = state.layout().factors().iter().find(|f| f.dim != 2) {
        return Err(Error::Argument(alloc::format!(
            "free evolution acts on spin factors only; `{}` has dimension {}",
            f.label,
            f.dim
        )));
    }
    let u = ev.operator(state.layout().total_dim());
    let evolved = match state.state() {
        QuantumState::Pure(psi) => QuantumState::Pure(u.matmul(psi)?),
        QuantumState::Mixed(rho) => QuantumState::Mixed(u.matmul(rho)?.matmul(&u.dagger())?),
    };
    Ok((
        QuantumSystem::from_parts(state.layout().clone(), evolved),
        ev.phase(),
    ))
}

/// `|n̂, o⟩_alpha ⊗ |n̂, −o⟩_beta`: Alice's description at separation time
/// after reading `alice_outcome` along `axis`.
pub fn retrodicted_pair_state(alice_outcome: Outcome, axis: &MeasurementAxis) -> QuantumSystem {
    product_pair((axis, alice_outcome), (axis, alice_outcome.flip()))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaugeComparison {
    pub axis_a: MeasurementAxis,
    pub axis_b: MeasurementAxis,
    /// Probability of equal outcomes predicted by each state.
    pub equal_first: f64,
    pub equal_second: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaugeReport {
    pub comparisons: Vec<GaugeComparison>,
    /// Every comparison agrees.
    pub all_agree: bool,
}

impl GaugeReport {
    /// Comparisons on which the two descriptions differ. These are
    /// frame-dependent quantities, not contradictions.
    pub fn frame_dependent(&self) -> impl Iterator<Item = &GaugeComparison> {
        self.comparisons.iter().filter(|c| !c.agree)
    }
}

/// Compares the equal-outcome probability of two pair states at each setting
/// pair.
pub fn gauge_equivalence_check(
    first: &QuantumSystem,
    second: &QuantumSystem,
    observables: &[(MeasurementAxis, MeasurementAxis)],
) -> Result<GaugeReport> {
    if first.layout() != second.layout() {
        return Err(Error::Argument("states live on different layouts".into()));
    }
    let comparisons = observables
        .iter()
        .map(|(a, b)| {
            let p = first.observed_joint(a, b)?.equal_outcomes();
            let q = second.observed_joint(a, b)?.equal_outcomes();
            Ok(GaugeComparison {
                axis_a: *a,
                axis_b: *b,
                equal_first: p,
                equal_second: q,
                agree: (p - q).abs() <= ORACLE,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_agree = comparisons.iter().all(|c| c.agree);
    Ok(GaugeReport {
        comparisons,
        all_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank;
    use crate::observers::{reduced_view, ObserverFrame};
    use crate::quantum::{born_probability, eigenket, make_singlet, spin_operator, SpinEvent};
    use crate::{ALPHA, BETA};

    #[test]
    fn eigenket_picks_up_only_a_phase() {
        let axis = MeasurementAxis::new(1.2, 0.5).unwrap();
        let layout = crate::linalg::SubsystemLayout::new([(ALPHA, 2)]).unwrap();
        let ket = QuantumSystem::pure(layout, eigenket(&axis, Outcome::Up)).unwrap();
        let ev = FreeEvolution::new(0.0, 3.5, 1.7);
        let (out, phase) = evolve_back(&ket, &ev).unwrap();
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        let expected = ket.vector().unwrap().scale(phase);
        assert!(out.vector().unwrap().approx_eq(&expected, 1e-15));
        let want = C64::from_polar(1.0, 1.7 * (0.0 - 3.5));
        assert!((phase - want).norm() < 1e-15);
    }

    #[test]
    fn equal_times_leave_state_unchanged() {
        let s = make_singlet();
        let (out, phase) = evolve_back(&s, &FreeEvolution::new(2.0, 2.0, 9.0)).unwrap();
        assert_eq!(phase, C64::new(1.0, 0.0));
        assert_eq!(out, s);
    }

    #[test]
    fn hamiltonian_commutes_with_spin() {
        let ev = FreeEvolution::new(0.0, 1.0, 4.2);
        let h = ev.hamiltonian(2);
        for axis in [
            MeasurementAxis::x(),
            MeasurementAxis::new(2.5, 5.5).unwrap(),
        ] {
            let c = commutator(&h, &spin_operator(&axis)).unwrap();
            assert!(c.approx_eq(&ComplexMatrix::zeros(2, 2), 1e-14));
        }
    }

    #[test]
    fn devices_are_rejected() {
        let s = crate::measurement::attach_device(
            &make_singlet(),
            ALPHA,
            &crate::measurement::PointerDevice::new("A"),
        )
        .unwrap();
        assert!(matches!(
            evolve_back(&s, &FreeEvolution::new(0.0, 1.0, 1.0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn retrodicted_state_examples() {
        let z = MeasurementAxis::z();
        let r = retrodicted_pair_state(Outcome::Up, &z);
        let expected = ComplexMatrix::basis(2, 0)
            .kron(&ComplexMatrix::basis(2, 1))
            .unwrap();
        assert!(r.vector().unwrap().approx_eq(&expected, 1e-15));
        let p = born_probability(&r, &[SpinEvent::new(BETA, z, Outcome::Down)]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let n = MeasurementAxis::new(0.4, 3.0).unwrap();
        let r = retrodicted_pair_state(Outcome::Down, &n);
        assert!((r.overlap(&make_singlet()).unwrap() - 0.5).abs() < 1e-10);
        for frame in [ObserverFrame::alice(), ObserverFrame::bob()] {
            let v = reduced_view(&r, &frame).unwrap();
            assert_eq!(numerical_rank(&v.rho, 1e-10).unwrap(), 1);
        }
    }

    #[test]
    fn gauge_examples() {
        let z = MeasurementAxis::z();
        let x = MeasurementAxis::x();
        let s = make_singlet();
        let r = retrodicted_pair_state(Outcome::Up, &z);
        let report = gauge_equivalence_check(&s, &r, &[(z, z)]).unwrap();
        assert!(report.all_agree);
        assert!(report.comparisons[0].equal_first <= 1e-12);
        assert!(report.comparisons[0].equal_second <= 1e-12);
        let report = gauge_equivalence_check(&s, &r, &[(z, z), (x, x)]).unwrap();
        assert!(!report.all_agree);
        let differing: Vec<_> = report.frame_dependent().collect();
        assert_eq!(differing.len(), 1);
        assert!((differing[0].equal_second - 0.5).abs() < 1e-12);
        let own = gauge_equivalence_check(&r, &r, &[(z, z), (x, x), (z, x)]).unwrap();
        assert!(own.all_agree);
        let other = crate::measurement::attach_device(
            &s,
            ALPHA,
            &crate::measurement::PointerDevice::new("A"),
        )
        .unwrap();
        assert!(matches!(
            gauge_equivalence_check(&s, &other, &[(z, z)]),
            Err(Error::Argument(_))
        ));
    }
}

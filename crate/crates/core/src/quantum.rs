//! Spin-½ states and observables.
//!
//! Units have ħ = 1. Spin operators keep their ±1/2 eigenvalues; every
//! statistic reports outcomes as signs ±1.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_to_density, apply_to_vector, is_positive_semidefinite, ComplexMatrix, SubsystemLayout,
    C64,
};
use crate::tol::{AXIS_ANGLE, INVARIANT};
use crate::{ALPHA, BETA};

/// Direction n̂ = (sinθ cosφ, sinθ sinφ, cosθ).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeasurementAxis {
    theta: f64,
    phi: f64,
}

impl MeasurementAxis {
    /// `theta` must lie in [0, π]; `phi` is wrapped into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Argument("axis angles must be finite".into()));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Argument(alloc::format!(
                "polar angle {theta} outside [0, π]"
            )));
        }
        let mut phi = libm::fmod(phi, TAU);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta.to_radians(), phi.to_radians())
    }

    /// Axis along a nonzero 3-vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let n = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return Err(Error::Argument(
                "axis vector must be finite and nonzero".into(),
            ));
        }
        let z = (v[2] / n).clamp(-1.0, 1.0);
        let phi = if v[0] == 0.0 && v[1] == 0.0 {
            0.0
        } else {
            libm::atan2(v[1], v[0])
        };
        Self::new(libm::acos(z), phi)
    }

    /// Axis in the x–z plane at `angle` radians from ẑ towards x̂, for angles
    /// in [0, π].
    pub fn in_xz_plane(angle: f64) -> Result<Self> {
        Self::new(angle, 0.0)
    }

    pub fn z() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn x() -> Self {
        Self {
            theta: PI / 2.0,
            phi: 0.0,
        }
    }

    pub fn y() -> Self {
        Self {
            theta: PI / 2.0,
            phi: PI / 2.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = libm::sincos(self.theta);
        let (sp, cp) = libm::sincos(self.phi);
        [st * cp, st * sp, ct]
    }

    pub fn opposite(&self) -> Self {
        let [x, y, z] = self.unit_vector();
        Self::from_vector([-x, -y, -z]).expect("unit vector is nonzero")
    }

    /// Angle between the two directions, accurate near 0 and π.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = libm::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);
        libm::atan2(sin, dot)
    }

    /// Same direction within the axis tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.angle_to(other) <= AXIS_ANGLE
    }
}

/// Sign of a spin projection along the measured axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Up, Outcome::Down];

    pub fn sign(self) -> i32 {
        match self {
            Outcome::Up => 1,
            Outcome::Down => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Up => Outcome::Down,
            Outcome::Down => Outcome::Up,
        }
    }

    /// Row of this outcome in two-outcome tables (Up first).
    pub fn index(self) -> usize {
        match self {
            Outcome::Up => 0,
            Outcome::Down => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Up => "up",
            Outcome::Down => "down",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    /// Unit-norm column vector.
    Pure(ComplexMatrix),
    /// Hermitian, unit-trace, positive semidefinite matrix.
    Mixed(ComplexMatrix),
}

/// Labelled register plus its state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    layout: SubsystemLayout,
    state: QuantumState,
}

impl QuantumSystem {
    pub fn pure(layout: SubsystemLayout, psi: ComplexMatrix) -> Result<Self> {
        if !psi.is_column() || psi.rows() != layout.total_dim() {
            return Err(Error::Shape(alloc::format!(
                "state of shape {}x{} does not match layout dimension {}",
                psi.rows(),
                psi.cols(),
                layout.total_dim()
            )));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > INVARIANT {
            return Err(Error::State(alloc::format!("state vector has norm {norm}")));
        }
        Ok(Self {
            layout,
            state: QuantumState::Pure(psi),
        })
    }

    pub fn from_amplitudes(layout: SubsystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        Self::pure(layout, ComplexMatrix::column(amplitudes)?)
    }

    pub fn mixed(layout: SubsystemLayout, rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() || rho.rows() != layout.total_dim() {
            return Err(Error::Shape("density matrix does not match layout".into()));
        }
        if !rho.is_hermitian(INVARIANT) {
            return Err(Error::State("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > INVARIANT || tr.im.abs() > INVARIANT {
            return Err(Error::State(alloc::format!(
                "density matrix has trace {tr}"
            )));
        }
        if !is_positive_semidefinite(&rho, INVARIANT) {
            return Err(Error::State(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(Self {
            layout,
            state: QuantumState::Mixed(rho),
        })
    }

    /// Wraps a state produced by a norm- or trace-preserving map.
    pub(crate) fn from_parts(layout: SubsystemLayout, state: QuantumState) -> Self {
        Self { layout, state }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn is_pure_vector(&self) -> bool {
        matches!(self.state, QuantumState::Pure(_))
    }

    /// State vector, when the state is held as one.
    pub fn vector(&self) -> Option<&ComplexMatrix> {
        match &self.state {
            QuantumState::Pure(psi) => Some(psi),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.state {
            QuantumState::Pure(psi) => psi.outer(),
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }

    /// Same layout, state held as a density matrix.
    pub fn to_mixed(&self) -> Self {
        Self::from_parts(
            self.layout.clone(),
            QuantumState::Mixed(self.density_matrix()),
        )
    }

    /// `Tr(ρ σ)`; for two pure states this is `|⟨ψ|φ⟩|²`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::Argument(
                "overlap of systems with different layouts".into(),
            ));
        }
        match (&self.state, &other.state) {
            (QuantumState::Pure(a), QuantumState::Pure(b)) => Ok(a.inner(b)?.norm_sqr()),
            _ => Ok(self
                .density_matrix()
                .matmul(&other.density_matrix())?
                .trace()
                .re),
        }
    }

    /// Applies `op` to the named factors. The caller guarantees `op` is
    /// unitary on those factors.
    pub(crate) fn apply_unitary<S: AsRef<str>>(
        &self,
        targets: &[S],
        op: &ComplexMatrix,
    ) -> Result<Self> {
        let state = match &self.state {
            QuantumState::Pure(psi) => {
                QuantumState::Pure(apply_to_vector(psi, &self.layout, targets, op)?)
            }
            QuantumState::Mixed(rho) => {
                QuantumState::Mixed(apply_to_density(rho, &self.layout, targets, op)?)
            }
        };
        Ok(Self::from_parts(self.layout.clone(), state))
    }
}

fn qubit_layout() -> SubsystemLayout {
    SubsystemLayout::new([(ALPHA, 2), (BETA, 2)]).expect("canonical layout is valid")
}

/// `(|+−⟩ − |−+⟩)/√2` in the ẑ basis on factors (alpha, beta).
pub fn make_singlet() -> QuantumSystem {
    let h = FRAC_1_SQRT_2;
    let psi = ComplexMatrix::from_real(4, 1, &[0.0, h, -h, 0.0]).expect("finite amplitudes");
    QuantumSystem::from_parts(qubit_layout(), QuantumState::Pure(psi))
}

/// The singlet written in the eigenbasis of `reference`:
/// `(|n+⟩|n−⟩ − |n−⟩|n+⟩)/√2`. With the eigenket phase convention used here
/// the basis change has unit determinant, so this is the same vector as
/// [`make_singlet`] up to rounding.
pub fn singlet_along(reference: &MeasurementAxis) -> QuantumSystem {
    let up = eigenket(reference, Outcome::Up);
    let down = eigenket(reference, Outcome::Down);
    let psi = up
        .kron(&down)
        .and_then(|a| a.sub(&down.kron(&up)?))
        .expect("2x2 products are within the cap")
        .scale(C64::new(FRAC_1_SQRT_2, 0.0));
    QuantumSystem::from_parts(qubit_layout(), QuantumState::Pure(psi))
}

/// `|n̂_a, a⟩ ⊗ |n̂_b, b⟩` on factors (alpha, beta).
pub fn product_pair(
    alice: (&MeasurementAxis, Outcome),
    bob: (&MeasurementAxis, Outcome),
) -> QuantumSystem {
    let psi = eigenket(alice.0, alice.1)
        .kron(&eigenket(bob.0, bob.1))
        .expect("2x2 products are within the cap");
    QuantumSystem::from_parts(qubit_layout(), QuantumState::Pure(psi))
}

/// Eigenket of `S·n̂`. Up is `(cos θ/2, e^{iφ} sin θ/2)`, Down is
/// `(−e^{−iφ} sin θ/2, cos θ/2)`.
pub fn eigenket(axis: &MeasurementAxis, outcome: Outcome) -> ComplexMatrix {
    let (s, c) = libm::sincos(axis.theta / 2.0);
    let phase = C64::from_polar(1.0, axis.phi);
    let data = match outcome {
        Outcome::Up => vec![C64::new(c, 0.0), phase * s],
        Outcome::Down => vec![-phase.conj() * s, C64::new(c, 0.0)],
    };
    ComplexMatrix::column(data).expect("finite amplitudes")
}

/// `(1/2) n̂·σ⃗`.
pub fn spin_operator(axis: &MeasurementAxis) -> ComplexMatrix {
    let [x, y, z] = axis.unit_vector();
    let data = vec![
        C64::new(0.5 * z, 0.0),
        C64::new(0.5 * x, -0.5 * y),
        C64::new(0.5 * x, 0.5 * y),
        C64::new(-0.5 * z, 0.0),
    ];
    ComplexMatrix::new(2, 2, data).expect("finite entries")
}

/// Rank-1 eigenprojector of `S·n̂` for the given outcome.
pub fn projector(axis: &MeasurementAxis, outcome: Outcome) -> ComplexMatrix {
    eigenket(axis, outcome).outer()
}

/// One spin factor found with one outcome along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEvent {
    pub label: String,
    pub axis: MeasurementAxis,
    pub outcome: Outcome,
}

impl SpinEvent {
    pub fn new(label: impl Into<String>, axis: MeasurementAxis, outcome: Outcome) -> Self {
        Self {
            label: label.into(),
            axis,
            outcome,
        }
    }
}

/// `Tr(ρ ⊗_k P_k)` with identity on factors not named by any event.
pub fn born_probability(sys: &QuantumSystem, events: &[SpinEvent]) -> Result<f64> {
    let layout = sys.layout();
    for (i, e) in events.iter().enumerate() {
        if events[..i].iter().any(|f| f.label == e.label) {
            return Err(Error::Event(alloc::format!(
                "label `{}` measured twice",
                e.label
            )));
        }
        let dim = layout
            .dim_of(&e.label)
            .map_err(|_| Error::Event(alloc::format!("unknown label `{}`", e.label)))?;
        if dim != 2 {
            return Err(Error::Event(alloc::format!(
                "label `{}` has dimension {dim}, not a spin-1/2 factor",
                e.label
            )));
        }
    }
    if events.is_empty() {
        return Ok(1.0);
    }
    let mut op = projector(&events[0].axis, events[0].outcome);
    for e in &events[1..] {
        op = op.kron(&projector(&e.axis, e.outcome))?;
    }
    let targets: Vec<&str> = events.iter().map(|e| e.label.as_str()).collect();
    let p = match sys.state() {
        QuantumState::Pure(psi) => psi.inner(&apply_to_vector(psi, layout, &targets, &op)?)?.re,
        QuantumState::Mixed(rho) => apply_to_density(rho, layout, &targets, &op)?.trace().re,
    };
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn axis_validation_and_wrapping() {
        assert!(MeasurementAxis::new(-0.1, 0.0).is_err());
        assert!(MeasurementAxis::new(3.2, 0.0).is_err());
        assert!(MeasurementAxis::new(f64::NAN, 0.0).is_err());
        let a = MeasurementAxis::new(1.0, -PI / 2.0).unwrap();
        assert!(close(a.phi(), 1.5 * PI, 1e-15));
        let [x, y, z] = a.unit_vector();
        assert!(close(x * x + y * y + z * z, 1.0, 1e-12));
        assert!(MeasurementAxis::z().approx_eq(&MeasurementAxis::new(1e-10, 2.0).unwrap()));
        assert!(!MeasurementAxis::z().approx_eq(&MeasurementAxis::new(1e-8, 0.0).unwrap()));
        assert!(close(
            MeasurementAxis::z().angle_to(&MeasurementAxis::z().opposite()),
            PI,
            1e-15
        ));
    }

    #[test]
    fn from_vector_roundtrip() {
        let a = MeasurementAxis::new(0.7, 4.0).unwrap();
        let b = MeasurementAxis::from_vector(a.unit_vector()).unwrap();
        assert!(a.approx_eq(&b));
        assert!(MeasurementAxis::from_vector([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn singlet_vector() {
        let s = make_singlet();
        let psi = s.vector().unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(
            psi.as_slice(),
            ComplexMatrix::from_real(4, 1, &[0.0, h, -h, 0.0])
                .unwrap()
                .as_slice()
        );
        assert!(close(psi.norm(), 1.0, 1e-15));
        let triplet = ComplexMatrix::from_real(4, 1, &[0.0, h, h, 0.0]).unwrap();
        assert!(psi.inner(&triplet).unwrap().norm() < 1e-15);
        assert_eq!(s.layout().label_strings(), [ALPHA, BETA]);
    }

    #[test]
    fn singlet_is_reference_axis_independent() {
        let s = make_singlet();
        for axis in [
            MeasurementAxis::x(),
            MeasurementAxis::y(),
            MeasurementAxis::new(2.0, 5.0).unwrap(),
        ] {
            let other = singlet_along(&axis);
            assert!(other
                .vector()
                .unwrap()
                .approx_eq(s.vector().unwrap(), 1e-15));
        }
    }

    #[test]
    fn spin_operator_examples() {
        let sz = spin_operator(&MeasurementAxis::z());
        assert!(sz.approx_eq(
            &ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, -0.5]).unwrap(),
            0.0
        ));
        let sx = spin_operator(&MeasurementAxis::x());
        assert!(sx.approx_eq(
            &ComplexMatrix::from_real(2, 2, &[0.0, 0.5, 0.5, 0.0]).unwrap(),
            1e-16
        ));
        let ev = hermitian_eigenvalues(&sx).unwrap();
        assert!(close(ev[0], -0.5, 1e-12) && close(ev[1], 0.5, 1e-12));
        let any = spin_operator(&MeasurementAxis::new(1.1, 0.3).unwrap());
        assert!(any.trace().norm() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let pz = projector(&MeasurementAxis::z(), Outcome::Up);
        assert!(pz.approx_eq(
            &ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            0.0
        ));
        let axis = MeasurementAxis::new(2.2, 0.9).unwrap();
        for o in Outcome::ALL {
            let p = projector(&axis, o);
            assert!(p.matmul(&p).unwrap().approx_eq(&p, 1e-12));
            assert!(p.is_hermitian(1e-15));
        }
        let sum = projector(&axis, Outcome::Up)
            .add(&projector(&axis, Outcome::Down))
            .unwrap();
        assert!(sum.approx_eq(&ComplexMatrix::identity(2), 1e-12));
    }

    #[test]
    fn born_examples() {
        let s = make_singlet();
        let n = MeasurementAxis::new(0.4, 1.3).unwrap();
        let p = born_probability(&s, &[SpinEvent::new(ALPHA, n, Outcome::Up)]).unwrap();
        assert!(close(p, 0.5, 1e-12));
        let p = born_probability(
            &s,
            &[
                SpinEvent::new(ALPHA, n, Outcome::Up),
                SpinEvent::new(BETA, n, Outcome::Down),
            ],
        )
        .unwrap();
        assert!(close(p, 0.5, 1e-12));
        let p = born_probability(
            &s,
            &[
                SpinEvent::new(ALPHA, n, Outcome::Up),
                SpinEvent::new(BETA, n, Outcome::Up),
            ],
        )
        .unwrap();
        assert!(p.abs() <= 1e-12);
        let p = born_probability(
            &s,
            &[
                SpinEvent::new(ALPHA, MeasurementAxis::z(), Outcome::Up),
                SpinEvent::new(BETA, MeasurementAxis::x(), Outcome::Up),
            ],
        )
        .unwrap();
        assert!(close(p, 0.25, 1e-12));
        assert_eq!(born_probability(&s, &[]).unwrap(), 1.0);
    }

    #[test]
    fn born_matches_mixed_representation() {
        let s = make_singlet();
        let m = s.to_mixed();
        let n = MeasurementAxis::new(0.9, 0.2).unwrap();
        let ev = [SpinEvent::new(BETA, n, Outcome::Down)];
        assert!(close(
            born_probability(&s, &ev).unwrap(),
            born_probability(&m, &ev).unwrap(),
            1e-14
        ));
    }

    #[test]
    fn born_errors() {
        let s = make_singlet();
        let z = MeasurementAxis::z();
        let dup = [
            SpinEvent::new(ALPHA, z, Outcome::Up),
            SpinEvent::new(ALPHA, z, Outcome::Down),
        ];
        assert!(matches!(born_probability(&s, &dup), Err(Error::Event(_))));
        assert!(matches!(
            born_probability(&s, &[SpinEvent::new("gamma", z, Outcome::Up)]),
            Err(Error::Event(_))
        ));
    }

    #[test]
    fn system_validation() {
        let l = qubit_layout();
        let bad = ComplexMatrix::from_real(4, 1, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            QuantumSystem::pure(l.clone(), bad),
            Err(Error::State(_))
        ));
        let not_psd = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.5, 0., 0., 0., 0., -0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.,
            ],
        )
        .unwrap();
        assert!(matches!(
            QuantumSystem::mixed(l.clone(), not_psd),
            Err(Error::State(_))
        ));
        let mixed = ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0));
        assert!(QuantumSystem::mixed(l, mixed).is_ok());
    }
}

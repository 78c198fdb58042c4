//! Simulation core for the singlet-pair measurement experiment.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! * [`linalg`]: dense complex matrices, Kronecker products, partial traces over
//!   labelled tensor factors and a Hermitian eigensolver.
//! * [`quantum`]: spin-½ states, arbitrary-axis spin observables, projectors
//!   and Born-rule probabilities.
//! * [`measurement`]: a three-state pointer device coupled to a spin by a
//!   controlled shift, plus seeded, counter-mode Born-rule sampling.
//! * [`observers`]: framed reduced states, the third-party comparison of the
//!   two pointer records, and a no-signalling check.
//! * [`locality`]: conditional probabilities, the Bell-locality and
//!   factorization predicates, CHSH evaluation and local-hidden-variable
//!   baselines.
//! * [`evolution`]: spin-independent free evolution and the retrodicted
//!   anti-correlated product description.
//!
//! Tensor factors are ordered as written in kets: particle `alpha`, Alice's
//! device `A`, particle `beta`, Bob's device `B`. The spin basis index 0 is
//! spin up along ẑ.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod evolution;
pub mod linalg;
pub mod locality;
pub mod measurement;
pub mod observers;
pub mod quantum;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SubsystemLayout, C64};
pub use quantum::{MeasurementAxis, Outcome, QuantumState, QuantumSystem};

/// Canonical label of Alice's particle.
pub const ALPHA: &str = "alpha";
/// Canonical label of Bob's particle.
pub const BETA: &str = "beta";
/// Canonical label of Alice's pointer device.
pub const DEVICE_A: &str = "A";
/// Canonical label of Bob's pointer device.
pub const DEVICE_B: &str = "B";

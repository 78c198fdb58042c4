//! Pointer-device measurement.
//!
//! Each spin is read by a three-level pointer with orthonormal states
//! Ready, PointUp and PointDown. Measuring along n̂ is the controlled shift
//!
//! ```text
//! U = P_up(n̂) ⊗ X_up + P_down(n̂) ⊗ X_down
//! ```
//!
//! where `X_up` swaps Ready with PointUp and `X_down` swaps Ready with
//! PointDown. Both swaps are unitary and the projectors are complementary, so
//! `U` is unitary, leaves spin eigenstates untouched and moves a Ready
//! pointer to the reading that matches the spin.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, permute_density, permute_vector, ComplexMatrix, Factor, C64};
use crate::quantum::{
    born_probability, projector, MeasurementAxis, Outcome, QuantumState, QuantumSystem, SpinEvent,
};
use crate::tol::INVARIANT;

pub const POINTER_DIM: usize = 3;

/// Pointer basis state; the discriminant is its basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum PointerState {
    Ready = 0,
    PointUp = 1,
    PointDown = 2,
}

impl PointerState {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn reading(outcome: Outcome) -> Self {
        match outcome {
            Outcome::Up => PointerState::PointUp,
            Outcome::Down => PointerState::PointDown,
        }
    }

    pub fn ket(self) -> ComplexMatrix {
        ComplexMatrix::basis(POINTER_DIM, self.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerDevice {
    pub label: String,
}

impl PointerDevice {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
        }
    }
}

/// Tensors a Ready pointer onto `sys`, placed right after `particle`.
pub fn attach_device(
    sys: &QuantumSystem,
    particle: &str,
    device: &PointerDevice,
) -> Result<QuantumSystem> {
    let layout = sys.layout();
    if layout.dim_of(particle)? != 2 {
        return Err(Error::Label(alloc::format!(
            "`{particle}` is not a spin-1/2 factor"
        )));
    }
    let target = layout.insert_after(
        particle,
        Factor {
            label: device.label.clone(),
            dim: POINTER_DIM,
        },
    )?;
    let appended = crate::linalg::SubsystemLayout::new(
        layout
            .factors()
            .iter()
            .map(|f| (f.label.clone(), f.dim))
            .chain(core::iter::once((device.label.clone(), POINTER_DIM))),
    )?;
    let order = target.label_strings();
    let ready = PointerState::Ready.ket();
    let state = match sys.state() {
        QuantumState::Pure(psi) => {
            let (v, _) = permute_vector(&psi.kron(&ready)?, &appended, &order)?;
            QuantumState::Pure(v)
        }
        QuantumState::Mixed(rho) => {
            let (m, _) = permute_density(&rho.kron(&ready.outer())?, &appended, &order)?;
            QuantumState::Mixed(m)
        }
    };
    Ok(QuantumSystem::from_parts(target, state))
}

/// Pointer unitary swapping Ready with the reading for `outcome`.
pub fn pointer_shift(outcome: Outcome) -> ComplexMatrix {
    let reading = PointerState::reading(outcome).index();
    let other = 3 - reading;
    let mut data = vec![C64::new(0.0, 0.0); POINTER_DIM * POINTER_DIM];
    data[reading] = C64::new(1.0, 0.0);
    data[reading * POINTER_DIM] = C64::new(1.0, 0.0);
    data[other * POINTER_DIM + other] = C64::new(1.0, 0.0);
    ComplexMatrix::new(POINTER_DIM, POINTER_DIM, data).expect("finite entries")
}

/// The 6×6 spin–pointer coupling for a measurement along `axis`, ordered
/// (spin, pointer).
pub fn measurement_unitary(axis: &MeasurementAxis) -> ComplexMatrix {
    let up = projector(axis, Outcome::Up).kron(&pointer_shift(Outcome::Up));
    let down = projector(axis, Outcome::Down).kron(&pointer_shift(Outcome::Down));
    up.and_then(|u| u.add(&down?))
        .expect("6x6 is within the cap")
}

/// Probability that `device` reads Ready.
pub fn ready_weight(sys: &QuantumSystem, device: &str) -> Result<f64> {
    if sys.layout().dim_of(device)? != POINTER_DIM {
        return Err(Error::Label(alloc::format!(
            "`{device}` is not a pointer device"
        )));
    }
    let rho = partial_trace(&sys.density_matrix(), sys.layout(), &[device])?;
    Ok(rho[(0, 0)].re)
}

/// Couples `particle` to `device` along `axis`. The device must still be
/// Ready.
pub fn measure_unitary(
    sys: &QuantumSystem,
    particle: &str,
    device: &str,
    axis: &MeasurementAxis,
) -> Result<QuantumSystem> {
    if sys.layout().dim_of(particle)? != 2 {
        return Err(Error::Label(alloc::format!(
            "`{particle}` is not a spin-1/2 factor"
        )));
    }
    let ready = ready_weight(sys, device)?;
    if (ready - 1.0).abs() > INVARIANT {
        return Err(Error::State(alloc::format!(
            "device `{device}` has already fired (Ready weight {ready})"
        )));
    }
    sys.apply_unitary(&[particle, device], &measurement_unitary(axis))
}

/// One measuring station. `axis == None` means the station never measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub observer: String,
    pub particle: String,
    pub device: String,
    pub axis: Option<MeasurementAxis>,
}

impl Station {
    pub fn new(
        observer: impl Into<String>,
        particle: impl Into<String>,
        device: impl Into<String>,
        axis: Option<MeasurementAxis>,
    ) -> Self {
        Self {
            observer: observer.into(),
            particle: particle.into(),
            device: device.into(),
            axis,
        }
    }
}

/// A post-measurement system together with the stations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSystem {
    pub system: QuantumSystem,
    pub stations: Vec<Station>,
}

/// Attaches a device per station (when not already present) and applies each
/// station's measurement in order.
pub fn measure_stations(prepared: &QuantumSystem, stations: &[Station]) -> Result<MeasuredSystem> {
    let mut sys = prepared.clone();
    for st in stations {
        if !sys.layout().contains(&st.device) {
            sys = attach_device(&sys, &st.particle, &PointerDevice::new(st.device.clone()))?;
        }
    }
    for st in stations {
        if let Some(axis) = &st.axis {
            sys = measure_unitary(&sys, &st.particle, &st.device, axis)?;
        }
    }
    Ok(MeasuredSystem {
        system: sys,
        stations: stations.to_vec(),
    })
}

/// What one observer reads on one trial.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeasurementRecord {
    pub trial: u64,
    pub observer: String,
    pub axis: MeasurementAxis,
    pub outcome: Outcome,
    pub seed: u64,
}

/// Who measures which particle along which axis in a sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSetting {
    pub observer: String,
    pub particle: String,
    pub device: Option<String>,
    pub axis: MeasurementAxis,
}

impl StationSetting {
    pub fn new(
        observer: impl Into<String>,
        particle: impl Into<String>,
        axis: MeasurementAxis,
    ) -> Self {
        Self {
            observer: observer.into(),
            particle: particle.into(),
            device: None,
            axis,
        }
    }

    pub fn with_device(mut self, device: impl Into<String>) -> Self {
        self.device = Some(device.into());
        self
    }
}

const MAX_STATIONS: usize = 16;

/// Exact joint outcome distribution of a set of stations, sampled by inverse
/// CDF.
///
/// Trial `t` of a run with seed `s` consumes the `t`-th 64-bit word of the
/// ChaCha8 stream seeded with `s`. Any partition of the trial range into
/// chunks therefore reproduces the serial run exactly.
#[derive(Debug, Clone)]
pub struct JointSampler {
    settings: Vec<StationSetting>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl JointSampler {
    pub fn new(sys: &QuantumSystem, settings: &[StationSetting]) -> Result<Self> {
        if settings.is_empty() || settings.len() > MAX_STATIONS {
            return Err(Error::Argument(alloc::format!(
                "between 1 and {MAX_STATIONS} stations required, got {}",
                settings.len()
            )));
        }
        for s in settings {
            if let Some(device) = &s.device {
                if sys.layout().dim_of(device)? != POINTER_DIM {
                    return Err(Error::Label(alloc::format!(
                        "`{device}` is not a pointer device"
                    )));
                }
            }
        }
        let k = settings.len();
        let mut probabilities = Vec::with_capacity(1 << k);
        for cell in 0..(1usize << k) {
            let events: Vec<SpinEvent> = settings
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    SpinEvent::new(s.particle.clone(), s.axis, Self::outcome_in(cell, i, k))
                })
                .collect();
            probabilities.push(born_probability(sys, &events)?);
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > INVARIANT {
            return Err(Error::State(alloc::format!(
                "joint distribution sums to {total}"
            )));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self {
            settings: settings.to_vec(),
            probabilities,
            cumulative,
        })
    }

    /// Outcome of station `i` in `cell`; station 0 is the most significant
    /// bit and a 0 bit means Up.
    fn outcome_in(cell: usize, i: usize, k: usize) -> Outcome {
        if (cell >> (k - 1 - i)) & 1 == 0 {
            Outcome::Up
        } else {
            Outcome::Down
        }
    }

    pub fn settings(&self) -> &[StationSetting] {
        &self.settings
    }

    /// Exact cell probabilities, cell index as in [`JointSampler::outcomes`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Per-station outcomes of a cell.
    pub fn outcomes(&self, cell: usize) -> Vec<Outcome> {
        let k = self.settings.len();
        (0..k).map(|i| Self::outcome_in(cell, i, k)).collect()
    }

    fn pick(&self, word: u64) -> usize {
        let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| {
                self.probabilities
                    .iter()
                    .rposition(|&p| p > 0.0)
                    .unwrap_or(self.probabilities.len() - 1)
            })
    }

    /// Cell indices for trials `start..end` of the run seeded with `seed`.
    pub fn sample_cells(&self, seed: u64, start: u64, end: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(2 * u128::from(start));
        (start..end).map(|_| self.pick(rng.next_u64())).collect()
    }

    /// Records for trials `start..end`, trial-major, stations in setting
    /// order.
    pub fn records(&self, seed: u64, start: u64, end: u64) -> Vec<MeasurementRecord> {
        let cells = self.sample_cells(seed, start, end);
        let mut out = Vec::with_capacity(cells.len() * self.settings.len());
        for (trial, cell) in (start..end).zip(cells) {
            for (s, outcome) in self.settings.iter().zip(self.outcomes(cell)) {
                out.push(MeasurementRecord {
                    trial,
                    observer: s.observer.clone(),
                    axis: s.axis,
                    outcome,
                    seed,
                });
            }
        }
        out
    }
}

/// Draws `n_trials` joint outcomes from the Born distribution of the
/// stations.
pub fn sample_outcomes(
    sys: &QuantumSystem,
    settings: &[StationSetting],
    n_trials: u64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    if n_trials == 0 {
        return Err(Error::Argument("n_trials must be positive".into()));
    }
    Ok(JointSampler::new(sys, settings)?.records(seed, 0, n_trials))
}

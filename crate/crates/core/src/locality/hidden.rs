//! Local hidden-variable models as finite mixtures over λ.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use super::{ChshSettings, JointDistribution, LocalityModel, Party};
use crate::error::{Error, Result};
use crate::quantum::{MeasurementAxis, Outcome};
use crate::tol::ORACLE;

/// `P(+1 | λ, n̂)` for one party. It sees only λ and its own setting.
pub type Response = Box<dyn Fn(usize, &MeasurementAxis) -> f64 + Send + Sync>;

/// Finite mixture `Σ_λ ρ(λ) P_a(· | λ, n̂_a) P_b(· | λ, n̂_b)`.
pub struct HiddenVariableModel {
    weights: Vec<f64>,
    response_a: Response,
    response_b: Response,
}

impl fmt::Debug for HiddenVariableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HiddenVariableModel")
            .field("weights", &self.weights)
            .finish_non_exhaustive()
    }
}

impl HiddenVariableModel {
    pub fn new(weights: Vec<f64>, response_a: Response, response_b: Response) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Model("at least one λ variant is required".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Model(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > ORACLE {
            return Err(Error::Model(alloc::format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            weights,
            response_a,
            response_b,
        })
    }

    /// Per-λ probabilities of +1 for the two settings on each side. Axes other
    /// than the listed settings get an unbiased coin.
    pub fn tabulated(
        weights: Vec<f64>,
        alice_up: Vec<[f64; 2]>,
        bob_up: Vec<[f64; 2]>,
        settings: ChshSettings,
    ) -> Result<Self> {
        if alice_up.len() != weights.len() || bob_up.len() != weights.len() {
            return Err(Error::Model(
                "one response row per λ variant is required".into(),
            ));
        }
        let lookup = |table: Vec<[f64; 2]>, axes: [MeasurementAxis; 2]| -> Response {
            Box::new(move |lambda, axis| {
                axes.iter()
                    .position(|a| a.approx_eq(axis))
                    .map_or(0.5, |i| table[lambda][i])
            })
        };
        Self::new(
            weights,
            lookup(alice_up, settings.alice),
            lookup(bob_up, settings.bob),
        )
    }

    pub fn deterministic(strategy: DeterministicStrategy, settings: ChshSettings) -> Result<Self> {
        Self::mixture(&[(1.0, strategy)], settings)
    }

    /// Convex mixture of deterministic strategies, one λ per strategy.
    pub fn mixture(
        components: &[(f64, DeterministicStrategy)],
        settings: ChshSettings,
    ) -> Result<Self> {
        let as_prob = |o: Outcome| if o == Outcome::Up { 1.0 } else { 0.0 };
        Self::tabulated(
            components.iter().map(|(w, _)| *w).collect(),
            components
                .iter()
                .map(|(_, s)| s.alice.map(as_prob))
                .collect(),
            components.iter().map(|(_, s)| s.bob.map(as_prob)).collect(),
            settings,
        )
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn variants(&self) -> usize {
        self.weights.len()
    }

    /// Validated `P(+1 | λ, n̂)` for one party.
    pub fn prob_up(&self, party: Party, lambda: usize, axis: &MeasurementAxis) -> Result<f64> {
        let p = match party {
            Party::Alice => (self.response_a)(lambda, axis),
            Party::Bob => (self.response_b)(lambda, axis),
        };
        if !p.is_finite() || !(-ORACLE..=1.0 + ORACLE).contains(&p) {
            return Err(Error::Model(alloc::format!(
                "response of {party:?} at λ={lambda} is {p}, not a probability"
            )));
        }
        Ok(p.clamp(0.0, 1.0))
    }
}

impl LocalityModel for HiddenVariableModel {
    fn lambda_branches(
        &self,
        axis_a: &MeasurementAxis,
        axis_b: &MeasurementAxis,
    ) -> Result<Vec<(f64, JointDistribution)>> {
        (0..self.weights.len())
            .map(|l| {
                let a = self.prob_up(Party::Alice, l, axis_a)?;
                let b = self.prob_up(Party::Bob, l, axis_b)?;
                Ok((self.weights[l], JointDistribution::product(a, b)?))
            })
            .collect()
    }

    fn local_marginals(&self, party: Party, axis: &MeasurementAxis) -> Result<Vec<[f64; 2]>> {
        (0..self.weights.len())
            .map(|l| self.prob_up(party, l, axis).map(|p| [p, 1.0 - p]))
            .collect()
    }
}

/// A fixed ±1 answer for each of the two settings on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeterministicStrategy {
    pub alice: [Outcome; 2],
    pub bob: [Outcome; 2],
}

impl DeterministicStrategy {
    /// All 16 strategies; bit 3..0 of the index select Down for
    /// (alice₀, alice₁, bob₀, bob₁).
    pub fn all() -> [Self; 16] {
        core::array::from_fn(Self::from_index)
    }

    pub fn from_index(index: usize) -> Self {
        let bit = |b: usize| {
            if (index >> b) & 1 == 1 {
                Outcome::Down
            } else {
                Outcome::Up
            }
        };
        Self {
            alice: [bit(3), bit(2)],
            bob: [bit(1), bit(0)],
        }
    }

    pub fn index(&self) -> usize {
        let bit = |o: Outcome| usize::from(o == Outcome::Down);
        bit(self.alice[0]) << 3 | bit(self.alice[1]) << 2 | bit(self.bob[0]) << 1 | bit(self.bob[1])
    }

    /// `a₀b₀ − a₀b₁ + a₁b₀ + a₁b₁` by direct arithmetic.
    pub fn chsh(&self) -> i32 {
        let [a0, a1] = self.alice.map(Outcome::sign);
        let [b0, b1] = self.bob.map(Outcome::sign);
        a0 * b0 - a0 * b1 + a1 * b0 + a1 * b1
    }
}

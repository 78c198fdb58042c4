//! Conditional outcome probabilities and the locality predicates built on
//! them.
//!
//! Every source of statistics implements [`LocalityModel`]: for a pair of
//! settings it yields one joint outcome distribution per value of the
//! complete state λ, weighted by ρ(λ). The quantum pair has a single branch
//! (λ is the state itself); a hidden-variable model has one branch per
//! variant.
//!
//! A conditional probability is only ever the quotient of two modelled joint
//! probabilities. Conditioning on an event of probability zero is reported
//! as [`Error::UndefinedConditional`], never silently mapped to a number.

mod chsh;
mod hidden;

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quantum::{born_probability, MeasurementAxis, Outcome, QuantumSystem, SpinEvent};
use crate::tol::{INVARIANT, ORACLE, ZERO_PROBABILITY};
use crate::{ALPHA, BETA};

pub use chsh::{
    chsh_value, chsh_with_error, estimate_correlations, exact_correlations, lhv_brute_force,
    pair_by_trial, ChshSettings, CorrelationEntry, CorrelationTable, LhvBound, CLASSICAL_BOUND,
    QUANTUM_BOUND,
};
pub use hidden::{DeterministicStrategy, HiddenVariableModel, Response};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "lowercase")
)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn partner(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// `P(A, B)` for one pair of settings, indexed `[alice][bob]` with Up first.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JointDistribution {
    cells: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn new(cells: [[f64; 2]; 2]) -> Result<Self> {
        let flat = cells.iter().flatten();
        if flat.clone().any(|p| !p.is_finite() || *p < -ORACLE) {
            return Err(Error::Model(
                "joint probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > INVARIANT {
            return Err(Error::Model(alloc::format!(
                "joint probabilities sum to {total}"
            )));
        }
        Ok(Self { cells })
    }

    pub fn product(alice_up: f64, bob_up: f64) -> Result<Self> {
        let a = [alice_up, 1.0 - alice_up];
        let b = [bob_up, 1.0 - bob_up];
        Self::new([[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]])
    }

    pub fn cells(&self) -> [[f64; 2]; 2] {
        self.cells
    }

    pub fn get(&self, alice: Outcome, bob: Outcome) -> f64 {
        self.cells[alice.index()][bob.index()]
    }

    /// Joint probability with `party` reading `own` and the partner `other`.
    pub fn get_for(&self, party: Party, own: Outcome, other: Outcome) -> f64 {
        match party {
            Party::Alice => self.get(own, other),
            Party::Bob => self.get(other, own),
        }
    }

    pub fn marginal(&self, party: Party, outcome: Outcome) -> f64 {
        Outcome::ALL
            .iter()
            .map(|&o| self.get_for(party, outcome, o))
            .sum()
    }

    /// `E = Σ a·b·P(a, b)` with outcomes as ±1.
    pub fn correlation(&self) -> f64 {
        let mut e = 0.0;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                e += f64::from(a.sign() * b.sign()) * self.get(a, b);
            }
        }
        e
    }

    /// Probability that both parties read the same sign.
    pub fn equal_outcomes(&self) -> f64 {
        self.get(Outcome::Up, Outcome::Up) + self.get(Outcome::Down, Outcome::Down)
    }

    pub fn scaled_add(&mut self, weight: f64, other: &Self) {
        for (row, orow) in self.cells.iter_mut().zip(&other.cells) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += weight * o;
            }
        }
    }
}

/// A source of two-party outcome statistics conditioned on λ.
pub trait LocalityModel {
    /// `(ρ(λ), P(A, B | n̂_a, n̂_b, λ))` for every λ.
    fn lambda_branches(
        &self,
        axis_a: &MeasurementAxis,
        axis_b: &MeasurementAxis,
    ) -> Result<Vec<(f64, JointDistribution)>>;

    /// `P(· | n̂, λ)` for one party, per λ. The default reads it off the joint
    /// distribution with the partner measuring along ẑ.
    fn local_marginals(&self, party: Party, axis: &MeasurementAxis) -> Result<Vec<[f64; 2]>> {
        let z = MeasurementAxis::z();
        let branches = match party {
            Party::Alice => self.lambda_branches(axis, &z)?,
            Party::Bob => self.lambda_branches(&z, axis)?,
        };
        Ok(branches
            .iter()
            .map(|(_, j)| {
                [
                    j.marginal(party, Outcome::Up),
                    j.marginal(party, Outcome::Down),
                ]
            })
            .collect())
    }

    /// λ-averaged statistics, what a long run of trials exhibits.
    fn observed_joint(
        &self,
        axis_a: &MeasurementAxis,
        axis_b: &MeasurementAxis,
    ) -> Result<JointDistribution> {
        let mut acc = JointDistribution {
            cells: [[0.0; 2]; 2],
        };
        for (w, j) in self.lambda_branches(axis_a, axis_b)? {
            acc.scaled_add(w, &j);
        }
        Ok(acc)
    }
}

/// The quantum pair on factors `alpha` and `beta`; λ is the state itself.
impl LocalityModel for QuantumSystem {
    fn lambda_branches(
        &self,
        axis_a: &MeasurementAxis,
        axis_b: &MeasurementAxis,
    ) -> Result<Vec<(f64, JointDistribution)>> {
        let mut cells = [[0.0; 2]; 2];
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                cells[a.index()][b.index()] = born_probability(
                    self,
                    &[
                        SpinEvent::new(ALPHA, *axis_a, a),
                        SpinEvent::new(BETA, *axis_b, b),
                    ],
                )?;
            }
        }
        Ok(alloc::vec![(1.0, JointDistribution::new(cells)?)])
    }

    fn local_marginals(&self, party: Party, axis: &MeasurementAxis) -> Result<Vec<[f64; 2]>> {
        let label = match party {
            Party::Alice => ALPHA,
            Party::Bob => BETA,
        };
        let up = born_probability(self, &[SpinEvent::new(label, *axis, Outcome::Up)])?;
        let down = born_probability(self, &[SpinEvent::new(label, *axis, Outcome::Down)])?;
        Ok(alloc::vec![[up, down]])
    }
}

/// `P(target = outcome | own axis, [partner axis, [partner outcome]], λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEvent {
    pub target: Party,
    pub outcome: Outcome,
    pub own_axis: MeasurementAxis,
    pub partner_axis: Option<MeasurementAxis>,
    pub partner_outcome: Option<Outcome>,
    /// Index of the λ branch; the quantum state has the single branch 0.
    pub lambda: usize,
}

impl ConditionalEvent {
    pub fn new(target: Party, outcome: Outcome, own_axis: MeasurementAxis) -> Self {
        Self {
            target,
            outcome,
            own_axis,
            partner_axis: None,
            partner_outcome: None,
            lambda: 0,
        }
    }

    pub fn given_partner(mut self, axis: MeasurementAxis, outcome: Option<Outcome>) -> Self {
        self.partner_axis = Some(axis);
        self.partner_outcome = outcome;
        self
    }

    pub fn at_lambda(mut self, lambda: usize) -> Self {
        self.lambda = lambda;
        self
    }

    fn describe_condition(&self) -> String {
        alloc::format!(
            "{:?} reads {}",
            self.target.partner(),
            self.partner_outcome.map_or("anything", Outcome::as_str)
        )
    }
}

fn branch<T: Clone>(items: &[T], lambda: usize) -> Result<T> {
    items.get(lambda).cloned().ok_or_else(|| {
        Error::Argument(alloc::format!(
            "λ index {lambda} out of range ({} branches)",
            items.len()
        ))
    })
}

fn oriented_branches(
    model: &(impl LocalityModel + ?Sized),
    party: Party,
    own: &MeasurementAxis,
    partner: &MeasurementAxis,
) -> Result<Vec<(f64, JointDistribution)>> {
    match party {
        Party::Alice => model.lambda_branches(own, partner),
        Party::Bob => model.lambda_branches(partner, own),
    }
}

/// Exact Bayes quotient of modelled joint probabilities.
pub fn conditional_probability(
    model: &(impl LocalityModel + ?Sized),
    event: &ConditionalEvent,
) -> Result<f64> {
    let (partner_axis, partner_outcome) = match (event.partner_axis, event.partner_outcome) {
        (None, Some(_)) => {
            return Err(Error::Event(
                "conditioning on the partner outcome needs the partner axis".into(),
            ))
        }
        (None, None) => {
            let marginals = model.local_marginals(event.target, &event.own_axis)?;
            return Ok(branch(&marginals, event.lambda)?[event.outcome.index()]);
        }
        (Some(axis), outcome) => (axis, outcome),
    };
    let branches = oriented_branches(model, event.target, &event.own_axis, &partner_axis)?;
    let (_, joint) = branch(&branches, event.lambda)?;
    match partner_outcome {
        None => Ok(joint.marginal(event.target, event.outcome)),
        Some(q) => {
            let given = joint.marginal(event.target.partner(), q);
            if given <= ZERO_PROBABILITY {
                return Err(Error::UndefinedConditional(event.describe_condition()));
            }
            Ok((joint.get_for(event.target, event.outcome, q) / given).clamp(0.0, 1.0))
        }
    }
}

/// One comparison made by a locality predicate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Witness {
    /// `P(own | n̂_own, λ)` against `P(own | n̂_own, n̂_partner, partner, λ)`.
    Conditional {
        lambda: usize,
        party: Party,
        outcome: Outcome,
        partner_outcome: Outcome,
        marginal: f64,
        conditional: f64,
        gap: f64,
    },
    /// `P(A, B | λ)` against `P(A | λ) · P(B | λ)`.
    Factorization {
        lambda: usize,
        alice: Outcome,
        bob: Outcome,
        joint: f64,
        product: f64,
        gap: f64,
    },
}

impl Witness {
    pub fn gap(&self) -> f64 {
        match self {
            Witness::Conditional { gap, .. } | Witness::Factorization { gap, .. } => *gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LocalityReport {
    pub test: &'static str,
    pub axis_a: MeasurementAxis,
    pub axis_b: MeasurementAxis,
    pub holds: bool,
    /// Largest gap over every comparison made.
    pub gap: f64,
    /// The comparisons attaining the largest gap.
    pub witnesses: Vec<Witness>,
}

impl LocalityReport {
    fn from_witnesses(
        test: &'static str,
        a: &MeasurementAxis,
        b: &MeasurementAxis,
        all: Vec<Witness>,
    ) -> Self {
        let gap = all.iter().map(Witness::gap).fold(0.0, f64::max);
        let witnesses = all
            .into_iter()
            .filter(|w| w.gap() >= gap - ORACLE)
            .collect();
        Self {
            test,
            axis_a: *a,
            axis_b: *b,
            holds: gap <= INVARIANT,
            gap,
            witnesses,
        }
    }
}

/// Checks `P(A | n̂_a, λ) = P(A | n̂_a, n̂_b, B, λ)` for every λ, every
/// outcome and every partner outcome of positive probability, in both
/// directions.
pub fn bell_locality_test(
    model: &(impl LocalityModel + ?Sized),
    axis_a: &MeasurementAxis,
    axis_b: &MeasurementAxis,
) -> Result<LocalityReport> {
    let branches = model.lambda_branches(axis_a, axis_b)?;
    let mut witnesses = Vec::new();
    for party in [Party::Alice, Party::Bob] {
        let own_axis = if party == Party::Alice {
            axis_a
        } else {
            axis_b
        };
        let marginals = model.local_marginals(party, own_axis)?;
        for (lambda, (weight, joint)) in branches.iter().enumerate() {
            if *weight <= 0.0 {
                continue;
            }
            let local = branch(&marginals, lambda)?;
            for q in Outcome::ALL {
                let given = joint.marginal(party.partner(), q);
                if given <= ZERO_PROBABILITY {
                    continue;
                }
                for o in Outcome::ALL {
                    let conditional = joint.get_for(party, o, q) / given;
                    let marginal = local[o.index()];
                    witnesses.push(Witness::Conditional {
                        lambda,
                        party,
                        outcome: o,
                        partner_outcome: q,
                        marginal,
                        conditional,
                        gap: (marginal - conditional).abs(),
                    });
                }
            }
        }
    }
    Ok(LocalityReport::from_witnesses(
        "bell_locality",
        axis_a,
        axis_b,
        witnesses,
    ))
}

/// Checks `P(A, B | n̂_a, n̂_b, λ) = P(A | n̂_a, λ) · P(B | n̂_b, λ)` for every λ
/// and all four outcome pairs.
pub fn factorization_test(
    model: &(impl LocalityModel + ?Sized),
    axis_a: &MeasurementAxis,
    axis_b: &MeasurementAxis,
) -> Result<LocalityReport> {
    let branches = model.lambda_branches(axis_a, axis_b)?;
    let ma = model.local_marginals(Party::Alice, axis_a)?;
    let mb = model.local_marginals(Party::Bob, axis_b)?;
    let mut witnesses = Vec::new();
    for (lambda, (weight, joint)) in branches.iter().enumerate() {
        if *weight <= 0.0 {
            continue;
        }
        let (pa, pb) = (branch(&ma, lambda)?, branch(&mb, lambda)?);
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                let product = pa[a.index()] * pb[b.index()];
                let joint = joint.get(a, b);
                witnesses.push(Witness::Factorization {
                    lambda,
                    alice: a,
                    bob: b,
                    joint,
                    product,
                    gap: (joint - product).abs(),
                });
            }
        }
    }
    Ok(LocalityReport::from_witnesses(
        "factorization",
        axis_a,
        axis_b,
        witnesses,
    ))
}

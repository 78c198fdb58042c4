//! CHSH correlations, exact and estimated, and the deterministic local bound.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use super::{DeterministicStrategy, HiddenVariableModel, LocalityModel};
use crate::error::{Error, Result};
use crate::measurement::MeasurementRecord;
use crate::quantum::MeasurementAxis;

/// Largest |S| reachable by any local model.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// |S| of the singlet at the optimal coplanar settings.
pub const QUANTUM_BOUND: f64 = 2.0 * SQRT_2;

/// Two settings per side; index 0 is the unprimed one.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChshSettings {
    pub alice: [MeasurementAxis; 2],
    pub bob: [MeasurementAxis; 2],
}

impl ChshSettings {
    /// a = 0°, a′ = 90°, b = 45°, b′ = 135°, all in the x–z plane.
    pub fn canonical() -> Self {
        let axis = |angle: f64| MeasurementAxis::in_xz_plane(angle).expect("angle within [0, π]");
        Self {
            alice: [axis(0.0), axis(FRAC_PI_2)],
            bob: [axis(FRAC_PI_4), axis(3.0 * FRAC_PI_4)],
        }
    }

    /// `(i, j, a_i, b_j)` in the order (a,b), (a,b′), (a′,b), (a′,b′).
    pub fn pairs(&self) -> [(usize, usize, MeasurementAxis, MeasurementAxis); 4] {
        core::array::from_fn(|k| {
            let (i, j) = (k / 2, k % 2);
            (i, j, self.alice[i], self.bob[j])
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CorrelationEntry {
    pub axis_a: MeasurementAxis,
    pub axis_b: MeasurementAxis,
    /// Expectation of the product of ±1 outcomes.
    pub e: f64,
    /// Standard error of `e`; zero for exact values.
    pub se: f64,
    /// Empirical tallies `[alice][bob]`, Up first, when estimated.
    pub counts: Option<[[u64; 2]; 2]>,
}

impl CorrelationEntry {
    /// Empirical entry from outcome tallies `[alice][bob]`, Up first.
    /// `SE = sqrt((1 − E²)/n)`.
    pub fn from_counts(
        axis_a: MeasurementAxis,
        axis_b: MeasurementAxis,
        counts: [[u64; 2]; 2],
    ) -> Result<Self> {
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Argument("no trials for this setting pair".into()));
        }
        let n = total as f64;
        let same = (counts[0][0] + counts[1][1]) as f64;
        let diff = (counts[0][1] + counts[1][0]) as f64;
        let e = (same - diff) / n;
        Ok(Self {
            axis_a,
            axis_b,
            e,
            se: libm::sqrt((1.0 - e * e).max(0.0) / n),
            counts: Some(counts),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CorrelationTable {
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationTable {
    pub fn lookup(
        &self,
        axis_a: &MeasurementAxis,
        axis_b: &MeasurementAxis,
    ) -> Option<&CorrelationEntry> {
        self.entries
            .iter()
            .find(|e| e.axis_a.approx_eq(axis_a) && e.axis_b.approx_eq(axis_b))
    }
}

/// Exact λ-averaged correlations of `model` at the four CHSH setting pairs.
pub fn exact_correlations(
    model: &(impl LocalityModel + ?Sized),
    settings: &ChshSettings,
) -> Result<CorrelationTable> {
    let entries = settings
        .pairs()
        .iter()
        .map(|&(_, _, a, b)| {
            Ok(CorrelationEntry {
                axis_a: a,
                axis_b: b,
                e: model.observed_joint(&a, &b)?.correlation(),
                se: 0.0,
                counts: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationTable { entries })
}

fn chsh_entries<'t>(
    table: &'t CorrelationTable,
    settings: &ChshSettings,
) -> Result<[&'t CorrelationEntry; 4]> {
    let mut found = Vec::with_capacity(4);
    for (i, j, a, b) in settings.pairs() {
        found.push(table.lookup(&a, &b).ok_or_else(|| {
            Error::Argument(alloc::format!(
                "correlation table lacks setting pair (a{i}, b{j})"
            ))
        })?);
    }
    Ok([found[0], found[1], found[2], found[3]])
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`, signed.
pub fn chsh_value(table: &CorrelationTable, settings: &ChshSettings) -> Result<f64> {
    chsh_with_error(table, settings).map(|(s, _)| s)
}

/// `S` together with its standard error, the entries treated as independent.
pub fn chsh_with_error(table: &CorrelationTable, settings: &ChshSettings) -> Result<(f64, f64)> {
    let [ab, ab2, a2b, a2b2] = chsh_entries(table, settings)?;
    let s = ab.e - ab2.e + a2b.e + a2b2.e;
    let se = libm::sqrt(ab.se * ab.se + ab2.se * ab2.se + a2b.se * a2b.se + a2b2.se * a2b2.se);
    Ok((s, se))
}

/// Result of enumerating every deterministic local strategy.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LhvBound {
    pub max_abs_s: f64,
    pub witness: DeterministicStrategy,
    /// `S` of every strategy, indexed by [`DeterministicStrategy::index`].
    pub values: Vec<f64>,
}

impl LhvBound {
    /// `S` of the convex mixture with the given weights over the 16
    /// strategies. Linear in the weights, so its modulus never exceeds
    /// `max_abs_s`.
    pub fn mixture_value(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.values.len() {
            return Err(Error::Argument(alloc::format!(
                "expected {} weights",
                self.values.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (weights.iter().sum::<f64>() - 1.0).abs() > crate::tol::ORACLE
        {
            return Err(Error::Argument(
                "mixture weights must be a probability vector".into(),
            ));
        }
        Ok(weights.iter().zip(&self.values).map(|(w, s)| w * s).sum())
    }

    /// How far the quantum value sits above the local maximum.
    pub fn quantum_gap(&self) -> f64 {
        QUANTUM_BOUND - self.max_abs_s
    }
}

/// Evaluates `S` for all 16 deterministic strategies at `settings` through
/// the model machinery and returns the largest |S| with a strategy attaining
/// it.
pub fn lhv_brute_force(settings: &ChshSettings) -> Result<LhvBound> {
    let mut values = Vec::with_capacity(16);
    let mut best = (f64::NEG_INFINITY, DeterministicStrategy::from_index(0));
    for strategy in DeterministicStrategy::all() {
        let model = HiddenVariableModel::deterministic(strategy, *settings)?;
        let s = chsh_value(&exact_correlations(&model, settings)?, settings)?;
        if s.abs() > best.0 {
            best = (s.abs(), strategy);
        }
        values.push(s);
    }
    Ok(LhvBound {
        max_abs_s: best.0,
        witness: best.1,
        values,
    })
}

/// Pairs Alice's and Bob's records of the same trial.
pub fn pair_by_trial<'r>(
    records: &'r [MeasurementRecord],
    alice: &str,
    bob: &str,
) -> Result<Vec<(&'r MeasurementRecord, &'r MeasurementRecord)>> {
    let a: Vec<_> = records.iter().filter(|r| r.observer == alice).collect();
    let b: Vec<_> = records.iter().filter(|r| r.observer == bob).collect();
    if a.len() != b.len() {
        return Err(Error::Argument(alloc::format!(
            "{} records for `{alice}` but {} for `{bob}`",
            a.len(),
            b.len()
        )));
    }
    a.into_iter()
        .zip(b)
        .map(|(x, y)| {
            if x.trial == y.trial {
                Ok((x, y))
            } else {
                Err(Error::Argument(alloc::format!(
                    "trial {} paired with trial {}",
                    x.trial,
                    y.trial
                )))
            }
        })
        .collect()
}

/// Empirical correlation per setting pair, groups in order of first
/// appearance. `SE = sqrt((1 − E²)/n)`.
pub fn estimate_correlations(
    pairs: &[(&MeasurementRecord, &MeasurementRecord)],
) -> Result<CorrelationTable> {
    if pairs.is_empty() {
        return Err(Error::Argument("no record pairs to estimate from".into()));
    }
    let mut groups: Vec<(MeasurementAxis, MeasurementAxis, [[u64; 2]; 2])> = Vec::new();
    for (a, b) in pairs {
        if a.trial != b.trial {
            return Err(Error::Argument(alloc::format!(
                "trial {} paired with trial {}",
                a.trial,
                b.trial
            )));
        }
        let slot = match groups
            .iter()
            .position(|(x, y, _)| x.approx_eq(&a.axis) && y.approx_eq(&b.axis))
        {
            Some(i) => i,
            None => {
                groups.push((a.axis, b.axis, [[0; 2]; 2]));
                groups.len() - 1
            }
        };
        groups[slot].2[a.outcome.index()][b.outcome.index()] += 1;
    }
    let entries = groups
        .into_iter()
        .map(|(axis_a, axis_b, counts)| CorrelationEntry::from_counts(axis_a, axis_b, counts))
        .collect::<Result<_>>()?;
    Ok(CorrelationTable { entries })
}

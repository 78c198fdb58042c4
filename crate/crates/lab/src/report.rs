//! The `report.json` document.
//!
//! Field order is fixed by the struct definitions and floats are printed
//! shortest-roundtrip, so equal inputs give byte-identical files.

use epr_core::evolution::{
    evolve_back, gauge_equivalence_check, retrodicted_pair_state, FreeEvolution, GaugeReport,
};
use epr_core::locality::{
    bell_locality_test, chsh_with_error, conditional_probability, exact_correlations,
    factorization_test, lhv_brute_force, ConditionalEvent, CorrelationEntry, CorrelationTable,
    DeterministicStrategy, LocalityModel, LocalityReport, Party, CLASSICAL_BOUND, QUANTUM_BOUND,
};
use epr_core::measurement::{measure_stations, MeasuredSystem, Station};
use epr_core::observers::{
    carol_view, no_signaling_check, reduced_view, ObserverFrame, ReducedState,
};
use epr_core::quantum::{born_probability, SpinEvent};
use epr_core::{Error, MeasurementAxis, Outcome, QuantumSystem, ALPHA, BETA, DEVICE_A, DEVICE_B};
use serde::Serialize;

use crate::scenario::{Analysis, AxisSpec, Scenario, SettingPair};

/// Free evolution used to carry retrodicted descriptions back to the
/// separation time.
pub const RETRODICTION_EVOLUTION: FreeEvolution = FreeEvolution {
    t0: 0.0,
    t1: 1.0,
    energy: 1.0,
};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub seed: Option<u64>,
    pub probabilities: Option<Vec<ProbabilityEntry>>,
    pub locality: Option<Vec<LocalityEntry>>,
    pub chsh: Option<ChshSection>,
    pub frames: Option<FramesSection>,
    pub retrodiction: Option<RetrodictionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSection>,
    pub timings: Option<Vec<Timing>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }
}

/// A probability, or the reason it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Conditional {
    Value(f64),
    Undefined { undefined_conditional: String },
}

impl Conditional {
    pub fn value(&self) -> Option<f64> {
        match self {
            Conditional::Value(v) => Some(*v),
            Conditional::Undefined { .. } => None,
        }
    }
}

fn conditional(sys: &QuantumSystem, event: &ConditionalEvent) -> epr_core::Result<Conditional> {
    match conditional_probability(sys, event) {
        Ok(p) => Ok(Conditional::Value(p)),
        Err(Error::UndefinedConditional(why)) => Ok(Conditional::Undefined {
            undefined_conditional: why,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eq4 {
    pub alice_up: f64,
    pub bob_up: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Eq5 {
    pub alice_up_given_bob_down: Conditional,
}

#[derive(Debug, Clone, Serialize)]
pub struct Eq6 {
    pub alice_up_given_bob_up: Conditional,
    pub joint_up_up: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityEntry {
    pub alice_axis: AxisSpec,
    pub bob_axis: AxisSpec,
    pub angle_deg: f64,
    pub eq4: Eq4,
    pub eq5: Eq5,
    pub eq6: Eq6,
    /// `[alice][bob]`, Up first.
    pub joint: [[f64; 2]; 2],
    pub correlation: f64,
}

fn probability_entry(
    sys: &QuantumSystem,
    pair: &SettingPair,
) -> epr_core::Result<ProbabilityEntry> {
    let (a, b) = (pair.axis_a, pair.axis_b);
    let up = |label: &str, axis: MeasurementAxis| {
        born_probability(sys, &[SpinEvent::new(label, axis, Outcome::Up)])
    };
    let joint = sys.observed_joint(&a, &b)?;
    let given = |o| ConditionalEvent::new(Party::Alice, Outcome::Up, a).given_partner(b, Some(o));
    Ok(ProbabilityEntry {
        alice_axis: pair.alice,
        bob_axis: pair.bob,
        angle_deg: a.angle_to(&b).to_degrees(),
        eq4: Eq4 {
            alice_up: up(ALPHA, a)?,
            bob_up: up(BETA, b)?,
        },
        eq5: Eq5 {
            alice_up_given_bob_down: conditional(sys, &given(Outcome::Down))?,
        },
        eq6: Eq6 {
            alice_up_given_bob_up: conditional(sys, &given(Outcome::Up))?,
            joint_up_up: joint.get(Outcome::Up, Outcome::Up),
        },
        joint: joint.cells(),
        correlation: joint.correlation(),
    })
}

/// A locality report with the equation tag it instantiates.
#[derive(Debug, Clone, Serialize)]
pub struct Tagged<T> {
    pub tag: &'static str,
    #[serde(flatten)]
    pub report: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalityEntry {
    pub alice_axis: AxisSpec,
    pub bob_axis: AxisSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bell_locality: Option<Tagged<LocalityReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<Tagged<LocalityReport>>,
}

fn locality_entry(
    sys: &QuantumSystem,
    pair: &SettingPair,
    bell: bool,
    fact: bool,
) -> epr_core::Result<LocalityEntry> {
    let (a, b) = (&pair.axis_a, &pair.axis_b);
    let bell_locality = if bell {
        let report = bell_locality_test(sys, a, b)?;
        Some(Tagged {
            tag: if report.holds { "eq7" } else { "eq8" },
            report,
        })
    } else {
        None
    };
    let factorization = if fact {
        Some(Tagged {
            tag: "eq3",
            report: factorization_test(sys, a, b)?,
        })
    } else {
        None
    };
    Ok(LocalityEntry {
        alice_axis: pair.alice,
        bob_axis: pair.bob,
        bell_locality,
        factorization,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshSection {
    pub tag: &'static str,
    pub classical_bound: f64,
    pub quantum_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<ChshCorrelations>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhv_baseline: Option<LhvBaseline>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshCorrelations {
    /// `exact` or `sampled`; selects where `entries`, `s` and `se` come from.
    pub mode: &'static str,
    pub entries: Vec<ChshEntry>,
    /// |S|.
    pub s: f64,
    pub s_signed: f64,
    pub se: f64,
    pub exact_s: f64,
    pub exceeds_classical_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshEntry {
    pub setting: &'static str,
    pub alice_axis: AxisSpec,
    pub bob_axis: AxisSpec,
    pub e: f64,
    pub se: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<[[u64; 2]; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LhvBaseline {
    pub max_abs_s: f64,
    pub witness: DeterministicStrategy,
    pub strategies: usize,
    pub gap_to_quantum_value: f64,
}

const CHSH_LABELS: [&str; 4] = ["ab", "ab'", "a'b", "a'b'"];

fn chsh_correlations(
    sys: &QuantumSystem,
    scenario: &Scenario,
    sampled: Option<&SamplingSection>,
) -> epr_core::Result<ChshCorrelations> {
    let settings = scenario
        .chsh_settings()
        .expect("validated: two axes per station");
    let exact = exact_correlations(sys, &settings)?;
    let (exact_signed, _) = chsh_with_error(&exact, &settings)?;
    let (mode, table) = match sampled {
        None => ("exact", exact),
        Some(section) => {
            let entries = section
                .pairs
                .iter()
                .map(|p| {
                    let a = p.alice_axis.to_axis().map_err(Error::Argument)?;
                    let b = p.bob_axis.to_axis().map_err(Error::Argument)?;
                    CorrelationEntry::from_counts(a, b, p.counts)
                })
                .collect::<epr_core::Result<_>>()?;
            ("sampled", CorrelationTable { entries })
        }
    };
    let (s_signed, se) = chsh_with_error(&table, &settings)?;
    let (alice, bob) = (&scenario.alice().axes, &scenario.bob().axes);
    let entries = settings
        .pairs()
        .iter()
        .zip(CHSH_LABELS)
        .map(|((i, j, a, b), setting)| {
            let e = table
                .lookup(a, b)
                .expect("chsh_with_error found every pair");
            ChshEntry {
                setting,
                alice_axis: alice[*i],
                bob_axis: bob[*j],
                e: e.e,
                se: e.se,
                counts: e.counts,
            }
        })
        .collect();
    Ok(ChshCorrelations {
        mode,
        entries,
        s: s_signed.abs(),
        s_signed,
        se,
        exact_s: exact_signed.abs(),
        exceeds_classical_bound: s_signed.abs() > CLASSICAL_BOUND,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameViews {
    /// Devices attached and ready, nothing measured.
    pub pre: ReducedState,
    pub post: ReducedState,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoSignaling {
    /// Configurations compared against the baseline per side.
    pub configurations: usize,
    pub alice_max_deviation: f64,
    pub bob_max_deviation: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FramesSection {
    pub alice_axis: AxisSpec,
    pub bob_axis: AxisSpec,
    pub alice: FrameViews,
    pub bob: FrameViews,
    pub carol: ReducedState,
    pub no_signaling: NoSignaling,
    /// Unframed post-measurement state; only with `--god-view`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub god_view: Option<ReducedState>,
}

fn stations(
    a: Option<MeasurementAxis>,
    b: Option<MeasurementAxis>,
    scenario: &Scenario,
) -> [Station; 2] {
    [
        Station::new(scenario.alice().observer.clone(), ALPHA, DEVICE_A, a),
        Station::new(scenario.bob().observer.clone(), BETA, DEVICE_B, b),
    ]
}

fn frames_section(
    sys: &QuantumSystem,
    scenario: &Scenario,
    god_view: bool,
) -> epr_core::Result<FramesSection> {
    let pairs = scenario.setting_pairs();
    let first = &pairs[0];
    let (a, b) = (first.axis_a, first.axis_b);
    let alice_frame = named(ObserverFrame::alice(), &scenario.alice().observer)?;
    let bob_frame = named(ObserverFrame::bob(), &scenario.bob().observer)?;

    let pre = measure_stations(sys, &stations(None, None, scenario))?;
    let post = measure_stations(sys, &stations(Some(a), Some(b), scenario))?;
    let view = |m: &MeasuredSystem, f: &ObserverFrame| reduced_view(&m.system, f);

    let axes = |spec: &[AxisSpec]| -> Vec<MeasurementAxis> {
        spec.iter()
            .map(|a| a.to_axis().expect("validated axis"))
            .collect()
    };
    let (alice_axes, bob_axes) = (axes(&scenario.alice().axes), axes(&scenario.bob().axes));
    let mut alice_dev: f64 = 0.0;
    let mut bob_dev: f64 = 0.0;
    let mut configurations = 0;
    for other in bob_axes.iter().map(|&x| Some(x)).chain([None]) {
        let m = measure_stations(sys, &stations(Some(a), other, scenario))?;
        alice_dev = alice_dev.max(no_signaling_check(&post, &m, &alice_frame)?);
        configurations += 1;
    }
    for other in alice_axes.iter().map(|&x| Some(x)).chain([None]) {
        let m = measure_stations(sys, &stations(other, Some(b), scenario))?;
        bob_dev = bob_dev.max(no_signaling_check(&post, &m, &bob_frame)?);
    }

    let god_view = god_view.then(|| ReducedState {
        observer: "god_view".into(),
        layout: post.system.layout().clone(),
        rho: post.system.density_matrix(),
    });
    Ok(FramesSection {
        alice_axis: first.alice,
        bob_axis: first.bob,
        alice: FrameViews {
            pre: view(&pre, &alice_frame)?,
            post: view(&post, &alice_frame)?,
        },
        bob: FrameViews {
            pre: view(&pre, &bob_frame)?,
            post: view(&post, &bob_frame)?,
        },
        carol: carol_view(&post.system)?,
        no_signaling: NoSignaling {
            configurations,
            alice_max_deviation: alice_dev,
            bob_max_deviation: bob_dev,
            holds: alice_dev.max(bob_dev) <= epr_core::tol::INVARIANT,
        },
        god_view,
    })
}

fn named(frame: ObserverFrame, name: &str) -> epr_core::Result<ObserverFrame> {
    ObserverFrame::new(name, frame.accessible().iter().cloned())
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrodictionBranch {
    pub alice_outcome: Outcome,
    /// Born probability of this reading on the prepared state.
    pub probability: f64,
    /// `|⟨prepared|retrodicted⟩|²`.
    pub overlap_with_prepared: f64,
    /// Probability that Bob reads the opposite outcome along the same axis.
    pub bob_opposite: f64,
    /// Phase acquired under free evolution back to separation.
    pub phase: [f64; 2],
    pub overlap_after_evolution: f64,
    pub gauge: GaugeReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrodictionSection {
    pub axis: AxisSpec,
    pub evolution: FreeEvolution,
    pub branches: Vec<RetrodictionBranch>,
}

fn retrodiction_section(
    sys: &QuantumSystem,
    scenario: &Scenario,
) -> epr_core::Result<RetrodictionSection> {
    let pairs = scenario.setting_pairs();
    let spec = pairs[0].alice;
    let axis = pairs[0].axis_a;
    // A second shared axis off the measured one shows what the two
    // descriptions disagree on.
    let other = if axis.angle_to(&MeasurementAxis::x()).sin().abs() < 1e-9 {
        MeasurementAxis::z()
    } else {
        MeasurementAxis::x()
    };
    let mut observables = vec![(axis, axis), (other, other)];
    for p in &pairs {
        if !observables
            .iter()
            .any(|(x, y)| x.approx_eq(&p.axis_a) && y.approx_eq(&p.axis_b))
        {
            observables.push((p.axis_a, p.axis_b));
        }
    }
    let branches = Outcome::ALL
        .iter()
        .map(|&o| {
            let retro = retrodicted_pair_state(o, &axis);
            let (back, phase) = evolve_back(&retro, &RETRODICTION_EVOLUTION)?;
            Ok(RetrodictionBranch {
                alice_outcome: o,
                probability: born_probability(sys, &[SpinEvent::new(ALPHA, axis, o)])?,
                overlap_with_prepared: retro.overlap(sys)?,
                bob_opposite: born_probability(&retro, &[SpinEvent::new(BETA, axis, o.flip())])?,
                phase: [phase.re, phase.im],
                overlap_after_evolution: back.overlap(sys)?,
                gauge: gauge_equivalence_check(sys, &retro, &observables)?,
            })
        })
        .collect::<epr_core::Result<_>>()?;
    Ok(RetrodictionSection {
        axis: spec,
        evolution: RETRODICTION_EVOLUTION,
        branches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPair {
    pub alice_axis: AxisSpec,
    pub bob_axis: AxisSpec,
    /// First trial index of this pair's slice of the stream.
    pub first_trial: u64,
    pub trials: u64,
    /// `[alice][bob]`, Up first.
    pub counts: [[u64; 2]; 2],
    pub alice_up_frequency: f64,
    pub bob_up_frequency: f64,
    pub equal_outcomes: u64,
}

impl SampledPair {
    pub fn new(pair: &SettingPair, first_trial: u64, counts: [[u64; 2]; 2]) -> Self {
        let trials: u64 = counts.iter().flatten().sum();
        let n = trials as f64;
        Self {
            alice_axis: pair.alice,
            bob_axis: pair.bob,
            first_trial,
            trials,
            counts,
            alice_up_frequency: (counts[0][0] + counts[0][1]) as f64 / n,
            bob_up_frequency: (counts[0][0] + counts[1][0]) as f64 / n,
            equal_outcomes: counts[0][0] + counts[1][1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingSection {
    pub seed: u64,
    pub trials_per_pair: u64,
    pub pairs: Vec<SampledPair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub stage: &'static str,
    pub millis: f64,
}

/// Options that change report content.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub god_view: bool,
}

/// Runs the exact analyses; `sampling` feeds the empirical CHSH entries.
pub fn build(
    scenario: &Scenario,
    sys: &QuantumSystem,
    seed: Option<u64>,
    sampling: Option<SamplingSection>,
    options: ReportOptions,
    timings: &mut Option<Vec<Timing>>,
) -> epr_core::Result<Report> {
    let pairs = scenario.setting_pairs();
    let mut stage = |name: &'static str, start: std::time::Instant| {
        if let Some(t) = timings.as_mut() {
            t.push(Timing {
                stage: name,
                millis: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    };

    let t = std::time::Instant::now();
    let probabilities = if scenario.wants(Analysis::Probabilities) {
        Some(
            pairs
                .iter()
                .map(|p| probability_entry(sys, p))
                .collect::<epr_core::Result<_>>()?,
        )
    } else {
        None
    };
    stage("probabilities", t);

    let t = std::time::Instant::now();
    let (bell, fact) = (
        scenario.wants(Analysis::BellLocality),
        scenario.wants(Analysis::Factorization),
    );
    let locality = if bell || fact {
        Some(
            pairs
                .iter()
                .map(|p| locality_entry(sys, p, bell, fact))
                .collect::<epr_core::Result<_>>()?,
        )
    } else {
        None
    };
    stage("locality", t);

    let t = std::time::Instant::now();
    let correlations = if scenario.wants(Analysis::Chsh) {
        Some(chsh_correlations(sys, scenario, sampling.as_ref())?)
    } else {
        None
    };
    let lhv_baseline = match (
        scenario.wants(Analysis::LhvBaseline),
        scenario.chsh_settings(),
    ) {
        (true, Some(settings)) => {
            let bound = lhv_brute_force(&settings)?;
            Some(LhvBaseline {
                max_abs_s: bound.max_abs_s,
                witness: bound.witness,
                strategies: bound.values.len(),
                gap_to_quantum_value: QUANTUM_BOUND - bound.max_abs_s,
            })
        }
        _ => None,
    };
    let chsh = (correlations.is_some() || lhv_baseline.is_some()).then_some(ChshSection {
        tag: "chsh",
        classical_bound: CLASSICAL_BOUND,
        quantum_value: QUANTUM_BOUND,
        correlations,
        lhv_baseline,
    });
    stage("chsh", t);

    let t = std::time::Instant::now();
    let frames = if scenario.wants(Analysis::Frames) {
        Some(frames_section(sys, scenario, options.god_view)?)
    } else {
        None
    };
    stage("frames", t);

    let t = std::time::Instant::now();
    let retrodiction = if scenario.wants(Analysis::Retrodiction) {
        Some(retrodiction_section(sys, scenario)?)
    } else {
        None
    };
    stage("retrodiction", t);

    Ok(Report {
        scenario: scenario.clone(),
        seed,
        probabilities,
        locality,
        chsh,
        frames,
        retrodiction,
        sampling,
        timings: timings.clone(),
    })
}

//! Scenario execution: prepare, sample, analyse, write.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use epr_core::measurement::{JointSampler, MeasurementRecord, StationSetting};
use epr_core::{ALPHA, BETA};

use crate::records::{self, RecordFormat};
use crate::report::{self, Report, ReportOptions, SampledPair, SamplingSection, Timing};
use crate::sampling::{sample_pair, with_workers};
use crate::scenario::{AxisSpec, Scenario, ScenarioError};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid scenario:\n{0}")]
    Validation(#[from] ScenarioError),
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            LabError::Runtime(_) => 3,
        }
    }
}

impl From<epr_core::Error> for LabError {
    fn from(e: epr_core::Error) -> Self {
        LabError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    /// Skip sampling regardless of `trials`.
    pub exact: bool,
    pub god_view: bool,
    /// Worker threads for sampling; `None` uses the global pool.
    pub workers: Option<usize>,
    pub records: Option<RecordFormat>,
    /// Record wall-clock stage timings. Makes the report non-reproducible.
    pub timings: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub records: Vec<MeasurementRecord>,
}

/// The scenario with command-line overrides applied, revalidated.
pub fn effective_scenario(
    scenario: &Scenario,
    opts: &RunOptions,
) -> Result<Scenario, ScenarioError> {
    let mut s = scenario.clone();
    if let Some(seed) = opts.seed {
        s.seed = Some(seed);
    }
    if let Some(trials) = opts.trials {
        s.trials = trials;
    }
    if opts.exact {
        s.trials = 0;
    }
    s.validate()?;
    Ok(s)
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, LabError> {
    let scenario = effective_scenario(scenario, opts)?;
    let sys = scenario.prepare()?;
    let mut timings = opts.timings.then(Vec::new);

    let started = Instant::now();
    let mut kept = Vec::new();
    let sampling = if scenario.trials > 0 {
        let seed = scenario
            .seed
            .expect("validated: seed present when sampling");
        let n = scenario.trials;
        let (alice, bob) = (scenario.alice(), scenario.bob());
        let mut pairs = Vec::new();
        for (k, pair) in scenario.setting_pairs().iter().enumerate() {
            let settings = [
                StationSetting::new(alice.observer.clone(), ALPHA, pair.axis_a),
                StationSetting::new(bob.observer.clone(), BETA, pair.axis_b),
            ];
            let sampler = JointSampler::new(&sys, &settings)?;
            // Setting pairs occupy disjoint trial ranges of one stream.
            let first = k as u64 * n;
            let sample = with_workers(opts.workers, || {
                sample_pair(&sampler, seed, first, first + n, opts.records.is_some())
            })
            .map_err(|e| LabError::Runtime(format!("cannot start worker pool: {e}")))?;
            kept.extend(sample.records);
            pairs.push(SampledPair::new(pair, first, sample.counts));
        }
        Some(SamplingSection {
            seed,
            trials_per_pair: n,
            pairs,
        })
    } else {
        None
    };
    if let (Some(t), Some(_)) = (timings.as_mut(), &sampling) {
        t.push(Timing {
            stage: "sampling",
            millis: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    let report = report::build(
        &scenario,
        &sys,
        scenario.seed,
        sampling,
        ReportOptions {
            god_view: opts.god_view,
        },
        &mut timings,
    )?;
    Ok(RunOutput {
        report,
        records: kept,
    })
}

/// Writes `report.json` (and the record file when requested) into `out`.
pub fn write_outputs(
    out: &Path,
    output: &RunOutput,
    records: Option<RecordFormat>,
) -> Result<Vec<PathBuf>, LabError> {
    let io = |what: &Path, e: std::io::Error| {
        LabError::Runtime(format!("cannot write {}: {e}", what.display()))
    };
    fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let report_path = out.join("report.json");
    fs::write(&report_path, output.report.to_json()).map_err(|e| io(&report_path, e))?;
    let mut written = vec![report_path];
    if let Some(format) = records {
        let path = out.join(format.file_name());
        let file = fs::File::create(&path).map_err(|e| io(&path, e))?;
        records::write(format, BufWriter::new(file), &output.records).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn fmt_cond(c: &report::Conditional) -> String {
    match c.value() {
        Some(v) => format!("{v:.6}"),
        None => "undefined".into(),
    }
}

fn pair_label(a: &AxisSpec, b: &AxisSpec) -> String {
    format!("a=({}, {}) b=({}, {})", a.theta, a.phi, b.theta, b.phi)
}

/// Plain-text summary tables.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", report.scenario.name);
    if let Some(probs) = &report.probabilities {
        let _ = writeln!(s, "\nprobabilities");
        let _ = writeln!(
            s,
            "  {:<24} {:>8} {:>10} {:>10} {:>12} {:>12} {:>10}",
            "axes", "angle", "P(A=up)", "P(B=up)", "P(A|B=down)", "P(A|B=up)", "P(up,up)"
        );
        for p in probs {
            let _ = writeln!(
                s,
                "  {:<24} {:>8.3} {:>10.6} {:>10.6} {:>12} {:>12} {:>10.6}",
                pair_label(&p.alice_axis, &p.bob_axis),
                p.angle_deg,
                p.eq4.alice_up,
                p.eq4.bob_up,
                fmt_cond(&p.eq5.alice_up_given_bob_down),
                fmt_cond(&p.eq6.alice_up_given_bob_up),
                p.eq6.joint_up_up
            );
        }
    }
    if let Some(loc) = &report.locality {
        let _ = writeln!(s, "\nlocality");
        for l in loc {
            let axes = pair_label(&l.alice_axis, &l.bob_axis);
            for r in [&l.bell_locality, &l.factorization].into_iter().flatten() {
                let verdict = if r.report.holds { "holds" } else { "violated" };
                let _ = writeln!(
                    s,
                    "  {:<28} {:<14} {:<8} gap {:.6}  [{}]",
                    axes, r.report.test, verdict, r.report.gap, r.tag
                );
            }
        }
    }
    if let Some(chsh) = &report.chsh {
        let _ = writeln!(
            s,
            "\nchsh (classical bound {}, quantum value {:.7})",
            chsh.classical_bound, chsh.quantum_value
        );
        if let Some(c) = &chsh.correlations {
            for e in &c.entries {
                let _ = writeln!(s, "  E({:<4}) = {:>10.6} ± {:.6}", e.setting, e.e, e.se);
            }
            let _ = writeln!(s, "  |S| = {:.7} ± {:.7} ({})", c.s, c.se, c.mode);
        }
        if let Some(l) = &chsh.lhv_baseline {
            let _ = writeln!(
                s,
                "  local strategies: max |S| = {} over {}, gap to quantum {:.7}",
                l.max_abs_s, l.strategies, l.gap_to_quantum_value
            );
        }
    }
    if let Some(f) = &report.frames {
        let _ = writeln!(
            s,
            "\nframes: no-signaling deviation alice {:.3e}, bob {:.3e} ({} configurations)",
            f.no_signaling.alice_max_deviation,
            f.no_signaling.bob_max_deviation,
            f.no_signaling.configurations
        );
    }
    if let Some(r) = &report.retrodiction {
        let _ = writeln!(s, "\nretrodiction along ({}, {})", r.axis.theta, r.axis.phi);
        for b in &r.branches {
            let _ = writeln!(
                s,
                "  alice {:<4} p = {:.6}  overlap {:.6}  gauge agreement {}/{}",
                b.alice_outcome.as_str(),
                b.probability,
                b.overlap_with_prepared,
                b.gauge.comparisons.iter().filter(|c| c.agree).count(),
                b.gauge.comparisons.len()
            );
        }
    }
    if let Some(sm) = &report.sampling {
        let _ = writeln!(
            s,
            "\nsampling: {} trials per setting pair, seed {}",
            sm.trials_per_pair, sm.seed
        );
        for p in &sm.pairs {
            let _ = writeln!(
                s,
                "  {:<24} f(A=up) {:.5}  equal outcomes {}",
                pair_label(&p.alice_axis, &p.bob_axis),
                p.alice_up_frequency,
                p.equal_outcomes
            );
        }
    }
    s
}

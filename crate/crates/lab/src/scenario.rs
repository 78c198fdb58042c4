//! Declarative experiment descriptions in TOML.
//!
//! ```toml
//! name = "epr_shared_axis"
//! analyses = ["probabilities", "bell_locality"]
//! trials = 100000
//! seed = 42
//!
//! [state]
//! kind = "singlet"
//!
//! [[stations]]
//! observer = "alice"
//! particle = "alpha"
//! axes = [{ theta = 0.0, phi = 0.0 }]
//!
//! [[stations]]
//! observer = "bob"
//! particle = "beta"
//! axes = [{ theta = 0.0, phi = 0.0 }]
//! ```
//!
//! Angles are in degrees. `state.kind` is one of `singlet`, `product`
//! (with `alice`/`bob` tables holding `axis` and `outcome`) or `custom`
//! (with four `[re, im]` amplitudes in the ẑ basis, alpha major).

use std::fmt;
use std::path::Path;

use epr_core::locality::ChshSettings;
use epr_core::quantum::{make_singlet, product_pair};
use epr_core::{MeasurementAxis, Outcome, QuantumSystem, SubsystemLayout, ALPHA, BETA, C64};
use serde::{Deserialize, Serialize};

/// Upper bound on `trials` per setting pair.
pub const MAX_TRIALS: u64 = 100_000_000;
const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub analyses: Vec<Analysis>,
    /// Monte Carlo trials per setting pair; 0 runs exact analyses only.
    #[serde(default)]
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub state: StateSpec,
    pub stations: Vec<StationSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Probabilities,
    BellLocality,
    Factorization,
    Chsh,
    LhvBaseline,
    Frames,
    Retrodiction,
}

impl Analysis {
    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Probabilities => "probabilities",
            Analysis::BellLocality => "bell_locality",
            Analysis::Factorization => "factorization",
            Analysis::Chsh => "chsh",
            Analysis::LhvBaseline => "lhv_baseline",
            Analysis::Frames => "frames",
            Analysis::Retrodiction => "retrodiction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Singlet,
    Product {
        alice: ProductFactor,
        bob: ProductFactor,
    },
    Custom {
        amplitudes: Vec<[f64; 2]>,
    },
}

impl StateSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Singlet => "singlet",
            StateSpec::Product { .. } => "product",
            StateSpec::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFactor {
    pub axis: AxisSpec,
    pub outcome: Outcome,
}

/// Polar and azimuthal angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub theta: f64,
    pub phi: f64,
}

impl AxisSpec {
    pub fn to_axis(self) -> Result<MeasurementAxis, String> {
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err("angles must be finite".into());
        }
        if !(0.0..=180.0).contains(&self.theta) {
            return Err(format!(
                "theta = {} is outside [0, 180] degrees",
                self.theta
            ));
        }
        MeasurementAxis::from_degrees(self.theta, self.phi).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSpec {
    pub observer: String,
    /// `alpha` (Alice's side) or `beta` (Bob's side).
    pub particle: String,
    pub axes: Vec<AxisSpec>,
}

/// One problem with a scenario file, located by field path and, when the
/// source is available, by line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.path.is_empty()) {
            (Some(line), false) => write!(f, "line {line}: `{}`: {}", self.path, self.message),
            (Some(line), true) => write!(f, "line {line}: {}", self.message),
            (None, false) => write!(f, "`{}`: {}", self.path, self.message),
            (None, true) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", render(.diagnostics))]
pub struct ScenarioError {
    pub diagnostics: Vec<Diagnostic>,
}

fn render(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let src = std::fs::read_to_string(path).map_err(|e| ScenarioError {
            diagnostics: vec![Diagnostic {
                path: String::new(),
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            }],
        })?;
        Self::from_toml_str(&src)
    }

    /// Parses and validates.
    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(src).map_err(|e| ScenarioError {
            diagnostics: vec![Diagnostic {
                path: String::new(),
                line: e.span().map(|s| line_of(src, s.start)),
                message: e.message().trim().to_string(),
            }],
        })?;
        let mut diagnostics = scenario.check();
        if diagnostics.is_empty() {
            return Ok(scenario);
        }
        if let Ok(doc) = toml_edit::ImDocument::parse(src) {
            for d in &mut diagnostics {
                d.line = locate(&doc, &d.path).map(|offset| line_of(src, offset));
            }
        }
        Err(ScenarioError { diagnostics })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario values are representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let diagnostics = self.check();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError { diagnostics })
        }
    }

    fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut err = |path: String, message: String| {
            out.push(Diagnostic {
                path,
                line: None,
                message,
            })
        };

        if self.name.trim().is_empty() {
            err("name".into(), "must not be empty".into());
        }
        if self.analyses.is_empty() {
            err("analyses".into(), "list at least one analysis".into());
        }
        for (i, a) in self.analyses.iter().enumerate() {
            if self.analyses[..i].contains(a) {
                err(
                    format!("analyses[{i}]"),
                    format!("`{}` is listed twice", a.as_str()),
                );
            }
        }
        if self.trials > 0 && self.seed.is_none() {
            err("seed".into(), "required when trials > 0".into());
        }
        if self.trials > MAX_TRIALS {
            err(
                "trials".into(),
                format!("at most {MAX_TRIALS} trials per setting pair"),
            );
        }

        match &self.state {
            StateSpec::Singlet => {}
            StateSpec::Product { alice, bob } => {
                for (side, f) in [("alice", alice), ("bob", bob)] {
                    if let Err(m) = f.axis.to_axis() {
                        err(format!("state.{side}.axis"), m);
                    }
                }
            }
            StateSpec::Custom { amplitudes } => {
                if amplitudes.len() != 4 {
                    err(
                        "state.amplitudes".into(),
                        format!("expected 4 amplitudes, found {}", amplitudes.len()),
                    );
                } else if amplitudes.iter().flatten().any(|x| !x.is_finite()) {
                    err(
                        "state.amplitudes".into(),
                        "amplitudes must be finite".into(),
                    );
                } else {
                    let norm: f64 = amplitudes.iter().map(|[re, im]| re * re + im * im).sum();
                    if (norm - 1.0).abs() > NORM_TOLERANCE {
                        err(
                            "state.amplitudes".into(),
                            format!("squared norm is {norm}, expected 1"),
                        );
                    }
                }
            }
        }

        if self.stations.len() != 2 {
            err(
                "stations".into(),
                format!(
                    "expected 2 stations (one per particle), found {}",
                    self.stations.len()
                ),
            );
        }
        let needs_two = self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::Chsh | Analysis::LhvBaseline));
        for (i, st) in self.stations.iter().enumerate() {
            if st.observer.trim().is_empty() {
                err(
                    format!("stations[{i}].observer"),
                    "must not be empty".into(),
                );
            }
            if self.stations[..i].iter().any(|o| o.observer == st.observer) {
                err(
                    format!("stations[{i}].observer"),
                    format!("observer `{}` appears twice", st.observer),
                );
            }
            if st.particle != ALPHA && st.particle != BETA {
                err(
                    format!("stations[{i}].particle"),
                    format!("expected `{ALPHA}` or `{BETA}`, found `{}`", st.particle),
                );
            } else if self.stations[..i].iter().any(|o| o.particle == st.particle) {
                err(
                    format!("stations[{i}].particle"),
                    format!("particle `{}` already has a station", st.particle),
                );
            }
            if st.axes.is_empty() {
                err(
                    format!("stations[{i}].axes"),
                    "list at least one axis".into(),
                );
            }
            if needs_two && st.axes.len() != 2 {
                err(
                    format!("stations[{i}].axes"),
                    format!(
                        "chsh and lhv_baseline need exactly 2 axes, found {}",
                        st.axes.len()
                    ),
                );
            }
            for (k, axis) in st.axes.iter().enumerate() {
                if let Err(m) = axis.to_axis() {
                    err(format!("stations[{i}].axes[{k}]"), m);
                }
            }
        }
        out
    }

    pub fn wants(&self, analysis: Analysis) -> bool {
        self.analyses.contains(&analysis)
    }

    fn station(&self, particle: &str) -> &StationSpec {
        self.stations
            .iter()
            .find(|s| s.particle == particle)
            .expect("validated scenario has a station per particle")
    }

    pub fn alice(&self) -> &StationSpec {
        self.station(ALPHA)
    }

    pub fn bob(&self) -> &StationSpec {
        self.station(BETA)
    }

    /// Every (Alice axis, Bob axis) combination, Alice major.
    pub fn setting_pairs(&self) -> Vec<SettingPair> {
        let (a, b) = (self.alice(), self.bob());
        a.axes
            .iter()
            .enumerate()
            .flat_map(|(i, x)| {
                b.axes
                    .iter()
                    .enumerate()
                    .map(move |(j, y)| SettingPair::new(i, j, *x, *y))
            })
            .collect()
    }

    pub fn chsh_settings(&self) -> Option<ChshSettings> {
        let (a, b) = (&self.alice().axes, &self.bob().axes);
        if a.len() != 2 || b.len() != 2 {
            return None;
        }
        let conv = |s: &AxisSpec| s.to_axis().expect("validated axis");
        Some(ChshSettings {
            alice: [conv(&a[0]), conv(&a[1])],
            bob: [conv(&b[0]), conv(&b[1])],
        })
    }

    /// The prepared pair on (alpha, beta).
    pub fn prepare(&self) -> epr_core::Result<QuantumSystem> {
        match &self.state {
            StateSpec::Singlet => Ok(make_singlet()),
            StateSpec::Product { alice, bob } => {
                let a = alice.axis.to_axis().map_err(epr_core::Error::Argument)?;
                let b = bob.axis.to_axis().map_err(epr_core::Error::Argument)?;
                Ok(product_pair((&a, alice.outcome), (&b, bob.outcome)))
            }
            StateSpec::Custom { amplitudes } => {
                let layout = SubsystemLayout::new([(ALPHA, 2), (BETA, 2)])?;
                let amps = amplitudes
                    .iter()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect();
                QuantumSystem::from_amplitudes(layout, amps)
            }
        }
    }
}

/// Alice's `i`-th axis against Bob's `j`-th.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingPair {
    pub i: usize,
    pub j: usize,
    pub alice: AxisSpec,
    pub bob: AxisSpec,
    pub axis_a: MeasurementAxis,
    pub axis_b: MeasurementAxis,
}

impl SettingPair {
    fn new(i: usize, j: usize, alice: AxisSpec, bob: AxisSpec) -> Self {
        Self {
            i,
            j,
            alice,
            bob,
            axis_a: alice.to_axis().expect("validated axis"),
            axis_b: bob.to_axis().expect("validated axis"),
        }
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

enum Node<'a> {
    Item(&'a toml_edit::Item),
    Value(&'a toml_edit::Value),
    Table(&'a toml_edit::Table),
}

impl<'a> Node<'a> {
    fn span(&self) -> Option<std::ops::Range<usize>> {
        match self {
            Node::Item(i) => i.span(),
            Node::Value(v) => v.span(),
            Node::Table(t) => t.span(),
        }
    }

    fn key(&self, key: &str) -> Option<Node<'a>> {
        match self {
            Node::Item(toml_edit::Item::Table(t)) => t.get(key).map(Node::Item),
            Node::Table(t) => t.get(key).map(Node::Item),
            Node::Item(toml_edit::Item::Value(toml_edit::Value::InlineTable(t)))
            | Node::Value(toml_edit::Value::InlineTable(t)) => t.get(key).map(Node::Value),
            _ => None,
        }
    }

    fn index(&self, index: usize) -> Option<Node<'a>> {
        match self {
            Node::Item(toml_edit::Item::ArrayOfTables(a)) => a.get(index).map(Node::Table),
            Node::Item(toml_edit::Item::Value(toml_edit::Value::Array(a)))
            | Node::Value(toml_edit::Value::Array(a)) => a.get(index).map(Node::Value),
            _ => None,
        }
    }
}

/// Byte offset of the deepest existing node along `path` (`a.b[2].c`).
fn locate(doc: &toml_edit::ImDocument<&str>, path: &str) -> Option<usize> {
    let mut node = Node::Table(doc.as_table());
    let mut best = None;
    for segment in path.split('.').filter(|s| !s.is_empty()) {
        let (key, indices) = match segment.find('[') {
            Some(p) => (&segment[..p], &segment[p..]),
            None => (segment, ""),
        };
        let Some(next) = node.key(key) else { break };
        node = next;
        best = node.span().map(|s| s.start).or(best);
        for idx in indices
            .split(['[', ']'])
            .filter_map(|s| s.parse::<usize>().ok())
        {
            let Some(next) = node.index(idx) else {
                return best;
            };
            node = next;
            best = node.span().map(|s| s.start).or(best);
        }
    }
    best
}

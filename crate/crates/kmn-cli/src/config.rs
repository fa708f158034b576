//! Scenario configuration: a small INI-style format with one `[section]`
//! naming the workflow, `key = value` lines, and `#` comments. Values are
//! decimal numbers, `p/q` rationals, or (for a few keys) words. Parsing
//! validates keys against the workflow, checks every numeric value, fills
//! the defaults `kappa = delta = 1` and `epsilon = +1`, and reports every
//! problem with its line number.

use std::collections::BTreeMap;

use kmn_core::symmetry::{rat, Rat};
use thiserror::Error;

/// The workflows the laboratory front end can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    Simulate,
    ExactResidual,
    SymmetryCheck,
    Reduce,
    Travel,
    Constraint,
}

impl Workflow {
    pub const ALL: [Workflow; 6] = [
        Workflow::Simulate,
        Workflow::ExactResidual,
        Workflow::SymmetryCheck,
        Workflow::Reduce,
        Workflow::Travel,
        Workflow::Constraint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Workflow::Simulate => "simulate",
            Workflow::ExactResidual => "exact-residual",
            Workflow::SymmetryCheck => "symmetry-check",
            Workflow::Reduce => "reduce",
            Workflow::Travel => "travel",
            Workflow::Constraint => "constraint",
        }
    }

    pub fn from_name(name: &str) -> Option<Workflow> {
        Workflow::ALL.into_iter().find(|w| w.name() == name)
    }

    /// Every key this workflow accepts.
    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Workflow::Simulate => &[
                "m", "n", "kappa", "delta", "x_min", "length", "nx", "dt", "t_end", "frames",
                "initial", "k", "omega",
            ],
            Workflow::ExactResidual => &[
                "m", "n", "kappa", "delta", "k", "omega", "C0", "lambda", "a", "epsilon", "shape",
                "points", "seed",
            ],
            Workflow::SymmetryCheck => &[
                "m", "n", "k", "omega", "C0", "lambda", "a", "points", "seed",
            ],
            Workflow::Reduce => &[
                "m", "v0", "v1", "v2", "chi_min", "chi_max", "samples", "x_min", "length", "nx",
                "t",
            ],
            Workflow::Travel => &[
                "m", "n", "kappa", "delta", "k", "omega", "C0", "lambda", "a", "epsilon", "shape",
                "points",
            ],
            Workflow::Constraint => &[
                "kind", "m", "n", "lambda", "K", "C0", "C", "w0", "sign", "f0", "f1", "f2",
                "y_max", "length", "samples", "x_min", "nx", "dt",
            ],
        }
    }

    /// Keys that must be present before the workflow can run at all.
    /// Further keys may become required once earlier values are known
    /// (for example the wave numbers of a resolved profile family); those
    /// are reported through the same missing-key error at execution time.
    fn required_keys(self) -> &'static [&'static str] {
        match self {
            Workflow::Simulate => &["m", "n", "x_min", "length", "nx", "dt", "t_end", "initial"],
            Workflow::ExactResidual => &["m", "n"],
            Workflow::SymmetryCheck => &["m"],
            Workflow::Reduce => &[
                "m", "v0", "v1", "v2", "chi_min", "chi_max", "samples", "x_min", "length", "nx",
            ],
            Workflow::Travel => &["m", "n"],
            Workflow::Constraint => &["kind", "m"],
        }
    }
}

/// Keys whose values are words rather than numbers, with the words each
/// accepts.
const WORD_KEYS: [(&str, &[&str]); 3] = [
    ("initial", &["zero", "compacton", "pulse"]),
    ("shape", &["compact", "shifted-sine"]),
    (
        "kind",
        &[
            "Schrodinger41",
            "Reciprocal49",
            "FirstIntegral412",
            "Transport414",
            "ReciprocalN418",
            "Separation420",
        ],
    ),
];

fn word_values(key: &str) -> Option<&'static [&'static str]> {
    WORD_KEYS.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or a `[section]` header, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("line {line}: `{name}` is not a workflow (simulate, exact-residual, symmetry-check, reduce, travel, constraint)")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: a second section starts here; one scenario per config")]
    SecondSection { line: usize },
    #[error("no `[workflow]` section found")]
    MissingSection,
    #[error("line {line}: key `{key}` appears before any `[workflow]` section")]
    KeyBeforeSection { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` for workflow `{workflow}`")]
    UnknownKey { line: usize, key: String, workflow: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: value `{text}` for key `{key}` is not a decimal or p/q rational")]
    NonNumeric { line: usize, key: String, text: String },
    #[error("line {line}: key `{key}` needs a non-negative integer, got `{text}`")]
    NonInteger { line: usize, key: String, text: String },
    #[error("line {line}: `{key}` must be one of {expect}, got `{text}`")]
    BadWord { line: usize, key: String, text: String, expect: String },
    #[error("line {line}: epsilon selects a wave orientation and must be +1 or -1, got {value}")]
    BadEpsilon { line: usize, value: f64 },
    #[error("missing required key `{key}` for workflow `{workflow}`")]
    MissingKey { key: String, workflow: String },
}

#[derive(Debug, Clone)]
struct Entry {
    text: String,
    line: usize,
}

/// A parsed, validated scenario: the workflow to run plus its parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub workflow: Workflow,
    entries: BTreeMap<String, Entry>,
}

/// Parse `text` as one scenario. See the module doc for the grammar.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let mut scenario: Option<Scenario> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                return Err(ConfigError::BadLine { line, text: content.into() });
            };
            let name = name.trim();
            if scenario.is_some() {
                return Err(ConfigError::SecondSection { line });
            }
            let Some(workflow) = Workflow::from_name(name) else {
                return Err(ConfigError::UnknownSection { line, name: name.into() });
            };
            scenario = Some(Scenario {
                name: name.into(),
                workflow,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let Some((key_part, value_part)) = content.split_once('=') else {
            return Err(ConfigError::BadLine { line, text: content.into() });
        };
        let key = key_part.trim();
        let value = value_part.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::BadLine { line, text: content.into() });
        }
        let Some(s) = scenario.as_mut() else {
            return Err(ConfigError::KeyBeforeSection { line, key: key.into() });
        };
        if !s.workflow.allowed_keys().contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.into(),
                workflow: s.workflow.name().into(),
            });
        }
        if s.entries.contains_key(key) {
            return Err(ConfigError::DuplicateKey { line, key: key.into() });
        }
        if let Some(allowed) = word_values(key) {
            if !allowed.contains(&value) {
                return Err(ConfigError::BadWord {
                    line,
                    key: key.into(),
                    text: value.into(),
                    expect: allowed.join(" | "),
                });
            }
        } else {
            let Some(v) = parse_number(value) else {
                return Err(ConfigError::NonNumeric {
                    line,
                    key: key.into(),
                    text: value.into(),
                });
            };
            if key == "epsilon" && v != 1.0 && v != -1.0 {
                return Err(ConfigError::BadEpsilon { line, value: v });
            }
        }
        s.entries.insert(key.into(), Entry { text: value.into(), line });
    }
    let mut s = scenario.ok_or(ConfigError::MissingSection)?;
    for (key, default) in [("kappa", "1"), ("delta", "1"), ("epsilon", "1")] {
        if s.workflow.allowed_keys().contains(&key) && !s.entries.contains_key(key) {
            s.entries.insert(key.into(), Entry { text: default.into(), line: 0 });
        }
    }
    for key in s.workflow.required_keys() {
        if !s.entries.contains_key(*key) {
            return Err(ConfigError::MissingKey {
                key: (*key).into(),
                workflow: s.workflow.name().into(),
            });
        }
    }
    Ok(s)
}

/// Decimal (including scientific notation) or `p/q` with integer parts.
fn parse_number(text: &str) -> Option<f64> {
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(p as f64 / q as f64);
    }
    let v: f64 = text.parse().ok()?;
    v.is_finite().then_some(v)
}

impl Scenario {
    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::MissingKey { key: key.into(), workflow: self.workflow.name().into() }
    }

    /// A required numeric value.
    pub fn num(&self, key: &str) -> Result<f64, ConfigError> {
        let entry = self.entries.get(key).ok_or_else(|| self.missing(key))?;
        Ok(parse_number(&entry.text).expect("numeric values are validated at parse time"))
    }

    /// An optional numeric value.
    pub fn num_or(&self, key: &str, default: f64) -> f64 {
        match self.entries.get(key) {
            Some(entry) => parse_number(&entry.text).expect("validated at parse time"),
            None => default,
        }
    }

    /// A required non-negative integer.
    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let entry = self.entries.get(key).ok_or_else(|| self.missing(key))?;
        let v = parse_number(&entry.text).expect("validated at parse time");
        if v.fract() != 0.0 || v < 0.0 || v > usize::MAX as f64 {
            return Err(ConfigError::NonInteger {
                line: entry.line,
                key: key.into(),
                text: entry.text.clone(),
            });
        }
        Ok(v as usize)
    }

    /// An optional non-negative integer.
    pub fn count_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        if self.has(key) { self.count(key) } else { Ok(default) }
    }

    /// A required word value (already validated against its word list).
    pub fn word(&self, key: &str) -> Result<&str, ConfigError> {
        self.entries
            .get(key)
            .map(|e| e.text.as_str())
            .ok_or_else(|| self.missing(key))
    }

    /// An optional word value.
    pub fn word_or(&self, key: &str, default: &'static str) -> &str {
        self.entries.get(key).map_or(default, |e| e.text.as_str())
    }

    /// A required value as an exact rational: `p/q` and integer texts are
    /// taken literally, decimal texts through their exact binary value.
    pub fn rational(&self, key: &str) -> Result<Rat, ConfigError> {
        let entry = self.entries.get(key).ok_or_else(|| self.missing(key))?;
        let text = entry.text.as_str();
        if let Some((p, q)) = text.split_once('/') {
            if let (Ok(p), Ok(q)) = (p.trim().parse::<i64>(), q.trim().parse::<i64>()) {
                if q != 0 {
                    return Ok(rat(p, q));
                }
            }
        } else if let Ok(i) = text.parse::<i64>() {
            return Ok(rat(i, 1));
        } else if let Ok(v) = text.parse::<f64>() {
            if let Some(r) = Rat::from_float(v) {
                return Ok(r);
            }
        }
        Err(ConfigError::NonNumeric {
            line: entry.line,
            key: key.into(),
            text: text.into(),
        })
    }

    /// An optional exact rational.
    pub fn rational_or(&self, key: &str, default: Rat) -> Result<Rat, ConfigError> {
        if self.has(key) { self.rational(key) } else { Ok(default) }
    }
}

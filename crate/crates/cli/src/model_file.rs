//! JSON model files: a Markov chain on labelled states plus a one-block code.
//!
//! ```json
//! {
//!   "alphabet": ["1", "2", "3", "4"],
//!   "transition": [["1/2", "1/2", 0, 0], ["1/2", 0, "1/2", 0],
//!                  [0, 0, "1/2", "1/2"], ["1/2", 0, "1/2", 0]],
//!   "factor": ["a", "b", "a", "c"]
//! }
//! ```
//!
//! Entries are integers or `"p/q"` strings for exact arithmetic. Any decimal
//! entry (`0.25` or `"0.25"`) switches the whole model to double precision.
//! Image symbols are ordered by first appearance in `factor`; that order
//! indexes the optional `image_adjacency`.

use mflab_core::scalar::parse_ratio;
use mflab_core::{Alphabet, FactorMap, FactorProcess, FactorSystem, MarkovModel, Ratio, Scalar, StochasticMatrix, SubshiftSpec};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::CliError;

/// Rows of doubles may miss 1 by at most this much before renormalization.
pub const DOUBLE_ROW_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<u8>>>,
    pub transition: Vec<Vec<Entry>>,
    pub factor: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_adjacency: Option<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(serde_json::Number),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Double,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Double => "double",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Process {
    Exact(FactorProcess<Ratio>),
    Double(FactorProcess<f64>),
}

impl Process {
    pub fn mode(&self) -> Mode {
        match self {
            Process::Exact(_) => Mode::Exact,
            Process::Double(_) => Mode::Double,
        }
    }

    pub fn system(&self) -> &FactorSystem {
        match self {
            Process::Exact(fp) => fp.system(),
            Process::Double(fp) => fp.system(),
        }
    }
}

impl Entry {
    fn is_decimal(&self) -> bool {
        match self {
            Entry::Number(n) => !(n.is_i64() || n.is_u64()),
            Entry::Text(t) => t.contains(['.', 'e', 'E']),
        }
    }

    fn value(&self) -> Option<Ratio> {
        match self {
            Entry::Number(n) => parse_ratio(&n.to_string()).or_else(|| n.as_f64().and_then(Ratio::from_float)),
            Entry::Text(t) => parse_ratio(t).or_else(|| t.trim().parse::<f64>().ok().and_then(Ratio::from_float)),
        }
    }
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed model file: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("model files serialize");
        out.push('\n');
        out
    }

    pub fn mode(&self) -> Mode {
        if self.transition.iter().flatten().any(Entry::is_decimal) {
            Mode::Double
        } else {
            Mode::Exact
        }
    }

    /// Validates the file and builds the factor process in its mode.
    pub fn build(&self) -> Result<Process, CliError> {
        let input = |e: mflab_core::Error| CliError::Input(e.to_string());
        let alphabet = Alphabet::new(self.alphabet.iter()).map_err(input)?;
        let n = alphabet.len();
        if self.transition.len() != n {
            return Err(CliError::Input(format!("transition has {} rows, alphabet has {n} symbols", self.transition.len())));
        }
        if self.factor.len() != n {
            return Err(CliError::Input(format!("factor has {} labels, alphabet has {n} symbols", self.factor.len())));
        }
        let mut rows: Vec<Vec<Ratio>> = Vec::with_capacity(n);
        for (i, row) in self.transition.iter().enumerate() {
            let label = alphabet.label(i);
            if row.len() != n {
                return Err(CliError::Input(format!("transition row {i} (`{label}`) has {} entries, expected {n}", row.len())));
            }
            let values = row
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    e.value().ok_or_else(|| CliError::Input(format!("transition row {i} (`{label}`), column {j}: cannot parse {e:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(j) = values.iter().position(|v| *v < Ratio::from_integer(0.into())) {
                return Err(CliError::Input(format!("transition row {i} (`{label}`), column {j}: negative entry")));
            }
            rows.push(values);
        }
        let mode = self.mode();
        for (i, row) in rows.iter().enumerate() {
            let total: Ratio = row.iter().cloned().sum();
            let ok = match mode {
                Mode::Exact => total.is_one(),
                Mode::Double => (Scalar::to_f64(&total) - 1.0).abs() <= DOUBLE_ROW_TOLERANCE,
            };
            if !ok {
                let shown = match mode {
                    Mode::Exact => total.to_string(),
                    Mode::Double => format!("{}", Scalar::to_f64(&total)),
                };
                return Err(CliError::Input(format!("transition row {i} (`{}`) sums to {shown}, not 1", alphabet.label(i))));
            }
        }
        let shift = match &self.adjacency {
            Some(adj) => SubshiftSpec::from_rows(alphabet.clone(), adj).map_err(input)?,
            None => {
                let support = mflab_core::BitMatrix::from_fn(n, n, |i, j| rows[i][j] != Ratio::from_integer(0.into()));
                SubshiftSpec::new(alphabet.clone(), support).map_err(input)?
            }
        };
        let map = FactorMap::from_labels(alphabet.clone(), &self.factor).map_err(input)?;
        let system = match &self.image_adjacency {
            Some(adj) => {
                let image = SubshiftSpec::from_rows(map.target().clone(), adj).map_err(input)?;
                FactorSystem::with_image(shift.clone(), map, image.adjacency().clone())
            }
            None => FactorSystem::new(shift.clone(), map),
        }
        .map_err(|e| located(e, &alphabet))?;
        Ok(match mode {
            Mode::Exact => {
                let p = StochasticMatrix::from_rows(rows).map_err(input)?;
                let model = MarkovModel::new(shift, p).map_err(|e| located(e, &alphabet))?;
                Process::Exact(FactorProcess::new(model, system).map_err(input)?)
            }
            Mode::Double => {
                let rows: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| {
                        let r: Vec<f64> = r.iter().map(Scalar::to_f64).collect();
                        let total: f64 = r.iter().sum();
                        r.iter().map(|v| v / total).collect()
                    })
                    .collect();
                let p = StochasticMatrix::from_rows(rows).map_err(input)?;
                let model = MarkovModel::new(shift, p).map_err(|e| located(e, &alphabet))?;
                Process::Double(FactorProcess::new(model, system).map_err(input)?)
            }
        })
    }

    /// Canonical file for an exact process; the adjacency is left implicit
    /// and the image adjacency is written only when it is not the induced one.
    pub fn from_exact(fp: &FactorProcess<Ratio>) -> Self {
        let m = fp.model().transition().matrix();
        let transition = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|v| match v.to_integer().to_i64() {
                        Some(k) if v.is_integer() => Entry::Number(k.into()),
                        _ => Entry::Text(v.to_string()),
                    })
                    .collect()
            })
            .collect();
        Self::describe(fp.system(), transition)
    }

    pub fn from_double(fp: &FactorProcess<f64>) -> Self {
        let m = fp.model().transition().matrix();
        let transition = (0..m.rows())
            .map(|i| m.row(i).iter().map(|v| Entry::Number(serde_json::Number::from_f64(*v).expect("finite"))).collect())
            .collect();
        Self::describe(fp.system(), transition)
    }

    pub fn from_process(p: &Process) -> Self {
        match p {
            Process::Exact(fp) => Self::from_exact(fp),
            Process::Double(fp) => Self::from_double(fp),
        }
    }

    fn describe(system: &FactorSystem, transition: Vec<Vec<Entry>>) -> Self {
        let map = system.map();
        let induced = mflab_core::factor::induced_image_adjacency(system.domain(), map);
        let image = system.image().adjacency();
        let image_adjacency = (induced.adjacency() != image).then(|| bits(image));
        ModelFile {
            alphabet: system.domain().alphabet().labels().to_vec(),
            adjacency: None,
            transition,
            factor: map.assignment().iter().map(|&b| map.target().label(b).to_string()).collect(),
            image_adjacency,
        }
    }
}

fn bits(m: &mflab_core::BitMatrix) -> Vec<Vec<u8>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| u8::from(m.get(i, j))).collect()).collect()
}

/// Replaces state indices in structural errors by labels.
fn located(e: mflab_core::Error, alphabet: &Alphabet) -> CliError {
    use mflab_core::Error;
    let l = |i: usize| alphabet.label(i).to_string();
    CliError::Input(match e {
        Error::Incompatible { row, col } => {
            format!("transition support differs from the adjacency at row {row} (`{}`), column {col} (`{}`)", l(row), l(col))
        }
        Error::ImageTooSmall { from, to } => {
            format!("image_adjacency forbids the image of the allowed transition `{}` -> `{}`", l(from), l(to))
        }
        Error::Reducible { component } => {
            let names: Vec<String> = component.into_iter().map(l).collect();
            format!("transition structure is reducible: {{{}}} is a proper component", names.join(", "))
        }
        other => other.to_string(),
    })
}

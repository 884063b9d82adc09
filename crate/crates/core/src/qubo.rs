//! QUBO problems over note variables, their Ising form, and chord encodings.
//!
//! Bit convention used throughout the crate: note index `i` is bit `i` of a
//! basis-state integer (`(k >> i) & 1`), and bitstrings print index 0 leftmost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Chromatic note names of one octave, starting at C.
pub const CHROMATIC: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Largest problem `brute_force_solve` will enumerate.
pub const MAX_ENUMERATION_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("line {line}: expected {expected} cells, found {found}")]
    NotSquare {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} matrix rows after the label row, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}, column {column}: `{cell}` is not a finite number")]
    NonNumeric {
        line: u64,
        column: usize,
        cell: String,
    },
    #[error("column {column}: duplicate label `{label}`")]
    DuplicateLabel { column: usize, label: String },
    #[error("column {column}: empty label")]
    EmptyLabel { column: usize },
    #[error("empty QUBO document")]
    Empty,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coupling ({i}, {j}) is not a valid upper-triangle index for {n} variables")]
    BadCoupling { i: usize, j: usize, n: usize },
    #[error("coefficient for {what} is not finite")]
    NonFinite { what: String },
    #[error("{n} variables exceeds the enumeration bound of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("note index {index} out of range for {n} notes")]
    NoteOutOfRange { index: usize, n: usize },
    #[error("{encoding} encoding needs at least 2 notes")]
    TooFewNotes { encoding: &'static str },
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadMix(f64),
    #[error("invalid bit `{0}` in configuration")]
    BadBit(char),
    #[error("unknown note name `{0}`")]
    UnknownNote(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoteLabel {
    pub index: usize,
    pub name: String,
}

/// Default label names: the chromatic scale, with an octave suffix past 12 notes.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= CHROMATIC.len() {
                CHROMATIC[i].to_string()
            } else {
                format!("{}{}", CHROMATIC[i % 12], i / 12)
            }
        })
        .collect()
}

/// Index of a chromatic note name. Accepts sharps (`C#`) and flats (`Db`).
pub fn note_index(name: &str) -> Result<usize, QuboError> {
    let trimmed = name.trim();
    if let Some(i) = CHROMATIC.iter().position(|c| c.eq_ignore_ascii_case(trimmed)) {
        return Ok(i);
    }
    let mut chars = trimmed.chars();
    let (Some(letter), Some('b'), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(QuboError::UnknownNote(name.to_string()));
    };
    let natural = CHROMATIC
        .iter()
        .position(|c| c.len() == 1 && c.eq_ignore_ascii_case(&letter.to_string()))
        .ok_or_else(|| QuboError::UnknownNote(name.to_string()))?;
    Ok((natural + 11) % 12)
}

fn check_couplings(
    n: usize,
    couplings: &BTreeMap<(usize, usize), f64>,
) -> Result<(), QuboError> {
    for (&(i, j), &b) in couplings {
        if !(i < j && j < n) {
            return Err(QuboError::BadCoupling { i, j, n });
        }
        if !b.is_finite() {
            return Err(QuboError::NonFinite {
                what: format!("coupling ({i}, {j})"),
            });
        }
    }
    Ok(())
}

/// Canonical `(min, max)` key for an unordered pair.
fn pair(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Quadratic cost over binary note variables: `Σ a_i n_i + Σ_{i<j} b_ij n_i n_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    labels: Vec<NoteLabel>,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl QuboProblem {
    pub fn new(
        labels: Vec<String>,
        linear: Vec<f64>,
        quadratic: BTreeMap<(usize, usize), f64>,
    ) -> Result<Self, QuboError> {
        let n = linear.len();
        if labels.len() != n {
            return Err(QuboError::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for (column, name) in labels.iter().enumerate() {
            if name.is_empty() {
                return Err(QuboError::EmptyLabel { column: column + 1 });
            }
            if !seen.insert(name.as_str()) {
                return Err(QuboError::DuplicateLabel {
                    column: column + 1,
                    label: name.clone(),
                });
            }
        }
        if let Some(i) = linear.iter().position(|a| !a.is_finite()) {
            return Err(QuboError::NonFinite {
                what: format!("linear term {i}"),
            });
        }
        check_couplings(n, &quadratic)?;
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(index, name)| NoteLabel { index, name })
            .collect();
        Ok(Self {
            labels,
            linear,
            quadratic,
        })
    }

    /// Problem with default note labels.
    pub fn unlabeled(
        linear: Vec<f64>,
        quadratic: BTreeMap<(usize, usize), f64>,
    ) -> Result<Self, QuboError> {
        Self::new(default_labels(linear.len()), linear, quadratic)
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn labels(&self) -> &[NoteLabel] {
        &self.labels
    }

    pub fn label_names(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.name.clone()).collect()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&pair(i, j)).copied().unwrap_or(0.0)
    }

    pub fn cost(&self, c: &Configuration) -> Result<f64, QuboError> {
        self.check_dim(c.len())?;
        let bits = c.bits();
        let linear: f64 = self
            .linear
            .iter()
            .zip(bits)
            .filter(|(_, &b)| b == 1)
            .map(|(a, _)| a)
            .sum();
        let quadratic: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| bits[i] == 1 && bits[j] == 1)
            .map(|(_, b)| b)
            .sum();
        Ok(linear + quadratic)
    }

    fn check_dim(&self, got: usize) -> Result<(), QuboError> {
        if got != self.n() {
            return Err(QuboError::DimensionMismatch {
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }

    /// Ising form of this problem; see [`IsingHamiltonian`] for the affine relation.
    pub fn to_ising(&self) -> IsingHamiltonian {
        let n = self.n();
        let mut fields: Vec<f64> = self.linear.iter().map(|a| -2.0 * a).collect();
        for (&(i, j), &b) in &self.quadratic {
            fields[i] -= b;
            fields[j] -= b;
        }
        let offset =
            2.0 * self.linear.iter().sum::<f64>() + self.quadratic.values().sum::<f64>();
        IsingHamiltonian {
            n,
            fields,
            couplings: self.quadratic.clone(),
            offset,
        }
    }

    pub fn parse_csv(text: &str) -> Result<Self, QuboError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| QuboError::Csv(e.to_string()))?,
            None => return Err(QuboError::Empty),
        };
        let labels: Vec<String> = header.iter().map(str::to_string).collect();
        let n = labels.len();
        let mut seen = BTreeSet::new();
        for (column, name) in labels.iter().enumerate() {
            if name.is_empty() {
                return Err(QuboError::EmptyLabel { column: column + 1 });
            }
            if !seen.insert(name.as_str()) {
                return Err(QuboError::DuplicateLabel {
                    column: column + 1,
                    label: name.clone(),
                });
            }
        }

        let mut linear = vec![0.0; n];
        let mut quadratic = BTreeMap::new();
        let mut rows = 0;
        for record in records {
            let record = record.map_err(|e| QuboError::Csv(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != n {
                return Err(QuboError::NotSquare {
                    line,
                    expected: n,
                    found: record.len(),
                });
            }
            if rows == n {
                return Err(QuboError::RowCount {
                    expected: n,
                    found: rows + 1,
                });
            }
            let i = rows;
            for (j, cell) in record.iter().enumerate() {
                let value = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| QuboError::NonNumeric {
                        line,
                        column: j + 1,
                        cell: cell.to_string(),
                    })?;
                if i == j {
                    linear[i] = value;
                } else if value != 0.0 {
                    *quadratic.entry(pair(i, j)).or_insert(0.0) += value;
                }
            }
            rows += 1;
        }
        if rows != n {
            return Err(QuboError::RowCount {
                expected: n,
                found: rows,
            });
        }
        quadratic.retain(|_, b: &mut f64| *b != 0.0);
        Self::new(labels, linear, quadratic)
    }

    /// Canonical CSV: label row, then the upper triangle plus diagonal with zeros below.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = self.label_names().join(",");
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let v = match i.cmp(&j) {
                        std::cmp::Ordering::Equal => self.linear[i],
                        std::cmp::Ordering::Less => self.coupling(i, j),
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    format!("{v}")
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Assignment of every note variable to 0 (silent) or 1 (sounding).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, QuboError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(QuboError::BadBit(char::from(b'0' + b.min(9))));
        }
        Ok(Self(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Configuration of basis state `k`: bit `i` of `k` is note `i`.
    pub fn from_index(k: usize, n: usize) -> Self {
        Self((0..n).map(|i| ((k >> i) & 1) as u8).collect())
    }

    /// Indicator configuration of a set of notes.
    pub fn from_notes(notes: &[usize], n: usize) -> Result<Self, QuboError> {
        let mut bits = vec![0; n];
        for &i in notes {
            if i >= n {
                return Err(QuboError::NoteOutOfRange { index: i, n });
            }
            bits[i] = 1;
        }
        Ok(Self(bits))
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |k, (i, &b)| k | (usize::from(b) << i))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ising spins `z_i = 1 - 2 n_i`.
    pub fn spins(&self) -> Vec<f64> {
        self.0.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| 1 - b).collect())
    }

    /// Names of the sounding notes.
    pub fn sounding<'a>(&self, labels: &'a [NoteLabel]) -> Vec<&'a str> {
        self.0
            .iter()
            .zip(labels)
            .filter(|(&b, _)| b == 1)
            .map(|(_, l)| l.name.as_str())
            .collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = QuboError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(QuboError::BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

/// Diagonal spin Hamiltonian `Σ h_i z_i + Σ_{i<j} J_ij z_i z_j`.
///
/// Produced from a QUBO `q` it satisfies `energy(c) = 4·q.cost(c) − offset`
/// for every configuration `c`, so both share their minimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    n: usize,
    fields: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl IsingHamiltonian {
    pub fn new(
        fields: Vec<f64>,
        couplings: BTreeMap<(usize, usize), f64>,
        offset: f64,
    ) -> Result<Self, QuboError> {
        let n = fields.len();
        if let Some(i) = fields.iter().position(|h| !h.is_finite()) {
            return Err(QuboError::NonFinite {
                what: format!("field {i}"),
            });
        }
        if !offset.is_finite() {
            return Err(QuboError::NonFinite {
                what: "offset".into(),
            });
        }
        check_couplings(n, &couplings)?;
        Ok(Self {
            n,
            fields,
            couplings,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&pair(i, j)).copied().unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn energy(&self, c: &Configuration) -> Result<f64, QuboError> {
        if c.len() != self.n {
            return Err(QuboError::DimensionMismatch {
                expected: self.n,
                got: c.len(),
            });
        }
        let z = c.spins();
        let field: f64 = self.fields.iter().zip(&z).map(|(h, s)| h * s).sum();
        let coupling: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), b)| b * z[i] * z[j])
            .sum();
        Ok(field + coupling)
    }

    /// Energies of all `2^n` basis states, indexed by basis-state integer.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n;
        (0..dim)
            .map(|k| {
                let z = |i: usize| if (k >> i) & 1 == 1 { -1.0 } else { 1.0 };
                let field: f64 = self.fields.iter().enumerate().map(|(i, h)| h * z(i)).sum();
                let coupling: f64 = self
                    .couplings
                    .iter()
                    .map(|(&(i, j), b)| b * z(i) * z(j))
                    .sum();
                field + coupling
            })
            .collect()
    }

    /// Lowest basis-state energy; exact because the operator is diagonal.
    pub fn ground_energy(&self) -> Result<f64, QuboError> {
        if self.n > MAX_ENUMERATION_BITS {
            return Err(QuboError::TooLarge {
                n: self.n,
                max: MAX_ENUMERATION_BITS,
            });
        }
        Ok(self.diagonal().into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Coefficient-wise `(1 − t)·self + t·other`.
    pub fn interpolate(&self, other: &Self, t: f64) -> Result<Self, QuboError> {
        if self.n != other.n {
            return Err(QuboError::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(QuboError::BadMix(t));
        }
        // endpoints are returned verbatim so t = 0 and t = 1 are exact
        if t == 0.0 {
            return Ok(self.clone());
        }
        if t == 1.0 {
            return Ok(other.clone());
        }
        let mix = |a: f64, b: f64| (1.0 - t) * a + t * b;
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(&a, &b)| mix(a, b))
            .collect();
        let keys: BTreeSet<_> = self
            .couplings
            .keys()
            .chain(other.couplings.keys())
            .copied()
            .collect();
        let couplings = keys
            .into_iter()
            .map(|(i, j)| (pair(i, j), mix(self.coupling(i, j), other.coupling(i, j))))
            .collect();
        Ok(Self {
            n: self.n,
            fields,
            couplings,
            offset: mix(self.offset, other.offset),
        })
    }
}

/// Global minimum of a QUBO and all configurations attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSolution {
    pub min_cost: f64,
    /// Minimizers in lexicographic order of their bitstrings.
    pub minimizers: Vec<Configuration>,
}

/// Exhaustive minimization over all `2^n` assignments.
///
/// Walks the assignments in Gray-code order so each step costs O(n); cost
/// values of candidate minimizers are recomputed exactly before comparison.
pub fn brute_force_solve(q: &QuboProblem) -> Result<BruteForceSolution, QuboError> {
    let n = q.n();
    if n > MAX_ENUMERATION_BITS {
        return Err(QuboError::TooLarge {
            n,
            max: MAX_ENUMERATION_BITS,
        });
    }
    let mut neighbours = vec![Vec::new(); n];
    for (&(i, j), &b) in q.quadratic() {
        neighbours[i].push((j, b));
        neighbours[j].push((i, b));
    }
    let scale = 1.0
        + q.linear().iter().map(|a| a.abs()).sum::<f64>()
        + q.quadratic().values().map(|b| b.abs()).sum::<f64>();
    let slack = 1e-9 * scale;

    let mut bits = vec![0u8; n];
    let mut cost = 0.0;
    let mut best = 0.0;
    let mut candidates = vec![0usize];
    let total = 1usize << n;
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        let mut delta = q.linear()[flip];
        for &(other, b) in &neighbours[flip] {
            if bits[other] == 1 {
                delta += b;
            }
        }
        if bits[flip] == 1 {
            bits[flip] = 0;
            cost -= delta;
        } else {
            bits[flip] = 1;
            cost += delta;
        }
        if cost < best - slack {
            best = cost;
            candidates.clear();
        }
        if cost <= best + slack {
            best = best.min(cost);
            candidates.push(step ^ (step >> 1));
        }
    }

    let exact: Vec<(Configuration, f64)> = candidates
        .into_iter()
        .map(|k| {
            let c = Configuration::from_index(k, n);
            let v = q.cost(&c).expect("dimension matches");
            (c, v)
        })
        .collect();
    let min_cost = exact.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<Configuration> = exact
        .into_iter()
        .filter(|(_, v)| (v - min_cost).abs() <= 1e-9)
        .map(|(c, _)| c)
        .collect();
    minimizers.sort();
    Ok(BruteForceSolution {
        min_cost,
        minimizers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordEncoding {
    /// Negative linear terms on chord notes, positive elsewhere.
    Linear,
    /// Nearest-neighbour couplings only.
    Coupled,
    /// Couplings plus linear terms that cancel their Ising fields.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordSpec {
    pub notes: BTreeSet<usize>,
    pub encoding: ChordEncoding,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChordSpec {
    pub fn new(notes: impl IntoIterator<Item = usize>, encoding: ChordEncoding) -> Self {
        Self {
            notes: notes.into_iter().collect(),
            encoding,
            boundary: Boundary::Periodic,
        }
    }

    /// Chord from chromatic note names, e.g. `["C", "E", "G"]`.
    pub fn from_names<S: AsRef<str>>(
        names: &[S],
        encoding: ChordEncoding,
    ) -> Result<Self, QuboError> {
        let notes = names
            .iter()
            .map(|s| note_index(s.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Self {
            notes,
            encoding,
            boundary: Boundary::Periodic,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }
}

/// Builds the QUBO whose ground state encodes a chord over `n` notes.
pub fn chord_qubo(spec: &ChordSpec, n: usize) -> Result<QuboProblem, QuboError> {
    if let Some(&index) = spec.notes.iter().find(|&&i| i >= n) {
        return Err(QuboError::NoteOutOfRange { index, n });
    }
    let in_chord = |i: usize| spec.notes.contains(&i);
    let coupled = |spec: &ChordSpec| -> Result<BTreeMap<(usize, usize), f64>, QuboError> {
        if n < 2 {
            return Err(QuboError::TooFewNotes {
                encoding: match spec.encoding {
                    ChordEncoding::Balanced => "balanced",
                    _ => "coupled",
                },
            });
        }
        if spec.notes.is_empty() {
            log::warn!("empty chord: every coupling is ferromagnetic (-1)");
        }
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|k| (k, k + 1)).collect();
        // for n = 2 the wrap pair is the chain pair itself
        if spec.boundary == Boundary::Periodic && n > 2 {
            edges.push((0, n - 1));
        }
        Ok(edges
            .into_iter()
            .map(|(k, l)| {
                let b = if in_chord(k) != in_chord(l) { 1.0 } else { -1.0 };
                ((k, l), b)
            })
            .collect())
    };

    match spec.encoding {
        ChordEncoding::Linear => {
            let linear = (0..n)
                .map(|i| if in_chord(i) { -1.0 } else { 1.0 })
                .collect();
            QuboProblem::unlabeled(linear, BTreeMap::new())
        }
        ChordEncoding::Coupled => QuboProblem::unlabeled(vec![0.0; n], coupled(spec)?),
        ChordEncoding::Balanced => {
            let quadratic = coupled(spec)?;
            let mut linear = vec![0.0; n];
            for (&(k, l), &b) in &quadratic {
                linear[k] -= 0.5 * b;
                linear[l] -= 0.5 * b;
            }
            QuboProblem::unlabeled(linear, quadratic)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_major() -> Configuration {
        "100010010000".parse().unwrap()
    }

    fn example1() -> QuboProblem {
        chord_qubo(&ChordSpec::new([0, 4, 7], ChordEncoding::Linear), 12).unwrap()
    }

    #[test]
    fn diagonal_only_csv() {
        let q = QuboProblem::parse_csv("C,E\n-1,0\n0,-1\n").unwrap();
        assert_eq!(q.linear(), &[-1.0, -1.0]);
        assert!(q.quadratic().is_empty());
        assert_eq!(q.label_names(), vec!["C", "E"]);
    }

    #[test]
    fn csv_comments_and_whitespace() {
        let q = QuboProblem::parse_csv("# header comment\nC, E\n# row\n 1 , 2\n0, -1\n\n").unwrap();
        assert_eq!(q.linear(), &[1.0, -1.0]);
        assert_eq!(q.coupling(0, 1), 2.0);
    }

    #[test]
    fn csv_split_coupling_is_summed() {
        let q = QuboProblem::parse_csv("a,b\n0,0.5\n0.5,0\n").unwrap();
        assert_eq!(q.coupling(0, 1), 1.0);
    }

    #[test]
    fn csv_errors_carry_positions() {
        assert_eq!(
            QuboProblem::parse_csv("C,E\n1,0\n0\n").unwrap_err(),
            QuboError::NotSquare {
                line: 3,
                expected: 2,
                found: 1
            }
        );
        assert_eq!(
            QuboProblem::parse_csv("C,E\n1,0\n0,x\n").unwrap_err(),
            QuboError::NonNumeric {
                line: 3,
                column: 2,
                cell: "x".into()
            }
        );
        assert_eq!(
            QuboProblem::parse_csv("C,C\n1,0\n0,1\n").unwrap_err(),
            QuboError::DuplicateLabel {
                column: 2,
                label: "C".into()
            }
        );
        assert_eq!(
            QuboProblem::parse_csv("C,E\n1,0\n").unwrap_err(),
            QuboError::RowCount {
                expected: 2,
                found: 1
            }
        );
        assert!(matches!(
            QuboProblem::parse_csv("C,E\n1,0\n0,1\n1,1\n"),
            Err(QuboError::RowCount { .. })
        ));
        assert!(matches!(
            QuboProblem::parse_csv("C,E\n1,0\n0,inf\n"),
            Err(QuboError::NonNumeric { .. })
        ));
        assert_eq!(QuboProblem::parse_csv("# only\n").unwrap_err(), QuboError::Empty);
    }

    #[test]
    fn example1_csv_matches_builder() {
        let mut text = CHROMATIC.join(",");
        text.push('\n');
        for i in 0..12 {
            let row: Vec<&str> = (0..12)
                .map(|j| match (i == j, [0, 4, 7].contains(&i)) {
                    (true, true) => "-1",
                    (true, false) => "1",
                    _ => "0",
                })
                .collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        assert_eq!(QuboProblem::parse_csv(&text).unwrap(), example1());
    }

    #[test]
    fn cost_examples() {
        let q = example1();
        assert_eq!(q.cost(&c_major()).unwrap(), -3.0);
        assert_eq!(q.cost(&Configuration::zeros(12)).unwrap(), 0.0);
        assert!(matches!(
            q.cost(&Configuration::zeros(3)),
            Err(QuboError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ising_transform_small_cases() {
        let h = QuboProblem::unlabeled(vec![1.0], BTreeMap::new())
            .unwrap()
            .to_ising();
        assert_eq!(h.fields(), &[-2.0]);

        let h = QuboProblem::unlabeled(vec![0.0, 0.0], BTreeMap::from([((0, 1), 1.0)]))
            .unwrap()
            .to_ising();
        assert_eq!(h.fields(), &[-1.0, -1.0]);
        assert_eq!(h.coupling(0, 1), 1.0);
        assert_eq!(h.coupling(1, 0), 1.0);
    }

    #[test]
    fn all_zero_configuration_energy_is_coefficient_sum() {
        let h = IsingHamiltonian::new(
            vec![0.5, -2.0, 1.0],
            BTreeMap::from([((0, 2), 3.0), ((1, 2), -0.25)]),
            0.0,
        )
        .unwrap();
        assert_eq!(h.energy(&Configuration::zeros(3)).unwrap(), 0.5 - 2.0 + 1.0 + 3.0 - 0.25);
    }

    #[test]
    fn coupled_sign_pattern() {
        let q = chord_qubo(&ChordSpec::new([0, 4, 7], ChordEncoding::Coupled), 12).unwrap();
        let chain: Vec<f64> = (0..11).map(|k| q.coupling(k, k + 1)).collect();
        let expected = [1., -1., -1., 1., 1., -1., 1., 1., -1., -1., -1.];
        assert_eq!(chain, expected);
        assert_eq!(q.coupling(11, 0), 1.0);
        assert!(q.linear().iter().all(|&a| a == 0.0));
        assert_eq!(q.quadratic().len(), 12);

        let open = chord_qubo(
            &ChordSpec::new([0, 4, 7], ChordEncoding::Coupled).with_boundary(Boundary::Open),
            12,
        )
        .unwrap();
        assert_eq!(open.quadratic().len(), 11);
    }

    #[test]
    fn balanced_linear_row() {
        let q = chord_qubo(&ChordSpec::new([0, 4, 7], ChordEncoding::Balanced), 12).unwrap();
        let expected = [-1., 0., 1., 0., -1., 0., 0., -1., 0., 1., 1., 0.];
        assert_eq!(q.linear(), &expected);
        // balanced linear terms cancel the induced Ising fields
        assert!(q.to_ising().fields().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn chord_spec_errors() {
        let spec = ChordSpec::new([12], ChordEncoding::Linear);
        assert!(matches!(
            chord_qubo(&spec, 12),
            Err(QuboError::NoteOutOfRange { index: 12, n: 12 })
        ));
        let spec = ChordSpec::new([0], ChordEncoding::Coupled);
        assert!(matches!(chord_qubo(&spec, 1), Err(QuboError::TooFewNotes { .. })));
        // empty chord is allowed: all couplings ferromagnetic
        let q = chord_qubo(&ChordSpec::new([], ChordEncoding::Coupled), 4).unwrap();
        assert!(q.quadratic().values().all(|&b| b == -1.0));
    }

    #[test]
    fn two_note_periodic_ring_has_one_coupling() {
        let q = chord_qubo(&ChordSpec::new([0], ChordEncoding::Coupled), 2).unwrap();
        assert_eq!(q.quadratic().len(), 1);
        assert_eq!(q.coupling(0, 1), 1.0);
    }

    #[test]
    fn note_names() {
        assert_eq!(note_index("C").unwrap(), 0);
        assert_eq!(note_index("d#").unwrap(), 3);
        assert_eq!(note_index("Eb").unwrap(), 3);
        assert_eq!(note_index("Cb").unwrap(), 11);
        assert!(note_index("H").is_err());
        let spec = ChordSpec::from_names(&["B", "D#", "F#", "A"], ChordEncoding::Linear).unwrap();
        assert_eq!(spec.notes.into_iter().collect::<Vec<_>>(), vec![3, 6, 9, 11]);
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let h0 = IsingHamiltonian::new(vec![2.0], BTreeMap::new(), 1.0).unwrap();
        let h1 = IsingHamiltonian::new(vec![4.0], BTreeMap::new(), 3.0).unwrap();
        assert_eq!(h0.interpolate(&h1, 0.0).unwrap(), h0);
        assert_eq!(h0.interpolate(&h1, 1.0).unwrap(), h1);
        let mid = h0.interpolate(&h1, 0.5).unwrap();
        assert_eq!(mid.fields(), &[3.0]);
        assert_eq!(mid.offset(), 2.0);
        assert!(matches!(h0.interpolate(&h1, 1.5), Err(QuboError::BadMix(_))));
        let h2 = IsingHamiltonian::new(vec![0.0, 0.0], BTreeMap::new(), 0.0).unwrap();
        assert!(matches!(
            h0.interpolate(&h2, 0.5),
            Err(QuboError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interpolation_merges_coupling_keys() {
        let h0 = IsingHamiltonian::new(vec![0.0; 3], BTreeMap::from([((0, 1), 2.0)]), 0.0).unwrap();
        let h1 = IsingHamiltonian::new(vec![0.0; 3], BTreeMap::from([((1, 2), 4.0)]), 0.0).unwrap();
        let mid = h0.interpolate(&h1, 0.25).unwrap();
        assert_eq!(mid.coupling(0, 1), 1.5);
        assert_eq!(mid.coupling(1, 2), 1.0);
    }

    #[test]
    fn brute_force_degenerate_and_oversized() {
        let q = QuboProblem::unlabeled(vec![0.0; 3], BTreeMap::new()).unwrap();
        let sol = brute_force_solve(&q).unwrap();
        assert_eq!(sol.min_cost, 0.0);
        assert_eq!(sol.minimizers.len(), 8);
        assert_eq!(sol.minimizers[0].to_string(), "000");
        assert_eq!(sol.minimizers[1].to_string(), "001");
        assert_eq!(sol.minimizers[7].to_string(), "111");

        let big = QuboProblem::unlabeled(vec![0.0; 25], BTreeMap::new()).unwrap();
        assert!(matches!(brute_force_solve(&big), Err(QuboError::TooLarge { .. })));
    }

    #[test]
    fn configuration_round_trips() {
        let c = c_major();
        assert_eq!(c.to_string(), "100010010000");
        assert_eq!(c.index(), 1 | (1 << 4) | (1 << 7));
        assert_eq!(Configuration::from_index(c.index(), 12), c);
        assert_eq!(c.complement().to_string(), "011101101111");
        assert!("10a".parse::<Configuration>().is_err());
    }
}

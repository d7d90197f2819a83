//! State spaces, transition counts, column-stochastic evolutionary causal
//! matrices and the single-step update of a state distribution.
//!
//! Every matrix is stored column-stochastic: `m[to][from]` is the probability
//! that a member currently in state `from` is in state `to` one step later.
//! Row-stochastic input is accepted through [`Orientation::RowsAreFrom`] and
//! transposed once, at construction.
//!
//! ```
//! use ecmsim::ecm::{StateSpace, StateDistribution, TransitionMatrix, Orientation};
//!
//! let space = StateSpace::new(["conformer", "non-conformer"]).unwrap();
//! let c1 = TransitionMatrix::from_probabilities(
//!     space.clone(),
//!     &[vec![0.8, 0.6], vec![0.2, 0.4]],
//!     Orientation::RowsAreTo,
//!     "C1",
//! )
//! .unwrap();
//! let d = StateDistribution::new(space, vec![50.0, 50.0]).unwrap();
//! let next = c1.apply(&d).unwrap();
//! assert!((next.counts()[0] - 70.0).abs() < 1e-12);
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on each column sum of a stochastic matrix.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EcmError {
    #[error("a state space needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("state label at position {0} is empty")]
    EmptyLabel(usize),
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("expected a {expected}x{expected} table, got {rows} rows with lengths {lens:?}")]
    Shape {
        expected: usize,
        rows: usize,
        lens: Vec<usize>,
    },
    #[error("condition `{condition}`: origin state `{state}` has no observed transitions")]
    ZeroOrigin { condition: String, state: String },
    #[error("condition `{condition}` is not stochastic: {report}")]
    NotStochastic {
        condition: String,
        report: ValidationReport,
    },
    #[error("distribution needs {expected} counts, got {got}")]
    Length { expected: usize, got: usize },
    #[error("count for state `{state}` is {value}; counts must be finite and nonnegative")]
    BadCount { state: String, value: f64 },
    #[error("distribution total must be positive")]
    ZeroTotal,
    #[error("state spaces differ: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },
}

/// Ordered, labeled set of behavioural states with one designated focus state
/// (the "engaged" state whose share is reported as the ratio).
#[derive(Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Arc<[String]>,
    focus: usize,
}

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, EcmError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(EcmError::TooFewStates(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.trim().is_empty() {
                return Err(EcmError::EmptyLabel(i));
            }
            if labels[..i].contains(l) {
                return Err(EcmError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
            focus: 0,
        })
    }

    /// Same labels, with `label` as the focus state.
    pub fn with_focus(mut self, label: &str) -> Result<Self, EcmError> {
        self.focus = self
            .index_of(label)
            .ok_or_else(|| EcmError::UnknownState(label.to_string()))?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn focus(&self) -> usize {
        self.focus
    }

    pub fn focus_label(&self) -> &str {
        &self.labels[self.focus]
    }

    fn check_same(&self, other: &StateSpace) -> Result<(), EcmError> {
        if self == other {
            Ok(())
        } else {
            Err(EcmError::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateSpace({self})")
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if i == self.focus {
                write!(f, "*")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// How the rows of a user-supplied table are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `table[to][from]`, the internal column-stochastic layout.
    #[default]
    #[serde(rename = "to")]
    RowsAreTo,
    /// `table[from][to]`, the row-stochastic textbook layout.
    #[serde(rename = "from")]
    RowsAreFrom,
}

/// Which numeric parameters the analysis works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterMode {
    /// Count ratios at full double precision.
    #[default]
    Exact,
    /// Off-diagonal probabilities rounded to two decimals, as printed in
    /// published hand calculations.
    Rounded,
}

impl fmt::Display for ParameterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParameterMode::Exact => "exact",
            ParameterMode::Rounded => "rounded",
        })
    }
}

/// Observed subject transitions for one condition, `n[to][from]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCounts {
    space: StateSpace,
    n: Vec<Vec<u64>>,
    condition: String,
}

impl TransitionCounts {
    pub fn new(
        space: StateSpace,
        table: &[Vec<u64>],
        orientation: Orientation,
        condition: impl Into<String>,
    ) -> Result<Self, EcmError> {
        check_shape(space.len(), table.iter().map(Vec::len))?;
        let p = space.len();
        let n = match orientation {
            Orientation::RowsAreTo => table.to_vec(),
            Orientation::RowsAreFrom => (0..p)
                .map(|to| (0..p).map(|from| table[from][to]).collect())
                .collect(),
        };
        Ok(Self {
            space,
            n,
            condition: condition.into(),
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn condition(&self) -> &str {
        &self.condition
    }

    /// Subjects moving from `from` to `to`.
    pub fn get(&self, to: usize, from: usize) -> u64 {
        self.n[to][from]
    }

    pub fn column_total(&self, from: usize) -> u64 {
        self.n.iter().map(|row| row[from]).sum()
    }

    pub fn total(&self) -> u64 {
        self.n.iter().flatten().sum()
    }

    /// Origin-state totals, i.e. the pre-test distribution of subjects.
    pub fn origin_totals(&self) -> Vec<u64> {
        (0..self.space.len()).map(|j| self.column_total(j)).collect()
    }

    /// Destination-state totals, i.e. the post-test distribution.
    pub fn destination_totals(&self) -> Vec<u64> {
        self.n.iter().map(|row| row.iter().sum()).collect()
    }
}

fn check_shape(p: usize, lens: impl Iterator<Item = usize>) -> Result<(), EcmError> {
    let lens: Vec<usize> = lens.collect();
    if lens.len() != p || lens.iter().any(|&l| l != p) {
        return Err(EcmError::Shape {
            expected: p,
            rows: lens.len(),
            lens,
        });
    }
    Ok(())
}

/// Column sum or entry that failed the stochasticity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    ColumnSum { column: usize, sum: f64 },
    Entry { to: usize, from: usize, value: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return f.write_str("pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v {
                Violation::ColumnSum { column, sum } => write!(f, "column {column} sums to {sum}")?,
                Violation::Entry { to, from, value } => {
                    write!(f, "entry [{to}][{from}] = {value} outside [0, 1]")?
                }
            }
        }
        Ok(())
    }
}

/// Column-stochastic transition matrix for one condition.
#[derive(Clone, PartialEq)]
pub struct TransitionMatrix {
    space: StateSpace,
    // row-major, m[to * p + from]
    m: Vec<f64>,
    condition: String,
}

impl TransitionMatrix {
    /// Estimate the matrix as count ratios, `n[to][from] / Σ_to n[to][from]`.
    pub fn from_counts(counts: &TransitionCounts) -> Result<Self, EcmError> {
        let p = counts.space.len();
        let mut m = vec![0.0; p * p];
        for from in 0..p {
            let total = counts.column_total(from);
            if total == 0 {
                return Err(EcmError::ZeroOrigin {
                    condition: counts.condition.clone(),
                    state: counts.space.label(from).to_string(),
                });
            }
            for to in 0..p {
                m[to * p + from] = counts.n[to][from] as f64 / total as f64;
            }
        }
        Ok(Self {
            space: counts.space.clone(),
            m,
            condition: counts.condition.clone(),
        })
    }

    /// Direct probability input. Tables that fail [`validate_stochastic`] are
    /// rejected, never renormalized.
    pub fn from_probabilities(
        space: StateSpace,
        table: &[Vec<f64>],
        orientation: Orientation,
        condition: impl Into<String>,
    ) -> Result<Self, EcmError> {
        check_shape(space.len(), table.iter().map(Vec::len))?;
        let p = space.len();
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let (to, from) = match orientation {
                    Orientation::RowsAreTo => (i, j),
                    Orientation::RowsAreFrom => (j, i),
                };
                m[to * p + from] = table[i][j];
            }
        }
        let out = Self {
            space,
            m,
            condition: condition.into(),
        };
        let report = validate_stochastic(&out);
        if !report.is_pass() {
            return Err(EcmError::NotStochastic {
                condition: out.condition,
                report,
            });
        }
        Ok(out)
    }

    /// Build without validation; used for intermediate products (powers,
    /// deflations) and for exercising the validator itself.
    pub fn from_raw_unchecked(space: StateSpace, m: Vec<f64>, condition: impl Into<String>) -> Self {
        assert_eq!(m.len(), space.len() * space.len());
        Self {
            space,
            m,
            condition: condition.into(),
        }
    }

    pub fn identity(space: StateSpace, condition: impl Into<String>) -> Self {
        let p = space.len();
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            m[i * p + i] = 1.0;
        }
        Self::from_raw_unchecked(space, m, condition)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn condition(&self) -> &str {
        &self.condition
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// `Pr(next = to | current = from)`.
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.m[to * self.dim() + from]
    }

    pub fn column(&self, from: usize) -> Vec<f64> {
        (0..self.dim()).map(|to| self.get(to, from)).collect()
    }

    /// Rows indexed by destination.
    pub fn rows_to(&self) -> Vec<Vec<f64>> {
        let p = self.dim();
        (0..p).map(|to| self.m[to * p..(to + 1) * p].to_vec()).collect()
    }

    /// Row-stochastic view, `r[from][to]`.
    pub fn to_row_stochastic(&self) -> Vec<Vec<f64>> {
        let p = self.dim();
        (0..p).map(|from| self.column(from)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn with_condition(mut self, condition: impl Into<String>) -> Self {
        self.condition = condition.into();
        self
    }

    /// Matrix in the requested parameter mode.
    pub fn with_mode(&self, mode: ParameterMode) -> Self {
        match mode {
            ParameterMode::Exact => self.clone(),
            ParameterMode::Rounded => self.rounded(2),
        }
    }

    /// Round every off-diagonal entry to `decimals` places and set each
    /// diagonal entry to the remaining column mass.
    pub fn rounded(&self, decimals: i32) -> Self {
        let p = self.dim();
        let scale = 10f64.powi(decimals);
        let mut m = self.m.clone();
        for from in 0..p {
            let mut off = 0.0;
            for to in 0..p {
                if to != from {
                    let v = (self.get(to, from) * scale).round() / scale;
                    m[to * p + from] = v;
                    off += v;
                }
            }
            m[from * p + from] = ((1.0 - off) * scale).round() / scale;
        }
        Self {
            space: self.space.clone(),
            m,
            condition: self.condition.clone(),
        }
    }

    /// `self · other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &TransitionMatrix) -> Result<TransitionMatrix, EcmError> {
        self.space.check_same(&other.space)?;
        let p = self.dim();
        let mut m = vec![0.0; p * p];
        for to in 0..p {
            for from in 0..p {
                m[to * p + from] = (0..p).map(|k| self.get(to, k) * other.get(k, from)).sum();
            }
        }
        Ok(Self::from_raw_unchecked(
            self.space.clone(),
            m,
            format!("{}*{}", self.condition, other.condition),
        ))
    }

    /// One step of the forward equation: `counts'[a] = Σ_i m[a][i] · counts[i]`.
    pub fn apply(&self, dist: &StateDistribution) -> Result<StateDistribution, EcmError> {
        self.space.check_same(&dist.space)?;
        Ok(StateDistribution {
            space: dist.space.clone(),
            counts: self.apply_slice(&dist.counts),
        })
    }

    pub(crate) fn apply_slice(&self, v: &[f64]) -> Vec<f64> {
        let p = self.dim();
        (0..p)
            .map(|to| {
                self.m[to * p..(to + 1) * p]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// For two-state matrices: probability of entering the focus state from
    /// the other state, and of leaving it.
    pub fn two_state_rates(&self) -> Option<(f64, f64)> {
        if self.dim() != 2 {
            return None;
        }
        let f = self.space.focus();
        let o = 1 - f;
        Some((self.get(f, o), self.get(o, f)))
    }
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionMatrix")
            .field("condition", &self.condition)
            .field("space", &self.space)
            .field("rows_to", &self.rows_to())
            .finish()
    }
}

/// Check that every column sums to 1 within [`STOCHASTIC_TOLERANCE`] and that
/// every entry lies in `[0, 1]`.
pub fn validate_stochastic(matrix: &TransitionMatrix) -> ValidationReport {
    let p = matrix.dim();
    let mut violations = Vec::new();
    for from in 0..p {
        let mut sum = 0.0;
        for to in 0..p {
            let v = matrix.get(to, from);
            if !(0.0..=1.0).contains(&v) {
                violations.push(Violation::Entry { to, from, value: v });
            }
            sum += v;
        }
        if !((sum - 1.0).abs() <= STOCHASTIC_TOLERANCE) {
            violations.push(Violation::ColumnSum { column: from, sum });
        }
    }
    ValidationReport { violations }
}

/// `ecm_from_counts` under its operation name.
pub fn ecm_from_counts(counts: &TransitionCounts) -> Result<TransitionMatrix, EcmError> {
    TransitionMatrix::from_counts(counts)
}

/// `step` under its operation name.
pub fn step(dist: &StateDistribution, matrix: &TransitionMatrix) -> Result<StateDistribution, EcmError> {
    matrix.apply(dist)
}

/// Expected subject counts per state. Fractional counts are allowed.
#[derive(Clone, PartialEq)]
pub struct StateDistribution {
    space: StateSpace,
    counts: Vec<f64>,
}

impl StateDistribution {
    pub fn new(space: StateSpace, counts: Vec<f64>) -> Result<Self, EcmError> {
        if counts.len() != space.len() {
            return Err(EcmError::Length {
                expected: space.len(),
                got: counts.len(),
            });
        }
        for (i, &c) in counts.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(EcmError::BadCount {
                    state: space.label(i).to_string(),
                    value: c,
                });
            }
        }
        if counts.iter().sum::<f64>() <= 0.0 {
            return Err(EcmError::ZeroTotal);
        }
        Ok(Self { space, counts })
    }

    /// Build from `(label, count)` pairs; every state must be named once.
    pub fn from_labeled(space: StateSpace, pairs: &[(&str, f64)]) -> Result<Self, EcmError> {
        let mut counts = vec![f64::NAN; space.len()];
        for &(label, c) in pairs {
            let i = space
                .index_of(label)
                .ok_or_else(|| EcmError::UnknownState(label.to_string()))?;
            counts[i] = c;
        }
        if let Some(i) = counts.iter().position(|c| c.is_nan()) {
            return Err(EcmError::UnknownState(format!(
                "missing count for `{}`",
                space.label(i)
            )));
        }
        Self::new(space, counts)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn ratios(&self) -> Vec<f64> {
        let t = self.total();
        self.counts.iter().map(|c| c / t).collect()
    }

    pub fn focus_count(&self) -> f64 {
        self.counts[self.space.focus()]
    }

    /// Share of the population in the focus state.
    pub fn focus_ratio(&self) -> f64 {
        self.focus_count() / self.total()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.space.index_of(label).map(|i| self.counts[i])
    }

    /// Same shares, total 1.
    pub fn normalized(&self) -> Self {
        Self {
            space: self.space.clone(),
            counts: self.ratios(),
        }
    }

    /// `a·self + b·other` for nonnegative weights.
    pub fn combine(&self, a: f64, other: &StateDistribution, b: f64) -> Result<Self, EcmError> {
        self.space.check_same(&other.space)?;
        Self::new(
            self.space.clone(),
            self.counts
                .iter()
                .zip(&other.counts)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub(crate) fn from_raw(space: StateSpace, counts: Vec<f64>) -> Self {
        Self { space, counts }
    }
}

impl fmt::Debug for StateDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (l, c) in self.space.labels().iter().zip(&self.counts) {
            m.entry(l, c);
        }
        m.finish()
    }
}

impl Serialize for StateSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("StateSpace", 2)?;
        st.serialize_field("labels", &*self.labels)?;
        st.serialize_field("focus", self.focus_label())?;
        st.end()
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TransitionMatrix", 4)?;
        st.serialize_field("condition", &self.condition)?;
        st.serialize_field("states", &*self.space.labels)?;
        st.serialize_field("rows_are", &Orientation::RowsAreTo)?;
        st.serialize_field("matrix", &self.rows_to())?;
        st.end()
    }
}

impl Serialize for StateDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.counts.len()))?;
        for (l, c) in self.space.labels().iter().zip(&self.counts) {
            m.serialize_entry(l, c)?;
        }
        m.end()
    }
}

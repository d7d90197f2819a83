//! Intervention schedules, horizon simulation, frequency sweeps and trace
//! summaries.
//!
//! States are indexed from 1. Index 1 holds the initial distribution and the
//! transition into index `i` (for `i = 2..=H`) uses the matrix the schedule
//! assigns to `i`. A periodic schedule with period `T` intervenes on the
//! transition into every `i` with `i % T == 0`; time in months is
//! `(i - 1) · dt_months`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ecm::{EcmError, StateDistribution, StateSpace, TransitionMatrix};

pub const DEFAULT_DT_MONTHS: f64 = 1.5;
pub const DEFAULT_HORIZON: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("horizon must be at least {min}, got {got}")]
    Horizon { min: usize, got: usize },
    #[error("explicit schedule for horizon {horizon} needs {expected} labels, got {got}")]
    ExplicitLength {
        horizon: usize,
        expected: usize,
        got: usize,
    },
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Ecm(#[from] EcmError),
}

/// Named transition matrices sharing one state space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionSet {
    matrices: BTreeMap<String, TransitionMatrix>,
}

impl ConditionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert under the matrix's own condition label.
    pub fn insert(&mut self, matrix: TransitionMatrix) -> Result<(), ScheduleError> {
        if let Some(first) = self.matrices.values().next() {
            if first.space() != matrix.space() {
                return Err(EcmError::SpaceMismatch {
                    left: first.space().to_string(),
                    right: matrix.space().to_string(),
                }
                .into());
            }
        }
        self.matrices.insert(matrix.condition().to_string(), matrix);
        Ok(())
    }

    pub fn from_matrices(
        matrices: impl IntoIterator<Item = TransitionMatrix>,
    ) -> Result<Self, ScheduleError> {
        let mut set = Self::new();
        for m in matrices {
            set.insert(m)?;
        }
        Ok(set)
    }

    pub fn get(&self, label: &str) -> Result<&TransitionMatrix, ScheduleError> {
        self.matrices
            .get(label)
            .ok_or_else(|| ScheduleError::UnknownCondition(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.matrices.contains_key(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.matrices.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransitionMatrix> {
        self.matrices.values()
    }

    pub fn space(&self) -> Option<&StateSpace> {
        self.matrices.values().next().map(TransitionMatrix::space)
    }

    pub fn map_matrices(&self, f: impl Fn(&TransitionMatrix) -> TransitionMatrix) -> Self {
        Self {
            matrices: self
                .matrices
                .iter()
                .map(|(k, v)| (k.clone(), f(v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Assignment {
    Constant {
        condition: String,
    },
    Periodic {
        intervention: String,
        period: usize,
        rest: String,
    },
    /// One label per transition, for `i = 2..=H`.
    Explicit {
        labels: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub horizon: usize,
    pub dt_months: f64,
    pub assignment: Assignment,
}

impl Schedule {
    pub fn constant(condition: impl Into<String>, horizon: usize) -> Result<Self, ScheduleError> {
        if horizon < 1 {
            return Err(ScheduleError::Horizon { min: 1, got: horizon });
        }
        Ok(Self {
            horizon,
            dt_months: DEFAULT_DT_MONTHS,
            assignment: Assignment::Constant {
                condition: condition.into(),
            },
        })
    }

    pub fn periodic(
        intervention: impl Into<String>,
        period: usize,
        rest: impl Into<String>,
        horizon: usize,
    ) -> Result<Self, ScheduleError> {
        if period < 1 {
            return Err(ScheduleError::ZeroPeriod);
        }
        if horizon < 2 {
            return Err(ScheduleError::Horizon { min: 2, got: horizon });
        }
        Ok(Self {
            horizon,
            dt_months: DEFAULT_DT_MONTHS,
            assignment: Assignment::Periodic {
                intervention: intervention.into(),
                period,
                rest: rest.into(),
            },
        })
    }

    /// Irregular or mixed schedule; `labels[k]` drives the transition into
    /// state index `k + 2`.
    pub fn explicit<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, ScheduleError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Ok(Self {
            horizon: labels.len() + 1,
            dt_months: DEFAULT_DT_MONTHS,
            assignment: Assignment::Explicit { labels },
        })
    }

    pub fn with_dt_months(mut self, dt: f64) -> Self {
        self.dt_months = dt;
        self
    }

    /// Condition driving the transition into state index `i` (`2 ≤ i ≤ H`).
    pub fn condition_at(&self, i: usize) -> &str {
        debug_assert!(i >= 2 && i <= self.horizon);
        match &self.assignment {
            Assignment::Constant { condition } => condition,
            Assignment::Periodic {
                intervention,
                period,
                rest,
            } => {
                if i.is_multiple_of(*period) {
                    intervention
                } else {
                    rest
                }
            }
            Assignment::Explicit { labels } => &labels[i - 2],
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self.assignment {
            Assignment::Periodic { period, .. } => Some(period),
            _ => None,
        }
    }

    /// Label used for trace output: the intervention for periodic schedules.
    pub fn label(&self) -> String {
        match &self.assignment {
            Assignment::Constant { condition } => condition.clone(),
            Assignment::Periodic { intervention, .. } => intervention.clone(),
            Assignment::Explicit { .. } => "explicit".to_string(),
        }
    }

    /// Indices `i` whose incoming transition is the intervention matrix.
    pub fn intervention_indices(&self) -> Vec<usize> {
        match &self.assignment {
            Assignment::Periodic { period, .. } => {
                (2..=self.horizon).filter(|i| i % period == 0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Check every referenced label exists and explicit lists have the right
    /// length.
    pub fn check(&self, ecms: &ConditionSet) -> Result<(), ScheduleError> {
        match &self.assignment {
            Assignment::Constant { condition } => {
                ecms.get(condition)?;
            }
            Assignment::Periodic {
                intervention, rest, ..
            } => {
                ecms.get(intervention)?;
                ecms.get(rest)?;
            }
            Assignment::Explicit { labels } => {
                if labels.len() + 1 != self.horizon {
                    return Err(ScheduleError::ExplicitLength {
                        horizon: self.horizon,
                        expected: self.horizon.saturating_sub(1),
                        got: labels.len(),
                    });
                }
                for l in labels {
                    ecms.get(l)?;
                }
            }
        }
        Ok(())
    }
}

/// Periodic schedule with its labels checked against `ecms`.
pub fn build_periodic(
    ecms: &ConditionSet,
    intervention: &str,
    period: usize,
    rest: &str,
    horizon: usize,
) -> Result<Schedule, ScheduleError> {
    let s = Schedule::periodic(intervention, period, rest, horizon)?;
    s.check(ecms)?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub schedule: Schedule,
    /// `states[k]` is state index `k + 1`.
    pub states: Vec<StateDistribution>,
}

impl SimulationTrace {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }

    pub fn condition(&self) -> String {
        self.schedule.label()
    }

    pub fn period(&self) -> Option<usize> {
        self.schedule.period()
    }

    pub fn dt_months(&self) -> f64 {
        self.schedule.dt_months
    }

    /// Focus-state share at every index.
    pub fn ratios(&self) -> Vec<f64> {
        self.states.iter().map(StateDistribution::focus_ratio).collect()
    }

    pub fn focus_counts(&self) -> Vec<f64> {
        self.states.iter().map(StateDistribution::focus_count).collect()
    }

    pub fn last(&self) -> &StateDistribution {
        self.states.last().expect("trace is never empty")
    }

    pub fn t_months(&self, index: usize) -> f64 {
        (index - 1) as f64 * self.schedule.dt_months
    }
}

/// Evolve `initial` under `schedule`. Deterministic: the same inputs always
/// produce a bit-identical trace.
pub fn simulate(
    initial: &StateDistribution,
    schedule: &Schedule,
    ecms: &ConditionSet,
) -> Result<SimulationTrace, ScheduleError> {
    schedule.check(ecms)?;
    if let Some(space) = ecms.space() {
        if space != initial.space() {
            return Err(EcmError::SpaceMismatch {
                left: initial.space().to_string(),
                right: space.to_string(),
            }
            .into());
        }
    }
    let mut states = Vec::with_capacity(schedule.horizon);
    states.push(initial.clone());
    let mut cur = initial.counts().to_vec();
    for i in 2..=schedule.horizon {
        let m = ecms.get(schedule.condition_at(i))?;
        cur = m.apply_slice(&cur);
        states.push(StateDistribution::from_raw(initial.space().clone(), cur.clone()));
    }
    Ok(SimulationTrace {
        schedule: schedule.clone(),
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSummary {
    pub mean_ratio: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_ratio: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub converged_peak_high: f64,
    pub converged_peak_low: f64,
}

/// Summary over all `H` ratio points, initial point included.
pub fn summarize(trace: &SimulationTrace) -> TraceSummary {
    summarize_with(trace, true)
}

/// With `include_initial = false` the mean, spread and extrema skip index 1.
/// Converged peaks come from the last complete intervention cycle either way:
/// the `T` points starting at the last intervention index `s` with
/// `s + T − 1 ≤ H`. Schedules without such a cycle report the final point.
pub fn summarize_with(trace: &SimulationTrace, include_initial: bool) -> TraceSummary {
    let ratios = trace.ratios();
    let pts: &[f64] = if include_initial || ratios.len() < 2 {
        &ratios
    } else {
        &ratios[1..]
    };
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<f64>() / n;
    let std = if pts.len() > 1 {
        (pts.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let max = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pts.iter().copied().fold(f64::INFINITY, f64::min);

    let cycle = last_cycle(trace).unwrap_or(ratios.len() - 1..ratios.len());
    let tail = &ratios[cycle];
    TraceSummary {
        mean_ratio: mean,
        std_ratio: std,
        max_ratio: max,
        min_ratio: min,
        converged_peak_high: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        converged_peak_low: tail.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Zero-based slice range of the last complete cycle of a periodic trace.
fn last_cycle(trace: &SimulationTrace) -> Option<std::ops::Range<usize>> {
    let period = trace.period()?;
    let h = trace.horizon();
    let start = trace
        .schedule
        .intervention_indices()
        .into_iter()
        .rfind(|s| s + period - 1 <= h)?;
    Some(start - 1..start - 1 + period)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub conditions: Vec<String>,
    pub rest: String,
    pub periods: Vec<usize>,
    pub horizon: usize,
    pub dt_months: f64,
}

impl SweepGrid {
    /// Periods `1..=50`, horizon 100, 1.5-month steps.
    pub fn standard(conditions: &[&str], rest: &str) -> Self {
        Self {
            conditions: conditions.iter().map(|s| s.to_string()).collect(),
            rest: rest.to_string(),
            periods: (1..=50).collect(),
            horizon: DEFAULT_HORIZON,
            dt_months: DEFAULT_DT_MONTHS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub condition: String,
    pub period: usize,
    pub trace: SimulationTrace,
    pub summary: TraceSummary,
}

impl SweepEntry {
    pub fn period_months(&self) -> f64 {
        self.period as f64 * self.trace.dt_months()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    /// Condition-major: `entries[c * periods.len() + k]`.
    pub entries: Vec<SweepEntry>,
    /// The rest condition applied at every step. It does not depend on the
    /// period, so one trace stands in for every period slot.
    pub baseline: SweepEntry,
}

impl SweepResult {
    pub fn entry(&self, condition: &str, period: usize) -> Option<&SweepEntry> {
        let c = self.grid.conditions.iter().position(|x| x == condition)?;
        let k = self.grid.periods.iter().position(|&p| p == period)?;
        self.entries.get(c * self.grid.periods.len() + k)
    }

    pub fn for_condition<'a>(&'a self, condition: &'a str) -> impl Iterator<Item = &'a SweepEntry> + 'a {
        self.entries.iter().filter(move |e| e.condition == condition)
    }

    /// Baseline trace, replicated for a given period slot.
    pub fn baseline_for(&self, period: usize) -> SweepEntry {
        SweepEntry {
            period,
            ..self.baseline.clone()
        }
    }
}

/// Simulate every `(condition, period)` of the grid. Entries are evaluated in
/// parallel and assembled by grid position.
pub fn sweep(
    initial: &StateDistribution,
    grid: &SweepGrid,
    ecms: &ConditionSet,
) -> Result<SweepResult, ScheduleError> {
    if grid.conditions.is_empty() || grid.periods.is_empty() {
        return Err(ScheduleError::EmptyGrid);
    }
    let jobs: Vec<(&String, usize)> = grid
        .conditions
        .iter()
        .flat_map(|c| grid.periods.iter().map(move |&p| (c, p)))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(c, p)| {
            let schedule = Schedule::periodic(c.as_str(), p, grid.rest.as_str(), grid.horizon)?
                .with_dt_months(grid.dt_months);
            let trace = simulate(initial, &schedule, ecms)?;
            let summary = summarize(&trace);
            Ok(SweepEntry {
                condition: c.clone(),
                period: p,
                trace,
                summary,
            })
        })
        .collect::<Result<Vec<_>, ScheduleError>>()?;

    let schedule = Schedule::constant(grid.rest.as_str(), grid.horizon)?.with_dt_months(grid.dt_months);
    let trace = simulate(initial, &schedule, ecms)?;
    let baseline = SweepEntry {
        condition: grid.rest.clone(),
        period: 0,
        summary: summarize(&trace),
        trace,
    };
    Ok(SweepResult {
        grid: grid.clone(),
        entries,
        baseline,
    })
}

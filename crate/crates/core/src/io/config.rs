//! JSON project configuration.
//!
//! ```json
//! {
//!   "states": ["engaged", "disengaged"],
//!   "conditions": {
//!     "control": { "counts": [[36, 13], [14, 32]], "rows_are": "to" },
//!     "boost":   { "matrix": [[0.9, 0.5], [0.1, 0.5]] }
//!   },
//!   "rest": "control",
//!   "initial": { "engaged": 127, "disengaged": 111 },
//!   "schedules": [
//!     { "name": "monthly", "kind": "periodic", "intervention": "boost", "period": 4 }
//!   ]
//! }
//! ```
//!
//! Each condition gives exactly one of `counts` or `matrix`. `rows_are`
//! says whether rows index the destination state (`"to"`, the default) or
//! the origin (`"from"`). Everything below `initial` is optional.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ecm::{
    Orientation, ParameterMode, StateDistribution, StateSpace, TransitionCounts, TransitionMatrix,
};
use crate::pipeline::{AnalysisSettings, ControlRows, NamedSchedule, PredictabilityRecipe, Project};
use crate::schedule::{ConditionSet, Schedule, SweepGrid, DEFAULT_DT_MONTHS, DEFAULT_HORIZON};
use crate::stats::{Correction, EtaMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub states: Vec<String>,
    /// State whose share is reported; defaults to the first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus: Option<String>,
    pub conditions: BTreeMap<String, ConditionConfig>,
    /// Condition applied between interventions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<String>,
    pub initial: BTreeMap<String, f64>,
    #[serde(default = "default_dt")]
    pub dt_months: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub schedules: Vec<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisConfig>,
    /// Observed totals per state, for the predictability test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survey: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputsConfig>,
}

fn default_dt() -> f64 {
    DEFAULT_DT_MONTHS
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_rows")]
    pub rows_are: Orientation,
}

fn default_rows() -> Orientation {
    Orientation::RowsAreTo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant {
        name: String,
        condition: String,
    },
    Periodic {
        name: String,
        intervention: String,
        /// In steps; give this or `period_months`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period_months: Option<f64>,
        /// Defaults to the project's `rest`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rest: Option<String>,
    },
    /// One label per transition; length `horizon − 1`.
    Explicit {
        name: String,
        labels: Vec<String>,
    },
}

impl ScheduleConfig {
    pub fn name(&self) -> &str {
        match self {
            ScheduleConfig::Constant { name, .. }
            | ScheduleConfig::Periodic { name, .. }
            | ScheduleConfig::Explicit { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub conditions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<String>,
    #[serde(default = "default_periods")]
    pub periods: PeriodRange,
}

fn default_periods() -> PeriodRange {
    PeriodRange { from: 1, to: 50 }
}

/// Inclusive range of periods in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodRange {
    pub from: usize,
    pub to: usize,
}

impl PeriodRange {
    pub fn to_vec(self) -> Vec<usize> {
        (self.from..=self.to).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treatment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats_periods: Option<PeriodRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<Correction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_measure: Option<EtaMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_counts: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yates: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_rows: Option<ControlRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Directory that relative output names resolve against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

/// A problem at a specific place in the configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    pub fn errors(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ProjectConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Parse and validate; all validation problems are collected, not just the first.
pub fn parse_config(text: &str) -> Result<ProjectConfig, ConfigError> {
    let cfg: ProjectConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.resolve(ParameterMode::Exact)?;
    Ok(cfg)
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn condition_ref(&mut self, conditions: &ConditionSet, path: String, label: &str) {
        if !conditions.contains(label) {
            self.push(path, format!("unknown condition `{label}`"));
        }
    }
}

impl ProjectConfig {
    /// Build matrices and schedules, checking every cross-reference.
    pub fn resolve(&self, mode: ParameterMode) -> Result<Project, ConfigError> {
        let mut err = Errors(Vec::new());
        let space = match StateSpace::new(self.states.iter().map(String::as_str)) {
            Ok(s) => match &self.focus {
                Some(f) => s.with_focus(f).unwrap_or_else(|e| {
                    err.push("focus", e.to_string());
                    StateSpace::new(self.states.iter().map(String::as_str)).expect("validated above")
                }),
                None => s,
            },
            Err(e) => {
                err.push("states", e.to_string());
                return Err(ConfigError::Invalid(err.0));
            }
        };

        let mut conditions = ConditionSet::new();
        let mut counts = BTreeMap::new();
        if self.conditions.is_empty() {
            err.push("conditions", "at least one condition is required");
        }
        for (name, c) in &self.conditions {
            let path = format!("conditions.{name}");
            let built = match (&c.counts, &c.matrix) {
                (Some(n), None) => TransitionCounts::new(space.clone(), n, c.rows_are, name.as_str())
                    .and_then(|t| {
                        let m = TransitionMatrix::from_counts(&t)?;
                        counts.insert(name.clone(), t);
                        Ok(m)
                    }),
                (None, Some(m)) => TransitionMatrix::from_probabilities(space.clone(), m, c.rows_are, name.as_str()),
                _ => {
                    err.push(path, "give exactly one of `counts` or `matrix`");
                    continue;
                }
            };
            match built {
                Ok(m) => {
                    conditions.insert(m.with_mode(mode)).expect("shared state space");
                }
                Err(e) => err.push(path, e.to_string()),
            }
        }

        let rest = match &self.rest {
            Some(r) => {
                err.condition_ref(&conditions, "rest".into(), r);
                r.clone()
            }
            None => self.conditions.keys().next().cloned().unwrap_or_default(),
        };

        let mut init = vec![0.0; space.len()];
        for (label, v) in &self.initial {
            match space.index_of(label) {
                Some(i) => init[i] = *v,
                None => err.push(format!("initial.{label}"), "not a declared state"),
            }
        }
        let initial = StateDistribution::new(space.clone(), init)
            .map_err(|e| err.push("initial", e.to_string()))
            .ok();

        if !(self.dt_months.is_finite() && self.dt_months > 0.0) {
            err.push("dt_months", "must be positive");
        }
        if self.horizon < 1 {
            err.push("horizon", "must be at least 1");
        }

        let mut schedules = Vec::new();
        for (k, s) in self.schedules.iter().enumerate() {
            let path = format!("schedules[{k}] ({})", s.name());
            let built = match s {
                ScheduleConfig::Constant { condition, .. } => {
                    err.condition_ref(&conditions, format!("{path}.condition"), condition);
                    Schedule::constant(condition.as_str(), self.horizon)
                }
                ScheduleConfig::Periodic {
                    intervention,
                    period,
                    period_months,
                    rest: r,
                    ..
                } => {
                    err.condition_ref(&conditions, format!("{path}.intervention"), intervention);
                    let r = r.clone().unwrap_or_else(|| rest.clone());
                    err.condition_ref(&conditions, format!("{path}.rest"), &r);
                    let steps = match (period, period_months) {
                        (Some(p), None) => Some(*p),
                        (None, Some(m)) => months_to_steps(*m, self.dt_months)
                            .map_err(|e| err.push(format!("{path}.period_months"), e))
                            .ok(),
                        _ => {
                            err.push(path.clone(), "give exactly one of `period` or `period_months`");
                            None
                        }
                    };
                    let Some(steps) = steps else { continue };
                    Schedule::periodic(intervention.as_str(), steps, r, self.horizon)
                }
                ScheduleConfig::Explicit { labels, .. } => {
                    for (j, l) in labels.iter().enumerate() {
                        err.condition_ref(&conditions, format!("{path}.labels[{j}]"), l);
                    }
                    if labels.len() + 1 != self.horizon {
                        err.push(
                            format!("{path}.labels"),
                            format!("has {} labels, horizon {} needs {}", labels.len(), self.horizon, self.horizon.saturating_sub(1)),
                        );
                    }
                    Schedule::explicit(labels.iter().map(String::as_str))
                }
            };
            match built {
                Ok(s) => schedules.push(NamedSchedule {
                    name: self.schedules[k].name().to_string(),
                    schedule: s.with_dt_months(self.dt_months),
                }),
                Err(e) => err.push(path, e.to_string()),
            }
        }
        let mut names: Vec<&str> = self.schedules.iter().map(ScheduleConfig::name).collect();
        names.sort_unstable();
        for w in names.windows(2) {
            if w[0] == w[1] {
                err.push("schedules", format!("duplicate schedule name `{}`", w[0]));
            }
        }

        let sweep = match &self.sweep {
            Some(s) => {
                for (j, c) in s.conditions.iter().enumerate() {
                    err.condition_ref(&conditions, format!("sweep.conditions[{j}]"), c);
                }
                let r = s.rest.clone().unwrap_or_else(|| rest.clone());
                err.condition_ref(&conditions, "sweep.rest".into(), &r);
                if s.conditions.is_empty() {
                    err.push("sweep.conditions", "must not be empty");
                }
                if s.periods.from < 1 || s.periods.to < s.periods.from {
                    err.push("sweep.periods", "needs 1 ≤ from ≤ to");
                }
                SweepGrid {
                    conditions: s.conditions.clone(),
                    rest: r,
                    periods: s.periods.to_vec(),
                    horizon: self.horizon,
                    dt_months: self.dt_months,
                }
            }
            None => {
                let conds: Vec<&str> = conditions.labels().filter(|c| *c != rest).collect();
                let mut g = SweepGrid::standard(&conds, &rest);
                g.horizon = self.horizon;
                g.dt_months = self.dt_months;
                g
            }
        };

        let analysis = self.analysis_settings(&sweep, &conditions, &mut err);

        let survey = self.survey.as_ref().and_then(|s| {
            let f = space.focus_label();
            let focus = s.get(f).copied();
            let other: f64 = s.iter().filter(|(k, _)| k.as_str() != f).map(|(_, v)| v).sum();
            for k in s.keys() {
                if space.index_of(k).is_none() {
                    err.push(format!("survey.{k}"), "not a declared state");
                }
            }
            match focus {
                Some(v) if v >= 0.0 && other >= 0.0 => Some([v, other]),
                _ => {
                    err.push("survey", format!("needs a nonnegative total for `{f}`"));
                    None
                }
            }
        });

        if !err.0.is_empty() {
            return Err(ConfigError::Invalid(err.0));
        }
        Ok(Project {
            space,
            conditions,
            counts,
            initial: initial.expect("no errors recorded"),
            dt_months: self.dt_months,
            horizon: self.horizon,
            rest,
            schedules,
            sweep,
            analysis,
            survey,
            mode,
        })
    }

    fn analysis_settings(&self, sweep: &SweepGrid, conditions: &ConditionSet, err: &mut Errors) -> AnalysisSettings {
        let d = AnalysisSettings::default();
        let a = self.analysis.clone().unwrap_or_default();
        let explicit = self.analysis.as_ref().is_some_and(|x| x.treatment.is_some());
        if let Some(t) = &a.treatment {
            err.condition_ref(conditions, "analysis.treatment".into(), t);
        }
        if let Some(o) = &a.other {
            err.condition_ref(conditions, "analysis.other".into(), o);
        }
        let treatment = a
            .treatment
            .or_else(|| sweep.conditions.first().cloned())
            .unwrap_or_else(|| sweep.rest.clone());
        let other = if explicit {
            a.other
        } else {
            a.other.or_else(|| sweep.conditions.get(1).cloned())
        };
        let stats_periods = a
            .stats_periods
            .map(PeriodRange::to_vec)
            .unwrap_or_else(|| sweep.periods.iter().copied().filter(|&p| p >= 2).collect());
        for p in &stats_periods {
            if !sweep.periods.contains(p) {
                err.push("analysis.stats_periods", format!("period {p} is outside the sweep grid"));
                break;
            }
        }
        AnalysisSettings {
            treatment,
            other,
            stats_periods,
            family_size: a.family_size.unwrap_or(d.family_size),
            correction: a.correction.unwrap_or(d.correction),
            eta_measure: a.eta_measure.unwrap_or(d.eta_measure),
            eta_threshold: a.eta_threshold.unwrap_or(d.eta_threshold),
            p_threshold: a.p_threshold.unwrap_or(d.p_threshold),
            d_threshold: a.d_threshold.unwrap_or(d.d_threshold),
            recipe: PredictabilityRecipe {
                round_counts: a.round_counts.unwrap_or(d.recipe.round_counts),
                yates: a.yates.unwrap_or(d.recipe.yates),
            },
            control_rows: a.control_rows.unwrap_or(d.control_rows),
        }
    }
}

/// Whole number of steps for a period given in months.
pub fn months_to_steps(months: f64, dt_months: f64) -> Result<usize, String> {
    let steps = months / dt_months;
    let r = steps.round();
    if !(r >= 1.0) || (steps - r).abs() > 1e-9 {
        return Err(format!("{months} months is not a positive whole number of {dt_months}-month steps"));
    }
    Ok(r as usize)
}

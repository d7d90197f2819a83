//! End-to-end analyses over a resolved [`Project`]: the survey comparison,
//! the frequency sweep and its threshold scan, and the regression datasets
//! built from sweep output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::ecm::{EcmError, ParameterMode, StateDistribution, StateSpace, TransitionCounts};
use crate::schedule::{simulate, sweep, ConditionSet, Schedule, ScheduleError, SweepGrid, SweepResult};
use crate::stats::{
    chi2_contingency, logistic_fit, ols_fit, period_statistics, threshold_finder, Coefficient,
    Comparison, ContingencyTable2x2, Correction, Design, EtaMeasure, LogisticFit, OlsFit,
    PeriodStatistics, StatsError, TestResult, ThresholdCriterion, ThresholdKind, ThresholdResult,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ecm(#[from] EcmError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Input(String),
}

impl PipelineError {
    /// Numerical failures map to exit code 2 in the CLI, everything else to 1.
    pub fn is_numeric(&self) -> bool {
        match self {
            PipelineError::Stats(e) => e.is_numeric(),
            PipelineError::Analytic(e) => e.is_numeric(),
            _ => false,
        }
    }
}

/// A schedule with the name it was given in the configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedSchedule {
    pub name: String,
    pub schedule: Schedule,
}

/// How control rows of the trajectory dataset are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRows {
    /// Row `(i, j)` holds the control ratio at index `i` for every `j`.
    #[default]
    CodeFaithful,
    /// Row `(i, j)` holds the control ratio at index `j`.
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSettings {
    pub treatment: String,
    pub other: Option<String>,
    pub stats_periods: Vec<usize>,
    pub family_size: u32,
    pub correction: Correction,
    pub eta_measure: EtaMeasure,
    pub eta_threshold: f64,
    pub p_threshold: f64,
    pub d_threshold: f64,
    pub recipe: PredictabilityRecipe,
    pub control_rows: ControlRows,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            treatment: "attainable".into(),
            other: Some("extraordinary".into()),
            stats_periods: (2..=50).collect(),
            family_size: 3,
            correction: Correction::Sidak,
            eta_measure: EtaMeasure::ContrastPartial,
            eta_threshold: 0.14,
            p_threshold: 0.05,
            d_threshold: 0.8,
            recipe: PredictabilityRecipe::default(),
            control_rows: ControlRows::CodeFaithful,
        }
    }
}

/// Everything an analysis needs, validated and with matrices built.
#[derive(Debug, Clone)]
pub struct Project {
    pub space: StateSpace,
    pub conditions: ConditionSet,
    /// Count tables of the conditions that were given as counts.
    pub counts: BTreeMap<String, TransitionCounts>,
    pub initial: StateDistribution,
    pub dt_months: f64,
    pub horizon: usize,
    pub rest: String,
    pub schedules: Vec<NamedSchedule>,
    pub sweep: SweepGrid,
    pub analysis: AnalysisSettings,
    /// Observed `(focus, other)` totals to test the forecast against.
    pub survey: Option<[f64; 2]>,
    pub mode: ParameterMode,
}

impl Project {
    /// The same project with every matrix in `mode`.
    pub fn with_mode(&self, mode: ParameterMode) -> Self {
        let mut p = self.clone();
        p.conditions = self.conditions.map_matrices(|m| m.with_mode(mode));
        p.mode = mode;
        p
    }

    pub fn constant(&self, condition: &str) -> Result<Schedule, PipelineError> {
        let s = Schedule::constant(condition, self.horizon)?.with_dt_months(self.dt_months);
        s.check(&self.conditions)?;
        Ok(s)
    }

    pub fn periodic(&self, condition: &str, period: usize) -> Result<Schedule, PipelineError> {
        let s = Schedule::periodic(condition, period, self.rest.as_str(), self.horizon)?
            .with_dt_months(self.dt_months);
        s.check(&self.conditions)?;
        Ok(s)
    }

    pub fn run_sweep(&self) -> Result<SweepResult, PipelineError> {
        Ok(sweep(&self.initial, &self.sweep, &self.conditions)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictabilityRecipe {
    /// Round simulated expected counts to integers before testing.
    pub round_counts: bool,
    pub yates: bool,
}

impl Default for PredictabilityRecipe {
    fn default() -> Self {
        Self {
            round_counts: true,
            yates: true,
        }
    }
}

impl PredictabilityRecipe {
    pub fn variants() -> [Self; 4] {
        [(true, true), (true, false), (false, true), (false, false)].map(|(r, y)| Self {
            round_counts: r,
            yates: y,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictabilityResult {
    pub recipe: PredictabilityRecipe,
    pub condition: String,
    /// Expected `(focus, other)` counts at the horizon, before rounding.
    pub simulated: [f64; 2],
    pub table: ContingencyTable2x2,
    pub test: TestResult,
}

/// Forecast the rest condition over the horizon and test the final split
/// against the survey totals.
pub fn predictability(project: &Project, recipe: PredictabilityRecipe) -> Result<PredictabilityResult, PipelineError> {
    let survey = project
        .survey
        .ok_or_else(|| PipelineError::Input("no survey totals to compare against".into()))?;
    let trace = simulate(&project.initial, &project.constant(&project.rest)?, &project.conditions)?;
    let last = trace.last();
    let focus = last.focus_count();
    let simulated = [focus, last.total() - focus];
    let row = if recipe.round_counts {
        simulated.map(f64::round)
    } else {
        simulated
    };
    let fl = project.space.focus_label();
    let table = ContingencyTable2x2::labeled([row, survey], ["simulation", "survey"], [fl, "other"])?;
    let test = chi2_contingency(&table, recipe.yates)?;
    Ok(PredictabilityResult {
        recipe,
        condition: project.rest.clone(),
        simulated,
        table,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub comparison: Comparison,
    pub statistics: Vec<PeriodStatistics>,
    /// One scan per criterion; the configured η² measure comes first.
    pub results: Vec<ThresholdResult>,
}

impl ThresholdReport {
    pub fn find(&self, kind: ThresholdKind) -> Option<&ThresholdResult> {
        self.results.iter().find(|r| r.criterion.kind == kind)
    }
}

pub fn thresholds(project: &Project, sweep: &SweepResult) -> Result<ThresholdReport, PipelineError> {
    let a = &project.analysis;
    let comparison = Comparison {
        treatment: a.treatment.clone(),
        other: a.other.clone(),
        family_size: a.family_size,
        correction: a.correction,
    };
    let statistics = period_statistics(sweep, &comparison, &a.stats_periods)?;
    let alt = match a.eta_measure {
        EtaMeasure::Omnibus => EtaMeasure::ContrastPartial,
        EtaMeasure::ContrastPartial => EtaMeasure::Omnibus,
    };
    let criteria = [
        (ThresholdKind::Eta2AtLeast(a.eta_measure), a.eta_threshold),
        (ThresholdKind::Eta2AtLeast(alt), a.eta_threshold),
        (ThresholdKind::CorrectedPBelow, a.p_threshold),
        (ThresholdKind::CohensDAtLeast, a.d_threshold),
    ];
    let results = criteria
        .iter()
        .map(|&(k, t)| threshold_finder(&statistics, ThresholdCriterion::new(k, t)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThresholdReport {
        comparison,
        statistics,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub condition: String,
    pub period: usize,
    pub t_steps: usize,
    pub ratio: f64,
}

/// Long-format trajectories: every intervention trace at indices `2..=H`,
/// then `H` control rows for each analysis period.
pub fn trajectory_dataset(
    sweep: &SweepResult,
    stats_periods: &[usize],
    control: ControlRows,
) -> Vec<TrajectoryRow> {
    let mut rows = Vec::new();
    for e in &sweep.entries {
        let r = e.trace.ratios();
        for i in 2..=r.len() {
            rows.push(TrajectoryRow {
                condition: e.condition.clone(),
                period: e.period,
                t_steps: i - 1,
                ratio: r[i - 1],
            });
        }
    }
    let base = sweep.baseline.trace.ratios();
    for &i in stats_periods {
        for j in 1..=base.len() {
            let idx = match control {
                ControlRows::CodeFaithful => i.min(base.len()),
                ControlRows::Corrected => j,
            };
            rows.push(TrajectoryRow {
                condition: sweep.grid.rest.clone(),
                period: i,
                t_steps: j - 1,
                ratio: base[idx - 1],
            });
        }
    }
    rows
}

/// `ratio ~ condition dummies + period + t`, with the rest condition as the
/// reference level.
pub fn trajectory_regression(sweep: &SweepResult, rows: &[TrajectoryRow]) -> Result<OlsFit, PipelineError> {
    let n = rows.len();
    let mut d = Design::with_intercept(n);
    for c in &sweep.grid.conditions {
        d = d.column(c.as_str(), rows.iter().map(|r| f64::from(u8::from(&r.condition == c))).collect())?;
    }
    d = d
        .column("period", rows.iter().map(|r| r.period as f64).collect())?
        .column("t", rows.iter().map(|r| r.t_steps as f64).collect())?;
    let y: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(ols_fit(&d, &y)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaRegression {
    pub maximum: OlsFit,
    pub minimum: OlsFit,
}

/// Per `(condition, period)` trace maximum and minimum, the rest condition
/// included once per period, regressed on condition dummies and period.
pub fn extrema_regression(sweep: &SweepResult) -> Result<ExtremaRegression, PipelineError> {
    let mut rows: Vec<(&str, usize, f64, f64)> = sweep
        .entries
        .iter()
        .map(|e| (e.condition.as_str(), e.period, e.summary.max_ratio, e.summary.min_ratio))
        .collect();
    let b = &sweep.baseline.summary;
    rows.extend(sweep.grid.periods.iter().map(|&p| (sweep.grid.rest.as_str(), p, b.max_ratio, b.min_ratio)));
    let mut d = Design::with_intercept(rows.len());
    for c in &sweep.grid.conditions {
        d = d.column(c.as_str(), rows.iter().map(|r| f64::from(u8::from(r.0 == c))).collect())?;
    }
    d = d.column("period", rows.iter().map(|r| r.1 as f64).collect())?;
    let max: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let min: Vec<f64> = rows.iter().map(|r| r.3).collect();
    Ok(ExtremaRegression {
        maximum: ols_fit(&d, &max)?,
        minimum: ols_fit(&d, &min)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectRecord {
    pub condition: String,
    pub pre: bool,
    pub post: bool,
}

/// One record per observed subject in the count tables, `pre`/`post`
/// flagging the focus state before and after.
pub fn subject_records(counts: &BTreeMap<String, TransitionCounts>) -> Vec<SubjectRecord> {
    let mut out = Vec::new();
    for (name, c) in counts {
        let f = c.space().focus();
        let p = c.space().len();
        for from in 0..p {
            for to in 0..p {
                for _ in 0..c.get(to, from) {
                    out.push(SubjectRecord {
                        condition: name.clone(),
                        pre: from == f,
                        post: to == f,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectLogistic {
    pub reference: String,
    pub fit: LogisticFit,
    /// Pairwise condition contrasts, `a - b`.
    pub contrasts: Vec<Coefficient>,
}

/// `post ~ condition dummies + pre`, reference level `reference`.
pub fn subject_logistic(
    counts: &BTreeMap<String, TransitionCounts>,
    reference: &str,
) -> Result<SubjectLogistic, PipelineError> {
    if !counts.contains_key(reference) {
        return Err(PipelineError::Input(format!("reference condition `{reference}` has no count table")));
    }
    let recs = subject_records(counts);
    let others: Vec<&String> = counts.keys().filter(|k| *k != reference).collect();
    let mut d = Design::with_intercept(recs.len());
    for c in &others {
        d = d.column(c.as_str(), recs.iter().map(|r| f64::from(u8::from(&r.condition == *c))).collect())?;
    }
    d = d.column("pre", recs.iter().map(|r| f64::from(u8::from(r.pre))).collect())?;
    let y: Vec<f64> = recs.iter().map(|r| f64::from(u8::from(r.post))).collect();
    let fit = logistic_fit(&d, &y)?;
    let mut contrasts = Vec::new();
    for (i, a) in others.iter().enumerate() {
        contrasts.push(Coefficient {
            name: format!("{a} - {reference}"),
            ..fit.contrast(a, None)?
        });
        for b in &others[i + 1..] {
            contrasts.push(fit.contrast(a, Some(b))?);
        }
    }
    Ok(SubjectLogistic {
        reference: reference.to_string(),
        fit,
        contrasts,
    })
}

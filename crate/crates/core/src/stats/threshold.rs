//! Per-period comparison statistics over a frequency sweep, and the scan for
//! the least frequent schedule that still meets an effect criterion.
//!
//! For every period the treatment trajectory, the rest-condition baseline and
//! optionally a second intervention trajectory are compared as groups of `H`
//! ratio points each.

use serde::{Deserialize, Serialize};

use super::hypothesis::{anova_oneway, cohens_d_pooled, family_correct, ttest_pooled, Correction};
use super::StatsError;
use crate::schedule::SweepResult;

/// Which η² the `eta2_at_least` criterion reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMeasure {
    /// `SS_between / SS_total` across all groups.
    Omnibus,
    /// Partial η² of the treatment-vs-baseline contrast within the one-way
    /// model, `SS_c / (SS_c + SS_within)`.
    #[default]
    ContrastPartial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub treatment: String,
    /// Additional intervention group entered into the ANOVA.
    pub other: Option<String>,
    pub family_size: u32,
    pub correction: Correction,
}

impl Comparison {
    pub fn new(treatment: &str, other: Option<&str>) -> Self {
        Self {
            treatment: treatment.to_string(),
            other: other.map(str::to_string),
            family_size: 3,
            correction: Correction::Sidak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodStatistics {
    pub period: usize,
    pub months: f64,
    pub anova_f: f64,
    pub anova_p: f64,
    pub eta2_omnibus: f64,
    pub eta2_contrast: f64,
    pub t: f64,
    pub p_raw: f64,
    pub p_corrected: f64,
    pub cohens_d: f64,
}

/// Statistics for each period in `periods` (all sweep periods if empty).
pub fn period_statistics(
    sweep: &SweepResult,
    cmp: &Comparison,
    periods: &[usize],
) -> Result<Vec<PeriodStatistics>, StatsError> {
    if sweep.entries.is_empty() {
        return Err(StatsError::EmptySweep);
    }
    let periods: Vec<usize> = if periods.is_empty() {
        sweep.grid.periods.clone()
    } else {
        periods.to_vec()
    };
    let baseline = sweep.baseline.trace.ratios();
    periods
        .iter()
        .map(|&period| {
            let lookup = |c: &str| {
                sweep
                    .entry(c, period)
                    .map(|e| e.trace.ratios())
                    .ok_or_else(|| StatsError::UnknownCondition(format!("{c} at period {period}")))
            };
            let treat = lookup(&cmp.treatment)?;
            let other = cmp.other.as_deref().map(lookup).transpose()?;
            let mut groups: Vec<&[f64]> = vec![&treat, &baseline];
            let mut weights = vec![1.0, -1.0];
            if let Some(o) = &other {
                groups.push(o);
                weights.push(0.0);
            }
            let anova = anova_oneway(&groups)?;
            let t = ttest_pooled(&treat, &baseline)?;
            Ok(PeriodStatistics {
                period,
                months: period as f64 * sweep.grid.dt_months,
                anova_f: anova.f,
                anova_p: anova.p,
                eta2_omnibus: anova.eta_squared,
                eta2_contrast: anova.contrast_partial_eta_squared(&weights)?,
                t: t.statistic,
                p_raw: t.p,
                p_corrected: family_correct(t.p, cmp.family_size, cmp.correction),
                cohens_d: cohens_d_pooled(&treat, &baseline)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Eta2AtLeast(EtaMeasure),
    CorrectedPBelow,
    CohensDAtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCriterion {
    pub kind: ThresholdKind,
    pub threshold: f64,
}

impl ThresholdCriterion {
    pub fn new(kind: ThresholdKind, threshold: f64) -> Result<Self, StatsError> {
        let ok = match kind {
            ThresholdKind::Eta2AtLeast(_) | ThresholdKind::CorrectedPBelow => threshold.is_finite() && threshold >= 0.0,
            ThresholdKind::CohensDAtLeast => threshold.is_finite(),
        };
        if !ok {
            return Err(StatsError::ThresholdRange {
                kind: format!("{kind:?}"),
                value: threshold,
            });
        }
        Ok(Self { kind, threshold })
    }

    pub fn value(&self, s: &PeriodStatistics) -> f64 {
        match self.kind {
            ThresholdKind::Eta2AtLeast(EtaMeasure::Omnibus) => s.eta2_omnibus,
            ThresholdKind::Eta2AtLeast(EtaMeasure::ContrastPartial) => s.eta2_contrast,
            ThresholdKind::CorrectedPBelow => s.p_corrected,
            ThresholdKind::CohensDAtLeast => s.cohens_d,
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        match self.kind {
            ThresholdKind::CorrectedPBelow => value < self.threshold,
            _ => value >= self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub criterion: ThresholdCriterion,
    /// Largest period of the passing run that starts at the most frequent
    /// schedule; `None` if even that one fails.
    pub period: Option<usize>,
    pub months: Option<f64>,
    /// Statistic at the reported period.
    pub value_at_period: Option<f64>,
    /// First failing period after the run and its statistic.
    pub first_failure: Option<(usize, f64)>,
    /// Periods beyond the first failure that pass again.
    pub non_monotonic: Vec<usize>,
    /// `(period, statistic)` for every scanned period.
    pub scanned: Vec<(usize, f64)>,
}

/// Scan periods in increasing order.
pub fn threshold_finder(
    stats: &[PeriodStatistics],
    criterion: ThresholdCriterion,
) -> Result<ThresholdResult, StatsError> {
    if stats.is_empty() {
        return Err(StatsError::EmptySweep);
    }
    let mut rows: Vec<&PeriodStatistics> = stats.iter().collect();
    rows.sort_by_key(|s| s.period);
    let scanned: Vec<(usize, f64)> = rows.iter().map(|s| (s.period, criterion.value(s))).collect();
    let run = scanned.iter().take_while(|(_, v)| criterion.holds(*v)).count();
    let last = run.checked_sub(1).map(|i| rows[i]);
    let first_failure = scanned.get(run).copied();
    let non_monotonic = scanned
        .iter()
        .skip(run + 1)
        .filter(|(_, v)| criterion.holds(*v))
        .map(|(p, _)| *p)
        .collect();
    Ok(ThresholdResult {
        criterion,
        period: last.map(|s| s.period),
        months: last.map(|s| s.months),
        value_at_period: last.map(|s| criterion.value(s)),
        first_failure,
        non_monotonic,
        scanned,
    })
}

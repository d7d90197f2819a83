//! Ready-made charts over sweep output.

use crate::pipeline::ThresholdReport;
use crate::schedule::SweepResult;
use crate::stats::PeriodStatistics;

use super::svg::{LineChart, Series};

/// Focus-share trajectories of every condition at one period, with the rest
/// condition for reference.
pub fn trajectories(sweep: &SweepResult, period: usize) -> LineChart {
    let dt = sweep.grid.dt_months;
    let mut c = LineChart::new(
        &format!("Trajectories, one intervention per {} months", period as f64 * dt),
        "time (months)",
        "share",
    );
    for e in sweep.grid.conditions.iter().filter_map(|k| sweep.entry(k, period)) {
        c = c.series(Series::from_values(&e.condition, 0.0, dt, &e.trace.ratios()));
    }
    c.series(Series::from_values(&sweep.grid.rest, 0.0, dt, &sweep.baseline.trace.ratios()))
}

/// Mean share over the horizon against the interval between interventions.
pub fn mean_share(sweep: &SweepResult) -> LineChart {
    let mut c = LineChart::new("Mean share over the horizon", "months between interventions", "mean share");
    for cond in &sweep.grid.conditions {
        let pts = sweep.for_condition(cond).map(|e| (e.period_months(), e.summary.mean_ratio)).collect();
        c = c.series(Series::new(cond, pts));
    }
    let m = sweep.baseline.summary.mean_ratio;
    let pts = sweep.grid.periods.iter().map(|&p| (p as f64 * sweep.grid.dt_months, m)).collect();
    c.series(Series::new(&sweep.grid.rest, pts).dashed())
}

/// Per-period maximum (solid) and minimum (dashed) shares.
pub fn extrema(sweep: &SweepResult) -> LineChart {
    let mut c = LineChart::new("Maximum and minimum share", "months between interventions", "share");
    let b = &sweep.baseline.summary;
    let months: Vec<f64> = sweep.grid.periods.iter().map(|&p| p as f64 * sweep.grid.dt_months).collect();
    for pick_max in [true, false] {
        let tag = if pick_max { "max" } else { "min" };
        for cond in &sweep.grid.conditions {
            let pts = sweep
                .for_condition(cond)
                .map(|e| (e.period_months(), if pick_max { e.summary.max_ratio } else { e.summary.min_ratio }))
                .collect();
            let s = Series::new(format!("{cond} {tag}"), pts);
            c = c.series(if pick_max { s } else { s.dashed() });
        }
        let v = if pick_max { b.max_ratio } else { b.min_ratio };
        let s = Series::new(format!("{} {tag}", sweep.grid.rest), months.iter().map(|&m| (m, v)).collect());
        c = c.series(if pick_max { s } else { s.dashed() });
    }
    c
}

fn stat_chart(title: &str, y: &str, stats: &[PeriodStatistics], name: &str, f: impl Fn(&PeriodStatistics) -> f64) -> LineChart {
    LineChart::new(title, "period (steps)", y).series(Series::new(name, stats.iter().map(|s| (s.period as f64, f(s))).collect()))
}

/// Both η² measures with the conventional effect-size bands.
pub fn effect_size(report: &ThresholdReport) -> LineChart {
    let s = &report.statistics;
    let mut c = stat_chart("Effect size by period", "eta squared", s, "contrast partial", |x| x.eta2_contrast)
        .series(Series::new("omnibus", s.iter().map(|x| (x.period as f64, x.eta2_omnibus)).collect()).dashed());
    for (y, l) in [(0.26, "large .26"), (0.13, "medium .13"), (0.02, "small .02")] {
        c = c.ref_line(y, l);
    }
    c
}

pub fn corrected_p(report: &ThresholdReport, threshold: f64) -> LineChart {
    stat_chart("Corrected p by period", "p", &report.statistics, "corrected p", |x| x.p_corrected)
        .ref_line(threshold, &format!("p = {threshold}"))
}

pub fn cohens_d(report: &ThresholdReport, threshold: f64) -> LineChart {
    stat_chart("Cohen's d by period", "d", &report.statistics, "d", |x| x.cohens_d)
        .ref_line(threshold, &format!("d = {threshold}"))
}

pub fn anova_p(report: &ThresholdReport) -> LineChart {
    stat_chart("ANOVA p by period", "p", &report.statistics, "p", |x| x.anova_p)
}


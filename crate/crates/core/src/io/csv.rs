//! Trace and sweep tables.
//!
//! One row per state index with the columns
//! `condition,period_steps,period_months,step_index,t_months,<state>_count...,<focus>_ratio`.
//! Ratios carry 10 significant digits, counts and times their shortest
//! round-trip form. Constant schedules leave the period columns empty.

use std::path::Path;

use crate::ecm::StateDistribution;
use crate::pipeline::ControlRows;
use crate::schedule::{SimulationTrace, SweepResult};

/// Row arrangement for a whole sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepLayout {
    /// Every intervention trace in full, then the rest condition once.
    Traces,
    /// Regression records: intervention traces from index 2, then `H` rows
    /// of the rest condition for each period in `stats_periods`.
    Records(ControlRows),
}

/// Decimal rendering of `x` with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit: 0.99999999999 -> 1.000000000
    let r: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && r != 0.0 && (r.abs().log10().floor() as i64) > mag {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn header(dist: &StateDistribution) -> Vec<String> {
    let mut h: Vec<String> = ["condition", "period_steps", "period_months", "step_index", "t_months"]
        .map(String::from)
        .to_vec();
    h.extend(dist.space().labels().iter().map(|l| format!("{l}_count")));
    h.push(format!("{}_ratio", dist.space().focus_label()));
    h
}

struct Meta<'a> {
    condition: &'a str,
    period: Option<usize>,
    dt: f64,
}

fn record(m: &Meta<'_>, step_index: usize, d: &StateDistribution) -> Vec<String> {
    let mut r = vec![
        m.condition.to_string(),
        m.period.map(|p| p.to_string()).unwrap_or_default(),
        m.period.map(|p| format!("{}", p as f64 * m.dt)).unwrap_or_default(),
        step_index.to_string(),
        format!("{}", (step_index - 1) as f64 * m.dt),
    ];
    r.extend(d.counts().iter().map(|c| format!("{c}")));
    r.push(significant(d.focus_ratio(), 10));
    r
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> std::io::Result<Vec<u8>> {
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
}

pub fn trace_csv(trace: &SimulationTrace) -> std::io::Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(header(&trace.states[0]))?;
    let label = trace.condition();
    let m = Meta {
        condition: &label,
        period: trace.period(),
        dt: trace.dt_months(),
    };
    for (k, d) in trace.states.iter().enumerate() {
        w.write_record(record(&m, k + 1, d))?;
    }
    finish(w)
}

pub fn sweep_csv(sweep: &SweepResult, layout: SweepLayout, stats_periods: &[usize]) -> std::io::Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(header(&sweep.baseline.trace.states[0]))?;
    let dt = sweep.grid.dt_months;
    let first = match layout {
        SweepLayout::Traces => 0,
        SweepLayout::Records(_) => 1,
    };
    for e in &sweep.entries {
        let m = Meta {
            condition: &e.condition,
            period: Some(e.period),
            dt,
        };
        for (k, d) in e.trace.states.iter().enumerate().skip(first) {
            w.write_record(record(&m, k + 1, d))?;
        }
    }
    let base = &sweep.baseline.trace.states;
    match layout {
        SweepLayout::Traces => {
            let m = Meta {
                condition: &sweep.grid.rest,
                period: None,
                dt,
            };
            for (k, d) in base.iter().enumerate() {
                w.write_record(record(&m, k + 1, d))?;
            }
        }
        SweepLayout::Records(mode) => {
            for &i in stats_periods {
                let m = Meta {
                    condition: &sweep.grid.rest,
                    period: Some(i),
                    dt,
                };
                for j in 1..=base.len() {
                    let src = match mode {
                        ControlRows::CodeFaithful => i.min(base.len()),
                        ControlRows::Corrected => j,
                    };
                    w.write_record(record(&m, j, &base[src - 1]))?;
                }
            }
        }
    }
    finish(w)
}

pub fn write_trace_csv(trace: &SimulationTrace, path: &Path) -> std::io::Result<()> {
    super::write_atomic(path, &trace_csv(trace)?)
}

pub fn write_sweep_csv(
    sweep: &SweepResult,
    layout: SweepLayout,
    stats_periods: &[usize],
    path: &Path,
) -> std::io::Result<()> {
    super::write_atomic(path, &sweep_csv(sweep, layout, stats_periods)?)
}

/// The fixed columns of a row read back from a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub condition: String,
    pub period_steps: Option<usize>,
    pub period_months: Option<f64>,
    pub step_index: usize,
    pub t_months: f64,
    pub counts: Vec<f64>,
    pub ratio: f64,
}

fn non_empty(s: &str) -> Option<&str> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

pub fn read_trace_csv(bytes: &[u8]) -> Result<Vec<TraceRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(bytes);
    let width = r.headers()?.len();
    let parse = |s: &str| -> Result<f64, csv::Error> {
        s.parse::<f64>()
            .map_err(|e| csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(TraceRow {
            condition: rec[0].to_string(),
            period_steps: non_empty(&rec[1]).map(parse).transpose()?.map(|v| v as usize),
            period_months: non_empty(&rec[2]).map(parse).transpose()?,
            step_index: parse(&rec[3])? as usize,
            t_months: parse(&rec[4])?,
            counts: (5..width - 1).map(|k| parse(&rec[k])).collect::<Result<_, _>>()?,
            ratio: parse(&rec[width - 1])?,
        });
    }
    Ok(rows)
}

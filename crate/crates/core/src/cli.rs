//! The `ecmsim` command line.
//!
//! Exit codes: 0 on success, 1 for usage, input or validation errors, 2 when
//! a numerical method fails (no convergence, singular system, separation).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{decay_rate, equilibrium, periodic_peaks, EquilibriumResult, PeriodicPattern};
use crate::ecm::{validate_stochastic, ParameterMode, TransitionMatrix};
use crate::io::config::{months_to_steps, ConditionConfig, ProjectConfig};
use crate::io::csv::{sweep_csv, trace_csv, SweepLayout};
use crate::io::fixtures::{PaperFixtures, PAPER_JSON};
use crate::io::report::{Flags, Format, InputInfo, Report};
use crate::io::{figures, load_config, write_atomic, ConfigError};
use crate::pipeline::{
    extrema_regression, predictability, subject_logistic, thresholds, trajectory_dataset,
    trajectory_regression, ControlRows, PipelineError, PredictabilityRecipe, Project,
};
use crate::schedule::{simulate, summarize_with, Schedule};
use crate::stats::ThresholdKind;

#[derive(Debug, Parser)]
#[command(name = "ecmsim", version, about = "Forecast population outcomes of scheduled interventions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Rounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Traces,
    Records,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControlRowsArg {
    CodeFaithful,
    Corrected,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Use a bundled dataset.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub fixtures: Option<FixtureName>,
    /// Project configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format. Without it, results print as short text lines.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Leave the timestamp out of reports.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PeriodArgs {
    /// Steps between interventions.
    #[arg(long, conflicts_with = "period_months")]
    pub period: Option<usize>,
    /// Months between interventions; must be a whole number of steps.
    #[arg(long)]
    pub period_months: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate transition matrices from count tables.
    Fit {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate one schedule and emit the trace as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// A schedule named in the configuration.
        #[arg(long, conflicts_with = "condition")]
        schedule: Option<String>,
        /// Condition to apply, constantly or every `--period` steps.
        #[arg(long)]
        condition: Option<String>,
        #[command(flatten)]
        period: PeriodArgs,
    },
    /// Simulate the whole frequency grid and emit it as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "traces")]
        layout: LayoutArg,
        #[arg(long, value_enum)]
        control_rows: Option<ControlRowsArg>,
    },
    /// Stationary share and decay rate.
    Equilibrium {
        #[command(flatten)]
        common: Common,
        /// Defaults to every condition.
        #[arg(long)]
        condition: Option<String>,
    },
    /// Converged peaks under a periodic schedule.
    Peaks {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        condition: String,
        #[command(flatten)]
        period: PeriodArgs,
    },
    /// Test the long-run forecast against observed survey totals.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        no_yates: bool,
        /// Test unrounded expected counts.
        #[arg(long)]
        no_round: bool,
        /// Run every recipe variant.
        #[arg(long)]
        all_variants: bool,
    },
    /// Least frequent schedule meeting each effect criterion.
    Thresholds {
        #[command(flatten)]
        common: Common,
    },
    /// Every analysis in one report, with optional SVG figures.
    Report {
        #[command(flatten)]
        common: Common,
        /// Directory for SVG figures.
        #[arg(long)]
        figures: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

macro_rules! from_input {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}
from_input!(ConfigError, std::io::Error, serde_json::Error);

impl From<crate::analytic::AnalyticError> for CliError {
    fn from(e: crate::analytic::AnalyticError) -> Self {
        PipelineError::from(e).into()
    }
}

impl From<crate::schedule::ScheduleError> for CliError {
    fn from(e: crate::schedule::ScheduleError) -> Self {
        PipelineError::from(e).into()
    }
}

impl From<crate::stats::StatsError> for CliError {
    fn from(e: crate::stats::StatsError) -> Self {
        PipelineError::from(e).into()
    }
}

/// Loaded input plus everything needed to label output.
struct Ctx {
    config: ProjectConfig,
    project: Project,
    input: InputInfo,
    mode: ParameterMode,
    common: Common,
}

impl Ctx {
    fn load(common: &Common) -> Result<Self, CliError> {
        let mode = match common.mode {
            ModeArg::Exact => ParameterMode::Exact,
            ModeArg::Rounded => ParameterMode::Rounded,
        };
        let (config, input) = match (&common.fixtures, &common.config) {
            (Some(FixtureName::Paper), None) => (PaperFixtures::load().config, InputInfo::new("fixtures:paper", PAPER_JSON)),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let cfg = load_config(path)?;
                (cfg, InputInfo::new(path.display().to_string(), &text))
            }
            _ => return Err(CliError::Usage("give exactly one of --fixtures or --config".into())),
        };
        let project = config.resolve(mode)?;
        Ok(Self {
            config,
            project,
            input,
            mode,
            common: common.clone(),
        })
    }

    fn report(&self, command: &str) -> Report {
        Report::new(command, self.input.clone(), Flags::new(self.mode, &self.project.analysis), !self.common.no_timestamp)
    }

    fn matrix(&self, condition: &str) -> Result<&TransitionMatrix, CliError> {
        self.project
            .conditions
            .get(condition)
            .map_err(|_| CliError::Input(format!("unknown condition `{condition}`")))
    }

    fn period(&self, p: &PeriodArgs) -> Result<Option<usize>, CliError> {
        match (p.period, p.period_months) {
            (Some(0), _) => Err(CliError::Input("--period must be at least 1".into())),
            (Some(t), _) => Ok(Some(t)),
            (None, Some(m)) => months_to_steps(m, self.project.dt_months).map(Some).map_err(CliError::Input),
            (None, None) => Ok(None),
        }
    }

    /// Emit a finished report, or the short text lines when no format was asked for.
    fn emit(&self, out: &mut dyn Write, report: &Report, lines: &[String]) -> Result<(), CliError> {
        let fmt = self.common.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        });
        match (&self.common.out, fmt) {
            (Some(path), f) => {
                report.write(path, f.unwrap_or_default())?;
                for l in lines {
                    writeln!(out, "{l}")?;
                }
            }
            (None, Some(f)) => out.write_all(report.render(f).as_bytes())?,
            (None, None) => {
                for l in lines {
                    writeln!(out, "{l}")?;
                }
            }
        }
        Ok(())
    }

    fn emit_bytes(&self, out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
        match &self.common.out {
            Some(p) => write_atomic(p, bytes)?,
            None => out.write_all(bytes)?,
        }
        Ok(())
    }
}

/// Parse `argv` and run, writing to `out` and `err`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Usage(_) = e {
                let _ = writeln!(err, "run `ecmsim --help` for usage");
            }
            e.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Fit { common } => fit(&Ctx::load(&common)?, out),
        Command::Simulate {
            common,
            schedule,
            condition,
            period,
        } => {
            let ctx = Ctx::load(&common)?;
            run_simulate(&ctx, schedule, condition, &period, out)
        }
        Command::Sweep {
            common,
            layout,
            control_rows,
        } => {
            let ctx = Ctx::load(&common)?;
            let s = ctx.project.run_sweep()?;
            let rows = match control_rows {
                Some(ControlRowsArg::CodeFaithful) => ControlRows::CodeFaithful,
                Some(ControlRowsArg::Corrected) => ControlRows::Corrected,
                None => ctx.project.analysis.control_rows,
            };
            let layout = match layout {
                LayoutArg::Traces => SweepLayout::Traces,
                LayoutArg::Records => SweepLayout::Records(rows),
            };
            ctx.emit_bytes(out, &sweep_csv(&s, layout, &ctx.project.analysis.stats_periods)?)
        }
        Command::Equilibrium { common, condition } => {
            let ctx = Ctx::load(&common)?;
            let names: Vec<String> = match condition {
                Some(c) => vec![c],
                None => ctx.project.conditions.labels().map(String::from).collect(),
            };
            let mut rows = BTreeMap::new();
            let mut lines = Vec::new();
            for n in &names {
                let m = ctx.matrix(n)?;
                let e = equilibrium(m)?;
                let l = decay_rate(m)?;
                lines.push(format!(
                    "{n}: equilibrium {:?} decay {:?} method {} residual {:?}",
                    e.engaged_ratio,
                    l,
                    method_name(&e),
                    e.residual
                ));
                rows.insert(n.clone(), EquilibriumRow { equilibrium: e, decay: l });
            }
            let mut r = ctx.report("equilibrium");
            r.add("equilibrium", &rows)?;
            ctx.emit(out, &r, &lines)
        }
        Command::Peaks {
            common,
            condition,
            period,
        } => {
            let ctx = Ctx::load(&common)?;
            let t = ctx
                .period(&period)?
                .ok_or_else(|| CliError::Usage("peaks needs --period or --period-months".into()))?;
            let p = periodic_peaks(ctx.matrix(&ctx.project.rest)?, ctx.matrix(&condition)?, t)?;
            let mut r = ctx.report("peaks");
            r.add("peaks", &PeakRow { condition: &condition, rest: &ctx.project.rest, pattern: p })?;
            let line = format!("a={:?} b={:?}", p.upper, p.lower);
            ctx.emit(out, &r, &[line])
        }
        Command::Validate {
            common,
            no_yates,
            no_round,
            all_variants,
        } => {
            let ctx = Ctx::load(&common)?;
            let base = ctx.project.analysis.recipe;
            let recipes: Vec<PredictabilityRecipe> = if all_variants {
                PredictabilityRecipe::variants().to_vec()
            } else {
                vec![PredictabilityRecipe {
                    round_counts: base.round_counts && !no_round,
                    yates: base.yates && !no_yates,
                }]
            };
            let results = recipes
                .iter()
                .map(|&r| predictability(&ctx.project, r))
                .collect::<Result<Vec<_>, _>>()?;
            let lines = results.iter().map(validate_line).collect::<Vec<_>>();
            let mut r = ctx.report("validate");
            r.add("predictability", &results)?;
            ctx.emit(out, &r, &lines)
        }
        Command::Thresholds { common } => {
            let ctx = Ctx::load(&common)?;
            let s = ctx.project.run_sweep()?;
            let t = thresholds(&ctx.project, &s)?;
            let lines = threshold_lines(&t);
            let mut r = ctx.report("thresholds");
            r.add("thresholds", &t)?;
            ctx.emit(out, &r, &lines)
        }
        Command::Report { common, figures } => {
            let ctx = Ctx::load(&common)?;
            full_report(&ctx, figures.as_deref(), out)
        }
    }
}

#[derive(Serialize)]
struct EquilibriumRow {
    #[serde(flatten)]
    equilibrium: EquilibriumResult,
    decay: f64,
}

#[derive(Serialize)]
struct PeakRow<'a> {
    condition: &'a str,
    rest: &'a str,
    #[serde(flatten)]
    pattern: PeriodicPattern,
}

fn method_name(e: &EquilibriumResult) -> String {
    serde_json::to_value(e.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn validate_line(r: &crate::pipeline::PredictabilityResult) -> String {
    let v = match r.test.effect {
        Some(crate::stats::EffectSize::CramersV(v)) => v,
        _ => f64::NAN,
    };
    format!(
        "chi2={:?} df=1 p={:?} V={:?} (simulated {:?} / {:?}, round_counts={}, yates={})",
        r.test.statistic, r.test.p, v, r.simulated[0], r.simulated[1], r.recipe.round_counts, r.recipe.yates
    )
}

fn threshold_lines(t: &crate::pipeline::ThresholdReport) -> Vec<String> {
    t.results
        .iter()
        .map(|r| {
            let name = match r.criterion.kind {
                ThresholdKind::Eta2AtLeast(m) => format!("eta2 ({}) >= {}", serde_json::to_value(m).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(), r.criterion.threshold),
                ThresholdKind::CorrectedPBelow => format!("corrected p < {}", r.criterion.threshold),
                ThresholdKind::CohensDAtLeast => format!("cohen's d >= {}", r.criterion.threshold),
            };
            let found = match (r.period, r.months, r.value_at_period) {
                (Some(p), Some(m), Some(v)) => format!("period {p} ({m} months), value {v:?}"),
                _ => "none".into(),
            };
            let next = r
                .first_failure
                .map(|(p, v)| format!("; fails at period {p} with {v:?}"))
                .unwrap_or_default();
            let warn = if r.non_monotonic.is_empty() {
                String::new()
            } else {
                format!("; passes again at {:?}", r.non_monotonic)
            };
            format!("{name}: {found}{next}{warn}")
        })
        .collect()
}

fn fit(ctx: &Ctx, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = ctx.config.clone();
    let mut lines = Vec::new();
    let mut fitted = BTreeMap::new();
    for m in ctx.project.conditions.iter() {
        let report = validate_stochastic(m);
        lines.push(format!(
            "{}: {:?} rows_are=to {}",
            m.condition(),
            m.rows_to(),
            if report.is_pass() { "valid".to_string() } else { report.to_string() }
        ));
        cfg.conditions.insert(
            m.condition().to_string(),
            ConditionConfig {
                counts: None,
                matrix: Some(m.rows_to()),
                rows_are: crate::ecm::Orientation::RowsAreTo,
            },
        );
        fitted.insert(m.condition().to_string(), m.clone());
    }
    match &ctx.common.out {
        // the fitted project, loadable with --config
        Some(path) => {
            let mut s = serde_json::to_string_pretty(&cfg)?;
            s.push('\n');
            write_atomic(path, s.as_bytes())?;
            for l in &lines {
                writeln!(out, "{l}")?;
            }
            Ok(())
        }
        None => {
            let mut r = ctx.report("fit");
            r.add("matrices", &fitted)?;
            ctx.emit(out, &r, &lines)
        }
    }
}

fn run_simulate(
    ctx: &Ctx,
    schedule: Option<String>,
    condition: Option<String>,
    period: &PeriodArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let p = &ctx.project;
    let sched: Schedule = match (schedule, condition) {
        (Some(name), _) => p
            .schedules
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.schedule.clone())
            .ok_or_else(|| CliError::Input(format!("no schedule named `{name}`")))?,
        (None, Some(c)) => {
            ctx.matrix(&c)?;
            match ctx.period(period)? {
                Some(t) => p.periodic(&c, t)?,
                None => p.constant(&c)?,
            }
        }
        (None, None) => match p.schedules.first() {
            Some(s) => s.schedule.clone(),
            None => return Err(CliError::Usage("simulate needs --schedule or --condition".into())),
        },
    };
    let trace = simulate(&p.initial, &sched, &p.conditions)?;
    ctx.emit_bytes(out, &trace_csv(&trace)?)?;
    if ctx.common.out.is_some() {
        let s = summarize_with(&trace, true);
        let last = trace.last();
        writeln!(
            out,
            "{}: final {:?} {} (share {:?}), mean {:?} sd {:?}",
            trace.condition(),
            last.focus_count(),
            p.space.focus_label(),
            last.focus_ratio(),
            s.mean_ratio,
            s.std_ratio
        )?;
    }
    Ok(())
}

fn full_report(ctx: &Ctx, fig_dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let p = &ctx.project;
    let mut r = ctx.report("report");
    let mut lines = Vec::new();

    let mut eq = BTreeMap::new();
    for m in p.conditions.iter() {
        let e = equilibrium(m)?;
        lines.push(format!("equilibrium {}: {:?}", m.condition(), e.engaged_ratio));
        eq.insert(m.condition().to_string(), EquilibriumRow { equilibrium: e, decay: decay_rate(m)? });
    }
    r.add("matrices", &p.conditions.iter().collect::<Vec<_>>())?;
    r.add("equilibrium", &eq)?;

    if p.space.len() == 2 {
        let rest = ctx.matrix(&p.rest)?;
        let mut peaks = Vec::new();
        for m in p.conditions.iter().filter(|m| m.condition() != p.rest) {
            for t in [2, 4] {
                let pat = periodic_peaks(rest, m, t)?;
                lines.push(format!("peaks {} T={t}: a={:?} b={:?}", m.condition(), pat.upper, pat.lower));
                peaks.push(PeakRow {
                    condition: m.condition(),
                    rest: &p.rest,
                    pattern: pat,
                });
            }
        }
        r.add("peaks", &peaks)?;
    }

    if p.survey.is_some() && p.space.len() == 2 {
        let v = PredictabilityRecipe::variants()
            .iter()
            .map(|&x| predictability(p, x))
            .collect::<Result<Vec<_>, _>>()?;
        lines.push(format!("validate: {}", validate_line(&v[0])));
        r.add("predictability", &v)?;
    }

    let s = p.run_sweep()?;
    let t = thresholds(p, &s)?;
    lines.extend(threshold_lines(&t));
    r.add("thresholds", &t)?;

    let mut traj = BTreeMap::new();
    for mode in [ControlRows::CodeFaithful, ControlRows::Corrected] {
        let rows = trajectory_dataset(&s, &p.analysis.stats_periods, mode);
        let fit = trajectory_regression(&s, &rows)?;
        let key = serde_json::to_value(mode)?.as_str().unwrap_or_default().to_string();
        if let Some(f) = &fit.f {
            lines.push(format!("trajectory regression ({key}, n={}): F({}, {}) = {:?}", rows.len(), f.df1, f.df2, f.statistic));
        }
        traj.insert(key, fit);
    }
    r.add("trajectory_regression", &traj)?;
    r.add("extrema_regression", &extrema_regression(&s)?)?;

    if p.counts.contains_key(&p.rest) && p.counts.len() >= 2 {
        let l = subject_logistic(&p.counts, &p.rest)?;
        lines.push(format!("subject logistic: n={} pseudo R2 {:?}", l.fit.n, l.fit.pseudo_r2));
        r.add("subject_logistic", &l)?;
    }

    if let Some(dir) = fig_dir {
        std::fs::create_dir_all(dir)?;
        let period = 2.min(*s.grid.periods.last().unwrap_or(&1));
        let charts = [
            ("trajectories.svg", figures::trajectories(&s, period)),
            ("mean_share.svg", figures::mean_share(&s)),
            ("anova_p.svg", figures::anova_p(&t)),
            ("effect_size.svg", figures::effect_size(&t)),
            ("corrected_p.svg", figures::corrected_p(&t, p.analysis.p_threshold)),
            ("cohens_d.svg", figures::cohens_d(&t, p.analysis.d_threshold)),
            ("extrema.svg", figures::extrema(&s)),
        ];
        for (name, c) in charts {
            c.write(&dir.join(name))?;
        }
        lines.push(format!("figures written to {}", dir.display()));
    }
    ctx.emit(out, &r, &lines)
}

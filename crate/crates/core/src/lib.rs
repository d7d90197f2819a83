//! Long-run forecasts of population outcomes under scheduled interventions.
//!
//! A population is split across named states. Each condition (an
//! intervention, or the absence of one) is an evolutionary causal matrix: a
//! column-stochastic matrix `m[to][from]` estimated from observed transition
//! counts. A schedule says which condition drives each step, so a run is a
//! time-dependent Markov chain over state counts.
//!
//! - [`ecm`]: state spaces, count tables, matrices and distributions.
//! - [`schedule`]: constant, periodic and explicit schedules, simulation, and
//!   the frequency sweep.
//! - [`analytic`]: equilibria, decay rates and closed-form periodic peaks.
//! - [`stats`]: survival functions, χ², ANOVA, t tests, OLS, logistic
//!   regression and the threshold scan over a sweep.
//! - [`pipeline`]: a resolved [`pipeline::Project`] and the analyses built on it.
//! - [`io`]: JSON configuration, bundled fixtures, CSV, reports and SVG charts.
//! - [`cli`]: the `ecmsim` command line.
//!
//! ```
//! use ecmsim::ecm::ParameterMode;
//! use ecmsim::io::PaperFixtures;
//! use ecmsim::schedule::simulate;
//!
//! let p = PaperFixtures::load().project(ParameterMode::Exact);
//! let trace = simulate(&p.initial, &p.constant("control").unwrap(), &p.conditions).unwrap();
//! assert!((trace.last().focus_ratio() - 0.5078).abs() < 1e-4);
//! ```

pub mod ecm;
pub mod schedule;
pub mod analytic;
pub mod stats;
pub mod pipeline;
pub mod io;
pub mod cli;

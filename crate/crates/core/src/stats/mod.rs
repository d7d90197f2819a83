//! Inferential statistics: survival functions, contingency and ANOVA tests,
//! pooled t tests, regression, and the intervention-frequency threshold scan.

pub mod hypothesis;
pub mod regression;
pub mod special;
pub mod threshold;

use thiserror::Error;

pub use hypothesis::{
    anova_oneway, chi2_contingency, cohens_d_pooled, family_correct, ttest_pooled, AnovaTable,
    ContingencyTable2x2, Correction, EffectSize, TestResult,
};
pub use regression::{logistic_fit, ols_fit, Coefficient, Design, LogisticFit, OlsFit};
pub use special::{dist_sf, Distribution};
pub use threshold::{
    period_statistics, threshold_finder, Comparison, EtaMeasure, PeriodStatistics,
    ThresholdCriterion, ThresholdKind, ThresholdResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid degrees of freedom: {0}")]
    InvalidDf(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("separation: {0}")]
    Separation(String),
    #[error("threshold scan over an empty sweep")]
    EmptySweep,
    #[error("sweep has no condition `{0}`")]
    UnknownCondition(String),
    #[error("threshold {value} is outside the valid range for {kind}")]
    ThresholdRange { kind: String, value: f64 },
}

impl StatsError {
    /// True for failures of a numerical method rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            StatsError::NoConvergence(_) | StatsError::RankDeficient | StatsError::Separation(_)
        )
    }
}

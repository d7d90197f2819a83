//! Contingency, ANOVA and two-sample tests with their effect sizes.

use serde::Serialize;

use super::special::Distribution;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", content = "value", rename_all = "snake_case")]
pub enum EffectSize {
    CramersV(f64),
    EtaSquared(f64),
    CohensD(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: Vec<f64>,
    pub p: f64,
    pub distribution: Distribution,
    pub effect: Option<EffectSize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyTable2x2 {
    pub observed: [[f64; 2]; 2],
    pub row_labels: [String; 2],
    pub col_labels: [String; 2],
}

impl ContingencyTable2x2 {
    pub fn new(observed: [[f64; 2]; 2]) -> Result<Self, StatsError> {
        Self::labeled(observed, ["row 1", "row 2"], ["col 1", "col 2"])
    }

    pub fn labeled(
        observed: [[f64; 2]; 2],
        rows: [&str; 2],
        cols: [&str; 2],
    ) -> Result<Self, StatsError> {
        if observed.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(StatsError::Degenerate("table cells must be finite and nonnegative".into()));
        }
        let t = Self {
            observed,
            row_labels: rows.map(String::from),
            col_labels: cols.map(String::from),
        };
        if t.row_totals().contains(&0.0) || t.col_totals().contains(&0.0) {
            return Err(StatsError::Degenerate("table has an all-zero row or column".into()));
        }
        Ok(t)
    }

    pub fn row_totals(&self) -> [f64; 2] {
        [self.observed[0][0] + self.observed[0][1], self.observed[1][0] + self.observed[1][1]]
    }

    pub fn col_totals(&self) -> [f64; 2] {
        [self.observed[0][0] + self.observed[1][0], self.observed[0][1] + self.observed[1][1]]
    }

    pub fn total(&self) -> f64 {
        self.row_totals().iter().sum()
    }

    pub fn expected(&self) -> [[f64; 2]; 2] {
        let r = self.row_totals();
        let c = self.col_totals();
        let n = self.total();
        [[r[0] * c[0] / n, r[0] * c[1] / n], [r[1] * c[0] / n, r[1] * c[1] / n]]
    }
}

/// Pearson χ² test of independence with optional Yates continuity correction.
///
/// The correction subtracts 0.5 from every `|O − E|`, floored at zero so a
/// table that matches its expectation scores exactly 0.
pub fn chi2_contingency(table: &ContingencyTable2x2, yates: bool) -> Result<TestResult, StatsError> {
    let e = table.expected();
    let c = if yates { 0.5 } else { 0.0 };
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let d = ((table.observed[i][j] - e[i][j]).abs() - c).max(0.0);
            chi2 += d * d / e[i][j];
        }
    }
    let dist = Distribution::ChiSquared { df: 1.0 };
    Ok(TestResult {
        statistic: chi2,
        df: vec![1.0],
        p: dist.sf(chi2)?,
        distribution: dist,
        effect: Some(EffectSize::CramersV((chi2 / table.total()).sqrt())),
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn ss(x: &[f64], about: f64) -> f64 {
    x.iter().map(|v| (v - about).powi(2)).sum()
}

/// Sample variance, `n − 1` denominator.
pub fn variance(x: &[f64]) -> f64 {
    ss(x, mean(x)) / (x.len() as f64 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub ss_between: f64,
    pub ss_within: f64,
    pub ss_total: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub f: f64,
    pub p: f64,
    pub eta_squared: f64,
    #[serde(skip)]
    group_means: Vec<f64>,
    #[serde(skip)]
    group_sizes: Vec<usize>,
}

impl AnovaTable {
    pub fn to_test_result(&self) -> TestResult {
        TestResult {
            statistic: self.f,
            df: vec![self.df_between, self.df_within],
            p: self.p,
            distribution: Distribution::FisherF {
                df1: self.df_between,
                df2: self.df_within,
            },
            effect: Some(EffectSize::EtaSquared(self.eta_squared)),
        }
    }

    /// Sum of squares of the contrast `Σ w_g · mean_g` (weights sum to zero).
    pub fn contrast_ss(&self, weights: &[f64]) -> Result<f64, StatsError> {
        if weights.len() != self.group_means.len() {
            return Err(StatsError::Shape(format!(
                "{} contrast weights for {} groups",
                weights.len(),
                self.group_means.len()
            )));
        }
        let est: f64 = weights.iter().zip(&self.group_means).map(|(w, m)| w * m).sum();
        let denom: f64 = weights
            .iter()
            .zip(&self.group_sizes)
            .map(|(w, &n)| w * w / n as f64)
            .sum();
        if denom == 0.0 {
            return Err(StatsError::Degenerate("all contrast weights are zero".into()));
        }
        Ok(est * est / denom)
    }

    /// Partial η² of a single-df contrast: `SS_c / (SS_c + SS_within)`.
    pub fn contrast_partial_eta_squared(&self, weights: &[f64]) -> Result<f64, StatsError> {
        let c = self.contrast_ss(weights)?;
        Ok(c / (c + self.ss_within))
    }
}

/// One-way ANOVA. `η² = SS_between / SS_total`.
pub fn anova_oneway(groups: &[&[f64]]) -> Result<AnovaTable, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::Shape("ANOVA needs at least 2 groups".into()));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(StatsError::Shape("every ANOVA group needs at least 2 points".into()));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let ss_between: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let ss_within: f64 = groups.iter().zip(&means).map(|(g, m)| ss(g, *m)).sum();
    let ss_total: f64 = groups.iter().map(|g| ss(g, grand)).sum();
    if ss_total == 0.0 {
        return Err(StatsError::Degenerate("zero total variance, F is undefined".into()));
    }
    let k = groups.len() as f64;
    let df_between = k - 1.0;
    let df_within = n as f64 - k;
    let (f, p) = if ss_within == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ss_between / df_between) / (ss_within / df_within);
        (f, Distribution::FisherF { df1: df_between, df2: df_within }.sf(f)?)
    };
    Ok(AnovaTable {
        ss_between,
        ss_within,
        ss_total,
        df_between,
        df_within,
        f,
        p,
        eta_squared: ss_between / ss_total,
        group_means: means,
        group_sizes: groups.iter().map(|g| g.len()).collect(),
    })
}

/// Equal-variance two-sample t test, two-sided.
pub fn ttest_pooled(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::Shape("t test needs at least 2 points per sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = (ss(a, mean(a)) + ss(b, mean(b))) / df;
    if pooled == 0.0 {
        return Err(StatsError::Degenerate("zero pooled variance".into()));
    }
    let t = (mean(a) - mean(b)) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let dist = Distribution::StudentT { df };
    Ok(TestResult {
        statistic: t,
        df: vec![df],
        p: dist.two_sided(t)?,
        distribution: dist,
        effect: None,
    })
}

/// Standardized mean difference with the n-weighted pooled SD
/// `sqrt((s_a²·n_a + s_b²·n_b) / (n_a + n_b))`, `s` the n − 1 sample SD.
pub fn cohens_d_pooled(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::Shape("Cohen's d needs at least 2 points per sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let sd = ((variance(a) * na + variance(b) * nb) / (na + nb)).sqrt();
    if sd == 0.0 {
        return Err(StatsError::Degenerate("zero pooled standard deviation".into()));
    }
    Ok((mean(a) - mean(b)) / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    /// `1 − (1 − p)^k`
    #[default]
    Sidak,
    /// `min(1, k · p)`
    Bonferroni,
}

/// Family-wise adjusted p for `k` comparisons.
pub fn family_correct(p: f64, k: u32, correction: Correction) -> f64 {
    let k = k.max(1);
    match correction {
        Correction::Sidak => 1.0 - (1.0 - p).powi(k as i32),
        Correction::Bonferroni => (k as f64 * p).min(1.0),
    }
}

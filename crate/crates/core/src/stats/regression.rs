//! Ordinary least squares and logistic regression.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::special::Distribution;
use super::StatsError;

/// Column-oriented design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    n: usize,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    intercept: bool,
}

impl Design {
    /// `n` rows and a leading intercept column named `(intercept)`.
    pub fn with_intercept(n: usize) -> Self {
        Self {
            n,
            names: vec!["(intercept)".to_string()],
            columns: vec![vec![1.0; n]],
            intercept: true,
        }
    }

    pub fn without_intercept(n: usize) -> Self {
        Self {
            n,
            names: Vec::new(),
            columns: Vec::new(),
            intercept: false,
        }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self, StatsError> {
        if values.len() != self.n {
            return Err(StatsError::Shape(format!(
                "column has {} rows, design has {}",
                values.len(),
                self.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Domain("design values must be finite".into()));
        }
        self.names.push(name.into());
        self.columns.push(values);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn values(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// `Xᵀ W X` with optional row weights.
    fn gram(&self, w: Option<&[f64]>) -> DMatrix<f64> {
        let k = self.width();
        let mut g = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let s: f64 = match w {
                    None => dot(&self.columns[a], &self.columns[b]),
                    Some(w) => self.columns[a]
                        .iter()
                        .zip(&self.columns[b])
                        .zip(w)
                        .map(|((x, y), w)| x * y * w)
                        .sum(),
                };
                g[(a, b)] = s;
                g[(b, a)] = s;
            }
        }
        g
    }

    /// `Xᵀ v`
    fn xt(&self, v: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.width(), self.columns.iter().map(|c| dot(c, v)))
    }

    /// `X β`
    fn predict(&self, beta: &DVector<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (c, b) in self.columns.iter().zip(beta.iter()) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += x * b;
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse of a symmetric positive semi-definite Gram matrix via
/// column-equilibrated, fully pivoted LU. Fails when the smallest eigenvalue
/// of the equilibrated matrix is below `1e-12` of the largest.
fn gram_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>, StatsError> {
    let k = g.nrows();
    let scale: Vec<f64> = (0..k)
        .map(|i| {
            let d = g[(i, i)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    if scale.contains(&0.0) {
        return Err(StatsError::RankDeficient);
    }
    let a = DMatrix::from_fn(k, k, |i, j| g[(i, j)] * scale[i] * scale[j]);
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-12 * max) {
        return Err(StatsError::RankDeficient);
    }
    let inv = a.full_piv_lu().try_inverse().ok_or(StatsError::RankDeficient)?;
    Ok(DMatrix::from_fn(k, k, |i, j| inv[(i, j)] * scale[i] * scale[j]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// t for OLS, Wald z for logistic.
    pub statistic: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Coefficient on z-scored predictor and response (OLS only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardized: Option<f64>,
}

fn coefficient(
    name: &str,
    estimate: f64,
    se: f64,
    dist: Distribution,
    crit: f64,
) -> Result<Coefficient, StatsError> {
    let (statistic, p) = if se > 0.0 {
        let s = estimate / se;
        (s, dist.two_sided(s)?)
    } else if estimate == 0.0 {
        (0.0, 1.0)
    } else {
        (f64::INFINITY.copysign(estimate), 0.0)
    };
    Ok(Coefficient {
        name: name.to_string(),
        estimate,
        std_error: se,
        statistic,
        p,
        ci_low: estimate - crit * se,
        ci_high: estimate + crit * se,
        standardized: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FTest {
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub n: usize,
    pub coefficients: Vec<Coefficient>,
    pub df_resid: f64,
    pub residual_ss: f64,
    pub sigma: f64,
    /// `None` when the response has no variance.
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    /// `None` for an intercept-only model.
    pub f: Option<FTest>,
}

impl OlsFit {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Least squares via the normal equations, solved with full pivoting and one
/// round of iterative refinement. Standard errors come from `σ̂² (XᵀX)⁻¹` and
/// p-values from `t(n − k)`.
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<OlsFit, StatsError> {
    let n = design.rows();
    let k = design.width();
    if y.len() != n {
        return Err(StatsError::Shape(format!("response has {} rows, design has {n}", y.len())));
    }
    if k == 0 || n <= k {
        return Err(StatsError::Shape(format!("{n} rows cannot fit {k} coefficients")));
    }
    let g = design.gram(None);
    let ginv = gram_inverse(&g)?;
    let xty = design.xt(y);
    let mut beta = &ginv * &xty;
    let resid_grad = &xty - &g * &beta;
    beta += &ginv * resid_grad;

    let fitted = design.predict(&beta);
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let df_resid = (n - k) as f64;
    let sigma2 = rss / df_resid;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = if design.has_intercept() {
        y.iter().map(|v| (v - ybar).powi(2)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };

    let dist = Distribution::StudentT { df: df_resid };
    let crit = dist.isf(0.025)?;
    let sd_y = (y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let mut coefficients = Vec::with_capacity(k);
    for j in 0..k {
        let se = (sigma2 * ginv[(j, j)]).max(0.0).sqrt();
        let mut c = coefficient(&design.names()[j], beta[j], se, dist, crit)?;
        if !(design.has_intercept() && j == 0) && sd_y > 0.0 {
            let x = design.values(j);
            let xbar = x.iter().sum::<f64>() / n as f64;
            let sd_x = (x.iter().map(|v| (v - xbar).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            c.standardized = Some(beta[j] * sd_x / sd_y);
        }
        coefficients.push(c);
    }

    let (r_squared, adj_r_squared) = if tss > 0.0 {
        let r2 = 1.0 - rss / tss;
        let dfm = if design.has_intercept() { n as f64 - 1.0 } else { n as f64 };
        (Some(r2), Some(1.0 - (1.0 - r2) * dfm / df_resid))
    } else {
        (None, None)
    };
    let model_df = if design.has_intercept() { k - 1 } else { k } as f64;
    let f = if model_df > 0.0 && tss > 0.0 {
        let ess = tss - rss;
        let stat = if rss > 0.0 {
            (ess / model_df) / sigma2
        } else {
            f64::INFINITY
        };
        let p = if stat.is_finite() {
            Distribution::FisherF { df1: model_df, df2: df_resid }.sf(stat.max(0.0))?
        } else {
            0.0
        };
        Some(FTest {
            statistic: stat,
            df1: model_df,
            df2: df_resid,
            p,
        })
    } else {
        None
    };

    Ok(OlsFit {
        n,
        coefficients,
        df_resid,
        residual_ss: rss,
        sigma: sigma2.sqrt(),
        r_squared,
        adj_r_squared,
        f,
    })
}

/// Score-norm target for the Newton iterations.
pub const LOGISTIC_GRADIENT_TOLERANCE: f64 = 1e-10;
pub const LOGISTIC_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    pub n: usize,
    pub coefficients: Vec<Coefficient>,
    pub covariance: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    /// Likelihood-ratio test against the intercept-only model.
    pub model_chi2: f64,
    pub model_df: f64,
    pub model_p: f64,
    /// McFadden: `1 − LL / LL₀`.
    pub pseudo_r2: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl LogisticFit {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Wald test of `β_a − β_b`, or of `β_a` alone when `b` is `None`.
    pub fn contrast(&self, a: &str, b: Option<&str>) -> Result<Coefficient, StatsError> {
        let idx = |name: &str| {
            self.coefficients
                .iter()
                .position(|c| c.name == name)
                .ok_or_else(|| StatsError::Shape(format!("no coefficient `{name}`")))
        };
        let i = idx(a)?;
        let (est, var, name) = match b {
            None => (self.coefficients[i].estimate, self.covariance[i][i], a.to_string()),
            Some(b) => {
                let j = idx(b)?;
                (
                    self.coefficients[i].estimate - self.coefficients[j].estimate,
                    self.covariance[i][i] + self.covariance[j][j] - 2.0 * self.covariance[i][j],
                    format!("{a} - {b}"),
                )
            }
        };
        let crit = Distribution::Normal.isf(0.025)?;
        coefficient(&name, est, var.max(0.0).sqrt(), Distribution::Normal, crit)
    }
}

fn log_likelihood(y: &[f64], eta: &[f64]) -> f64 {
    // log σ(η) = −log(1 + e^{−η}), written to stay finite for large |η|
    y.iter()
        .zip(eta)
        .map(|(&yi, &e)| {
            let log1pexp = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            yi * e - log1pexp
        })
        .sum()
}

fn sigmoid(e: f64) -> f64 {
    if e >= 0.0 {
        1.0 / (1.0 + (-e).exp())
    } else {
        let z = e.exp();
        z / (1.0 + z)
    }
}

/// Binary logistic regression by Newton–Raphson (IRLS) with step halving.
pub fn logistic_fit(design: &Design, y: &[f64]) -> Result<LogisticFit, StatsError> {
    let n = design.rows();
    let k = design.width();
    if y.len() != n {
        return Err(StatsError::Shape(format!("response has {} rows, design has {n}", y.len())));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(StatsError::Domain("logistic response must be 0 or 1".into()));
    }
    let ones: f64 = y.iter().sum();
    if ones == 0.0 || ones == n as f64 {
        return Err(StatsError::Separation("response has a single class".into()));
    }

    let mut beta = DVector::zeros(k);
    let mut eta = design.predict(&beta);
    let mut ll = log_likelihood(y, &eta);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut info_inv = None;
    for it in 0..=LOGISTIC_MAX_ITER {
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let resid: Vec<f64> = y.iter().zip(&mu).map(|(a, b)| a - b).collect();
        let grad = design.xt(&resid);
        grad_norm = grad.norm();
        let w: Vec<f64> = mu.iter().map(|m| m * (1.0 - m)).collect();
        let info = design.gram(Some(&w));
        let inv = gram_inverse(&info).map_err(|_| {
            StatsError::Separation("information matrix became singular; data may be separated".into())
        })?;
        if grad_norm <= LOGISTIC_GRADIENT_TOLERANCE {
            info_inv = Some(inv);
            iterations = it;
            break;
        }
        if it == LOGISTIC_MAX_ITER {
            break;
        }
        let delta = &inv * &grad;
        let mut step = 1.0;
        loop {
            let cand = &beta + &delta * step;
            let cand_eta = design.predict(&cand);
            let cand_ll = log_likelihood(y, &cand_eta);
            if cand_ll >= ll - 1e-12 * ll.abs() || step < 1e-10 {
                beta = cand;
                eta = cand_eta;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
        }
        if beta.iter().any(|b| b.abs() > 50.0) {
            return Err(StatsError::Separation("coefficients diverge; data look separated".into()));
        }
    }
    let inv = info_inv.ok_or(StatsError::NoConvergence("logistic regression"))?;
    // the gradient also vanishes along a diverging ray
    if y.iter().zip(eta.iter()).all(|(&a, &e)| (a - sigmoid(e)).abs() < 1e-6) {
        return Err(StatsError::Separation("every observation is fitted exactly".into()));
    }

    let pbar = ones / n as f64;
    let ll0 = if design.has_intercept() {
        n as f64 * (pbar * pbar.ln() + (1.0 - pbar) * (1.0 - pbar).ln())
    } else {
        // all-zero linear predictor
        -(n as f64) * std::f64::consts::LN_2
    };
    let model_df = if design.has_intercept() { k - 1 } else { k } as f64;
    let model_chi2 = 2.0 * (ll - ll0);
    let model_p = if model_df > 0.0 {
        Distribution::ChiSquared { df: model_df }.sf(model_chi2.max(0.0))?
    } else {
        1.0
    };
    let crit = Distribution::Normal.isf(0.025)?;
    let coefficients = (0..k)
        .map(|j| {
            coefficient(
                &design.names()[j],
                beta[j],
                inv[(j, j)].max(0.0).sqrt(),
                Distribution::Normal,
                crit,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LogisticFit {
        n,
        coefficients,
        covariance: (0..k).map(|i| (0..k).map(|j| inv[(i, j)]).collect()).collect(),
        log_likelihood: ll,
        null_log_likelihood: ll0,
        model_chi2,
        model_df,
        model_p,
        pseudo_r2: 1.0 - ll / ll0,
        iterations,
        gradient_norm: grad_norm,
    })
}

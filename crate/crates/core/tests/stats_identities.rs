use ecmsim::stats::{
    anova_oneway, chi2_contingency, cohens_d_pooled, family_correct, logistic_fit, ols_fit, ttest_pooled, ContingencyTable2x2,
    Correction, Design, StatsError,
};
use proptest::prelude::*;

fn spread(x: &[f64]) -> bool {
    x.iter().any(|v| (v - x[0]).abs() > 1e-6)
}

fn groups() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-5.0..5.0f64, 2..30), prop::collection::vec(-3.0..7.0f64, 2..30))
        .prop_filter("samples need spread", |(a, b)| spread(a) || spread(b))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

proptest! {
    #[test]
    fn two_group_f_is_t_squared((a, b) in groups()) {
        let f = anova_oneway(&[&a, &b]).unwrap();
        let t = ttest_pooled(&a, &b).unwrap();
        prop_assert!(rel(f.f, t.statistic * t.statistic) <= 1e-10);
        prop_assert!((f.p - t.p).abs() <= 1e-10);
    }

    #[test]
    fn eta_squared_is_r_squared_and_point_biserial((a, b) in groups()) {
        let aov = anova_oneway(&[&a, &b]).unwrap();
        let y: Vec<f64> = a.iter().chain(&b).copied().collect();
        let g: Vec<f64> = a.iter().map(|_| 1.0).chain(b.iter().map(|_| 0.0)).collect();
        let fit = ols_fit(&Design::with_intercept(y.len()).column("g", g.clone()).unwrap(), &y).unwrap();
        prop_assert!((aov.eta_squared - fit.r_squared.unwrap()).abs() <= 1e-10);

        let (my, mg) = (mean(&y), mean(&g));
        let sxy: f64 = y.iter().zip(&g).map(|(y, g)| (y - my) * (g - mg)).sum();
        let sxx: f64 = g.iter().map(|g| (g - mg).powi(2)).sum();
        let syy: f64 = y.iter().map(|y| (y - my).powi(2)).sum();
        let r = sxy / (sxx * syy).sqrt();
        prop_assert!((aov.eta_squared - r * r).abs() <= 1e-10);
        // with two groups the single contrast carries all the between-group variance
        let cp = aov.contrast_partial_eta_squared(&[1.0, -1.0]).unwrap();
        prop_assert!((cp - aov.eta_squared).abs() <= 1e-10);
        prop_assert!((aov.ss_between + aov.ss_within - aov.ss_total).abs() <= 1e-9 * aov.ss_total.max(1.0));
    }

    #[test]
    fn cohens_d_uses_n_weighted_sd((a, b) in groups()) {
        // s² with n − 1, weighted by n: differs from the df-pooled SD behind t
        let var = |x: &[f64]| x.iter().map(|v| (v - mean(x)).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let sd = ((var(&a) * na + var(&b) * nb) / (na + nb)).sqrt();
        let d = cohens_d_pooled(&a, &b).unwrap();
        prop_assert!(rel(d, (mean(&a) - mean(&b)) / sd) <= 1e-10);
        let t = ttest_pooled(&a, &b).unwrap().statistic;
        prop_assert!(d.signum() == t.signum() || d == 0.0);
    }

    #[test]
    fn chi2_shortcut_formula(a in 1u32..500, b in 1u32..500, c in 1u32..500, d in 1u32..500) {
        let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
        let t = ContingencyTable2x2::new([[a, b], [c, d]]).unwrap();
        let n = a + b + c + d;
        let want = n * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        prop_assert!(rel(chi2_contingency(&t, false).unwrap().statistic, want) <= 1e-10);
        let yates = n * ((a * d - b * c).abs() - n / 2.0).max(0.0).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        prop_assert!(rel(chi2_contingency(&t, true).unwrap().statistic, yates) <= 1e-9 || yates < 1e-12);
    }

    #[test]
    fn logistic_score_equations_vanish(seed in 0u64..10_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = 150;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|&x| f64::from(u8::from(rng.random_bool(1.0 / (1.0 + (-0.5 - x).exp()))))).collect();
        let d = Design::with_intercept(n).column("x", x.clone()).unwrap();
        match logistic_fit(&d, &y) {
            Ok(fit) => {
                let (b0, b1) = (fit.coefficients[0].estimate, fit.coefficients[1].estimate);
                let (mut g0, mut g1) = (0.0, 0.0);
                for i in 0..n {
                    let r = y[i] - 1.0 / (1.0 + (-(b0 + b1 * x[i])).exp());
                    g0 += r;
                    g1 += r * x[i];
                }
                prop_assert!(g0.hypot(g1) <= 1e-8);
                prop_assert!(fit.gradient_norm <= 1e-8);
            }
            Err(e) => prop_assert!(matches!(e, StatsError::Separation(_))),
        }
    }

    #[test]
    fn family_correction_bounds(p in 0.0..1.0f64, k in 1u32..20) {
        let s = family_correct(p, k, Correction::Sidak);
        let b = family_correct(p, k, Correction::Bonferroni);
        prop_assert!(p <= s + 1e-15 && s <= b + 1e-15 && b <= 1.0);
        prop_assert!((family_correct(p, 1, Correction::Sidak) - p).abs() <= 1e-15);
        prop_assert!(family_correct(p, 1, Correction::Bonferroni) == p);
        prop_assert!(family_correct((p + 0.01).min(1.0), k, Correction::Sidak) >= s);
    }

    #[test]
    fn ols_normal_equations(seed in 0u64..10_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|i| 2.0 + 0.3 * x1[i] - x2[i] + rng.random_range(-1.0..1.0)).collect();
        let d = Design::with_intercept(n).column("x1", x1.clone()).unwrap().column("x2", x2.clone()).unwrap();
        let fit = ols_fit(&d, &y).unwrap();
        let b: Vec<f64> = fit.coefficients.iter().map(|c| c.estimate).collect();
        let res: Vec<f64> = (0..n).map(|i| y[i] - b[0] - b[1] * x1[i] - b[2] * x2[i]).collect();
        for col in [vec![1.0; n], x1, x2] {
            let g: f64 = col.iter().zip(&res).map(|(a, r)| a * r).sum();
            prop_assert!(g.abs() <= 1e-9 * n as f64);
        }
        let rss: f64 = res.iter().map(|r| r * r).sum();
        prop_assert!(rel(rss, fit.residual_ss) <= 1e-9);
    }
}

#[test]
fn logistic_matches_grid_search_on_flipped_labels() {
    // 50 per group, 5 labels flipped in each: MLE is logit(0.1), logit(0.9) − logit(0.1)
    let x: Vec<f64> = (0..100).map(|i| f64::from(u8::from(i >= 50))).collect();
    let y: Vec<f64> = (0..100).map(|i| if i % 10 == 0 { 1.0 - x[i] } else { x[i] }).collect();
    let fit = logistic_fit(&Design::with_intercept(100).column("x", x.clone()).unwrap(), &y).unwrap();
    let b0 = fit.coefficients[0].estimate;
    let b1 = fit.coefficients[1].estimate;
    assert!((b0 - (1.0f64 / 9.0).ln()).abs() < 1e-9);
    assert!((b1 - 2.0 * 9.0f64.ln()).abs() < 1e-9);

    let ll = |a: f64, b: f64| -> f64 {
        x.iter()
            .zip(&y)
            .map(|(&x, &y)| {
                let e = a + b * x;
                y * e - e.exp().ln_1p()
            })
            .sum()
    };
    let (mut ca, mut cb, mut step) = (0.0, 0.0, 1.0);
    while step > 1e-7 {
        let mut best = (ll(ca, cb), ca, cb);
        for i in -10..=10 {
            for j in -10..=10 {
                let (a, b) = (ca + i as f64 * step, cb + j as f64 * step);
                let v = ll(a, b);
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
        if (best.1, best.2) == (ca, cb) {
            step /= 4.0;
        }
        ca = best.1;
        cb = best.2;
    }
    assert!((ca - b0).abs() < 1e-5 && (cb - b1).abs() < 1e-5, "grid ({ca}, {cb}) vs fit ({b0}, {b1})");
    assert!((fit.log_likelihood - ll(ca, cb)).abs() < 1e-9);
}

#[test]
fn degenerate_inputs_are_errors() {
    let y = [0.0, 0.0, 1.0, 1.0];
    let sep = Design::with_intercept(4).column("x", vec![0.0, 0.0, 1.0, 1.0]).unwrap();
    assert!(matches!(logistic_fit(&sep, &y), Err(StatsError::Separation(_))));
    let dup = Design::with_intercept(4).column("a", vec![1.0, 2.0, 3.0, 4.0]).unwrap().column("b", vec![2.0, 4.0, 6.0, 8.0]).unwrap();
    assert_eq!(ols_fit(&dup, &y).unwrap_err(), StatsError::RankDeficient);
    assert!(ttest_pooled(&[1.0], &[2.0]).is_err());
    assert!(anova_oneway(&[&[1.0, 2.0]]).is_err());
    assert!(ContingencyTable2x2::new([[1.0, -1.0], [1.0, 1.0]]).is_err());
}

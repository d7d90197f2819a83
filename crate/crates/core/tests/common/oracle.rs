//! Survival functions by direct quadrature of the densities.
//!
//! Gamma values come from exact recurrences at integer and half-integer
//! arguments and every integral is over a smooth, bounded integrand, so none
//! of this shares code or method with the series and continued fractions in
//! the library.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

const NODES: usize = 20;
const PANELS: usize = 48;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static GL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GL.get_or_init(|| {
        let n = NODES;
        (1..=n)
            .map(|i| {
                let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
                loop {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                    }
                }
            })
            .collect()
    })
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = (b - a) / PANELS as f64;
    let gl = gauss_legendre();
    (0..PANELS)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            gl.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// `ln Γ(k/2)`.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| (j as f64).ln()).sum()
    } else {
        0.5 * PI.ln() + (0..k / 2).map(|j| (j as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// Chi-squared with `k` degrees of freedom, integrated in `v = √t`.
pub fn chi2_sf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let kf = k as f64;
    let ln_c = std::f64::consts::LN_2 - 0.5 * kf * std::f64::consts::LN_2 - ln_gamma_half(k);
    let g = |v: f64| {
        if v <= 0.0 {
            return if k == 1 { ln_c.exp() } else { 0.0 };
        }
        (ln_c + (kf - 1.0) * v.ln() - 0.5 * v * v).exp()
    };
    let v0 = x.sqrt();
    let top = v0.max(kf.sqrt()) + 40.0;
    integrate(g, v0, top)
}

/// Regularized incomplete beta `I_z(a2/2, b2/2)`, integrated in `t = sin²θ`.
pub fn beta_reg(a2: u32, b2: u32, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let (a, b) = (a2 as f64 / 2.0, b2 as f64 / 2.0);
    let ln_b = ln_gamma_half(a2) + ln_gamma_half(b2) - ln_gamma_half(a2 + b2);
    let g = |th: f64| {
        let (s, c) = th.sin_cos();
        if s <= 0.0 || c <= 0.0 {
            let e = if s <= 0.0 { 2.0 * a - 1.0 } else { 2.0 * b - 1.0 };
            return if e == 0.0 { 2.0 * (-ln_b).exp() } else { 0.0 };
        }
        2.0 * ((2.0 * a - 1.0) * s.ln() + (2.0 * b - 1.0) * c.ln() - ln_b).exp()
    };
    let th = z.sqrt().asin();
    // integrate the shorter side for accuracy near the ends
    if th <= FRAC_PI_2 / 2.0 {
        integrate(g, 0.0, th)
    } else {
        1.0 - integrate(g, th, FRAC_PI_2)
    }
}

pub fn t_sf(nu: u32, x: f64) -> f64 {
    let nf = nu as f64;
    let tail = 0.5 * beta_reg(nu, 1, nf / (nf + x * x));
    if x >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub fn f_sf(d1: u32, d2: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let (a, b) = (d1 as f64, d2 as f64);
    beta_reg(d2, d1, b / (b + a * x))
}

pub fn normal_sf(x: f64) -> f64 {
    let tail = 0.5 * chi2_sf(1, x * x);
    if x >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Fixed evaluation grid used by the acceptance suite: `(distribution,
/// x, oracle value)` triples, 10⁴ in total.
pub fn grid() -> Vec<(ecmsim::stats::Distribution, f64, f64)> {
    use ecmsim::stats::Distribution as D;
    let mut out = Vec::with_capacity(10_000);
    for k in 1..=50u32 {
        let hi = (4.0 * k as f64).max(40.0);
        for j in 1..=50 {
            let x = hi * j as f64 / 50.0;
            out.push((D::ChiSquared { df: k as f64 }, x, chi2_sf(k, x)));
        }
    }
    for nu in 1..=50u32 {
        for j in 0..50 {
            let x = -8.0 + 16.0 * j as f64 / 49.0;
            out.push((D::StudentT { df: nu as f64 }, x, t_sf(nu, x)));
        }
    }
    let d1s = [1u32, 2, 3, 4, 5, 7, 10, 20, 30, 50];
    let d2s = [1u32, 2, 3, 5, 10, 20, 30, 60, 100, 146];
    for &a in &d1s {
        for &b in &d2s {
            for j in 1..=25 {
                let x = 0.2 * j as f64 * (1.0 + 4.0 / b as f64);
                out.push((D::FisherF { df1: a as f64, df2: b as f64 }, x, f_sf(a, b, x)));
            }
        }
    }
    for j in 0..2500 {
        let x = -10.0 + 20.0 * j as f64 / 2499.0;
        out.push((D::Normal, x, normal_sf(x)));
    }
    out
}

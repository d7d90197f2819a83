mod common;

use ecmsim::analytic::{decay_rate, equilibrium, periodic_peaks, power_iteration};
use ecmsim::ecm::{validate_stochastic, Orientation, StateDistribution, StateSpace, TransitionMatrix};
use ecmsim::schedule::{simulate, summarize, ConditionSet, Schedule};
use proptest::prelude::*;

fn matrix_strategy(n: usize, floor: f64) -> impl Strategy<Value = TransitionMatrix> {
    prop::collection::vec(floor..1.0f64, n * n).prop_map(move |v| {
        let cols: Vec<Vec<f64>> = v
            .chunks(n)
            .map(|c| {
                let s: f64 = c.iter().sum();
                c.iter().map(|x| x / s).collect()
            })
            .collect();
        TransitionMatrix::from_probabilities(common::space(n), &cols, Orientation::RowsAreFrom, "m").unwrap()
    })
}

fn counts_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1000.0f64, n).prop_filter("positive total", |v| v.iter().sum::<f64>() > 1.0)
}

fn dist(n: usize, v: Vec<f64>) -> StateDistribution {
    StateDistribution::new(common::space(n), v).unwrap()
}

/// Two-state matrix from entry and exit probabilities of the focus state.
fn two_state(q: f64, r: f64, name: &str) -> TransitionMatrix {
    TransitionMatrix::from_probabilities(common::space(2), &[vec![1.0 - r, q], vec![r, 1.0 - q]], Orientation::RowsAreTo, name)
        .unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conservation_over_long_runs(m in matrix_strategy(3, 0.0), v in counts_strategy(3)) {
        let d = dist(3, v);
        let set = ConditionSet::from_matrices([m]).unwrap();
        let tr = simulate(&d, &Schedule::constant("m", 10_000).unwrap(), &set).unwrap();
        for s in &tr.states {
            prop_assert!(common::rel_diff(s.total(), d.total()) <= 1e-9);
            prop_assert!(s.counts().iter().all(|&c| c >= 0.0));
        }
    }

    #[test]
    fn step_is_linear(m in matrix_strategy(4, 0.0), x in counts_strategy(4), y in counts_strategy(4), a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let (dx, dy) = (dist(4, x), dist(4, y));
        let lhs = m.apply(&dx.combine(a, &dy, b).unwrap()).unwrap();
        let rhs = m.apply(&dx).unwrap().combine(a, &m.apply(&dy).unwrap(), b).unwrap();
        prop_assert!(close(lhs.counts(), rhs.counts(), 1e-12));
    }

    #[test]
    fn composition_matches_sequential_steps(a in matrix_strategy(3, 0.0), b in matrix_strategy(3, 0.0), x in counts_strategy(3)) {
        let d = dist(3, x);
        let ab = a.compose(&b).unwrap();
        prop_assert!(validate_stochastic(&ab).is_pass());
        let seq = a.apply(&b.apply(&d).unwrap()).unwrap();
        prop_assert!(close(ab.apply(&d).unwrap().counts(), seq.counts(), 1e-12));
    }

    #[test]
    fn row_and_column_conventions_agree(m in matrix_strategy(3, 0.0)) {
        let rows_from = m.to_row_stochastic();
        let back = TransitionMatrix::from_probabilities(m.space().clone(), &rows_from, Orientation::RowsAreFrom, "m").unwrap();
        prop_assert_eq!(&back, &m);
        for (i, row) in rows_from.iter().enumerate() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(row, &m.column(i));
        }
    }

    #[test]
    fn permuting_states_permutes_the_trace(m in matrix_strategy(3, 0.0), x in counts_strategy(3), perm in Just([2usize, 0, 1]).prop_shuffle()) {
        // state i of the original system is state perm[i] of the permuted one
        let labels: Vec<String> = (0..3).map(|k| format!("s{}", perm.iter().position(|&p| p == k).unwrap())).collect();
        let space = StateSpace::new(labels).unwrap().with_focus("s0").unwrap();
        let mut rows = vec![vec![0.0; 3]; 3];
        for to in 0..3 {
            for from in 0..3 {
                rows[perm[to]][perm[from]] = m.get(to, from);
            }
        }
        let pm = TransitionMatrix::from_probabilities(space.clone(), &rows, Orientation::RowsAreTo, "m").unwrap();
        let mut px = vec![0.0; 3];
        for i in 0..3 {
            px[perm[i]] = x[i];
        }
        let a = simulate(&dist(3, x), &Schedule::constant("m", 50).unwrap(), &ConditionSet::from_matrices([m]).unwrap()).unwrap();
        let pd = StateDistribution::new(space, px).unwrap();
        let b = simulate(&pd, &Schedule::constant("m", 50).unwrap(), &ConditionSet::from_matrices([pm]).unwrap()).unwrap();
        prop_assert!(close(&a.ratios(), &b.ratios(), 1e-12));
    }

    #[test]
    fn fixed_point_residual(m2 in matrix_strategy(2, 0.01), m3 in matrix_strategy(3, 0.01), m5 in matrix_strategy(5, 0.01)) {
        for m in [m2, m3, m5] {
            let e = equilibrium(&m).unwrap();
            prop_assert!(e.residual <= 1e-12, "{}", e.residual);
            prop_assert!((e.distribution.total() - 1.0).abs() <= 1e-12);
            let v = m.apply(&e.distribution).unwrap();
            prop_assert!(close(v.counts(), e.distribution.counts(), 1e-12));
        }
    }

    #[test]
    fn closed_form_and_numeric_equilibria_agree(q in 0.05..0.95f64, r in 0.05..0.95f64) {
        let m = two_state(q, r, "m");
        let a = equilibrium(&m).unwrap();
        let b = power_iteration(&m).unwrap();
        prop_assert!((a.engaged_ratio - q / (q + r)).abs() <= 1e-14);
        prop_assert!((a.engaged_ratio - b.engaged_ratio).abs() <= 1e-10);
        // deviation from equilibrium shrinks by exactly the decay rate each step
        let lambda = decay_rate(&m).unwrap();
        prop_assert!((lambda - (1.0 - q - r)).abs() <= 1e-15);
        let d = dist(2, vec![1.0, 0.0]);
        let x0 = d.focus_ratio() - a.engaged_ratio;
        let x1 = m.apply(&d).unwrap().focus_ratio() - a.engaged_ratio;
        prop_assert!((x1 - lambda * x0).abs() <= 1e-12);
    }

    #[test]
    fn subdominant_eigenvalue_of_larger_chains(m in matrix_strategy(3, 0.05)) {
        // |λ₂| bounds the contraction of M − π1ᵀ, so long runs from any start
        // close in at that rate
        let lambda = decay_rate(&m).unwrap();
        prop_assert!((0.0..1.0).contains(&lambda));
        let eq = equilibrium(&m).unwrap().distribution;
        let mut d = dist(3, vec![1.0, 0.0, 0.0]);
        for _ in 0..200 {
            d = m.apply(&d).unwrap();
        }
        let gap = d.counts().iter().zip(eq.counts()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 3.0 * lambda.powi(200).max(1e-15) * 10.0 + 1e-13);
    }

    #[test]
    fn simulated_cycles_match_closed_form_peaks(qr in 0.1..0.9f64, rr in 0.1..0.9f64, qi in 0.1..0.9f64, ri in 0.1..0.9f64) {
        let rest = two_state(qr, rr, "rest");
        let int = two_state(qi, ri, "int");
        let set = ConditionSet::from_matrices([rest.clone(), int.clone()]).unwrap();
        let d0 = dist(2, vec![127.0, 111.0]);
        let h = 400;
        for t in 1..=16 {
            let tr = simulate(&d0, &Schedule::periodic("int", t, "rest", h).unwrap(), &set).unwrap();
            let pk = periodic_peaks(&rest, &int, t).unwrap();
            // last complete cycle starts at the largest multiple of t that fits
            let start = (t..=h).step_by(t).filter(|s| s + t - 1 <= h).last().unwrap();
            let r = tr.ratios();
            prop_assert!((r[start - 1] - pk.upper).abs() <= 1e-9, "T={} {} vs {}", t, r[start - 1], pk.upper);
            prop_assert!((r[start + t - 2] - pk.lower).abs() <= 1e-9);
            // without oscillation under rest, the endpoints are the cycle extrema
            if qr + rr <= 1.0 {
                let s = summarize(&tr);
                prop_assert!((s.converged_peak_high - pk.high()).abs() <= 1e-9);
                prop_assert!((s.converged_peak_low - pk.low()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn long_periods_approach_rest_equilibrium(qr in 0.25..0.75f64, rr in 0.25..0.75f64, qi in 0.1..0.9f64, ri in 0.1..0.9f64) {
        let rest = two_state(qr, rr, "rest");
        let int = two_state(qi, ri, "int");
        let pk = periodic_peaks(&rest, &int, 64).unwrap();
        let x = qr / (qr + rr);
        prop_assert!((pk.lower - x).abs() <= 1e-12);
        let after = int.apply(&dist(2, vec![x, 1.0 - x])).unwrap().focus_ratio();
        prop_assert!((pk.upper - after).abs() <= 1e-12);
    }

    #[test]
    fn rounded_matrices_stay_stochastic(m in matrix_strategy(3, 0.0)) {
        let r = m.rounded(2);
        prop_assert!(validate_stochastic(&r).is_pass() || (0..3).any(|j| r.get(j, j) < 0.0));
        for to in 0..3 {
            for from in 0..3 {
                let v = r.get(to, from) * 100.0;
                prop_assert!((v - v.round()).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn renaming_states_is_bit_identical() {
    let m = two_state(0.3, 0.45, "m");
    let renamed = StateSpace::new(["in", "out"]).unwrap();
    let m2 = TransitionMatrix::from_probabilities(renamed.clone(), &m.rows_to(), Orientation::RowsAreTo, "m").unwrap();
    let a = simulate(&dist(2, vec![10.0, 3.0]), &Schedule::constant("m", 300).unwrap(), &ConditionSet::from_matrices([m]).unwrap()).unwrap();
    let d2 = StateDistribution::new(renamed, vec![10.0, 3.0]).unwrap();
    let b = simulate(&d2, &Schedule::constant("m", 300).unwrap(), &ConditionSet::from_matrices([m2]).unwrap()).unwrap();
    assert_eq!(a.ratios(), b.ratios());
}

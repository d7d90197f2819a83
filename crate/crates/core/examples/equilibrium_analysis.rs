//! Equilibria and decay rates, plus a three-state chain solved numerically.

use ecmsim::analytic::{decay_rate, equilibrium};
use ecmsim::ecm::{Orientation, ParameterMode, StateSpace, TransitionMatrix};
use ecmsim::io::PaperFixtures;

fn main() {
    let fx = PaperFixtures::load();
    for mode in [ParameterMode::Exact, ParameterMode::Rounded] {
        let p = fx.project(mode);
        for m in p.conditions.iter() {
            let e = equilibrium(m).unwrap();
            println!(
                "{mode:>7} {:<13} x = {:.5}  lambda = {:.5}",
                m.condition(),
                e.engaged_ratio,
                decay_rate(m).unwrap()
            );
        }
    }

    let space = StateSpace::new(["active", "lapsed", "left"]).unwrap();
    let m = TransitionMatrix::from_probabilities(
        space,
        &[vec![0.7, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.1, 0.2, 0.6]],
        Orientation::RowsAreTo,
        "three-state",
    )
    .unwrap();
    let e = equilibrium(&m).unwrap();
    println!(
        "three-state: {:?} via {:?}, residual {:e}, decay {:.6}",
        e.distribution.counts(),
        e.method,
        e.residual,
        decay_rate(&m).unwrap()
    );
}

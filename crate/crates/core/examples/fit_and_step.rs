//! Estimate a matrix from observed transition counts, validate it and take
//! a single step.

use ecmsim::ecm::{ecm_from_counts, step, validate_stochastic, Orientation, StateDistribution, StateSpace, TransitionCounts};

fn main() {
    let space = StateSpace::new(["engaged", "disengaged"]).unwrap();
    // rows are destinations, columns origins
    let counts = TransitionCounts::new(space.clone(), &[vec![36, 13], vec![14, 32]], Orientation::RowsAreTo, "control").unwrap();
    println!("origin totals {:?}, destinations {:?}", counts.origin_totals(), counts.destination_totals());

    let m = ecm_from_counts(&counts).unwrap();
    println!("{m:?}");
    println!("validation: {}", validate_stochastic(&m));

    let d = StateDistribution::from_labeled(space, &[("engaged", 127.0), ("disengaged", 111.0)]).unwrap();
    let next = step(&d, &m).unwrap();
    println!("after one step: {:?} (total {})", next.counts(), next.total());

    let zero = TransitionCounts::new(m.space().clone(), &[vec![3, 0], vec![1, 0]], Orientation::RowsAreTo, "sparse").unwrap();
    println!("unobserved origin: {}", ecm_from_counts(&zero).unwrap_err());
}

//! Sweep the period grid, then find how rarely the intervention can run and
//! still meet each effect criterion.

use std::time::Instant;

use ecmsim::ecm::ParameterMode;
use ecmsim::io::PaperFixtures;
use ecmsim::pipeline::thresholds;

fn main() {
    let p = PaperFixtures::load().project(ParameterMode::Exact);
    let t0 = Instant::now();
    let s = p.run_sweep().unwrap();
    println!("{} traces in {:?}", s.entries.len() + 1, t0.elapsed());

    println!("period  months  attainable  extraordinary");
    for period in [1, 2, 4, 7, 16, 33, 50] {
        let a = s.entry("attainable", period).unwrap();
        let e = s.entry("extraordinary", period).unwrap();
        println!("{period:>6}  {:>6}  {:>10.5}  {:>13.5}", a.period_months(), a.summary.mean_ratio, e.summary.mean_ratio);
    }
    println!("control mean {:.5}", s.baseline.summary.mean_ratio);

    let rep = thresholds(&p, &s).unwrap();
    for r in &rep.results {
        println!(
            "{:?} {}: period {:?} ({:?} months), next {:?}",
            r.criterion.kind, r.criterion.threshold, r.period, r.months, r.first_failure
        );
    }
}

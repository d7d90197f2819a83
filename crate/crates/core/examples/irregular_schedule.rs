//! A mixed term calendar: two interventions close together, a long break,
//! then a different exemplar. No closed form applies, so only simulation
//! answers it.

use ecmsim::ecm::ParameterMode;
use ecmsim::io::PaperFixtures;
use ecmsim::schedule::{simulate, summarize_with, Schedule};

fn main() {
    let p = PaperFixtures::load().project(ParameterMode::Exact);
    let year = ["attainable", "attainable", "control", "control", "control", "control", "extraordinary", "control"];
    let labels: Vec<&str> = year.iter().cycle().take(p.horizon - 1).copied().collect();
    let s = Schedule::explicit(labels).unwrap();
    let tr = simulate(&p.initial, &s, &p.conditions).unwrap();
    let r = tr.ratios();
    for (k, w) in r.chunks(8).take(4).enumerate() {
        let row: Vec<String> = w.iter().map(|x| format!("{x:.3}")).collect();
        println!("steps {:>3}-{:<3} {}", 8 * k + 1, 8 * k + w.len(), row.join(" "));
    }
    let sum = summarize_with(&tr, false);
    println!("mean {:.4}, range [{:.4}, {:.4}], final {:.4}", sum.mean_ratio, sum.min_ratio, sum.max_ratio, r[r.len() - 1]);
}

//! Build a project from JSON: a peer-mentoring ECM given as probabilities,
//! a baseline given as counts, and a named schedule.

use ecmsim::ecm::ParameterMode;
use ecmsim::io::parse_config;
use ecmsim::schedule::{simulate, summarize};

const CONFIG: &str = r#"{
  "states": ["active", "inactive"],
  "conditions": {
    "baseline": { "counts": [[40, 10], [20, 30]] },
    "mentoring": { "matrix": [[0.9, 0.1], [0.5, 0.5]], "rows_are": "from" }
  },
  "rest": "baseline",
  "initial": { "active": 60, "inactive": 40 },
  "horizon": 40,
  "schedules": [
    { "name": "quarterly", "kind": "periodic", "intervention": "mentoring", "period_months": 3 }
  ]
}"#;

fn main() {
    let p = parse_config(CONFIG).unwrap().resolve(ParameterMode::Exact).unwrap();
    for s in &p.schedules {
        let tr = simulate(&p.initial, &s.schedule, &p.conditions).unwrap();
        let sum = summarize(&tr);
        println!("{}: mean {:.4}, cycle ({:.4}, {:.4})", s.name, sum.mean_ratio, sum.converged_peak_high, sum.converged_peak_low);
    }

    let broken = CONFIG.replace(r#""intervention": "mentoring""#, r#""intervention": "peer""#);
    match parse_config(&broken) {
        Err(e) => println!("{e}"),
        Ok(_) => unreachable!(),
    }
}

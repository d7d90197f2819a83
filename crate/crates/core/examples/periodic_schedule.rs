//! Apply an intervention every few steps and compare the simulated cycle
//! with the closed-form peaks, in both parameter modes.

use ecmsim::analytic::periodic_peaks;
use ecmsim::ecm::ParameterMode;
use ecmsim::io::PaperFixtures;
use ecmsim::schedule::{simulate, summarize};

fn main() {
    let fx = PaperFixtures::load();
    for mode in [ParameterMode::Exact, ParameterMode::Rounded] {
        let p = fx.project(mode);
        let rest = p.conditions.get("control").unwrap();
        let att = p.conditions.get("attainable").unwrap();
        println!("{mode} parameters");
        for t in [1, 2, 4, 8] {
            let s = p.periodic("attainable", t).unwrap();
            let tr = simulate(&p.initial, &s, &p.conditions).unwrap();
            let sum = summarize(&tr);
            let pk = periodic_peaks(rest, att, t).unwrap();
            println!(
                "  every {:>4} months: simulated ({:.5}, {:.5})  closed form a={:.5} b={:.5}",
                t as f64 * p.dt_months,
                sum.converged_peak_high,
                sum.converged_peak_low,
                pk.upper,
                pk.lower
            );
        }
    }
}

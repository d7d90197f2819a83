//! Forecast the no-intervention condition for 150 months and compare the
//! result with survey totals under every test recipe.

use ecmsim::ecm::ParameterMode;
use ecmsim::io::PaperFixtures;
use ecmsim::pipeline::{predictability, PredictabilityRecipe};
use ecmsim::schedule::{simulate, summarize};
use ecmsim::stats::EffectSize;

fn main() {
    let p = PaperFixtures::load().project(ParameterMode::Exact);
    let trace = simulate(&p.initial, &p.constant("control").unwrap(), &p.conditions).unwrap();
    let last = trace.last();
    println!(
        "after {} months: {:.4} engaged of {} ({:.4}%)",
        trace.t_months(trace.horizon()),
        last.focus_count(),
        last.total(),
        100.0 * last.focus_ratio()
    );
    println!("mean share over the horizon {:.6}", summarize(&trace).mean_ratio);

    for recipe in PredictabilityRecipe::variants() {
        let r = predictability(&p, recipe).unwrap();
        let v = match r.test.effect {
            Some(EffectSize::CramersV(v)) => v,
            _ => unreachable!(),
        };
        println!(
            "round={:<5} yates={:<5} chi2(1) = {:.4}, p = {:.4}, V = {:.4}",
            recipe.round_counts, recipe.yates, r.test.statistic, r.test.p, v
        );
    }
}

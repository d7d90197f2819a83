//! The regression analyses: trajectories over the sweep, per-period
//! extrema, and a logistic model on the subjects behind the count tables.

use ecmsim::ecm::ParameterMode;
use ecmsim::io::PaperFixtures;
use ecmsim::pipeline::{extrema_regression, subject_logistic, trajectory_dataset, trajectory_regression, ControlRows};
use ecmsim::stats::{Coefficient, OlsFit};

fn line(c: &Coefficient) {
    println!("    {:<28} {:>11.6} {:>9.3} {:>9.4}", c.name, c.estimate, c.statistic, c.p);
}

fn ols(name: &str, f: &OlsFit) {
    let ft = f.f.as_ref().unwrap();
    println!("{name}: n {} F({}, {}) = {:.2}, adj R2 {:.4}", f.n, ft.df1, ft.df2, ft.statistic, f.adj_r_squared.unwrap());
    f.coefficients.iter().for_each(line);
}

fn main() {
    let p = PaperFixtures::load().project(ParameterMode::Exact);
    let s = p.run_sweep().unwrap();
    for mode in [ControlRows::CodeFaithful, ControlRows::Corrected] {
        let rows = trajectory_dataset(&s, &p.analysis.stats_periods, mode);
        ols(&format!("trajectory ({mode:?})"), &trajectory_regression(&s, &rows).unwrap());
    }
    let ex = extrema_regression(&s).unwrap();
    ols("maximum", &ex.maximum);
    ols("minimum", &ex.minimum);
    for c in ex.maximum.coefficients.iter().chain(&ex.minimum.coefficients).filter_map(|c| c.standardized.map(|b| (c, b))) {
        println!("    beta {:<14} {:.3}", c.0.name, c.1);
    }

    let l = subject_logistic(&p.counts, "control").unwrap();
    println!("logistic: n {} pseudo R2 {:.4}, model chi2 {:.2}", l.fit.n, l.fit.pseudo_r2, l.fit.model_chi2);
    l.fit.coefficients.iter().chain(&l.contrasts).for_each(line);
}

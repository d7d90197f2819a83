//! Write the standard set of SVG charts for the bundled study.
//!
//! `cargo run --example figures -- out/` (defaults to `figures/`).

use std::path::PathBuf;

use ecmsim::ecm::ParameterMode;
use ecmsim::io::{figures, PaperFixtures};
use ecmsim::pipeline::thresholds;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let p = PaperFixtures::load().project(ParameterMode::Exact);
    let s = p.run_sweep().unwrap();
    let t = thresholds(&p, &s).unwrap();
    let charts = [
        ("trajectories_every_3_months.svg", figures::trajectories(&s, 2)),
        ("trajectories_every_30_months.svg", figures::trajectories(&s, 20)),
        ("mean_share.svg", figures::mean_share(&s)),
        ("effect_size.svg", figures::effect_size(&t)),
        ("corrected_p.svg", figures::corrected_p(&t, 0.05)),
        ("cohens_d.svg", figures::cohens_d(&t, 0.8)),
        ("extrema.svg", figures::extrema(&s)),
    ];
    for (name, c) in charts {
        c.write(&dir.join(name))?;
        println!("{}", dir.join(name).display());
    }
    Ok(())
}

//! Two hypothetical cultural systems evolved from an even split.
//!
//! C1 keeps most conformers and settles at 75:25. C2 loses them and settles
//! at 12.5% conformers, which is 87.5:12.5 when read as non-conformers first.

use ecmsim::analytic::equilibrium;
use ecmsim::ecm::StateDistribution;
use ecmsim::io::PaperFixtures;

fn main() {
    for sys in PaperFixtures::toy_systems() {
        let m = &sys.matrix;
        let mut d = StateDistribution::new(m.space().clone(), vec![50.0, 50.0]).unwrap();
        print!("{}: t=0 {:.4}", sys.name, d.focus_ratio());
        for t in 1..=10 {
            d = m.apply(&d).unwrap();
            if t % 2 == 0 {
                print!("  t={t} {:.6}", d.focus_ratio());
            }
        }
        let eq = equilibrium(m).unwrap();
        println!("\n    equilibrium conformer share {} (stated {})", eq.engaged_ratio, sys.stated_limit);
    }
}

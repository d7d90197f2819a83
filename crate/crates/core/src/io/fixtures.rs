//! The bundled reference study: three condition count tables, the initial
//! cohort, survey totals, and two toy cultural systems.

use serde::Serialize;

use crate::ecm::{Orientation, ParameterMode, StateSpace, TransitionMatrix};
use crate::pipeline::Project;

use super::config::{parse_config, ProjectConfig};

/// Raw text of the embedded project file.
pub const PAPER_JSON: &str = include_str!("../../fixtures/paper.json");

/// Cohort size as stated alongside the initial distribution. The count
/// tables themselves cover [`PaperFixtures::tabulated_subjects`] subjects.
pub const STATED_SUBJECTS: u64 = 238;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToySystem {
    pub name: &'static str,
    pub matrix: TransitionMatrix,
    /// Share the focus state settles at.
    pub stated_limit: f64,
}

#[derive(Debug, Clone)]
pub struct PaperFixtures {
    pub config: ProjectConfig,
}

impl PaperFixtures {
    pub fn load() -> Self {
        Self {
            config: parse_config(PAPER_JSON).expect("embedded fixture is valid"),
        }
    }

    pub fn project(&self, mode: ParameterMode) -> Project {
        self.config.resolve(mode).expect("embedded fixture is valid")
    }

    pub fn survey(&self) -> [f64; 2] {
        self.project(ParameterMode::Exact).survey.expect("fixture has survey totals")
    }

    pub fn tabulated_subjects(&self) -> u64 {
        self.project(ParameterMode::Exact).counts.values().map(|c| c.total()).sum()
    }

    /// Two hypothetical systems over (conformer, non_conformer). The first
    /// settles at 75% conformers. The second settles at 12.5% conformers,
    /// so its long-run split reads 12.5:87.5 in (conformer, non) order.
    pub fn toy_systems() -> [ToySystem; 2] {
        let space = StateSpace::new(["conformer", "non_conformer"]).expect("two labels");
        let m = |rows: [[f64; 2]; 2], name| {
            let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
            TransitionMatrix::from_probabilities(space.clone(), &rows, Orientation::RowsAreTo, name)
                .expect("toy matrices are stochastic")
        };
        [
            ToySystem {
                name: "C1",
                matrix: m([[0.8, 0.6], [0.2, 0.4]], "C1"),
                stated_limit: 0.75,
            },
            ToySystem {
                name: "C2",
                matrix: m([[0.3, 0.1], [0.7, 0.9]], "C2"),
                stated_limit: 0.125,
            },
        ]
    }
}

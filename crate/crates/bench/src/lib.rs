//! Shared fixtures for the benchmarks.

use symparc::fput::{fput_system, paper_initial_state, FputParams};
use symparc::scheme::SchemeSpec;
use symparc::{PhaseState, SplitForceSystem, StageSolveConfig, Stepper, SolverMode};

pub struct FputFixture {
    pub params: FputParams,
    pub system: SplitForceSystem,
    pub state: PhaseState,
}

pub fn fput_fixture(omega: f64) -> FputFixture {
    let params = FputParams::new(3, omega).expect("valid parameters");
    FputFixture {
        params,
        system: fput_system(params).expect("valid system"),
        state: paper_initial_state(&params),
    }
}

pub fn stepper(name: &str, mode: SolverMode) -> Box<dyn Stepper + Send> {
    let spec: SchemeSpec = name.parse().expect("known scheme");
    spec.stepper(StageSolveConfig::default().with_mode(mode))
        .expect("valid scheme")
}

//! Time stepping with the symplectic ARK methods.
//!
//! [`ArkStepper`] advances a [`SplitForceSystem`] by one step of an
//! [`ArkScheme`](crate::ArkScheme), solving the implicit stage equations
//! either by plain fixed-point iteration or by eliminating the linear fast
//! force exactly. [`YoshidaComposition`] builds fourth and sixth order
//! methods from a symmetric second order stepper, and [`reference_solve`]
//! is an independent high-accuracy explicit solver used as an oracle.

mod ark;
mod reference;
mod stages;
mod trajectory;
mod yoshida;

pub use ark::{ark_step, ArkStepper};
pub use reference::{reference_solve, reference_solve_with, ReferenceOptions};
pub use stages::{solve_stages, StageSolution};
pub use trajectory::{integrate, integrate_with, IntegrateOptions, Trajectory};
pub use yoshida::{yoshida_compose, YoshidaComposition, YOSHIDA6_SOLUTION_A};

use crate::error::Result;
use crate::system::{PhaseState, SplitForceSystem};

/// How the implicit stage equations are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMode {
    /// Picard iteration on all stage unknowns.
    FixedPoint,
    /// Fixed point on `F¹` only; the linear fast block is solved exactly.
    /// Requires a system with `linear_fast`.
    LinearlyImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSolveConfig {
    /// Relative tolerance on the max-norm stage update, scaled by
    /// `max(1, ‖q₀‖∞, ‖p₀‖∞)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: SolverMode,
}

impl Default for StageSolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            mode: SolverMode::FixedPoint,
        }
    }
}

impl StageSolveConfig {
    /// Defaults with the mode picked from the system: linearly implicit when
    /// the fast force is declared linear, fixed point otherwise.
    pub fn for_system(sys: &SplitForceSystem) -> Self {
        let mode = if sys.linear_fast().is_some() {
            SolverMode::LinearlyImplicit
        } else {
            SolverMode::FixedPoint
        };
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::invalid("stage tolerance must be > 0"));
        }
        if self.max_iterations < 1 {
            return Err(crate::Error::invalid("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Result of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: PhaseState,
    /// Stage iterations spent (summed over sub-steps for compositions).
    pub iterations: usize,
}

/// A one-step method for split systems.
pub trait Stepper {
    fn step(&mut self, sys: &SplitForceSystem, state: &PhaseState, h: f64) -> Result<StepOutcome>;

    /// Classical order of the method.
    fn order(&self) -> usize;

    fn name(&self) -> String;
}

impl<S: Stepper + ?Sized> Stepper for Box<S> {
    fn step(&mut self, sys: &SplitForceSystem, state: &PhaseState, h: f64) -> Result<StepOutcome> {
        (**self).step(sys, state, h)
    }

    fn order(&self) -> usize {
        (**self).order()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

//! Symplectic additive Runge–Kutta methods built on Lobatto IIIA primary
//! tableaux and Gauss–Legendre secondary nodes, for Hamiltonian systems
//! whose force splits into a slow part `F¹` and a stiff part `F²`.
//!
//! The crate covers tableau construction, order condition checks, the
//! one-step maps and their stage solvers, linear stability analysis of the
//! harmonic oscillator test problem and the Fermi–Pasta–Ulam–Tsingou
//! experiments.

mod error;
pub mod format;
pub mod fput;
pub mod integrator;
pub mod lagrange;
pub mod order;
pub mod quadrature;
pub mod scheme;
pub mod stability;
pub mod system;
pub mod tableau;

pub use error::{Error, Result};
pub use integrator::{
    ark_step, integrate, integrate_with, reference_solve, reference_solve_with, solve_stages,
    yoshida_compose, ArkStepper, IntegrateOptions, ReferenceOptions, SolverMode, StageSolution,
    StageSolveConfig, StepOutcome, Stepper, Trajectory, YoshidaComposition,
};
pub use lagrange::{lagrange_cardinal, lagrange_cardinal_integral, CardinalBasis};
pub use order::{verify_order_conditions, verify_order_conditions_with_tol, OrderConditionReport};
pub use quadrature::{gauss_legendre_quadrature, lobatto_quadrature, QuadratureRule};
pub use system::{PhaseState, SplitForceSystem};
pub use tableau::{build_scheme, lobatto_iiia, ArkScheme, RkTableau, SchemeJson, Variant, MAX_PRIMARY_STAGES};

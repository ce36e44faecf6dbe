use std::sync::Arc;

use super::stages::{check_inputs, solve_stages_cached, LinearBlockCache, StageSolution};
use super::{StageSolveConfig, StepOutcome, Stepper};
use crate::error::Result;
use crate::system::{PhaseState, SplitForceSystem};
use crate::tableau::ArkScheme;

/// One-step map of an [`ArkScheme`].
///
/// Holds a cache of the linear block factorization used by the linearly
/// implicit solver; it is rebuilt only when `h` or `Ω²` change. Stepping
/// takes `&mut self`, so parallel runs use one instance per thread.
#[derive(Debug, Clone)]
pub struct ArkStepper {
    scheme: Arc<ArkScheme>,
    cfg: StageSolveConfig,
    cache: Option<LinearBlockCache>,
}

impl ArkStepper {
    pub fn new(scheme: impl Into<Arc<ArkScheme>>, cfg: StageSolveConfig) -> Self {
        Self {
            scheme: scheme.into(),
            cfg,
            cache: None,
        }
    }

    pub fn scheme(&self) -> &ArkScheme {
        &self.scheme
    }

    pub fn config(&self) -> &StageSolveConfig {
        &self.cfg
    }

    /// Stage values and the new state.
    pub fn step_with_stages(
        &mut self,
        sys: &SplitForceSystem,
        state: &PhaseState,
        h: f64,
    ) -> Result<(StageSolution, PhaseState)> {
        check_inputs(&self.scheme, sys, state, h, &self.cfg)?;
        let stages = solve_stages_cached(&self.scheme, sys, state, h, &self.cfg, &mut self.cache)?;
        let next = advance(&self.scheme, state, h, &stages);
        Ok((stages, next))
    }
}

/// `q₁ = q₀ + h bᵀP`, `p₁ = p₀ + h bᵀF¹(Q) + h b̃ᵀF²(Q̃)`.
fn advance(scheme: &ArkScheme, state: &PhaseState, h: f64, stages: &StageSolution) -> PhaseState {
    let d = state.dim();
    let mut q = state.q.clone();
    let mut p = state.p.clone();
    for (i, &bi) in scheme.b().iter().enumerate() {
        let w = h * bi;
        for m in 0..d {
            q[m] += w * stages.p[i * d + m];
            p[m] += w * stages.f1[i * d + m];
        }
    }
    for (k, &bk) in scheme.b_tilde().iter().enumerate() {
        let w = h * bk;
        for m in 0..d {
            p[m] += w * stages.f2[k * d + m];
        }
    }
    PhaseState {
        q,
        p,
        t: state.t + h,
    }
}

impl Stepper for ArkStepper {
    fn step(&mut self, sys: &SplitForceSystem, state: &PhaseState, h: f64) -> Result<StepOutcome> {
        let (stages, state) = self.step_with_stages(sys, state, h)?;
        Ok(StepOutcome {
            state,
            iterations: stages.iterations,
        })
    }

    fn order(&self) -> usize {
        self.scheme.order()
    }

    fn name(&self) -> String {
        self.scheme.name()
    }
}

/// A single step of `scheme` from `state`.
pub fn ark_step(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
) -> Result<PhaseState> {
    let mut stepper = ArkStepper::new(scheme.clone(), *cfg);
    Ok(stepper.step(sys, state, h)?.state)
}

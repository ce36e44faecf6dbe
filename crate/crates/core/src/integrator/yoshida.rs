use super::{StepOutcome, Stepper};
use crate::error::{Error, Result};
use crate::system::{PhaseState, SplitForceSystem};

/// Yoshida's sixth order "solution A" for the symmetric seven-stage
/// composition `w3 w2 w1 w0 w1 w2 w3` (H. Yoshida, Phys. Lett. A 150, 1990).
/// Stored as `[w1, w2, w3]`; `w0 = 1 − 2(w1 + w2 + w3)`.
pub const YOSHIDA6_SOLUTION_A: [f64; 3] = [
    -1.177_679_984_178_871_0,
    0.235_573_213_359_358_13,
    0.784_513_610_477_557_26,
];

/// Symmetric composition of a second order symmetric stepper.
#[derive(Debug, Clone)]
pub struct YoshidaComposition<S> {
    base: S,
    fractions: Vec<f64>,
    order: usize,
}

impl<S> YoshidaComposition<S> {
    /// Sub-step fractions of `h`, in application order. They sum to one.
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

fn triple_jump() -> Vec<f64> {
    let w1 = 1.0 / (2.0 - 2f64.cbrt());
    let w0 = 1.0 - 2.0 * w1;
    vec![w1, w0, w1]
}

fn seven_stage() -> Vec<f64> {
    let [w1, w2, w3] = YOSHIDA6_SOLUTION_A;
    let w0 = 1.0 - 2.0 * (w1 + w2 + w3);
    vec![w3, w2, w1, w0, w1, w2, w3]
}

/// Compose a time-symmetric order-2 stepper to order 4 (triple jump) or
/// order 6 (seven stages).
pub fn yoshida_compose<S: Stepper>(base: S, target_order: usize) -> Result<YoshidaComposition<S>> {
    if base.order() != 2 {
        return Err(Error::invalid(format!(
            "composition needs a second order base, got order {}",
            base.order()
        )));
    }
    let fractions = match target_order {
        4 => triple_jump(),
        6 => seven_stage(),
        other => {
            return Err(Error::invalid(format!(
                "unsupported composition order {other} (expected 4 or 6)"
            )))
        }
    };
    Ok(YoshidaComposition {
        base,
        fractions,
        order: target_order,
    })
}

impl<S: Stepper> Stepper for YoshidaComposition<S> {
    fn step(&mut self, sys: &SplitForceSystem, state: &PhaseState, h: f64) -> Result<StepOutcome> {
        let mut current = state.clone();
        let mut iterations = 0;
        for &w in &self.fractions {
            let out = self.base.step(sys, &current, w * h)?;
            current = out.state;
            iterations += out.iterations;
        }
        current.t = state.t + h;
        Ok(StepOutcome {
            state: current,
            iterations,
        })
    }

    fn order(&self) -> usize {
        self.order
    }

    fn name(&self) -> String {
        format!("{}-yoshida{}", self.base.name(), self.order)
    }
}

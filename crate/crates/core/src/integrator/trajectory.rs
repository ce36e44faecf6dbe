use std::io::{self, Write};

use super::Stepper;
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::system::{PhaseState, SplitForceSystem};

/// States at `t₀ + nh` for the recorded step indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub stride: usize,
    pub states: Vec<PhaseState>,
    /// Stage iterations of the step that produced each recorded state
    /// (zero for the initial state).
    pub stage_iterations: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// CSV with header `t,q_1..q_d,p_1..p_d,stage_iters`, LF line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states.first().map_or(0, |s| s.dim());
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("q_{i}")));
        header.extend((1..=d).map(|i| format!("p_{i}")));
        header.push("stage_iters".into());
        w.write_all(header.join(",").as_bytes())?;
        w.write_all(b"\n")?;
        for (s, it) in self.states.iter().zip(&self.stage_iterations) {
            let mut row = String::with_capacity(24 * (2 * d + 2));
            row.push_str(&fmt_f64(s.t));
            for x in s.q.iter().chain(&s.p) {
                row.push(',');
                row.push_str(&fmt_f64(*x));
            }
            row.push(',');
            row.push_str(&it.to_string());
            row.push('\n');
            w.write_all(row.as_bytes())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrateOptions {
    pub n_steps: usize,
    /// Record every `stride`-th state; the final state is always recorded.
    pub stride: usize,
}

impl IntegrateOptions {
    pub fn new(n_steps: usize) -> Self {
        Self { n_steps, stride: 1 }
    }
}

/// Take `n_steps` steps of size `h`, recording every state.
pub fn integrate<S: Stepper + ?Sized>(
    stepper: &mut S,
    sys: &SplitForceSystem,
    state0: &PhaseState,
    h: f64,
    n_steps: usize,
    observer: impl FnMut(usize, &PhaseState),
) -> Result<Trajectory> {
    integrate_with(stepper, sys, state0, h, IntegrateOptions::new(n_steps), observer)
}

/// As [`integrate`], with a recording stride. `observer` sees every new
/// state together with its step index (1-based), recorded or not.
pub fn integrate_with<S: Stepper + ?Sized>(
    stepper: &mut S,
    sys: &SplitForceSystem,
    state0: &PhaseState,
    h: f64,
    opts: IntegrateOptions,
    mut observer: impl FnMut(usize, &PhaseState),
) -> Result<Trajectory> {
    if opts.stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    sys.check_state(state0)?;
    let mut states = vec![state0.clone()];
    let mut iters = vec![0];
    let mut current = state0.clone();
    for n in 1..=opts.n_steps {
        let out = stepper
            .step(sys, &current, h)
            .map_err(|e| Error::StepFailed {
                step: n,
                source: Box::new(e),
            })?;
        current = out.state;
        // keep the grid uniform instead of accumulating t += h
        current.t = state0.t + n as f64 * h;
        observer(n, &current);
        if n % opts.stride == 0 || n == opts.n_steps {
            states.push(current.clone());
            iters.push(out.iterations);
        }
    }
    Ok(Trajectory {
        h,
        stride: opts.stride,
        states,
        stage_iterations: iters,
    })
}

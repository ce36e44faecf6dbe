//! High-accuracy reference solutions by Gragg–Bulirsch–Stoer extrapolation.
//!
//! Fixed macro steps of the explicit modified midpoint rule with the
//! harmonic sub-step sequence 2, 4, …, 2K, extrapolated in `h²` to order
//! `2K`. Increments are extrapolated instead of absolute states and summed
//! with Kahan compensation, so the rounding error scales with the size of
//! the increments rather than with the state. The number of macro steps is
//! doubled until two successive solutions agree to the requested tolerance.
//!
//! Nothing here shares code with the ARK steppers; it serves as their oracle.

use crate::error::{Error, Result};
use crate::system::{PhaseState, SplitForceSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Target agreement between successive refinements, relative to
    /// `max(1, ‖q₀‖∞, ‖p₀‖∞)`.
    pub tol: f64,
    /// Extrapolation columns `K`; the method has order `2K`.
    pub columns: usize,
    /// First macro step count; derived from `Ω²` when `None`.
    pub initial_steps: Option<usize>,
    /// Refinement stops with an error beyond this many macro steps.
    pub max_steps: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            columns: 7,
            initial_steps: None,
            max_steps: 1 << 22,
        }
    }
}

pub fn reference_solve(
    sys: &SplitForceSystem,
    state0: &PhaseState,
    t_end: f64,
    tol: f64,
) -> Result<PhaseState> {
    reference_solve_with(
        sys,
        state0,
        t_end,
        &ReferenceOptions {
            tol,
            ..Default::default()
        },
    )
}

/// State at `state0.t + t_end`.
pub fn reference_solve_with(
    sys: &SplitForceSystem,
    state0: &PhaseState,
    t_end: f64,
    opts: &ReferenceOptions,
) -> Result<PhaseState> {
    sys.check_state(state0)?;
    if !t_end.is_finite() {
        return Err(Error::invalid("integration time must be finite"));
    }
    if !(opts.tol > 0.0) || opts.columns < 1 {
        return Err(Error::invalid("reference tolerance must be > 0 and columns >= 1"));
    }
    if t_end == 0.0 {
        return Ok(state0.clone());
    }
    let mut n = opts.initial_steps.unwrap_or_else(|| {
        let w_max = sys
            .linear_fast()
            .map_or(0.0, |w| w.iter().fold(0.0f64, |m, &x| m.max(x)).sqrt());
        ((t_end.abs() * w_max).ceil() as usize).max(4)
    });
    let scale = state0.scale();
    let mut previous = gbs_integrate(sys, state0, t_end, n, opts.columns);
    let mut last_difference = f64::INFINITY;
    while 2 * n <= opts.max_steps {
        n *= 2;
        let current = gbs_integrate(sys, state0, t_end, n, opts.columns);
        let diff = current
            .q
            .iter()
            .zip(&previous.q)
            .chain(current.p.iter().zip(&previous.p))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        // NaN differences never pass
        if diff < opts.tol {
            return Ok(current);
        }
        if diff.is_finite() {
            last_difference = diff;
        }
        previous = current;
    }
    Err(Error::OracleFailure {
        tol: opts.tol,
        steps: n,
        last_difference,
    })
}

struct Workspace {
    dim: usize,
    force: Vec<f64>,
    force2: Vec<f64>,
    arg: Vec<f64>,
    // modified midpoint increments of q and p
    wq_prev: Vec<f64>,
    wp_prev: Vec<f64>,
    wq: Vec<f64>,
    wp: Vec<f64>,
    // extrapolation table rows, increments stacked as [dq, dp]
    table: Vec<Vec<f64>>,
}

fn gbs_integrate(
    sys: &SplitForceSystem,
    state0: &PhaseState,
    t_end: f64,
    n_steps: usize,
    columns: usize,
) -> PhaseState {
    let d = state0.dim();
    let big_h = t_end / n_steps as f64;
    let mut ws = Workspace {
        dim: d,
        force: vec![0.0; d],
        force2: vec![0.0; d],
        arg: vec![0.0; d],
        wq_prev: vec![0.0; d],
        wp_prev: vec![0.0; d],
        wq: vec![0.0; d],
        wp: vec![0.0; d],
        table: vec![vec![0.0; 2 * d]; columns],
    };
    let mut q = state0.q.clone();
    let mut p = state0.p.clone();
    let mut cq = vec![0.0; d];
    let mut cp = vec![0.0; d];
    for _ in 0..n_steps {
        let inc = extrapolated_increment(sys, &q, &p, big_h, columns, &mut ws);
        kahan_add(&mut q, &mut cq, &inc[..d]);
        kahan_add(&mut p, &mut cp, &inc[d..]);
    }
    PhaseState {
        q,
        p,
        t: state0.t + t_end,
    }
}

fn kahan_add(sum: &mut [f64], comp: &mut [f64], inc: &[f64]) {
    for ((s, c), &x) in sum.iter_mut().zip(comp.iter_mut()).zip(inc) {
        let y = x - *c;
        let t = *s + y;
        *c = (t - *s) - y;
        *s = t;
    }
}

fn total_force(sys: &SplitForceSystem, q: &[f64], out: &mut [f64], scratch: &mut [f64]) {
    sys.f1(q, out);
    sys.f2(q, scratch);
    for (o, s) in out.iter_mut().zip(scratch.iter()) {
        *o += s;
    }
}

/// Modified midpoint with `n` sub-steps, written in increments relative to
/// the macro-step start `(q, p)`. Returns `[Δq, Δp]` in `out`.
fn midpoint_increment(
    sys: &SplitForceSystem,
    q: &[f64],
    p: &[f64],
    big_h: f64,
    n: usize,
    ws: &mut Workspace,
    out: &mut [f64],
) {
    let d = ws.dim;
    let h = big_h / n as f64;
    // z1 = z0 + h f(z0)
    total_force(sys, q, &mut ws.force, &mut ws.force2);
    for m in 0..d {
        ws.wq_prev[m] = 0.0;
        ws.wp_prev[m] = 0.0;
        ws.wq[m] = h * p[m];
        ws.wp[m] = h * ws.force[m];
    }
    for _ in 1..n {
        for m in 0..d {
            ws.arg[m] = q[m] + ws.wq[m];
        }
        total_force(sys, &ws.arg, &mut ws.force, &mut ws.force2);
        for m in 0..d {
            let next_q = ws.wq_prev[m] + 2.0 * h * (p[m] + ws.wp[m]);
            let next_p = ws.wp_prev[m] + 2.0 * h * ws.force[m];
            ws.wq_prev[m] = ws.wq[m];
            ws.wp_prev[m] = ws.wp[m];
            ws.wq[m] = next_q;
            ws.wp[m] = next_p;
        }
    }
    out[..d].copy_from_slice(&ws.wq);
    out[d..].copy_from_slice(&ws.wp);
}

fn extrapolated_increment(
    sys: &SplitForceSystem,
    q: &[f64],
    p: &[f64],
    big_h: f64,
    columns: usize,
    ws: &mut Workspace,
) -> Vec<f64> {
    let len = 2 * ws.dim;
    let mut row = vec![0.0; len];
    let mut table = std::mem::take(&mut ws.table);
    for k in 0..columns {
        let nk = 2 * (k + 1);
        midpoint_increment(sys, q, p, big_h, nk, ws, &mut row);
        // Aitken–Neville in h²: table[j] holds T_{k,j} after this pass
        let mut prev_col = row.clone();
        for j in 1..=k {
            let nkj = 2 * (k + 1 - j);
            let ratio = (nk as f64 / nkj as f64).powi(2) - 1.0;
            let mut next = vec![0.0; len];
            for i in 0..len {
                next[i] = prev_col[i] + (prev_col[i] - table[j - 1][i]) / ratio;
            }
            table[j - 1].copy_from_slice(&prev_col);
            prev_col = next;
        }
        table[k].copy_from_slice(&prev_col);
    }
    let result = table[columns - 1].clone();
    ws.table = table;
    result
}

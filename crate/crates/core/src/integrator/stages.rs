use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::{SolverMode, StageSolveConfig};
use crate::error::{Error, Result};
use crate::system::{PhaseState, SplitForceSystem};
use crate::tableau::ArkScheme;

/// Converged stage values of one step. Stage vectors are stored row-major:
/// stage `i`, component `m` lives at `i * dim + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub dim: usize,
    /// Primary position stages `Qᵢ`, `s1` of them.
    pub q: Vec<f64>,
    /// Momentum stages `Pᵢ`, `s1` of them.
    pub p: Vec<f64>,
    /// Secondary position stages `Q̃ₖ`, `s2` of them.
    pub q_tilde: Vec<f64>,
    /// `F¹` at the primary stages from the last iteration.
    pub f1: Vec<f64>,
    /// `F²` at the secondary stages from the last iteration.
    pub f2: Vec<f64>,
    pub iterations: usize,
}

impl StageSolution {
    pub fn q_stage(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn p_stage(&self, i: usize) -> &[f64] {
        &self.p[i * self.dim..(i + 1) * self.dim]
    }

    pub fn q_tilde_stage(&self, k: usize) -> &[f64] {
        &self.q_tilde[k * self.dim..(k + 1) * self.dim]
    }
}

/// LU factorizations of `[I, −hÃ; hω²Ẫ, I]`, one per distinct `ω²`.
#[derive(Debug, Clone)]
pub(crate) struct LinearBlockCache {
    h: f64,
    omega_sq: Vec<f64>,
    component_block: Vec<usize>,
    blocks: Vec<LU<f64, Dyn, Dyn>>,
}

impl LinearBlockCache {
    pub(crate) fn build(scheme: &ArkScheme, omega_sq: &[f64], h: f64) -> Result<Self> {
        let (s1, s2) = (scheme.s1(), scheme.s2());
        let mut distinct: Vec<f64> = Vec::new();
        let mut component_block = Vec::with_capacity(omega_sq.len());
        for &w in omega_sq {
            let idx = match distinct.iter().position(|&d| d == w) {
                Some(i) => i,
                None => {
                    distinct.push(w);
                    distinct.len() - 1
                }
            };
            component_block.push(idx);
        }
        let mut blocks = Vec::with_capacity(distinct.len());
        for &w in &distinct {
            let n = s1 + s2;
            let mut k = DMatrix::<f64>::identity(n, n);
            for i in 0..s2 {
                for j in 0..s1 {
                    k[(i, s2 + j)] = -h * scheme.a_tilde()[(i, j)];
                }
            }
            for i in 0..s1 {
                for j in 0..s2 {
                    k[(s2 + i, j)] = h * w * scheme.a_tilde_hat()[(i, j)];
                }
            }
            let lu = k.lu();
            if !lu.is_invertible() {
                return Err(Error::SingularStageSystem);
            }
            blocks.push(lu);
        }
        Ok(Self {
            h,
            omega_sq: omega_sq.to_vec(),
            component_block,
            blocks,
        })
    }

    pub(crate) fn matches(&self, omega_sq: &[f64], h: f64) -> bool {
        self.h == h && self.omega_sq == omega_sq
    }
}

pub(crate) fn check_inputs(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
) -> Result<()> {
    cfg.validate()?;
    sys.check_state(state)?;
    if !h.is_finite() {
        return Err(Error::invalid("step size must be finite"));
    }
    if cfg.mode == SolverMode::LinearlyImplicit && sys.linear_fast().is_none() {
        return Err(Error::invalid(
            "linearly implicit solver needs a system with a linear fast force",
        ));
    }
    if scheme.s1() == 0 {
        return Err(Error::invalid("scheme has no stages"));
    }
    Ok(())
}

/// Solve the stage equations of one step from `state` with step `h`.
pub fn solve_stages(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
) -> Result<StageSolution> {
    check_inputs(scheme, sys, state, h, cfg)?;
    let mut cache = None;
    solve_stages_cached(scheme, sys, state, h, cfg, &mut cache)
}

pub(crate) fn solve_stages_cached(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
    cache: &mut Option<LinearBlockCache>,
) -> Result<StageSolution> {
    match cfg.mode {
        SolverMode::FixedPoint => fixed_point(scheme, sys, state, h, cfg),
        SolverMode::LinearlyImplicit => {
            let omega_sq = sys.linear_fast().expect("checked by caller");
            let stale = cache.as_ref().is_none_or(|c| !c.matches(omega_sq, h));
            if stale {
                *cache = Some(LinearBlockCache::build(scheme, omega_sq, h)?);
            }
            linearly_implicit(scheme, sys, state, h, cfg, cache.as_ref().unwrap())
        }
    }
}

/// `out[i] = base + h ∑_j m[i,j] v[j]` on row-major stage vectors.
fn combine(out: &mut [f64], base: &[f64], h: f64, m: &DMatrix<f64>, v: &[f64], dim: usize) {
    for row in out.chunks_exact_mut(dim) {
        row.copy_from_slice(base);
    }
    add_product(out, h, m, v, dim);
}

/// `out[i] += h ∑_j m[i,j] v[j]`.
fn add_product(out: &mut [f64], h: f64, m: &DMatrix<f64>, v: &[f64], dim: usize) {
    for i in 0..m.nrows() {
        let row = &mut out[i * dim..(i + 1) * dim];
        for j in 0..m.ncols() {
            let coef = h * m[(i, j)];
            if coef == 0.0 {
                continue;
            }
            for (r, x) in row.iter_mut().zip(&v[j * dim..(j + 1) * dim]) {
                *r += coef * x;
            }
        }
    }
}

fn eval_stages(
    force: impl Fn(&[f64], &mut [f64]),
    q: &[f64],
    out: &mut [f64],
    dim: usize,
) -> Result<()> {
    for (qi, fi) in q.chunks_exact(dim).zip(out.chunks_exact_mut(dim)) {
        force(qi, fi);
    }
    if out.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure)
    }
}

fn max_update(new: &[f64], old: &[f64]) -> f64 {
    new.iter()
        .zip(old)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

// relative stage update beyond which the iteration is declared divergent
const DIVERGENCE_LIMIT: f64 = 1e8;

/// Non-finite values after the first iterate mean the iteration diverged.
fn diverged(e: Error, iter: usize, residual: f64) -> Error {
    if iter > 1 {
        Error::NonConvergence {
            iterations: iter,
            residual,
        }
    } else {
        e
    }
}

fn check_update(new: &[f64], old: &[f64], scale: f64, iter: usize, last: f64) -> Result<f64> {
    let residual = max_update(new, old) / scale;
    if residual.is_finite() && residual <= DIVERGENCE_LIMIT {
        Ok(residual)
    } else if iter == 1 && !residual.is_finite() {
        Err(Error::NumericalFailure)
    } else {
        Err(Error::NonConvergence {
            iterations: iter,
            residual: if residual.is_finite() { residual } else { last },
        })
    }
}

fn fixed_point(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
) -> Result<StageSolution> {
    let d = state.dim();
    let (s1, s2) = (scheme.s1(), scheme.s2());
    let scale = state.scale();
    let mut p = state.p.repeat(s1);
    let mut q = vec![0.0; s1 * d];
    let mut qt = vec![0.0; s2 * d];
    let mut f1 = vec![0.0; s1 * d];
    let mut f2 = vec![0.0; s2 * d];
    let mut p_new = vec![0.0; s1 * d];
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iterations {
        combine(&mut q, &state.q, h, scheme.a(), &p, d);
        combine(&mut qt, &state.q, h, scheme.a_tilde(), &p, d);
        eval_stages(|x, o| sys.f1(x, o), &q, &mut f1, d).map_err(|e| diverged(e, iter, residual))?;
        eval_stages(|x, o| sys.f2(x, o), &qt, &mut f2, d).map_err(|e| diverged(e, iter, residual))?;
        combine(&mut p_new, &state.p, h, scheme.a_hat(), &f1, d);
        add_product(&mut p_new, h, scheme.a_tilde_hat(), &f2, d);
        residual = check_update(&p_new, &p, scale, iter, residual)?;
        std::mem::swap(&mut p, &mut p_new);
        if residual <= cfg.tolerance {
            combine(&mut q, &state.q, h, scheme.a(), &p, d);
            combine(&mut qt, &state.q, h, scheme.a_tilde(), &p, d);
            return Ok(StageSolution {
                dim: d,
                q,
                p,
                q_tilde: qt,
                f1,
                f2,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

fn linearly_implicit(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
    cache: &LinearBlockCache,
) -> Result<StageSolution> {
    let d = state.dim();
    let (s1, s2) = (scheme.s1(), scheme.s2());
    let omega_sq = sys.linear_fast().expect("checked by caller");
    let scale = state.scale();
    let mut p = state.p.repeat(s1);
    let mut q = vec![0.0; s1 * d];
    let mut qt = vec![0.0; s2 * d];
    let mut f1 = vec![0.0; s1 * d];
    let mut g = vec![0.0; s1 * d];
    let mut p_new = vec![0.0; s1 * d];
    let mut rhs = DVector::<f64>::zeros(s1 + s2);
    let mut residual = f64::INFINITY;
    combine(&mut q, &state.q, h, scheme.a(), &p, d);
    for iter in 1..=cfg.max_iterations {
        eval_stages(|x, o| sys.f1(x, o), &q, &mut f1, d).map_err(|e| diverged(e, iter, residual))?;
        g.fill(0.0);
        add_product(&mut g, h, scheme.a_hat(), &f1, d);
        for m in 0..d {
            for k in 0..s2 {
                rhs[k] = state.q[m];
            }
            for i in 0..s1 {
                rhs[s2 + i] = state.p[m] + g[i * d + m];
            }
            let x = cache.blocks[cache.component_block[m]]
                .solve(&rhs)
                .ok_or(Error::SingularStageSystem)?;
            for k in 0..s2 {
                qt[k * d + m] = x[k];
            }
            for i in 0..s1 {
                p_new[i * d + m] = x[s2 + i];
            }
        }
        residual = check_update(&p_new, &p, scale, iter, residual)?;
        std::mem::swap(&mut p, &mut p_new);
        combine(&mut q, &state.q, h, scheme.a(), &p, d);
        if residual <= cfg.tolerance {
            let mut f2 = vec![0.0; s2 * d];
            for k in 0..s2 {
                for m in 0..d {
                    f2[k * d + m] = -omega_sq[m] * qt[k * d + m];
                }
            }
            return Ok(StageSolution {
                dim: d,
                q,
                p,
                q_tilde: qt,
                f1,
                f2,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

//! The Fermi–Pasta–Ulam–Tsingou chain: `2ℓ` unit masses joined by
//! alternating soft quartic springs and stiff linear springs of frequency
//! `ω`, and the experiments run on it.
//!
//! Positions are ordered `q = [q_s1..q_sℓ, q_f1..q_fℓ]` (slow, then fast),
//! momenta likewise.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::integrator::{reference_solve_with, ReferenceOptions, StageSolveConfig, Stepper};
use crate::scheme::SchemeSpec;
use crate::system::{PhaseState, SplitForceSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FputParams {
    pub ell: usize,
    pub omega: f64,
}

impl Default for FputParams {
    fn default() -> Self {
        Self { ell: 3, omega: 50.0 }
    }
}

impl FputParams {
    pub fn new(ell: usize, omega: f64) -> Result<Self> {
        let p = Self { ell, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 {
            return Err(Error::invalid("FPUT needs ell >= 1"));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid("FPUT needs a finite omega > 0"));
        }
        Ok(())
    }

    /// Number of positions, `2ℓ`.
    pub fn dim(&self) -> usize {
        2 * self.ell
    }
}

/// Quartic spring arguments `u₀ = q_s1 − q_f1`,
/// `uᵢ = q_s,i+1 − q_f,i+1 − q_s,i − q_f,i`, `u_ℓ = q_sℓ + q_fℓ`.
fn spring_stretch(ell: usize, q: &[f64], mut visit: impl FnMut(f64, &[(usize, f64)])) {
    let (s, f) = (0, ell);
    visit(q[s] - q[f], &[(s, 1.0), (f, -1.0)]);
    for i in 0..ell - 1 {
        let u = q[s + i + 1] - q[f + i + 1] - q[s + i] - q[f + i];
        visit(u, &[(s + i + 1, 1.0), (f + i + 1, -1.0), (s + i, -1.0), (f + i, -1.0)]);
    }
    visit(q[s + ell - 1] + q[f + ell - 1], &[(s + ell - 1, 1.0), (f + ell - 1, 1.0)]);
}

/// `V¹(q) = ¼ ∑ uₖ⁴`.
pub fn quartic_potential(ell: usize, q: &[f64]) -> f64 {
    let mut v = 0.0;
    spring_stretch(ell, q, |u, _| v += 0.25 * u.powi(4));
    v
}

/// `out = −∇V¹(q)`.
pub fn quartic_force(ell: usize, q: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    spring_stretch(ell, q, |u, terms| {
        let u3 = u * u * u;
        for &(idx, sign) in terms {
            out[idx] -= sign * u3;
        }
    });
}

/// `F¹ = −∇V¹`, `F² = −Ω²q` with `Ω² = diag(0, ω²)`, and the Hamiltonian.
pub fn fput_system(params: FputParams) -> Result<SplitForceSystem> {
    params.validate()?;
    let ell = params.ell;
    let w2 = params.omega * params.omega;
    let mut omega_sq = vec![0.0; ell];
    omega_sq.extend(std::iter::repeat_n(w2, ell));
    let sys = SplitForceSystem::with_linear_fast(omega_sq, move |q: &[f64], out: &mut [f64]| {
        quartic_force(ell, q, out)
    })?;
    Ok(sys.with_hamiltonian(move |q: &[f64], p: &[f64]| hamiltonian(ell, w2, q, p)))
}

fn hamiltonian(ell: usize, w2: f64, q: &[f64], p: &[f64]) -> f64 {
    let kinetic: f64 = 0.5 * p.iter().map(|x| x * x).sum::<f64>();
    let stiff: f64 = 0.5 * w2 * q[ell..].iter().map(|x| x * x).sum::<f64>();
    kinetic + stiff + quartic_potential(ell, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub hamiltonian: f64,
    /// `Iᵢ = ½p_fi² + ½ω²q_fi²`.
    pub oscillatory: Vec<f64>,
    pub total_oscillatory: f64,
}

pub fn energy_breakdown(params: &FputParams, state: &PhaseState) -> Result<EnergyBreakdown> {
    params.validate()?;
    let d = params.dim();
    if state.q.len() != d || state.p.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: state.q.len().max(state.p.len()),
        });
    }
    let ell = params.ell;
    let w2 = params.omega * params.omega;
    let oscillatory: Vec<f64> = (0..ell)
        .map(|i| 0.5 * state.p[ell + i].powi(2) + 0.5 * w2 * state.q[ell + i].powi(2))
        .collect();
    Ok(EnergyBreakdown {
        hamiltonian: hamiltonian(ell, w2, &state.q, &state.p),
        total_oscillatory: oscillatory.iter().sum(),
        oscillatory,
    })
}

/// `q_s1 = 1`, `p_s1 = 1`, `q_f1 = 1/ω`, `p_f1 = 1`, everything else zero.
pub fn paper_initial_state(params: &FputParams) -> PhaseState {
    let ell = params.ell;
    let mut q = vec![0.0; 2 * ell];
    let mut p = vec![0.0; 2 * ell];
    q[0] = 1.0;
    p[0] = 1.0;
    q[ell] = 1.0 / params.omega;
    p[ell] = 1.0;
    PhaseState { q, p, t: 0.0 }
}

fn step_count(h: f64, t_end: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("step size must be positive"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid("final time must be >= 0"));
    }
    Ok((t_end / h).round() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub t: f64,
    /// `|H − H₀|`
    pub h_err: f64,
    pub oscillatory: Vec<f64>,
    pub total_oscillatory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub scheme: String,
    pub params: FputParams,
    pub h: f64,
    pub h0: f64,
    pub points: Vec<EnergyPoint>,
}

impl EnergySeries {
    pub fn max_h_err(&self) -> f64 {
        self.points.iter().map(|p| p.h_err).fold(0.0, f64::max)
    }

    /// Largest `|H − H₀|` over the first and second half of the run.
    pub fn half_maxima(&self) -> (f64, f64) {
        let t_mid = 0.5 * self.points.last().map_or(0.0, |p| p.t);
        self.points.iter().fold((0.0f64, 0.0f64), |(a, b), p| {
            if p.t <= t_mid {
                (a.max(p.h_err), b)
            } else {
                (a, b.max(p.h_err))
            }
        })
    }

    /// Least-squares slope of `|H − H₀|` against `t`.
    pub fn drift_slope(&self) -> f64 {
        let n = self.points.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mt = self.points.iter().map(|p| p.t).sum::<f64>() / n;
        let me = self.points.iter().map(|p| p.h_err).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for p in &self.points {
            sxy += (p.t - mt) * (p.h_err - me);
            sxx += (p.t - mt).powi(2);
        }
        if sxx == 0.0 {
            0.0
        } else {
            sxy / sxx
        }
    }

    /// CSV `t,H_err,I1..I_ell,I_total`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["t".to_string(), "H_err".into()];
        header.extend((1..=self.params.ell).map(|i| format!("I{i}")));
        header.push("I_total".into());
        writeln!(w, "{}", header.join(","))?;
        for p in &self.points {
            let mut row = vec![fmt_f64(p.t), fmt_f64(p.h_err)];
            row.extend(p.oscillatory.iter().map(|&x| fmt_f64(x)));
            row.push(fmt_f64(p.total_oscillatory));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrate from [`paper_initial_state`] and record energies at every step.
pub fn experiment_energy<S: Stepper + ?Sized>(
    stepper: &mut S,
    params: &FputParams,
    h: f64,
    t_end: f64,
) -> Result<EnergySeries> {
    experiment_energy_with_stride(stepper, params, h, t_end, 1)
}

/// As [`experiment_energy`], recording every `stride`-th step and the last.
pub fn experiment_energy_with_stride<S: Stepper + ?Sized>(
    stepper: &mut S,
    params: &FputParams,
    h: f64,
    t_end: f64,
    stride: usize,
) -> Result<EnergySeries> {
    let n = step_count(h, t_end)?;
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let sys = fput_system(*params)?;
    let mut state = paper_initial_state(params);
    let e0 = energy_breakdown(params, &state)?;
    let h0 = e0.hamiltonian;
    let point = |t: f64, e: EnergyBreakdown| EnergyPoint {
        t,
        h_err: (e.hamiltonian - h0).abs(),
        oscillatory: e.oscillatory,
        total_oscillatory: e.total_oscillatory,
    };
    let mut points = vec![point(0.0, e0)];
    for k in 1..=n {
        state = stepper
            .step(&sys, &state, h)
            .map_err(|e| Error::StepFailed {
                step: k,
                source: Box::new(e),
            })?
            .state;
        if k % stride == 0 || k == n {
            points.push(point(k as f64 * h, energy_breakdown(params, &state)?));
        }
    }
    Ok(EnergySeries {
        scheme: stepper.name(),
        params: *params,
        h,
        h0,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub h_omega_over_pi: f64,
    pub omega: f64,
    /// `max_t |H − H₀|`, NaN if the run failed.
    pub max_h_err: f64,
    /// `max_t |ωI − ωI₀|`, NaN if the run failed.
    pub max_scaled_i_dev: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: String,
    pub ell: usize,
    pub h: f64,
    pub t_end: f64,
    pub points: Vec<SweepPoint>,
}

/// Peak of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub h_omega_over_pi: f64,
    pub value: f64,
    /// Ratio of the peak to the median of the curve.
    pub prominence: f64,
}

impl SweepResult {
    /// CSV `h_omega_over_pi,max_H_err,max_scaled_I_dev`; failed points are
    /// written as `nan`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "h_omega_over_pi,max_H_err,max_scaled_I_dev")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(p.h_omega_over_pi),
                fmt_f64(p.max_h_err),
                fmt_f64(p.max_scaled_i_dev)
            )?;
        }
        Ok(())
    }

    /// Strict local maxima of `max_h_err` over a window of `±half_width`
    /// (in units of `hω/π`), strongest first. Failed points count as
    /// maximal.
    pub fn energy_peaks(&self, half_width: f64) -> Vec<Peak> {
        let value = |p: &SweepPoint| {
            if p.max_h_err.is_nan() {
                f64::INFINITY
            } else {
                p.max_h_err
            }
        };
        let mut sorted: Vec<f64> = self.points.iter().map(value).collect();
        sorted.sort_by(f64::total_cmp);
        let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
        let mut peaks: Vec<Peak> = self
            .points
            .iter()
            .filter(|p| {
                let v = value(p);
                self.points
                    .iter()
                    .filter(|o| (o.h_omega_over_pi - p.h_omega_over_pi).abs() <= half_width)
                    .all(|o| std::ptr::eq(o, *p) || value(o) < v)
            })
            .map(|p| Peak {
                h_omega_over_pi: p.h_omega_over_pi,
                value: value(p),
                prominence: value(p) / median,
            })
            .collect();
        peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
        peaks
    }
}

/// `n` equally spaced values of `hω/π` in `(0, max]`.
pub fn sweep_grid(n: usize, max: f64) -> Vec<f64> {
    (1..=n).map(|k| max * k as f64 / n as f64).collect()
}

fn sweep_point(
    spec: &SchemeSpec,
    cfg: StageSolveConfig,
    ell: usize,
    h: f64,
    t_end: f64,
    x: f64,
) -> SweepPoint {
    let omega = x * std::f64::consts::PI / h;
    let run = || -> Result<(f64, f64)> {
        let params = FputParams::new(ell, omega)?;
        let mut stepper = spec.stepper(cfg)?;
        let series = experiment_energy(&mut stepper, &params, h, t_end)?;
        let i0 = series.points[0].total_oscillatory;
        let dev = series
            .points
            .iter()
            .map(|p| omega * (p.total_oscillatory - i0).abs())
            .fold(0.0, f64::max);
        Ok((series.max_h_err(), dev))
    };
    match run() {
        Ok((max_h_err, max_scaled_i_dev)) => SweepPoint {
            h_omega_over_pi: x,
            omega,
            max_h_err,
            max_scaled_i_dev,
            error: None,
        },
        Err(e) => SweepPoint {
            h_omega_over_pi: x,
            omega,
            max_h_err: f64::NAN,
            max_scaled_i_dev: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// For each `hω/π` in `grid`, integrate over `[0, t_end]` and record the
/// maximum energy error and scaled oscillatory energy deviation. Points run
/// in parallel on the current rayon pool; failures are recorded per point.
pub fn experiment_resonance_sweep(
    spec: &SchemeSpec,
    cfg: StageSolveConfig,
    ell: usize,
    h: f64,
    t_end: f64,
    grid: &[f64],
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    step_count(h, t_end)?;
    FputParams::new(ell, 1.0)?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let points = grid
        .par_iter()
        .map(|&x| sweep_point(spec, cfg, ell, h, t_end, x))
        .collect();
    Ok(SweepResult {
        scheme: spec.to_string(),
        ell,
        h,
        t_end,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub scheme: SchemeSpec,
    pub omega: f64,
    pub h: f64,
    /// Max-norm error over the slow positions at the final time.
    pub err_qs: f64,
    /// Max-norm error over the slow momenta.
    pub err_ps: f64,
    /// Max-norm error over all positions and momenta.
    pub err_all: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionTable {
    pub ell: usize,
    pub t_end: f64,
    pub rows: Vec<ReductionRow>,
}

/// Least-squares slope of `log y` against `log x`, over finite positive
/// pairs.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl ReductionTable {
    /// Rows of one scheme and frequency, sorted by `h`.
    pub fn series(&self, scheme: &SchemeSpec, omega: f64) -> Vec<&ReductionRow> {
        let mut rows: Vec<&ReductionRow> = self
            .rows
            .iter()
            .filter(|r| r.scheme == *scheme && r.omega == omega)
            .collect();
        rows.sort_by(|a, b| a.h.total_cmp(&b.h));
        rows
    }

    /// Log-log slopes `(positions, momenta, all)` for one scheme and `ω`.
    pub fn slopes(&self, scheme: &SchemeSpec, omega: f64) -> (f64, f64, f64) {
        let rows = self.series(scheme, omega);
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let col = |f: fn(&ReductionRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
        (
            log_log_slope(&hs, &col(|r| r.err_qs)),
            log_log_slope(&hs, &col(|r| r.err_ps)),
            log_log_slope(&hs, &col(|r| r.err_all)),
        )
    }

    /// CSV `scheme,omega,h,err_qs,err_ps`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "scheme,omega,h,err_qs,err_ps")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.scheme,
                fmt_f64(r.omega),
                fmt_f64(r.h),
                fmt_f64(r.err_qs),
                fmt_f64(r.err_ps)
            )?;
        }
        Ok(())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Errors at `t_end` against [`reference_solve_with`] for every scheme,
/// `ω` and `h`. Rows are ordered by scheme, then `ω`, then `h` as given.
pub fn experiment_order_reduction(
    schemes: &[SchemeSpec],
    cfg: StageSolveConfig,
    ell: usize,
    t_end: f64,
    hs: &[f64],
    omegas: &[f64],
    reference: &ReferenceOptions,
) -> Result<ReductionTable> {
    if schemes.is_empty() || hs.is_empty() || omegas.is_empty() {
        return Err(Error::invalid("order reduction needs schemes, step sizes and frequencies"));
    }
    for &h in hs {
        step_count(h, t_end)?;
    }
    for &w in omegas {
        FputParams::new(ell, w)?;
    }
    let references: Vec<Result<PhaseState>> = omegas
        .par_iter()
        .map(|&w| {
            let params = FputParams::new(ell, w)?;
            let sys = fput_system(params)?;
            reference_solve_with(&sys, &paper_initial_state(&params), t_end, reference)
        })
        .collect();
    let jobs: Vec<(SchemeSpec, usize, f64)> = schemes
        .iter()
        .flat_map(|s| (0..omegas.len()).flat_map(move |k| hs.iter().map(move |&h| (*s, k, h))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(scheme, k, h)| {
            let omega = omegas[k];
            let run = || -> Result<(f64, f64, f64)> {
                let exact = references[k].as_ref().map_err(Clone::clone)?;
                let params = FputParams::new(ell, omega)?;
                let sys = fput_system(params)?;
                let mut stepper = scheme.stepper(cfg)?;
                let n = step_count(h, t_end)?;
                let mut state = paper_initial_state(&params);
                for step in 1..=n {
                    state = stepper
                        .step(&sys, &state, h)
                        .map_err(|e| Error::StepFailed {
                            step,
                            source: Box::new(e),
                        })?
                        .state;
                }
                Ok((
                    max_diff(&state.q[..ell], &exact.q[..ell]),
                    max_diff(&state.p[..ell], &exact.p[..ell]),
                    max_diff(&state.q, &exact.q).max(max_diff(&state.p, &exact.p)),
                ))
            };
            match run() {
                Ok((err_qs, err_ps, err_all)) => ReductionRow {
                    scheme,
                    omega,
                    h,
                    err_qs,
                    err_ps,
                    err_all,
                    error: None,
                },
                Err(e) => ReductionRow {
                    scheme,
                    omega,
                    h,
                    err_qs: f64::NAN,
                    err_ps: f64::NAN,
                    err_all: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ReductionTable { ell, t_end, rows })
}

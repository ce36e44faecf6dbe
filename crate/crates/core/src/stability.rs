//! Linear stability on the test equation `q̈ = −ω² q`.
//!
//! One step of a scheme maps `(q₀, p₀/ω)` to `(q₁, p₁/ω)` through the 2×2
//! matrix `M(μ)`, `μ = ωh`. Its half trace decides stability, gives the
//! modified frequency `cos μ̃ = ½ tr M` and, together with the filter
//! functions `ψᵢ`, the form of the method as a modified trigonometric
//! integrator.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{ArkStepper, StageSolveConfig};
use crate::system::{PhaseState, SplitForceSystem};
use crate::tableau::ArkScheme;

/// Grid spacing used by [`stability_intervals`].
pub const GRID_SPACING: f64 = 1e-3;
/// Width to which interval boundaries and tangencies are refined.
pub const REFINE_TOL: f64 = 1e-10;
/// Slack on `|½ tr M| ≤ 1` for rounding.
pub const STABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMatrix {
    pub mu: f64,
    pub m: Matrix2<f64>,
}

impl StabilityMatrix {
    pub fn half_trace(&self) -> f64 {
        0.5 * (self.m[(0, 0)] + self.m[(1, 1)])
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// `‖M − σI‖_max`, zero iff `M = σI`.
    pub fn distance_to_scaled_identity(&self, sigma: f64) -> f64 {
        (self.m - Matrix2::identity() * sigma).amax()
    }
}

// K(μ) = [I, −μÃ; μẪ, I] acting on [Q̃; P]
fn stage_matrix(scheme: &ArkScheme, mu: f64) -> DMatrix<f64> {
    let (s1, s2) = (scheme.s1(), scheme.s2());
    let n = s1 + s2;
    let mut k = DMatrix::<f64>::identity(n, n);
    for i in 0..s2 {
        for j in 0..s1 {
            k[(i, s2 + j)] = -mu * scheme.a_tilde()[(i, j)];
        }
    }
    for i in 0..s1 {
        for j in 0..s2 {
            k[(s2 + i, j)] = mu * scheme.a_tilde_hat()[(i, j)];
        }
    }
    k
}

fn right_block(scheme: &ArkScheme) -> DMatrix<f64> {
    let (s1, s2) = (scheme.s1(), scheme.s2());
    DMatrix::from_fn(s1 + s2, 2, |r, col| match (col, r < s2) {
        (0, true) | (1, false) => 1.0,
        _ => 0.0,
    })
}

fn left_block(scheme: &ArkScheme) -> DMatrix<f64> {
    let (s1, s2) = (scheme.s1(), scheme.s2());
    let mut l = DMatrix::zeros(2, s1 + s2);
    for j in 0..s1 {
        l[(0, s2 + j)] = scheme.b()[j];
    }
    for k in 0..s2 {
        l[(1, k)] = -scheme.b_tilde()[k];
    }
    l
}

fn to_matrix2(m: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// `M(μ)` and `dM/dμ`.
fn matrix_and_derivative(scheme: &ArkScheme, mu: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let (s1, s2) = (scheme.s1(), scheme.s2());
    let lu = stage_matrix(scheme, mu).lu();
    let l = left_block(scheme);
    let x = lu.solve(&right_block(scheme)).ok_or(Error::SingularAtMu { mu })?;
    // K' x with K' = [0, −Ã; Ẫ, 0]
    let mut kx = DMatrix::zeros(s1 + s2, 2);
    kx.rows_mut(0, s2).copy_from(&(-scheme.a_tilde() * x.rows(s2, s1)));
    kx.rows_mut(s2, s1).copy_from(&(scheme.a_tilde_hat() * x.rows(0, s2)));
    let y = lu.solve(&kx).ok_or(Error::SingularAtMu { mu })?;
    let lx = &l * &x;
    let m = Matrix2::identity() + to_matrix2(&lx) * mu;
    let dm = to_matrix2(&lx) - to_matrix2(&(&l * &y)) * mu;
    Ok((m, dm))
}

/// `M(μ) = I + μ [0, bᵀ; −b̃ᵀ, 0] K(μ)⁻¹ blockdiag(𝟙, 𝟙)`.
pub fn stability_matrix(scheme: &ArkScheme, mu: f64) -> Result<StabilityMatrix> {
    if !mu.is_finite() {
        return Err(Error::invalid("mu must be finite"));
    }
    let lu = stage_matrix(scheme, mu).lu();
    let x = lu.solve(&right_block(scheme)).ok_or(Error::SingularAtMu { mu })?;
    let m = Matrix2::identity() + to_matrix2(&(left_block(scheme) * x)) * mu;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularAtMu { mu });
    }
    Ok(StabilityMatrix { mu, m })
}

pub fn half_trace(scheme: &ArkScheme, mu: f64) -> Result<f64> {
    Ok(stability_matrix(scheme, mu)?.half_trace())
}

/// `d(½ tr M)/dμ`.
pub fn half_trace_derivative(scheme: &ArkScheme, mu: f64) -> Result<f64> {
    let (_, dm) = matrix_and_derivative(scheme, mu)?;
    Ok(0.5 * dm.trace())
}

/// Principal `μ̃ = arccos(½ tr M(μ)) ∈ [0, π]`.
pub fn modified_frequency(scheme: &ArkScheme, mu: f64) -> Result<f64> {
    let ht = half_trace(scheme, mu)?;
    if ht.abs() > 1.0 + STABILITY_SLACK {
        return Err(Error::NotStableAtMu { mu, half_trace: ht });
    }
    Ok(ht.clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub k: usize,
    /// `bᵀ(ẪÃ)ᵏc`
    pub primary: f64,
    /// `b̃ᵀ(ÃẪ)ᵏc̃`
    pub secondary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCheck {
    /// `max |M₁₁(μ) − M₂₂(μ)|` over the samples where `M` is defined.
    pub max_deviation: f64,
    /// Mu where the maximum was found.
    pub worst_mu: f64,
    pub moments: Vec<MomentPair>,
}

impl DiagonalCheck {
    pub fn max_moment_mismatch(&self) -> f64 {
        self.moments
            .iter()
            .map(|m| (m.primary - m.secondary).abs())
            .fold(0.0, f64::max)
    }
}

/// Compare the diagonal entries of `M` on `mu_samples`, together with the
/// moment identities that make them equal.
pub fn check_m11_equals_m22(scheme: &ArkScheme, mu_samples: &[f64]) -> DiagonalCheck {
    let (max_deviation, worst_mu) = mu_samples
        .par_iter()
        .filter_map(|&mu| {
            stability_matrix(scheme, mu)
                .ok()
                .map(|s| ((s.m[(0, 0)] - s.m[(1, 1)]).abs(), mu))
        })
        .reduce(|| (0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    let ath_at = scheme.a_tilde_hat() * scheme.a_tilde();
    let at_ath = scheme.a_tilde() * scheme.a_tilde_hat();
    let b = DVector::from_column_slice(scheme.b());
    let bt = DVector::from_column_slice(scheme.b_tilde());
    let mut v = DVector::from_column_slice(scheme.c());
    let mut vt = DVector::from_column_slice(scheme.c_tilde());
    let mut moments = Vec::new();
    for k in 0..scheme.s1().min(scheme.s2()) {
        moments.push(MomentPair {
            k,
            primary: b.dot(&v),
            secondary: bt.dot(&vt),
        });
        v = &ath_at * v;
        vt = &at_ath * vt;
    }
    DiagonalCheck {
        max_deviation,
        worst_mu,
        moments,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEvaluation {
    pub mu: f64,
    /// `ψᵢ = bᵀ(I + μ²ẪÃ)⁻¹Âᵢ`, one per primary stage.
    pub psi: Vec<f64>,
    /// `μ̃`, absent where `|½ tr M| > 1`.
    pub modified_mu: Option<f64>,
}

pub fn filter_functions(scheme: &ArkScheme, mu: f64) -> Result<FilterEvaluation> {
    if !mu.is_finite() {
        return Err(Error::invalid("mu must be finite"));
    }
    let s1 = scheme.s1();
    let g = DMatrix::<f64>::identity(s1, s1) + scheme.a_tilde_hat() * scheme.a_tilde() * (mu * mu);
    // ψᵀ = bᵀ G⁻¹ Â, so solve Gᵀy = b
    let y = g
        .transpose()
        .lu()
        .solve(&DVector::from_column_slice(scheme.b()))
        .ok_or(Error::SingularAtMu { mu })?;
    let psi = scheme.a_hat().transpose() * y;
    let modified_mu = modified_frequency(scheme, mu).ok();
    Ok(FilterEvaluation {
        mu,
        psi: psi.iter().copied().collect(),
        modified_mu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonanceKind {
    /// `½ tr M` crosses ±1.
    Boundary,
    /// `|½ tr M|` touches 1 from inside.
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub mu: f64,
    /// `+1` or `−1`, the value of `½ tr M` there.
    pub sign: i8,
    pub kind: ResonanceKind,
    /// `M = sign·I` there, so two independent eigenvectors exist.
    pub diagonalizable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySample {
    pub mu: f64,
    pub half_trace: f64,
    pub det: f64,
    pub m11: f64,
    pub m22: f64,
}

impl StabilitySample {
    pub fn modified_mu(&self) -> Option<f64> {
        (self.half_trace.abs() <= 1.0 + STABILITY_SLACK).then(|| self.half_trace.clamp(-1.0, 1.0).acos())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub scheme: String,
    pub mu_max: f64,
    pub p_stable: bool,
    pub intervals: Vec<Interval>,
    pub resonances: Vec<Resonance>,
    #[serde(skip)]
    pub samples: Vec<StabilitySample>,
}

impl StabilityReport {
    pub fn max_abs_half_trace(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.half_trace.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_det_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.det - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV `mu,half_trace,det,m11,m22,modified_mu`, every `stride`-th
    /// sample. `modified_mu` is empty where undefined.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, stride: usize) -> std::io::Result<()> {
        use crate::format::fmt_f64;
        writeln!(w, "mu,half_trace,det,m11,m22,modified_mu")?;
        let stride = stride.max(1);
        for s in self.samples.iter().step_by(stride) {
            let mm = s.modified_mu().map(fmt_f64).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(s.mu),
                fmt_f64(s.half_trace),
                fmt_f64(s.det),
                fmt_f64(s.m11),
                fmt_f64(s.m22),
                mm
            )?;
        }
        Ok(())
    }
}

fn sample(scheme: &ArkScheme, mu: f64) -> StabilitySample {
    match stability_matrix(scheme, mu) {
        Ok(s) => StabilitySample {
            mu,
            half_trace: s.half_trace(),
            det: s.det(),
            m11: s.m[(0, 0)],
            m22: s.m[(1, 1)],
        },
        Err(_) => StabilitySample {
            mu,
            half_trace: f64::NAN,
            det: f64::NAN,
            m11: f64::NAN,
            m22: f64::NAN,
        },
    }
}

fn is_stable(ht: f64) -> bool {
    ht.abs() <= 1.0 + STABILITY_SLACK
}

/// Point where `pred` changes value on `[lo, hi]`, given that it differs
/// at the two ends.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let at_lo = pred(lo);
    while hi - lo > REFINE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Classify `M(μ)` at a point where `½ tr M = sign`.
fn diagonalizable_at(scheme: &ArkScheme, mu: f64, sign: f64) -> bool {
    // entries of M − σI vanish linearly in the distance to a non-defective
    // point; the refinement width bounds that distance
    stability_matrix(scheme, mu).is_ok_and(|s| s.distance_to_scaled_identity(sign) < 1e-6)
}

/// Sample `½ tr M` on `[0, mu_max]` with spacing at most [`GRID_SPACING`],
/// then refine the boundaries of `|½ tr M| ≤ 1` and the interior points
/// where `|½ tr M|` touches 1.
pub fn stability_intervals(scheme: &ArkScheme, mu_max: f64) -> Result<StabilityReport> {
    if !(mu_max > 0.0) || !mu_max.is_finite() {
        return Err(Error::invalid("mu_max must be positive and finite"));
    }
    let n = (mu_max / GRID_SPACING).ceil() as usize;
    let samples: Vec<StabilitySample> = (0..=n)
        .into_par_iter()
        .map(|k| sample(scheme, mu_max * k as f64 / n as f64))
        .collect();
    let ht = |mu: f64| half_trace(scheme, mu).unwrap_or(f64::NAN);

    let mut intervals: Vec<Interval> = Vec::new();
    let mut resonances: Vec<Resonance> = Vec::new();
    let mut open: Option<f64> = None;
    for k in 0..samples.len() {
        let cur = samples[k];
        let stable = is_stable(cur.half_trace);
        match (open, stable) {
            (None, true) => {
                let lo = if k == 0 {
                    0.0
                } else {
                    let prev = samples[k - 1];
                    let sign = if cur.half_trace > 0.0 { 1.0 } else { -1.0 };
                    let mu = if prev.half_trace.is_nan() {
                        cur.mu
                    } else {
                        bisect(prev.mu, cur.mu, |m| is_stable(ht(m)))
                    };
                    resonances.push(Resonance {
                        mu,
                        sign: sign as i8,
                        kind: ResonanceKind::Boundary,
                        diagonalizable: diagonalizable_at(scheme, mu, sign),
                    });
                    mu
                };
                open = Some(lo);
            }
            (Some(lo), false) => {
                let prev = samples[k - 1];
                let sign = if prev.half_trace > 0.0 { 1.0 } else { -1.0 };
                let mu = if cur.half_trace.is_nan() {
                    prev.mu
                } else {
                    bisect(prev.mu, cur.mu, |m| is_stable(ht(m)))
                };
                resonances.push(Resonance {
                    mu,
                    sign: sign as i8,
                    kind: ResonanceKind::Boundary,
                    diagonalizable: diagonalizable_at(scheme, mu, sign),
                });
                intervals.push(Interval { lo, hi: mu });
                open = None;
            }
            _ => {}
        }
        // interior extremum of ½ tr M close to ±1
        if stable && k > 0 && k + 1 < samples.len() {
            let (a, b, c) = (samples[k - 1].half_trace, cur.half_trace, samples[k + 1].half_trace);
            let extremum = (b >= a && b > c) || (b <= a && b < c);
            if extremum && b.abs() > 1.0 - 1e-4 && is_stable(a) && is_stable(c) {
                let dht = |m: f64| half_trace_derivative(scheme, m).unwrap_or(f64::NAN);
                let (lo, hi) = (samples[k - 1].mu, samples[k + 1].mu);
                let mu = if dht(lo).signum() != dht(hi).signum() {
                    bisect(lo, hi, |m| dht(m) > 0.0)
                } else {
                    cur.mu
                };
                let value = ht(mu);
                let sign = value.signum();
                let touches = (value.abs() - 1.0).abs() <= 1e-9;
                let duplicate = resonances
                    .iter()
                    .any(|r| (r.mu - mu).abs() < 10.0 * REFINE_TOL);
                if touches && !duplicate {
                    resonances.push(Resonance {
                        mu,
                        sign: sign as i8,
                        kind: ResonanceKind::Tangency,
                        diagonalizable: diagonalizable_at(scheme, mu, sign),
                    });
                }
            }
        }
    }
    if let Some(lo) = open {
        intervals.push(Interval { lo, hi: samples.last().map_or(mu_max, |s| s.mu) });
    }
    resonances.sort_by(|a, b| a.mu.total_cmp(&b.mu));

    // a defective tangency is an isolated unstable point: split there
    let mut split = Vec::with_capacity(intervals.len());
    for iv in intervals {
        let mut lo = iv.lo;
        for r in resonances.iter().filter(|r| {
            r.kind == ResonanceKind::Tangency && !r.diagonalizable && r.mu > iv.lo && r.mu < iv.hi
        }) {
            split.push(Interval { lo, hi: r.mu });
            lo = r.mu;
        }
        split.push(Interval { lo, hi: iv.hi });
    }
    let covered = split.len() == 1 && split[0].lo == 0.0 && split[0].hi >= mu_max * (1.0 - 1e-15);
    let p_stable = covered
        && resonances
            .iter()
            .filter(|r| r.kind == ResonanceKind::Tangency)
            .all(|r| r.diagonalizable);
    Ok(StabilityReport {
        scheme: scheme.name(),
        mu_max,
        p_stable,
        intervals: split,
        resonances,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigFormResidual {
    pub mu: f64,
    pub modified_mu: f64,
    /// `‖q₁ − 2cos(μ̃)q₀ + q₋₁ − h²∑ψᵢ(f(Q⁺ᵢ) + f(Q⁻ᵢ))‖∞`
    pub two_step: f64,
    /// `‖2h (M₁₂/μ) p₀ − (q₁ − q₋₁ − h²∑ψᵢ(f(Q⁺ᵢ) − f(Q⁻ᵢ)))‖∞`
    pub momentum: f64,
    /// As `momentum`, with `M₁₂` replaced by `sin μ̃`.
    pub momentum_sinc: f64,
}

/// Step `state` forward and backward by `h` and measure how well the
/// results satisfy the two-step trigonometric form of the method.
///
/// `sys` must have `F² = −ω² q` with a single `ω`; `F¹` plays the role of
/// `f`.
pub fn trig_form_step_check(
    scheme: &ArkScheme,
    sys: &SplitForceSystem,
    state: &PhaseState,
    h: f64,
    cfg: &StageSolveConfig,
) -> Result<TrigFormResidual> {
    let omega_sq = sys
        .linear_fast()
        .ok_or_else(|| Error::invalid("trigonometric form needs F² = −ω² q"))?;
    let w2 = omega_sq[0];
    if omega_sq.iter().any(|&w| w != w2) {
        return Err(Error::invalid("trigonometric form needs a single frequency"));
    }
    let mu = w2.sqrt() * h;
    let sm = stability_matrix(scheme, mu)?;
    let ht = sm.half_trace();
    if !is_stable(ht) {
        return Err(Error::NotStableAtMu { mu, half_trace: ht });
    }
    let mt = ht.clamp(-1.0, 1.0).acos();
    let psi = filter_functions(scheme, mu)?.psi;
    let mut stepper = ArkStepper::new(scheme.clone(), *cfg);
    let (plus, q1) = stepper.step_with_stages(sys, state, h)?;
    let (minus, qm1) = stepper.step_with_stages(sys, state, -h)?;
    let d = state.dim();
    // M₁₂/μ → 1 as μ → 0
    let m12_over_mu = if mu == 0.0 { 1.0 } else { sm.m[(0, 1)] / mu };
    let sin_over_mu = if mu == 0.0 { 1.0 } else { mt.sin() / mu };
    let (mut two_step, mut momentum, mut momentum_sinc) = (0.0f64, 0.0f64, 0.0f64);
    for m in 0..d {
        let mut sum = 0.0;
        let mut diff = 0.0;
        for (i, &w) in psi.iter().enumerate() {
            sum += w * (plus.f1[i * d + m] + minus.f1[i * d + m]);
            diff += w * (plus.f1[i * d + m] - minus.f1[i * d + m]);
        }
        let (q0, p0) = (state.q[m], state.p[m]);
        two_step = two_step.max((q1.q[m] - 2.0 * mt.cos() * q0 + qm1.q[m] - h * h * sum).abs());
        let rhs = q1.q[m] - qm1.q[m] - h * h * diff;
        momentum = momentum.max((2.0 * h * m12_over_mu * p0 - rhs).abs());
        momentum_sinc = momentum_sinc.max((2.0 * h * sin_over_mu * p0 - rhs).abs());
    }
    Ok(TrigFormResidual {
        mu,
        modified_mu: mt,
        two_step,
        momentum,
        momentum_sinc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{build_scheme, Variant};
    use approx::assert_abs_diff_eq;

    fn lgl(s1: usize) -> ArkScheme {
        build_scheme(s1, Variant::Interpolation).unwrap()
    }

    fn lglc(s1: usize) -> ArkScheme {
        build_scheme(s1, Variant::Collocation).unwrap()
    }

    fn ht4(mu: f64) -> f64 {
        let m2 = mu * mu;
        let m4 = m2 * m2;
        (1.0 - 5.0 * m2 / 12.0 + m4 / 144.0) / (1.0 + m2 / 12.0 + m4 / 144.0)
    }

    fn ht6(mu: f64) -> f64 {
        let m2 = mu * mu;
        let (m4, m6) = (m2 * m2, m2 * m2 * m2);
        (1.0 - 9.0 * m2 / 20.0 + 11.0 * m4 / 600.0 - m6 / 14400.0)
            / (1.0 + m2 / 20.0 + m4 / 600.0 + m6 / 14400.0)
    }

    #[test]
    fn identity_at_zero() {
        for s in [lgl(2), lgl(4), lglc(3)] {
            let m = stability_matrix(&s, 0.0).unwrap().m;
            assert_eq!(m, Matrix2::identity());
        }
    }

    #[test]
    fn imex_matrix() {
        let s = lgl(2);
        for mu in [0.3, 1.0, 2.0, 7.5] {
            let nu = mu / 2.0;
            let d = 1.0 + nu * nu;
            let m = stability_matrix(&s, mu).unwrap().m;
            let expect = Matrix2::new(1.0 - nu * nu, mu, -mu, 1.0 - nu * nu) / d;
            assert!((m - expect).amax() < 1e-14, "mu={mu}");
        }
    }

    #[test]
    fn closed_form_half_traces() {
        let (s4, s6) = (lgl(3), lgl(4));
        for k in 0..=200 {
            let mu = 0.1 * k as f64;
            assert_abs_diff_eq!(half_trace(&s4, mu).unwrap(), ht4(mu), epsilon = 1e-12);
            assert_abs_diff_eq!(half_trace(&s6, mu).unwrap(), ht6(mu), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(half_trace(&s4, 2.0 * 3f64.sqrt()).unwrap(), -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(half_trace(&s6, 10f64.sqrt()).unwrap(), -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(half_trace(&s6, 2.0 * 15f64.sqrt()).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn derivative_matches_differences() {
        for s in [lgl(3), lglc(4)] {
            for mu in [0.5, 2.0, 5.0] {
                let eps = 1e-6;
                let fd = (half_trace(&s, mu + eps).unwrap() - half_trace(&s, mu - eps).unwrap()) / (2.0 * eps);
                assert_abs_diff_eq!(half_trace_derivative(&s, mu).unwrap(), fd, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn modified_frequency_values() {
        let imex = lgl(2);
        assert_eq!(modified_frequency(&imex, 0.0).unwrap(), 0.0);
        for mu in [0.5, 1.0, 3.0, 10.0] {
            let q = mu * mu / 4.0;
            assert_abs_diff_eq!(
                modified_frequency(&imex, mu).unwrap(),
                ((1.0 - q) / (1.0 + q)).acos(),
                epsilon = 1e-12
            );
        }
        assert!(matches!(
            modified_frequency(&lglc(2), 5.0),
            Err(Error::NotStableAtMu { .. })
        ));
    }

    #[test]
    fn filters_closed_forms() {
        let (s4, s6) = (lgl(3), lgl(4));
        let r5 = 5f64.sqrt();
        for mu in [0.0f64, 0.7, 2.0, 3.4, 10.0] {
            let (m2, m4) = (mu * mu, mu.powi(4));
            let d = m4 + 12.0 * m2 + 144.0;
            let f = filter_functions(&s4, mu).unwrap();
            assert_abs_diff_eq!(f.psi[0], 2.0 * (12.0 - m2) / d, epsilon = 1e-14);
            assert_abs_diff_eq!(f.psi[1], 2.0 * (m2 + 24.0) / d, epsilon = 1e-14);
            assert_eq!(f.psi[2], 0.0);

            let d6 = mu.powi(6) + 24.0 * m4 + 720.0 * m2 + 14400.0;
            let g = m4 + 50.0 * m2 - 600.0;
            let f = filter_functions(&s6, mu).unwrap();
            assert_abs_diff_eq!(f.psi[0], (2.0 * m4 - 140.0 * m2 + 1200.0) / d6, epsilon = 1e-14);
            assert_abs_diff_eq!(f.psi[1], (-g * r5 - 50.0 * m2 + 3000.0) / d6, epsilon = 1e-14);
            assert_abs_diff_eq!(f.psi[2], (g * r5 - 50.0 * m2 + 3000.0) / d6, epsilon = 1e-14);
            assert_eq!(f.psi[3], 0.0);
        }
        let imex = filter_functions(&lgl(2), 0.0).unwrap();
        assert_abs_diff_eq!(2.0 * imex.psi[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_equality_and_moments() {
        let mus: Vec<f64> = (0..=1000).map(|k| 0.1 * k as f64).collect();
        for s1 in 2..=4 {
            let chk = check_m11_equals_m22(&lgl(s1), &mus);
            assert!(chk.max_deviation < 1e-12, "s1={s1}: {}", chk.max_deviation);
            assert!(chk.max_moment_mismatch() < 1e-14);
            assert_abs_diff_eq!(chk.moments[0].primary, 0.5, epsilon = 1e-15);
        }
        let chk = check_m11_equals_m22(&lgl(4), &[]);
        assert_abs_diff_eq!(chk.moments[1].primary, 1.0 / 24.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chk.moments[2].secondary, 1.0 / 720.0, epsilon = 1e-15);
    }

    fn assert_intervals(report: &StabilityReport, expect: &[(f64, f64)]) {
        assert_eq!(report.intervals.len(), expect.len(), "{:?}", report.intervals);
        for (iv, &(lo, hi)) in report.intervals.iter().zip(expect) {
            assert!((iv.lo - lo).abs() < 1e-9, "{iv:?} vs {lo}");
            assert!((iv.hi - hi).abs() < 1e-9, "{iv:?} vs {hi}");
        }
    }

    #[test]
    fn collocation_intervals() {
        let r = stability_intervals(&lglc(2), 10.0).unwrap();
        assert!(!r.p_stable);
        assert_intervals(&r, &[(0.0, 4.0)]);

        let r = stability_intervals(&lglc(3), 10.0).unwrap();
        assert_intervals(
            &r,
            &[(0.0, 6.0 / 11.0 * 33f64.sqrt()), (2.0 * 3f64.sqrt(), 3.0 * 6f64.sqrt())],
        );

        let r = stability_intervals(&lglc(4), 15.0).unwrap();
        let s905 = 905f64.sqrt();
        assert_intervals(
            &r,
            &[
                (0.0, (70.0 - 2.0 * s905).sqrt()),
                (10f64.sqrt(), 1.6 * 15f64.sqrt()),
                (2.0 * 15f64.sqrt(), (70.0 + 2.0 * s905).sqrt()),
            ],
        );
        assert!(r.resonances.iter().all(|x| x.kind == ResonanceKind::Boundary));
    }

    #[test]
    fn interpolation_schemes_are_p_stable() {
        let r = stability_intervals(&lgl(3), 20.0).unwrap();
        assert!(r.p_stable, "{:?}", r.resonances);
        let t = &r.resonances;
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].kind, t[0].sign), (ResonanceKind::Tangency, -1));
        assert!((t[0].mu - 2.0 * 3f64.sqrt()).abs() < 1e-9);

        let r = stability_intervals(&lgl(4), 20.0).unwrap();
        assert!(r.p_stable);
        let mus: Vec<(f64, i8)> = r.resonances.iter().map(|x| (x.mu, x.sign)).collect();
        assert_eq!(mus.len(), 2, "{mus:?}");
        assert!((mus[0].0 - 10f64.sqrt()).abs() < 1e-9 && mus[0].1 == -1);
        assert!((mus[1].0 - 2.0 * 15f64.sqrt()).abs() < 1e-9 && mus[1].1 == 1);
        assert!(r.max_det_deviation() < 1e-10);
    }

    #[test]
    fn trig_form_without_slow_force() {
        let sys = crate::system::harmonic_oscillator(3.0);
        let st = PhaseState::new(vec![0.4], vec![-1.1], 0.0).unwrap();
        for s1 in 2..=4 {
            let r = trig_form_step_check(&lgl(s1), &sys, &st, 0.25, &StageSolveConfig::for_system(&sys)).unwrap();
            assert!(r.two_step < 1e-12, "{r:?}");
            assert!(r.momentum < 1e-12, "{r:?}");
        }
    }
}

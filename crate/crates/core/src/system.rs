//! Split second-order mechanical systems `q̈ = F¹(q) + F²(q)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Force callback writing `F(q)` into the output slice.
pub type ForceFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type HamiltonianFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Positions and momenta at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::invalid("phase state needs dimension >= 1"));
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        Ok(Self { q, p, t })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `max(1, ‖q‖∞, ‖p‖∞)`, the scale used for relative stage tolerances.
    pub fn scale(&self) -> f64 {
        self.q
            .iter()
            .chain(&self.p)
            .fold(1.0f64, |m, x| m.max(x.abs()))
    }
}

/// The slow force `F¹` (nonlinear, treated by the primary method) and the
/// fast force `F²` (treated by the secondary method).
///
/// When `linear_fast` is present it holds the diagonal of `Ω²` with
/// `F²(q) = −Ω² q`, which lets the stage solver eliminate the fast part
/// exactly.
#[derive(Clone)]
pub struct SplitForceSystem {
    dim: usize,
    f1: Arc<ForceFn>,
    f2: Arc<ForceFn>,
    linear_fast: Option<Vec<f64>>,
    hamiltonian: Option<Arc<HamiltonianFn>>,
}

impl fmt::Debug for SplitForceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitForceSystem")
            .field("dim", &self.dim)
            .field("linear_fast", &self.linear_fast)
            .field("has_hamiltonian", &self.hamiltonian.is_some())
            .finish()
    }
}

impl SplitForceSystem {
    pub fn new<F1, F2>(dim: usize, f1: F1, f2: F2) -> Result<Self>
    where
        F1: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        F2: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::invalid("system dimension must be >= 1"));
        }
        Ok(Self {
            dim,
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            linear_fast: None,
            hamiltonian: None,
        })
    }

    /// System with `F²(q) = −Ω² q` for the given diagonal of `Ω²`.
    pub fn with_linear_fast<F1>(omega_sq: Vec<f64>, f1: F1) -> Result<Self>
    where
        F1: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if omega_sq.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("Omega^2 entries must be finite and >= 0"));
        }
        let diag = omega_sq.clone();
        let mut sys = Self::new(omega_sq.len(), f1, move |q: &[f64], out: &mut [f64]| {
            for ((o, &w), &x) in out.iter_mut().zip(&diag).zip(q) {
                *o = -w * x;
            }
        })?;
        sys.linear_fast = Some(omega_sq);
        Ok(sys)
    }

    /// Declare that an arbitrary `F²` callback equals `−Ω² q`. The claim is
    /// checked on a few probe points to a relative tolerance of `1e-12`.
    pub fn declare_linear_fast(mut self, omega_sq: Vec<f64>) -> Result<Self> {
        if omega_sq.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: omega_sq.len(),
            });
        }
        if omega_sq.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("Omega^2 entries must be finite and >= 0"));
        }
        let mut out = vec![0.0; self.dim];
        for probe in 0..3 {
            let q: Vec<f64> = (0..self.dim)
                .map(|i| ((i + 1) as f64 * 0.37 + probe as f64 * 1.3).sin())
                .collect();
            (self.f2)(&q, &mut out);
            for i in 0..self.dim {
                let expected = -omega_sq[i] * q[i];
                let scale = expected.abs().max(omega_sq[i] * q[i].abs()).max(1e-300);
                if (out[i] - expected).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::invalid(format!(
                        "F2 does not match -Omega^2 q in component {i}"
                    )));
                }
            }
        }
        self.linear_fast = Some(omega_sq);
        Ok(self)
    }

    pub fn with_hamiltonian<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.hamiltonian = Some(Arc::new(h));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linear_fast(&self) -> Option<&[f64]> {
        self.linear_fast.as_deref()
    }

    pub fn f1(&self, q: &[f64], out: &mut [f64]) {
        (self.f1)(q, out)
    }

    pub fn f2(&self, q: &[f64], out: &mut [f64]) {
        (self.f2)(q, out)
    }

    /// `F¹(q) + F²(q)`.
    pub fn total_force(&self, q: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.dim];
        (self.f1)(q, out);
        (self.f2)(q, &mut tmp);
        for (o, t) in out.iter_mut().zip(tmp) {
            *o += t;
        }
    }

    pub fn hamiltonian(&self, state: &PhaseState) -> Option<f64> {
        self.hamiltonian.as_ref().map(|h| h(&state.q, &state.p))
    }

    pub fn check_state(&self, state: &PhaseState) -> Result<()> {
        if state.q.len() != self.dim || state.p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: state.q.len().max(state.p.len()),
            });
        }
        Ok(())
    }
}

/// Scalar harmonic oscillator `q̈ = −ω² q` with `F¹ = 0`.
pub fn harmonic_oscillator(omega: f64) -> SplitForceSystem {
    SplitForceSystem::with_linear_fast(vec![omega * omega], |_q: &[f64], out: &mut [f64]| {
        out.fill(0.0)
    })
    .expect("omega^2 is non-negative")
    .with_hamiltonian(move |q: &[f64], p: &[f64]| 0.5 * p[0] * p[0] + 0.5 * omega * omega * q[0] * q[0])
}

/// A system without forces: `q(t) = q₀ + t p₀`.
pub fn free_particle(dim: usize) -> SplitForceSystem {
    SplitForceSystem::new(
        dim,
        |_q: &[f64], out: &mut [f64]| out.fill(0.0),
        |_q: &[f64], out: &mut [f64]| out.fill(0.0),
    )
    .expect("dimension is positive")
}

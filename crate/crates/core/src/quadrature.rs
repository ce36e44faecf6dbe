//! Gauss–Legendre and Lobatto quadrature rules on `[0, 1]`.
//!
//! Nodes are the roots of Legendre polynomials (Gauss) or of their
//! derivatives plus the two endpoints (Lobatto), found by Newton iteration
//! from Chebyshev initial guesses on `[-1, 1]` and mapped affinely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of a quadrature formula on `[0, 1]`.
///
/// `order` is one more than the polynomial degree integrated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∑ wᵢ f(cᵢ)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| w * f(c))
            .sum()
    }

    /// `∑ wᵢ cᵢⁿ`.
    pub fn moment(&self, n: usize) -> f64 {
        self.integrate(|c| c.powi(n as i32))
    }

    /// Largest order `r` such that monomials of degree `< r` are integrated
    /// to within `tol`. Determined numerically, independent of `order`.
    pub fn numerical_order(&self, tol: f64) -> usize {
        let mut r = 0;
        while r < 4 * self.len() + 4 {
            if (self.moment(r) - 1.0 / (r as f64 + 1.0)).abs() > tol {
                break;
            }
            r += 1;
        }
        r
    }
}

/// Legendre polynomial `P_n(x)` and its derivative on `[-1, 1]`.
pub(crate) fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    // derivative from the three-term identity; the endpoints use the closed form
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let sign = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        sign * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

/// Gauss–Legendre rule with `s` nodes (order `2s`).
pub fn gauss_legendre_quadrature(s: usize) -> Result<QuadratureRule> {
    if s < 1 {
        return Err(Error::invalid("Gauss-Legendre rule needs s >= 1"));
    }
    let n = s as f64;
    let mut nodes = Vec::with_capacity(s);
    let mut weights = Vec::with_capacity(s);
    for i in 1..=s {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(s, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre(s, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (1.0 + x));
        weights.push(0.5 * w);
    }
    // Chebyshev guesses come out in descending order of x
    nodes.reverse();
    weights.reverse();
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        nodes,
        weights,
        order: 2 * s,
    })
}

/// Lobatto rule with `s` nodes including both endpoints (order `2s − 2`).
pub fn lobatto_quadrature(s: usize) -> Result<QuadratureRule> {
    if s < 2 {
        return Err(Error::invalid("Lobatto rule needs s >= 2"));
    }
    let deg = s - 1;
    let m = deg as f64;
    let endpoint_weight = 1.0 / (m * (m + 1.0));
    let mut nodes = vec![0.0];
    let mut weights = vec![endpoint_weight];
    let mut interior = Vec::with_capacity(s - 2);
    for i in 1..deg {
        // interior nodes are the roots of P'_{s-1}
        let mut x = -(std::f64::consts::PI * i as f64 / m).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(deg, x);
            let d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (p, _) = legendre(deg, x);
        interior.push((0.5 * (1.0 + x), 1.0 / (m * (m + 1.0) * p * p)));
    }
    for (c, w) in interior {
        nodes.push(c);
        weights.push(w);
    }
    nodes.push(1.0);
    weights.push(endpoint_weight);
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        nodes,
        weights,
        order: 2 * s - 2,
    })
}

/// Enforce the exact reflection symmetry `c ↦ 1 − c` of the symmetric rules.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let s = nodes.len();
    for i in 0..s / 2 {
        let j = s - 1 - i;
        let lo = 0.5 * (nodes[i] + (1.0 - nodes[j]));
        nodes[i] = lo;
        nodes[j] = 1.0 - lo;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if s % 2 == 1 {
        nodes[s / 2] = 0.5;
    }
}

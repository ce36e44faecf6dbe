//! Cardinal Lagrange polynomials on a node set. Integrals use Gauss
//! quadrature of the product form, which is exact for the degree at hand and
//! avoids the ill-conditioned monomial expansion.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_quadrature, QuadratureRule};

#[derive(Debug, Clone)]
pub struct CardinalBasis {
    nodes: Vec<f64>,
    rule: QuadratureRule,
}

impl CardinalBasis {
    pub fn new(nodes: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("cardinal basis needs at least one node"));
        }
        for (i, a) in nodes.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::invalid("non-finite interpolation node"));
            }
            if nodes[i + 1..].iter().any(|b| a == b) {
                return Err(Error::invalid(format!("duplicate interpolation node {a}")));
            }
        }
        // degree n-1 needs ceil(n/2) points
        let rule = gauss_legendre_quadrature(nodes.len().div_ceil(2).max(1))?;
        Ok(Self {
            nodes: nodes.to_vec(),
            rule,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ℒ_j(t)` evaluated in product form.
    pub fn eval(&self, j: usize, t: f64) -> f64 {
        let cj = self.nodes[j];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &ck)| (t - ck) / (cj - ck))
            .product()
    }

    /// `∫₀^upper ℒ_j(τ) dτ`.
    pub fn integral(&self, j: usize, upper: f64) -> f64 {
        upper * self.rule.integrate(|x| self.eval(j, upper * x))
    }
}

/// `ℒ_j(t) = ∏_{k≠j} (t − c_k)/(c_j − c_k)`; `j` is zero-based.
pub fn lagrange_cardinal(nodes: &[f64], j: usize, t: f64) -> Result<f64> {
    check_index(nodes, j)?;
    Ok(CardinalBasis::new(nodes)?.eval(j, t))
}

/// `∫₀^upper ℒ_j(τ) dτ`, exact up to rounding; `j` is zero-based.
pub fn lagrange_cardinal_integral(nodes: &[f64], j: usize, upper: f64) -> Result<f64> {
    check_index(nodes, j)?;
    Ok(CardinalBasis::new(nodes)?.integral(j, upper))
}

fn check_index(nodes: &[f64], j: usize) -> Result<()> {
    if j >= nodes.len() {
        return Err(Error::invalid(format!(
            "cardinal index {j} out of range for {} nodes",
            nodes.len()
        )));
    }
    Ok(())
}

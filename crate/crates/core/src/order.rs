//! Executable order and symplecticity identities of an [`ArkScheme`].

use nalgebra::DVector;
use serde::Serialize;

use crate::lagrange::CardinalBasis;
use crate::tableau::{ArkScheme, Variant};

/// Default tolerance for [`verify_order_conditions`].
pub const ORDER_CONDITION_TOL: f64 = 1e-11;

// a quadrature is "of order r" when its moments agree to this tolerance
const EXACTNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub id: String,
    pub residual: f64,
    /// False when the hypotheses that imply the identity do not hold for
    /// this scheme; such rows are reported but do not affect `pass`.
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderConditionReport {
    pub tolerance: f64,
    pub conditions: Vec<ConditionResidual>,
    pub pass: bool,
}

impl OrderConditionReport {
    pub fn get(&self, id: &str) -> Option<&ConditionResidual> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Largest residual among applicable conditions.
    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .filter(|c| c.applicable)
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn powers(v: &[f64], k: usize) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.powi(k as i32)))
}

pub fn verify_order_conditions(scheme: &ArkScheme) -> OrderConditionReport {
    verify_order_conditions_with_tol(scheme, ORDER_CONDITION_TOL)
}

/// Evaluates:
/// - `Ã c^{k−1} = c̃^k / k` for `k = 1..s1−1`,
/// - `Ẫ 𝟙 = c` and the weight identities behind it,
/// - the quadrature conditions `bᵀcⁿ = b̃ᵀc̃ⁿ = 1/(n+1)` for `n < order`,
/// - the two symplecticity identities of the conjugate matrices.
pub fn verify_order_conditions_with_tol(scheme: &ArkScheme, tol: f64) -> OrderConditionReport {
    let s1 = scheme.s1();
    let s2 = scheme.s2();
    let (b, c, bt, ct) = (scheme.b(), scheme.c(), scheme.b_tilde(), scheme.c_tilde());
    let (a, ah, at, ath) = (scheme.a(), scheme.a_hat(), scheme.a_tilde(), scheme.a_tilde_hat());
    let mut conditions = Vec::new();

    // the stage identities rely on A c^{k-1} = c^k / k for the primary method
    let primary_stage_order = (1..=s1)
        .take_while(|&k| {
            let lhs = a * powers(c, k - 1);
            max_abs((0..s1).map(|i| lhs[i] - c[i].powi(k as i32) / k as f64)) <= EXACTNESS_TOL
        })
        .count();

    for k in 1..s1 {
        let lhs = at * powers(c, k - 1);
        let res = max_abs((0..s2).map(|i| lhs[i] - ct[i].powi(k as i32) / k as f64));
        conditions.push(ConditionResidual {
            id: format!("tilde_a_stage_k{k}"),
            residual: res,
            applicable: primary_stage_order >= k && s1 >= s2,
        });
    }

    let ord_primary = quadrature_order(b, c);
    let ord_secondary = quadrature_order(bt, ct);
    let bt_a_transposed = a.transpose() * DVector::from_column_slice(b);
    let primary_weight_identity =
        max_abs((0..s1).map(|j| bt_a_transposed[j] - b[j] * (1.0 - c[j]))) <= EXACTNESS_TOL;
    let hypotheses = match scheme.variant() {
        Variant::Interpolation => ord_secondary >= s1 && primary_weight_identity,
        Variant::Collocation => ord_secondary > s1 && ord_primary > s1,
    };

    let row_sums = ath * DVector::from_element(s2, 1.0);
    conditions.push(ConditionResidual {
        id: "tilde_hat_row_sums".into(),
        residual: max_abs((0..s1).map(|i| row_sums[i] - c[i])),
        applicable: hypotheses,
    });

    let at_t_bt = at.transpose() * DVector::from_column_slice(bt);
    conditions.push(ConditionResidual {
        id: "tilde_weights".into(),
        residual: max_abs((0..s1).map(|j| at_t_bt[j] - b[j] * (1.0 - c[j]))),
        applicable: hypotheses,
    });

    if scheme.variant() == Variant::Interpolation {
        if let Ok(basis) = CardinalBasis::new(c) {
            let res = max_abs((0..s1).map(|j| {
                let lt_b: f64 = (0..s2).map(|i| basis.eval(j, ct[i]) * bt[i]).sum();
                lt_b - b[j]
            }));
            conditions.push(ConditionResidual {
                id: "lagrange_weights".into(),
                residual: res,
                applicable: ord_secondary >= s1,
            });
        }
    }

    let r = scheme.order();
    for (id, w, x) in [("quadrature_primary", b, c), ("quadrature_secondary", bt, ct)] {
        let res = max_abs((0..r).map(|n| {
            let m: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi.powi(n as i32)).sum();
            m - 1.0 / (n as f64 + 1.0)
        }));
        conditions.push(ConditionResidual {
            id: id.into(),
            residual: res,
            applicable: true,
        });
    }

    let mut sym = 0.0f64;
    for i in 0..s1 {
        for j in 0..s1 {
            sym = sym.max((b[i] * ah[(i, j)] + b[j] * a[(j, i)] - b[i] * b[j]).abs());
        }
    }
    conditions.push(ConditionResidual {
        id: "symplectic_primary".into(),
        residual: sym,
        applicable: true,
    });
    let mut sym = 0.0f64;
    for i in 0..s1 {
        for k in 0..s2 {
            sym = sym.max((b[i] * ath[(i, k)] + bt[k] * at[(k, i)] - b[i] * bt[k]).abs());
        }
    }
    conditions.push(ConditionResidual {
        id: "symplectic_secondary".into(),
        residual: sym,
        applicable: true,
    });

    let pass = conditions
        .iter()
        .filter(|c| c.applicable)
        .all(|c| c.residual <= tol);
    OrderConditionReport {
        tolerance: tol,
        conditions,
        pass,
    }
}

fn quadrature_order(w: &[f64], x: &[f64]) -> usize {
    (0..4 * w.len() + 4)
        .take_while(|&n| {
            let m: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi.powi(n as i32)).sum();
            (m - 1.0 / (n as f64 + 1.0)).abs() <= EXACTNESS_TOL
        })
        .count()
}

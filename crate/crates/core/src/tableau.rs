//! Coefficient sets of the additive Runge–Kutta family.
//!
//! The primary method is Lobatto IIIA (coefficients `A`, `b`, `c`) paired
//! with its symplectic conjugate `Â` (Lobatto IIIB). The secondary method is
//! a Gauss–Legendre quadrature `(b̃, c̃)` whose stage coupling `Ã` is obtained
//! either by interpolating the primary stages or by collocating the primary
//! stage derivatives at the secondary nodes. `Ẫ` is the conjugate of `Ã`
//! that makes the whole method symplectic.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrange::CardinalBasis;
use crate::quadrature::{gauss_legendre_quadrature, lobatto_quadrature, QuadratureRule};

/// Largest primary stage count accepted by the constructors. Beyond it the
/// Lobatto nodes and the cardinal-polynomial integrals lose accuracy.
pub const MAX_PRIMARY_STAGES: usize = 12;

/// How the secondary coupling matrix `Ã` is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Interpolation,
    Collocation,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Interpolation => "interpolation",
            Variant::Collocation => "collocation",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolation" | "interp" => Ok(Variant::Interpolation),
            "collocation" | "colloc" => Ok(Variant::Collocation),
            other => Err(Error::invalid(format!("unknown variant '{other}'"))),
        }
    }
}

/// A Runge–Kutta tableau `(A, b, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RkTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Largest deviation of the row sums of `A` from `c`.
    pub fn consistency_residual(&self) -> f64 {
        (0..self.stages())
            .map(|i| (self.a.row(i).sum() - self.c[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Lobatto IIIA collocation method with `s` stages.
///
/// `a_{ij} = ∫₀^{c_i} ℒ_j(τ) dτ` on the Lobatto nodes.
pub fn lobatto_iiia(s: usize) -> Result<RkTableau> {
    check_primary_stages(s)?;
    let rule = lobatto_quadrature(s)?;
    let mut a = tilde_a_collocation(&rule.nodes, &rule.nodes)?;
    // c_s = 1, so the last row is the weight vector; copying it makes the
    // last column of the conjugate vanish exactly
    for j in 0..s {
        a[(s - 1, j)] = rule.weights[j];
    }
    Ok(RkTableau {
        a,
        b: rule.weights,
        c: rule.nodes,
    })
}

fn check_primary_stages(s: usize) -> Result<()> {
    if s < 2 {
        return Err(Error::invalid("primary method needs s1 >= 2"));
    }
    if s > MAX_PRIMARY_STAGES {
        return Err(Error::invalid(format!(
            "s1 = {s} exceeds the supported maximum of {MAX_PRIMARY_STAGES}"
        )));
    }
    Ok(())
}

fn check_weights(b: &[f64]) -> Result<()> {
    match b.iter().position(|&x| x == 0.0) {
        Some(index) => Err(Error::DegenerateWeights { index }),
        None => Ok(()),
    }
}

/// Symplectic conjugate `â_{ij} = b_j − b_j a_{ji} / b_i` of a tableau.
pub fn conjugate_primary(tab: &RkTableau) -> Result<DMatrix<f64>> {
    check_weights(&tab.b)?;
    let s = tab.stages();
    let b = &tab.b;
    Ok(DMatrix::from_fn(s, s, |i, j| {
        b[j] - b[j] * tab.a[(j, i)] / b[i]
    }))
}

/// `Ã = ℒ(c̃) A` with `ℒ(c̃)_{ij} = ℒ_j(c̃_i)` the primary cardinal
/// polynomials evaluated at the secondary nodes.
pub fn tilde_a_interpolation(primary: &RkTableau, c_tilde: &[f64]) -> Result<DMatrix<f64>> {
    let s1 = primary.stages();
    if primary.a.nrows() != s1 || primary.a.ncols() != s1 || primary.c.len() != s1 {
        return Err(Error::DimensionMismatch {
            expected: s1,
            got: primary.a.nrows(),
        });
    }
    let basis = CardinalBasis::new(&primary.c)?;
    let lagrange = DMatrix::from_fn(c_tilde.len(), s1, |i, j| basis.eval(j, c_tilde[i]));
    Ok(lagrange * &primary.a)
}

/// `ã_{ij} = ∫₀^{c̃_i} ℒ_j(τ) dτ` with `ℒ_j` built on the primary nodes.
pub fn tilde_a_collocation(primary_nodes: &[f64], c_tilde: &[f64]) -> Result<DMatrix<f64>> {
    let basis = CardinalBasis::new(primary_nodes)?;
    Ok(DMatrix::from_fn(
        c_tilde.len(),
        primary_nodes.len(),
        |i, j| basis.integral(j, c_tilde[i]),
    ))
}

/// `Ẫ = (𝟙 − B⁻¹Ãᵀ) B̃`, i.e. `ẫ_{ik} = b̃_k − b̃_k ã_{ki} / b_i`.
pub fn conjugate_tilde(a_tilde: &DMatrix<f64>, b: &[f64], b_tilde: &[f64]) -> Result<DMatrix<f64>> {
    if a_tilde.nrows() != b_tilde.len() {
        return Err(Error::DimensionMismatch {
            expected: b_tilde.len(),
            got: a_tilde.nrows(),
        });
    }
    if a_tilde.ncols() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a_tilde.ncols(),
        });
    }
    check_weights(b)?;
    Ok(DMatrix::from_fn(b.len(), b_tilde.len(), |i, k| {
        b_tilde[k] - b_tilde[k] * a_tilde[(k, i)] / b[i]
    }))
}

/// Complete coefficient set of one symplectic ARK method.
///
/// Fields are private: a scheme is immutable once constructed and can be
/// shared freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ArkScheme {
    a: DMatrix<f64>,
    a_hat: DMatrix<f64>,
    a_tilde: DMatrix<f64>,
    a_tilde_hat: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    b_tilde: Vec<f64>,
    c_tilde: Vec<f64>,
    order: usize,
    variant: Variant,
}

impl ArkScheme {
    /// Assemble a scheme from a primary tableau, a secondary quadrature and
    /// a coupling matrix. The two conjugate matrices are derived here.
    pub fn from_parts(
        primary: &RkTableau,
        secondary: &QuadratureRule,
        a_tilde: DMatrix<f64>,
        variant: Variant,
        order: usize,
    ) -> Result<Self> {
        let s1 = primary.stages();
        let s2 = secondary.len();
        if primary.c.len() != s1 || primary.a.shape() != (s1, s1) {
            return Err(Error::DimensionMismatch {
                expected: s1,
                got: primary.a.nrows(),
            });
        }
        if a_tilde.shape() != (s2, s1) {
            return Err(Error::DimensionMismatch {
                expected: s2,
                got: a_tilde.nrows(),
            });
        }
        let a_hat = conjugate_primary(primary)?;
        let a_tilde_hat = conjugate_tilde(&a_tilde, &primary.b, &secondary.weights)?;
        Ok(Self {
            a: primary.a.clone(),
            a_hat,
            a_tilde,
            a_tilde_hat,
            b: primary.b.clone(),
            c: primary.c.clone(),
            b_tilde: secondary.weights.clone(),
            c_tilde: secondary.nodes.clone(),
            order,
            variant,
        })
    }

    pub fn s1(&self) -> usize {
        self.b.len()
    }

    pub fn s2(&self) -> usize {
        self.b_tilde.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_hat(&self) -> &DMatrix<f64> {
        &self.a_hat
    }

    pub fn a_tilde(&self) -> &DMatrix<f64> {
        &self.a_tilde
    }

    pub fn a_tilde_hat(&self) -> &DMatrix<f64> {
        &self.a_tilde_hat
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn b_tilde(&self) -> &[f64] {
        &self.b_tilde
    }

    pub fn c_tilde(&self) -> &[f64] {
        &self.c_tilde
    }

    pub fn primary(&self) -> RkTableau {
        RkTableau {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
        }
    }

    /// Short identifier, e.g. `lgl4` or `lglc6`.
    pub fn name(&self) -> String {
        match self.variant {
            Variant::Interpolation => format!("lgl{}", self.order),
            Variant::Collocation => format!("lglc{}", self.order),
        }
    }

    pub fn to_json(&self) -> SchemeJson {
        SchemeJson {
            s1: self.s1(),
            s2: self.s2(),
            variant: self.variant,
            order: self.order,
            a: rows(&self.a),
            a_hat: rows(&self.a_hat),
            a_tilde: rows(&self.a_tilde),
            a_tilde_hat: rows(&self.a_tilde_hat),
            b: self.b.clone(),
            c: self.c.clone(),
            b_tilde: self.b_tilde.clone(),
            c_tilde: self.c_tilde.clone(),
        }
    }

    /// Rebuild a scheme from its JSON form. The stored conjugates are kept
    /// as given; use `verify_order_conditions` to check them.
    pub fn from_json(json: &SchemeJson) -> Result<Self> {
        let (s1, s2) = (json.s1, json.s2);
        let check = |m: &Vec<Vec<f64>>, r: usize, c: usize| -> Result<DMatrix<f64>> {
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(Error::invalid(format!("matrix is not {r}x{c}")));
            }
            Ok(DMatrix::from_fn(r, c, |i, j| m[i][j]))
        };
        for (v, n) in [(&json.b, s1), (&json.c, s1), (&json.b_tilde, s2), (&json.c_tilde, s2)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            a: check(&json.a, s1, s1)?,
            a_hat: check(&json.a_hat, s1, s1)?,
            a_tilde: check(&json.a_tilde, s2, s1)?,
            a_tilde_hat: check(&json.a_tilde_hat, s1, s2)?,
            b: json.b.clone(),
            c: json.c.clone(),
            b_tilde: json.b_tilde.clone(),
            c_tilde: json.c_tilde.clone(),
            order: json.order,
            variant: json.variant,
        })
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Serialized form of an [`ArkScheme`]; matrices are stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub s1: usize,
    pub s2: usize,
    pub variant: Variant,
    pub order: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "Ahat")]
    pub a_hat: Vec<Vec<f64>>,
    #[serde(rename = "Atilde")]
    pub a_tilde: Vec<Vec<f64>>,
    #[serde(rename = "AtildeHat")]
    pub a_tilde_hat: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(rename = "btilde")]
    pub b_tilde: Vec<f64>,
    #[serde(rename = "ctilde")]
    pub c_tilde: Vec<f64>,
}

/// Lobatto IIIA primary with `s1` stages, Gauss–Legendre secondary with
/// `s1 − 1` stages; the resulting method has order `2(s1 − 1)`.
pub fn build_scheme(s1: usize, variant: Variant) -> Result<ArkScheme> {
    check_primary_stages(s1)?;
    let primary = lobatto_iiia(s1)?;
    let secondary = gauss_legendre_quadrature(s1 - 1)?;
    let a_tilde = match variant {
        Variant::Interpolation => tilde_a_interpolation(&primary, &secondary.nodes)?,
        Variant::Collocation => tilde_a_collocation(&primary.c, &secondary.nodes)?,
    };
    ArkScheme::from_parts(&primary, &secondary, a_tilde, variant, 2 * (s1 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_matrix(m: &DMatrix<f64>, expected: &[&[f64]], tol: f64) {
        assert_eq!(m.nrows(), expected.len());
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(m.ncols(), row.len());
            for (j, &v) in row.iter().enumerate() {
                assert!(
                    (m[(i, j)] - v).abs() <= tol,
                    "entry ({i},{j}) = {} expected {v}",
                    m[(i, j)]
                );
            }
        }
    }

    #[test]
    fn lobatto_iiia_rows() {
        let t2 = lobatto_iiia(2).unwrap();
        assert_matrix(&t2.a, &[&[0.0, 0.0], &[0.5, 0.5]], 1e-15);

        let t3 = lobatto_iiia(3).unwrap();
        assert_matrix(
            &t3.a.rows(1, 1).into_owned(),
            &[&[5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0]],
            1e-15,
        );

        let r5 = 5f64.sqrt();
        let t4 = lobatto_iiia(4).unwrap();
        assert_matrix(
            &t4.a.rows(1, 1).into_owned(),
            &[&[
                (11.0 + r5) / 120.0,
                (25.0 - r5) / 120.0,
                (25.0 - 13.0 * r5) / 120.0,
                (-1.0 + r5) / 120.0,
            ]],
            1e-15,
        );
        for s in 2..=MAX_PRIMARY_STAGES {
            let t = lobatto_iiia(s).unwrap();
            assert!(t.a.row(0).iter().all(|&x| x == 0.0));
            for j in 0..s {
                assert_abs_diff_eq!(t.a[(s - 1, j)], t.b[j], epsilon = 1e-12);
            }
            assert!(t.consistency_residual() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn stage_count_limits() {
        assert!(matches!(lobatto_iiia(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_scheme(1, Variant::Interpolation), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            build_scheme(MAX_PRIMARY_STAGES + 1, Variant::Collocation),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_scheme(MAX_PRIMARY_STAGES, Variant::Collocation).is_ok());
    }

    #[test]
    fn conjugate_of_small_tableaux() {
        let ah = conjugate_primary(&lobatto_iiia(2).unwrap()).unwrap();
        assert_matrix(&ah, &[&[0.5, 0.0], &[0.5, 0.0]], 1e-15);
        let ah = conjugate_primary(&lobatto_iiia(3).unwrap()).unwrap();
        assert_matrix(
            &ah,
            &[
                &[1.0 / 6.0, -1.0 / 6.0, 0.0],
                &[1.0 / 6.0, 1.0 / 3.0, 0.0],
                &[1.0 / 6.0, 5.0 / 6.0, 0.0],
            ],
            1e-15,
        );
    }

    #[test]
    fn degenerate_weights_rejected() {
        let tab = RkTableau {
            a: DMatrix::zeros(2, 2),
            b: vec![1.0, 0.0],
            c: vec![0.0, 1.0],
        };
        assert_eq!(
            conjugate_primary(&tab),
            Err(Error::DegenerateWeights { index: 1 })
        );
        let at = DMatrix::from_element(1, 2, 0.25);
        assert_eq!(
            conjugate_tilde(&at, &[0.0, 1.0], &[1.0]),
            Err(Error::DegenerateWeights { index: 0 })
        );
    }

    #[test]
    fn coupling_dimension_mismatch() {
        let at = DMatrix::from_element(2, 2, 0.25);
        assert!(matches!(
            conjugate_tilde(&at, &[0.5, 0.5], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut tab = lobatto_iiia(3).unwrap();
        tab.c.pop();
        assert!(tilde_a_interpolation(&tab, &[0.5]).is_err());
    }

    #[test]
    fn second_order_couplings() {
        let interp = build_scheme(2, Variant::Interpolation).unwrap();
        assert_matrix(interp.a_tilde(), &[&[0.25, 0.25]], 1e-15);
        assert_matrix(interp.a_tilde_hat(), &[&[0.5], &[0.5]], 1e-15);
        let colloc = build_scheme(2, Variant::Collocation).unwrap();
        assert_matrix(colloc.a_tilde(), &[&[0.375, 0.125]], 1e-15);
        assert_matrix(colloc.a_tilde_hat(), &[&[0.25], &[0.75]], 1e-15);
    }

    #[test]
    fn fourth_order_first_entries() {
        let r3 = 3f64.sqrt();
        let interp = build_scheme(3, Variant::Interpolation).unwrap();
        assert_abs_diff_eq!(interp.a_tilde()[(0, 0)], 1.0 / 6.0 - r3 / 36.0, epsilon = 1e-15);
        assert_abs_diff_eq!(interp.a_tilde_hat()[(0, 0)], r3 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(interp.a_tilde_hat()[(0, 1)], -r3 / 12.0, epsilon = 1e-15);
        let colloc = build_scheme(3, Variant::Collocation).unwrap();
        assert_abs_diff_eq!(colloc.a_tilde()[(0, 0)], 1.0 / 6.0 - r3 / 108.0, epsilon = 1e-15);
    }

    #[test]
    fn lobatto_conjugate_has_zero_last_column() {
        for s1 in 2..=8 {
            for v in [Variant::Interpolation, Variant::Collocation] {
                let sch = build_scheme(s1, v).unwrap();
                assert!(sch.a_hat().column(s1 - 1).iter().all(|x| x.abs() < 1e-13));
                assert_eq!(sch.s2(), s1 - 1);
                assert_eq!(sch.order(), 2 * (s1 - 1));
            }
        }
    }

    #[test]
    fn json_layout() {
        let sch = build_scheme(3, Variant::Collocation).unwrap();
        let text = serde_json::to_string(&sch.to_json()).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["s1", "s2", "variant", "order", "A", "Ahat", "Atilde", "AtildeHat", "b", "c", "btilde", "ctilde"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["variant"], "collocation");
        assert_eq!(value["Atilde"].as_array().unwrap().len(), 2);
        assert_eq!(value["Atilde"][0].as_array().unwrap().len(), 3);
        let back: SchemeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(ArkScheme::from_json(&back).unwrap(), sch);
    }
}

//! Closed-form coefficients of the order 2, 4 and 6 schemes.

use symparc::{ArkScheme, Variant};

pub struct Golden {
    pub a: Vec<Vec<f64>>,
    pub a_hat: Vec<Vec<f64>>,
    pub a_tilde: Vec<Vec<f64>>,
    pub a_tilde_hat: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub b_tilde: Vec<f64>,
    pub c_tilde: Vec<f64>,
}

fn primary(s1: usize) -> Golden {
    let (r3, r5, r15) = (3f64.sqrt(), 5f64.sqrt(), 15f64.sqrt());
    let empty = Vec::new;
    match s1 {
        2 => Golden {
            a: vec![vec![0.0, 0.0], vec![0.5, 0.5]],
            a_hat: vec![vec![0.5, 0.0], vec![0.5, 0.0]],
            a_tilde: empty(),
            a_tilde_hat: empty(),
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
            b_tilde: vec![1.0],
            c_tilde: vec![0.5],
        },
        3 => Golden {
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0],
                vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            ],
            a_hat: vec![
                vec![1.0 / 6.0, -1.0 / 6.0, 0.0],
                vec![1.0 / 6.0, 1.0 / 3.0, 0.0],
                vec![1.0 / 6.0, 5.0 / 6.0, 0.0],
            ],
            a_tilde: empty(),
            a_tilde_hat: empty(),
            b: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 1.0],
            b_tilde: vec![0.5, 0.5],
            c_tilde: vec![0.5 - r3 / 6.0, 0.5 + r3 / 6.0],
        },
        4 => Golden {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![(11.0 + r5) / 120.0, (25.0 - r5) / 120.0, (25.0 - 13.0 * r5) / 120.0, (-1.0 + r5) / 120.0],
                vec![(11.0 - r5) / 120.0, (25.0 + 13.0 * r5) / 120.0, (25.0 + r5) / 120.0, (-1.0 - r5) / 120.0],
                vec![1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
            ],
            a_hat: vec![
                vec![1.0 / 12.0, (-1.0 - r5) / 24.0, (-1.0 + r5) / 24.0, 0.0],
                vec![1.0 / 12.0, (25.0 + r5) / 120.0, (25.0 - 13.0 * r5) / 120.0, 0.0],
                vec![1.0 / 12.0, (25.0 + 13.0 * r5) / 120.0, (25.0 - r5) / 120.0, 0.0],
                vec![1.0 / 12.0, (11.0 - r5) / 24.0, (11.0 + r5) / 24.0, 0.0],
            ],
            a_tilde: empty(),
            a_tilde_hat: empty(),
            b: vec![1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
            c: vec![0.0, 0.5 - r5 / 10.0, 0.5 + r5 / 10.0, 1.0],
            b_tilde: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
            c_tilde: vec![0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0],
        },
        _ => panic!("no closed forms for s1 = {s1}"),
    }
}

/// Coefficients for `s1 ∈ {2, 3, 4}`.
pub fn golden(s1: usize, variant: Variant) -> Golden {
    let (r3, r5, r15) = (3f64.sqrt(), 5f64.sqrt(), 15f64.sqrt());
    let mut g = primary(s1);
    let (at, ath) = match (s1, variant) {
        (2, Variant::Interpolation) => (vec![vec![0.25, 0.25]], vec![vec![0.5], vec![0.5]]),
        (2, Variant::Collocation) => (vec![vec![3.0 / 8.0, 1.0 / 8.0]], vec![vec![0.25], vec![0.75]]),
        (3, Variant::Interpolation) => (
            vec![
                vec![1.0 / 6.0 - r3 / 36.0, 1.0 / 3.0 - r3 / 9.0, -r3 / 36.0],
                vec![1.0 / 6.0 + r3 / 36.0, 1.0 / 3.0 + r3 / 9.0, r3 / 36.0],
            ],
            vec![
                vec![r3 / 12.0, -r3 / 12.0],
                vec![0.25 + r3 / 12.0, 0.25 - r3 / 12.0],
                vec![0.5 + r3 / 12.0, 0.5 - r3 / 12.0],
            ],
        ),
        (3, Variant::Collocation) => (
            vec![
                vec![1.0 / 6.0 - r3 / 108.0, 1.0 / 3.0 - 4.0 * r3 / 27.0, -r3 / 108.0],
                vec![1.0 / 6.0 + r3 / 108.0, 1.0 / 3.0 + 4.0 * r3 / 27.0, r3 / 108.0],
            ],
            vec![
                vec![r3 / 36.0, -r3 / 36.0],
                vec![0.25 + r3 / 9.0, 0.25 - r3 / 9.0],
                vec![0.5 + r3 / 36.0, 0.5 - r3 / 36.0],
            ],
        ),
        (4, Variant::Interpolation) => (
            vec![
                vec![
                    1.0 / 15.0,
                    (25.0 - 6.0 * r15 + 3.0 * r5) / 120.0,
                    (25.0 - 6.0 * r15 - 3.0 * r5) / 120.0,
                    1.0 / 60.0,
                ],
                vec![5.0 / 48.0, 5.0 / 24.0 + r5 / 16.0, 5.0 / 24.0 - r5 / 16.0, -1.0 / 48.0],
                vec![
                    1.0 / 15.0,
                    (25.0 + 6.0 * r15 + 3.0 * r5) / 120.0,
                    (25.0 + 6.0 * r15 - 3.0 * r5) / 120.0,
                    1.0 / 60.0,
                ],
            ],
            vec![
                vec![1.0 / 18.0, -1.0 / 9.0, 1.0 / 18.0],
                vec![
                    (25.0 + 6.0 * r15 - 3.0 * r5) / 180.0,
                    2.0 / 9.0 - r5 / 15.0,
                    (25.0 - 6.0 * r15 - 3.0 * r5) / 180.0,
                ],
                vec![
                    (25.0 + 6.0 * r15 + 3.0 * r5) / 180.0,
                    2.0 / 9.0 + r5 / 15.0,
                    (25.0 - 6.0 * r15 + 3.0 * r5) / 180.0,
                ],
                vec![2.0 / 9.0, 5.0 / 9.0, 2.0 / 9.0],
            ],
        ),
        (4, Variant::Collocation) => {
            let m = (r15 - 5.0).powi(2);
            let p = (r15 + 5.0).powi(2);
            (
                vec![
                    vec![
                        19.0 / 240.0,
                        r5 * m * (3.0 * r15 + 4.0 * r5 + 2.0 * r3 + 12.0) / 2400.0,
                        -r5 * m * (3.0 * r15 - 2.0 * r3 - 4.0 * r5 + 12.0) / 2400.0,
                        1.0 / 240.0,
                    ],
                    vec![17.0 / 192.0, 5.0 / 24.0 + 5.0 * r5 / 64.0, 5.0 / 24.0 - 5.0 * r5 / 64.0, -1.0 / 192.0],
                    vec![
                        19.0 / 240.0,
                        -r5 * p * (3.0 * r15 - 4.0 * r5 + 2.0 * r3 - 12.0) / 2400.0,
                        r5 * p * (3.0 * r15 + 4.0 * r5 - 2.0 * r3 - 12.0) / 2400.0,
                        1.0 / 240.0,
                    ],
                ],
                vec![
                    vec![1.0 / 72.0, -1.0 / 36.0, 1.0 / 72.0],
                    vec![
                        5.0 / 36.0 + (12.0 * r3 - 3.0) * r5 / 360.0,
                        2.0 / 9.0 - r5 / 12.0,
                        5.0 / 36.0 + (-12.0 * r3 - 3.0) * r5 / 360.0,
                    ],
                    vec![
                        5.0 / 36.0 + (12.0 * r3 + 3.0) * r5 / 360.0,
                        2.0 / 9.0 + r5 / 12.0,
                        5.0 / 36.0 + (-12.0 * r3 + 3.0) * r5 / 360.0,
                    ],
                    vec![19.0 / 72.0, 17.0 / 36.0, 19.0 / 72.0],
                ],
            )
        }
        _ => panic!("no closed forms for s1 = {s1}"),
    };
    g.a_tilde = at;
    g.a_tilde_hat = ath;
    g
}

/// Largest entrywise deviation and where it occurs, e.g. `"Atilde[1,2]"`.
pub fn max_deviation(scheme: &ArkScheme, g: &Golden) -> (f64, String) {
    let mut worst = (0.0f64, String::from("none"));
    let mut see = |name: String, got: f64, want: f64| {
        let d = (got - want).abs();
        if !(d <= worst.0) {
            worst = (d, name);
        }
    };
    let mats = [
        ("A", scheme.a(), &g.a),
        ("Ahat", scheme.a_hat(), &g.a_hat),
        ("Atilde", scheme.a_tilde(), &g.a_tilde),
        ("AtildeHat", scheme.a_tilde_hat(), &g.a_tilde_hat),
    ];
    for (name, got, want) in mats {
        if got.nrows() != want.len() || want.iter().any(|r| r.len() != got.ncols()) {
            return (f64::INFINITY, format!("{name} shape"));
        }
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                see(format!("{name}[{i},{j}]"), got[(i, j)], w);
            }
        }
    }
    let vecs = [
        ("b", scheme.b(), &g.b),
        ("c", scheme.c(), &g.c),
        ("btilde", scheme.b_tilde(), &g.b_tilde),
        ("ctilde", scheme.c_tilde(), &g.c_tilde),
    ];
    for (name, got, want) in vecs {
        if got.len() != want.len() {
            return (f64::INFINITY, format!("{name} length"));
        }
        for (i, (&x, &w)) in got.iter().zip(want.iter()).enumerate() {
            see(format!("{name}[{i}]"), x, w);
        }
    }
    worst
}

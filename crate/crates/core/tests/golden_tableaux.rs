mod common;

use common::golden::{golden, max_deviation};
use symparc::{build_scheme, ArkScheme, Variant};

fn check(s1: usize, variant: Variant) {
    let scheme = build_scheme(s1, variant).unwrap();
    let (dev, at) = max_deviation(&scheme, &golden(s1, variant));
    assert!(dev < 1e-14, "{variant} s1={s1}: {at} off by {dev:e}");
}

#[test]
fn interpolation_order2() {
    check(2, Variant::Interpolation);
}

#[test]
fn interpolation_order4() {
    check(3, Variant::Interpolation);
}

#[test]
fn interpolation_order6() {
    check(4, Variant::Interpolation);
}

#[test]
fn collocation_order2() {
    check(2, Variant::Collocation);
}

#[test]
fn collocation_order4() {
    check(3, Variant::Collocation);
}

#[test]
fn collocation_order6() {
    check(4, Variant::Collocation);
}

#[test]
fn deviation_detects_a_perturbed_entry() {
    let mut g = golden(3, Variant::Interpolation);
    g.a_tilde[1][2] += 1e-12;
    let (dev, at) = max_deviation(&build_scheme(3, Variant::Interpolation).unwrap(), &g);
    assert!(dev > 5e-13);
    assert_eq!(at, "Atilde[1,2]");
}

#[test]
fn json_round_trip_is_exact() {
    for s1 in 2..=4 {
        for variant in [Variant::Interpolation, Variant::Collocation] {
            let s = build_scheme(s1, variant).unwrap();
            let text = serde_json::to_string(&s.to_json()).unwrap();
            let back: symparc::SchemeJson = serde_json::from_str(&text).unwrap();
            assert_eq!(ArkScheme::from_json(&back).unwrap(), s);
        }
    }
}

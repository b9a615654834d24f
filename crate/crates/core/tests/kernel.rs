mod common;

use common::{compensated_phi_sum, contour_derivatives, load_mp50, phi_ref};
use disctree::tree::{cluster_expansion, moments};
use disctree::{DiscKernel, Error};
use proptest::prelude::*;

#[test]
fn phi_matches_independent_formula() {
    let k = DiscKernel::new(0.1).unwrap();
    assert_eq!(k.phi(0.3, 0.7), phi_ref(0.1, 0.3, 0.7));
}

#[test]
fn derivatives_match_mp50_table() {
    for row in load_mp50() {
        let k = DiscKernel::new(row.rd).unwrap();
        let got = k.phi_derivatives(row.x_c, row.y, 8).unwrap();
        for (i, (&a, &b)) in got.iter().zip(&row.derivs).enumerate() {
            let rel = (a - b).abs() / b.abs();
            assert!(
                rel <= 1e-6,
                "x_c={} y={} rd={} k={i}: {a} vs {b}",
                row.x_c,
                row.y,
                row.rd
            );
        }
    }
}

#[test]
fn contour_oracle_agrees_with_mp50_table() {
    // Cross-check of the two oracles on a slice of the table.
    for row in load_mp50().iter().take(100) {
        let (vals, noise) = contour_derivatives(row.rd, row.x_c, row.y, 8);
        for k in 0..=8 {
            let err = (vals[k] - row.derivs[k]).abs();
            assert!(err <= 1e-8 * row.derivs[k].abs() + noise[k], "k={k}");
        }
    }
}

#[test]
fn deep_tree_regime_small_separation() {
    // |x_c − y| far below r_d, where the three-term recurrence alone fails.
    let k = DiscKernel::new(0.1).unwrap();
    for d in [1e-5, 3e-4, 2e-3, -7e-3, 0.05, -0.099] {
        let got = k.phi_derivatives(0.5 + d, 0.5, 20).unwrap();
        let (want, noise) = contour_derivatives(0.1, 0.5 + d, 0.5, 20);
        for i in 0..=20 {
            let err = (got[i] - want[i]).abs();
            assert!(
                err <= 1e-9 * want[i].abs() + noise[i],
                "d={d} k={i}: {} vs {}",
                got[i],
                want[i]
            );
        }
    }
}

#[test]
fn third_order_derivative_by_finite_differences() {
    // Fourth-order central stencil on Φ'' from the closed form.
    let rd = 0.3;
    let second = |x: f64| {
        let d = x;
        -3.0 * rd * rd * d / (d * d + rd * rd).powf(2.5)
    };
    let k = DiscKernel::new(rd).unwrap();
    for x in [-1.2, -0.4, 0.25, 0.9] {
        let h = 1e-3;
        let fd = (-second(x + 2.0 * h) + 8.0 * second(x + h) - 8.0 * second(x - h)
            + second(x - 2.0 * h))
            / (12.0 * h);
        let got = k.phi_derivatives(x, 0.0, 3).unwrap()[3];
        assert!(
            (got - fd).abs() <= 1e-7 * fd.abs().max(1.0),
            "x={x}: {got} vs {fd}"
        );
    }
}

#[test]
fn bound_holds_for_sample_cluster() {
    // r_d = 0.1, x_c = 0, y = 1, r = 0.5, p = 10, 10 000 charges.
    let k = DiscKernel::new(0.1).unwrap();
    let n = 10_000;
    let xs: Vec<f64> = (0..n)
        .map(|i| -0.5 + (i as f64 * 0.618_033_988_749_895).fract())
        .collect();
    let qs: Vec<f64> = (0..n)
        .map(|i| (i as f64 * 0.414_213_562_373_095).fract() - 0.3)
        .collect();
    let m = moments(&xs, &qs, 0.0, 10);
    let approx = cluster_expansion(&k, 0.0, 1.0, &m, 10).unwrap();
    let exact = compensated_phi_sum(0.1, &xs, &qs, 1.0);
    let bound = k.truncation_bound(0.0, 1.0, 0.5, 10, 64).unwrap();
    let abs_q: f64 = qs.iter().map(|q| q.abs()).sum();
    assert!((approx - exact).abs() <= abs_q * bound.value);
}

#[test]
fn derivative_input_errors() {
    let k = DiscKernel::new(0.1).unwrap();
    assert_eq!(
        k.phi_derivatives(1.0, 1.0, 4),
        Err(Error::CoincidentExpansion(1.0))
    );
    assert!(k.phi_derivatives(f64::NAN, 1.0, 4).is_err());
}

proptest! {
    #[test]
    fn antisymmetric(x in -1e3..1e3f64, y in -1e3..1e3f64, rd in 1e-3..10.0f64) {
        let k = DiscKernel::new(rd).unwrap();
        prop_assert_eq!(k.phi(x, y), -k.phi(y, x));
    }

    #[test]
    fn bounded(x in -10.0..10.0f64, y in -10.0..10.0f64, rd in 1e-2..1.0f64) {
        let k = DiscKernel::new(rd).unwrap();
        prop_assert!(k.phi(x, y).abs() < 1.0);
    }

    #[test]
    fn derivatives_match_contour_oracle(
        x_c in -2.0..2.0f64,
        y in -2.0..2.0f64,
        rd in 1e-2..1.0f64,
    ) {
        prop_assume!((x_c - y).abs() >= 0.1);
        let k = DiscKernel::new(rd).unwrap();
        let got = k.phi_derivatives(x_c, y, 8).unwrap();
        let (want, noise) = contour_derivatives(rd, x_c, y, 8);
        for i in 0..=8 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-6 * want[i].abs() + noise[i],
                "k={} {} vs {}", i, got[i], want[i]);
        }
    }

    #[test]
    fn bound_decay_ratio(r in 0.01..0.9f64, rd in 0.01..1.0f64, p in 0usize..20) {
        let k = DiscKernel::new(rd).unwrap();
        let b = k.truncation_bound(0.0, 1.0, r, p, 64).unwrap();
        let b5 = k.truncation_bound(0.0, 1.0, r, p + 5, 64).unwrap();
        prop_assert_eq!(b.m, b5.m);
        let ratio = b5.value / b.value;
        prop_assert!((ratio / r.powi(5) - 1.0).abs() < 1e-12);
        prop_assert!(b5.value <= b.value);
    }

    #[test]
    fn bound_is_shift_invariant(shift in -5.0..5.0f64, r in 0.0..0.4f64) {
        let k = DiscKernel::new(0.2).unwrap();
        let a = k.truncation_bound(0.0, 1.0, r, 6, 64).unwrap();
        let b = k.truncation_bound(shift, shift - 1.0, r, 6, 64).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1e-300));
    }
}

//! Reference computations shared by the integration tests. Nothing here calls
//! into the routines it is used to check.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `Φ(x, y)` written out independently of the library.
pub fn phi_ref(rd: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    d / (d * d + rd * rd).sqrt()
}

/// `k`-th x-derivatives of `Φ` at `(x_c, y)`, `k = 0..=p`, by the trapezoid
/// rule on the Cauchy integral over a circle of half the analyticity radius.
///
/// Returns the values and a per-order absolute roundoff scale.
pub fn contour_derivatives(rd: f64, x_c: f64, y: f64, p: usize) -> (Vec<f64>, Vec<f64>) {
    const POINTS: usize = 512;
    let rho = 0.5 * ((x_c - y).powi(2) + rd * rd).sqrt();
    let f = |z: Complex64| {
        let w = z - y;
        w / (w * w + rd * rd).sqrt()
    };
    let samples: Vec<Complex64> = (0..POINTS)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / POINTS as f64;
            f(x_c + Complex64::from_polar(rho, t))
        })
        .collect();
    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut values = Vec::with_capacity(p + 1);
    let mut noise = Vec::with_capacity(p + 1);
    let mut fact = 1.0;
    for k in 0..=p {
        if k > 0 {
            fact *= k as f64;
        }
        let sum: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(m, v)| {
                v * Complex64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / POINTS as f64)
            })
            .sum();
        let scale = fact / rho.powi(k as i32);
        values.push(sum.re / POINTS as f64 * scale);
        noise.push(1e-13 * peak * scale);
    }
    (values, noise)
}

pub struct MpRow {
    pub x_c: f64,
    pub y: f64,
    pub rd: f64,
    pub derivs: [f64; 9],
}

/// 50-digit reference derivatives `Φ^(k)(x_c, y)`, `k ≤ 8`.
pub fn load_mp50() -> Vec<MpRow> {
    let text = include_str!("../data/phi_derivatives_mp50.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            let mut derivs = [0.0; 9];
            derivs.copy_from_slice(&v[3..12]);
            MpRow {
                x_c: v[0],
                y: v[1],
                rd: v[2],
                derivs,
            }
        })
        .collect()
}

/// `e(y)` by the O(NT) double loop, summing each side in ascending order.
pub fn brute_sign_terms(positions: &[f64], strengths: &[f64], targets: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .map(|&y| {
            let mut below = 0.0;
            let mut above = 0.0;
            for (&x, &q) in positions.iter().zip(strengths) {
                if x < y {
                    below += q;
                } else {
                    above += q;
                }
            }
            below - above
        })
        .collect()
}

/// `Σ q (x − c)^k / k!` with explicit powers and factorials.
pub fn brute_moment(positions: &[f64], strengths: &[f64], center: f64, k: usize) -> (f64, f64) {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let mut sum = 0.0;
    let mut abs = 0.0;
    for (&x, &q) in positions.iter().zip(strengths) {
        let t = q * (x - center).powi(k as i32) / fact;
        sum += t;
        abs += t.abs();
    }
    (sum, abs)
}

/// Neumaier-compensated `Σ q Φ(x, y)`.
pub fn compensated_phi_sum(rd: f64, positions: &[f64], strengths: &[f64], y: f64) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (&x, &q) in positions.iter().zip(strengths) {
        let t = q * phi_ref(rd, x, y);
        let s = sum + t;
        carry += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
    }
    sum + carry
}

/// Full direct field written from scratch.
pub fn naive_field(rd: f64, positions: &[f64], strengths: &[f64], y: f64) -> f64 {
    let mut e = 0.0;
    for (&x, &q) in positions.iter().zip(strengths) {
        e += if x < y { q } else { -q };
        e += q * phi_ref(rd, x, y);
    }
    e
}

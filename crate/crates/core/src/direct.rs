//! O(N²) reference evaluation of the field.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charges::ChargeSystem;
use crate::error::Result;
use crate::kernel::DiscKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tree,
    Direct,
}

/// Field values at the targets, in target order. Times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldResult {
    pub values: Vec<f64>,
    pub build_time: f64,
    pub eval_time: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Plain left-to-right accumulation.
    #[default]
    Plain,
    /// Neumaier-compensated accumulation.
    Compensated,
}

/// `E(y) = e(y) + Σ_j q_j Φ(x_j, y)`, summed over sources in ascending order.
pub fn evaluate_direct(
    system: &ChargeSystem,
    kernel: &DiscKernel,
    targets: &[f64],
) -> Result<FieldResult> {
    evaluate_direct_with(system, kernel, targets, Summation::Plain)
}

pub fn evaluate_direct_with(
    system: &ChargeSystem,
    kernel: &DiscKernel,
    targets: &[f64],
    summation: Summation,
) -> Result<FieldResult> {
    let start = Instant::now();
    let mut values = system.sign_term_unsorted(targets)?;
    let xs = system.positions();
    let qs = system.strengths();
    values
        .par_iter_mut()
        .zip(targets.par_iter())
        .with_min_len(16)
        .for_each(|(v, &y)| {
            *v += match summation {
                Summation::Plain => plain_sum(kernel, xs, qs, y),
                Summation::Compensated => compensated_sum(kernel, xs, qs, y),
            }
        });
    Ok(FieldResult {
        values,
        build_time: 0.0,
        eval_time: start.elapsed().as_secs_f64(),
        method: Method::Direct,
    })
}

fn plain_sum(kernel: &DiscKernel, xs: &[f64], qs: &[f64], y: f64) -> f64 {
    // Kernel values are formed a block at a time so the sqrt/div vectorize;
    // the accumulation itself stays strictly sequential.
    const BLOCK: usize = 64;
    let mut buf = [0.0; BLOCK];
    let mut acc = 0.0;
    for (xb, qb) in xs.chunks(BLOCK).zip(qs.chunks(BLOCK)) {
        let terms = &mut buf[..xb.len()];
        for ((t, &x), &q) in terms.iter_mut().zip(xb).zip(qb) {
            *t = q * kernel.phi(x, y);
        }
        for &t in terms.iter() {
            acc += t;
        }
    }
    acc
}

fn compensated_sum(kernel: &DiscKernel, xs: &[f64], qs: &[f64], y: f64) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (&x, &q) in xs.iter().zip(qs) {
        let t = q * kernel.phi(x, y);
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

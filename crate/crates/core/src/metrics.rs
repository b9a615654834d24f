//! Error metrics, random instances and timing harnesses for the accuracy and
//! scaling experiments.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charges::ChargeSystem;
use crate::direct::evaluate_direct;
use crate::error::{Error, Result};
use crate::kernel::DiscKernel;
use crate::tree::{cluster_expansion, moments, EvalConfig, Tree};

/// References below this fraction of the largest `|E_dir|` are left out of
/// the maximum relative error.
pub const NEAR_ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `max_i |(E_tree − E_dir) / E_dir|` over non-excluded targets.
    pub max_relative: f64,
    /// `Σ |E_tree − E_dir| / Σ |E_dir|`.
    pub avg_relative: f64,
    pub excluded_targets: usize,
}

pub fn error_report(approx: &[f64], reference: &[f64]) -> Result<ErrorReport> {
    if approx.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: approx.len(),
            right: reference.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::param("reference", "must be nonempty"));
    }
    let peak = reference.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    let floor = NEAR_ZERO_FLOOR * peak;
    let mut max_relative = 0.0_f64;
    let mut excluded_targets = 0;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &r) in approx.iter().zip(reference) {
        let diff = (a - r).abs();
        num += diff;
        den += r.abs();
        if r.abs() < floor {
            excluded_targets += 1;
        } else {
            max_relative = max_relative.max(diff / r.abs());
        }
    }
    Ok(ErrorReport {
        max_relative,
        avg_relative: num / den,
        excluded_targets,
    })
}

/// Wall-clock statistics in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub max: f64,
    pub min: f64,
    pub average: f64,
}

impl TimeStats {
    pub fn from_samples(ms: &[f64]) -> Self {
        assert!(!ms.is_empty(), "at least one timing sample");
        let max = ms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ms.iter().copied().fold(f64::INFINITY, f64::min);
        let average = (ms.iter().sum::<f64>() / ms.len() as f64).clamp(min, max);
        Self { max, min, average }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub repeats: usize,
    pub seed: u64,
    pub depth: usize,
    pub mean_leaf_occupancy: f64,
    /// Tree build plus evaluation.
    pub tree: TimeStats,
    pub tree_build: TimeStats,
    pub tree_eval: TimeStats,
    pub direct: Option<TimeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRecord {
    pub n: usize,
    pub max_depth: usize,
    pub depth: usize,
    pub mean_leaf_occupancy: f64,
    pub tree: TimeStats,
    pub tree_build: TimeStats,
    pub tree_eval: TimeStats,
}

/// Relative error of the truncated single-cluster expansion at each order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub p: usize,
    pub relative_error: f64,
}

/// `n` charges uniform in `[lo, hi)` with strengths uniform in `[0, 1)`.
pub fn uniform_instance(n: usize, lo: f64, hi: f64, seed: u64) -> ChargeSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(lo..hi), rng.gen::<f64>()))
        .collect();
    ChargeSystem::from_particles(raw).expect("generated values are finite")
}

/// Per-size seed, so instances do not change when the size list does.
pub fn instance_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Least-squares slope of `log t` against `log n`.
pub fn fit_exponent(ns: &[f64], times: &[f64]) -> f64 {
    assert_eq!(ns.len(), times.len());
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

struct TreeTimings {
    total: Vec<f64>,
    build: Vec<f64>,
    eval: Vec<f64>,
    depth: usize,
    occupancy: f64,
}

fn time_tree(
    system: &ChargeSystem,
    kernel: &DiscKernel,
    config: &EvalConfig,
    targets: &[f64],
    repeats: usize,
) -> Result<TreeTimings> {
    let mut out = TreeTimings {
        total: Vec::new(),
        build: Vec::new(),
        eval: Vec::new(),
        depth: 0,
        occupancy: 0.0,
    };
    // First pass is the discarded warm-up.
    for pass in 0..=repeats {
        let start = Instant::now();
        let tree = Tree::build(system, config)?;
        let built = ms(start);
        let eval_start = Instant::now();
        let field = tree.evaluate_all(kernel, config, system, targets)?;
        let evaluated = ms(eval_start);
        let total = ms(start);
        std::hint::black_box(&field.values);
        if pass > 0 {
            out.build.push(built);
            out.eval.push(evaluated);
            out.total.push(total);
        }
        out.depth = tree.depth();
        out.occupancy = tree.mean_leaf_occupancy();
    }
    Ok(out)
}

/// Times tree and (optionally) direct evaluation over a size sweep. Targets
/// are the source positions. Each method is warmed up once and then timed
/// `repeats` times.
pub fn bench(
    system_sizes: &[usize],
    repeats: usize,
    kernel: &DiscKernel,
    config: &EvalConfig,
    seed: u64,
    with_direct: bool,
) -> Result<Vec<BenchRecord>> {
    if repeats == 0 {
        return Err(Error::param("repeats", "must be >= 1"));
    }
    config.validate()?;
    let mut records = Vec::with_capacity(system_sizes.len());
    for &n in system_sizes {
        let system = uniform_instance(n, 0.0, 1.0, instance_seed(seed, n));
        let targets = system.positions().to_vec();
        let tree = time_tree(&system, kernel, config, &targets, repeats)?;
        let direct = if with_direct {
            let mut samples = Vec::with_capacity(repeats);
            for pass in 0..=repeats {
                let start = Instant::now();
                let field = evaluate_direct(&system, kernel, &targets)?;
                std::hint::black_box(&field.values);
                if pass > 0 {
                    samples.push(ms(start));
                }
            }
            Some(TimeStats::from_samples(&samples))
        } else {
            None
        };
        records.push(BenchRecord {
            n,
            repeats,
            seed,
            depth: tree.depth,
            mean_leaf_occupancy: tree.occupancy,
            tree: TimeStats::from_samples(&tree.total),
            tree_build: TimeStats::from_samples(&tree.build),
            tree_eval: TimeStats::from_samples(&tree.eval),
            direct,
        });
    }
    Ok(records)
}

/// Tree timings at fixed `n` with every leaf forced to the given depth
/// (leaf capacity 1, depth capped).
pub fn depth_scan(
    n: usize,
    depths: &[usize],
    repeats: usize,
    kernel: &DiscKernel,
    config: &EvalConfig,
    seed: u64,
) -> Result<Vec<DepthRecord>> {
    if repeats == 0 {
        return Err(Error::param("repeats", "must be >= 1"));
    }
    let system = uniform_instance(n, 0.0, 1.0, instance_seed(seed, n));
    let targets = system.positions().to_vec();
    depths
        .iter()
        .map(|&max_depth| {
            let cfg = EvalConfig {
                leaf_capacity: 1,
                max_depth,
                ..*config
            };
            let t = time_tree(&system, kernel, &cfg, &targets, repeats)?;
            Ok(DepthRecord {
                n,
                max_depth,
                depth: t.depth,
                mean_leaf_occupancy: t.occupancy,
                tree: TimeStats::from_samples(&t.total),
                tree_build: TimeStats::from_samples(&t.build),
                tree_eval: TimeStats::from_samples(&t.eval),
            })
        })
        .collect()
}

/// Relative error of expanding the whole of `system` about `center` as one
/// cluster, seen from `y`, against the exact `Σ q Φ`.
pub fn truncation_sweep(
    system: &ChargeSystem,
    kernel: &DiscKernel,
    center: f64,
    y: f64,
    orders: &[usize],
) -> Result<Vec<TruncationRecord>> {
    let p_max = orders.iter().copied().max().unwrap_or(0);
    let m = moments(system.positions(), system.strengths(), center, p_max);
    let exact: f64 = system.iter().map(|c| c.q * kernel.phi(c.x, y)).sum();
    if exact == 0.0 {
        return Err(Error::ZeroReference);
    }
    orders
        .iter()
        .map(|&p| {
            let approx = cluster_expansion(kernel, center, y, &m, p)?;
            Ok(TruncationRecord {
                p,
                relative_error: ((approx - exact) / exact).abs(),
            })
        })
        .collect()
}

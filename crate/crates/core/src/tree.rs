//! Binary treecode: uniform bisection of the source interval, per-node Taylor
//! moments, and far-field/near-field evaluation.

use std::ops::Range;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charges::ChargeSystem;
use crate::direct::{FieldResult, Method};
use crate::error::{Error, Result};
use crate::kernel::{select_order, DiscKernel, DEFAULT_CONTOUR_SAMPLES};

/// Depth at which subdivision stops regardless of occupancy.
pub const HARD_MAX_DEPTH: usize = 60;

const BOUNDS_PAD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Truncation order; the cap on the order when `adaptive` is set.
    pub p: usize,
    /// A node of half-width `r` is expanded for a target at distance `R`
    /// from its centre iff `r/R ≤ theta`.
    pub theta: f64,
    pub leaf_capacity: usize,
    /// Levels below the root at which nodes become leaves unconditionally.
    pub max_depth: usize,
    pub adaptive: bool,
    /// Absolute error budget per target in adaptive mode.
    pub tolerance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            p: 10,
            theta: 1.0 / 3.0,
            leaf_capacity: 40,
            max_depth: HARD_MAX_DEPTH,
            adaptive: false,
            tolerance: 1e-10,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::param(
                "theta",
                format!("need 0 < theta < 1, got {}", self.theta),
            ));
        }
        if self.leaf_capacity == 0 {
            return Err(Error::param("leaf_capacity", "must be >= 1"));
        }
        if self.max_depth > HARD_MAX_DEPTH {
            return Err(Error::param(
                "max_depth",
                format!("must be <= {HARD_MAX_DEPTH}, got {}", self.max_depth),
            ));
        }
        if self.adaptive && !(self.tolerance > 0.0) {
            return Err(Error::param(
                "tolerance",
                format!("must be > 0, got {}", self.tolerance),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub half_width: f64,
    pub level: usize,
    /// Indices into the sorted source arrays.
    pub sources: Range<usize>,
    /// `Σ |q|` over the node's sources.
    pub abs_charge: f64,
    /// Left and right halves; empty halves are absent.
    pub children: [Option<usize>; 2],
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children == [None, None]
    }

    pub fn count(&self) -> usize {
        self.sources.len()
    }
}

/// One step of the traversal for a given target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// Node accepted for far-field expansion.
    Far(usize),
    /// Leaf summed directly.
    Near(usize),
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    moments: Vec<f64>,
    order: usize,
    positions: Vec<f64>,
    strengths: Vec<f64>,
    depth: usize,
    build_time: Duration,
}

/// `m_k = Σ_j q_j (x_j − center)^k / k!` for `k = 0..=order`.
pub fn moments(positions: &[f64], strengths: &[f64], center: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    accumulate_moments(positions, strengths, center, &mut out);
    out
}

fn accumulate_moments(positions: &[f64], strengths: &[f64], center: f64, out: &mut [f64]) {
    for (&x, &q) in positions.iter().zip(strengths) {
        let t = x - center;
        let mut term = q;
        out[0] += term;
        for (k, m) in out.iter_mut().enumerate().skip(1) {
            term *= t / k as f64;
            *m += term;
        }
    }
}

/// Truncated expansion `Σ_k Φ^(k)(center, y) m_k`.
///
/// `scratch` must hold at least `moments.len()` values.
#[inline]
fn expand(kernel: &DiscKernel, center: f64, y: f64, moments: &[f64], scratch: &mut [f64]) -> f64 {
    let derivs = &mut scratch[..moments.len()];
    kernel.derivatives_unchecked(center - y, derivs);
    derivs.iter().zip(moments).map(|(d, m)| d * m).sum()
}

/// Far-field value of a single cluster about `center`, truncated at order `p`.
pub fn cluster_expansion(
    kernel: &DiscKernel,
    center: f64,
    y: f64,
    moments: &[f64],
    p: usize,
) -> Result<f64> {
    if p >= moments.len() {
        return Err(Error::param(
            "p",
            format!("order {p} exceeds available moments {}", moments.len() - 1),
        ));
    }
    if center == y {
        return Err(Error::CoincidentExpansion(y));
    }
    let mut scratch = vec![0.0; p + 1];
    Ok(expand(kernel, center, y, &moments[..=p], &mut scratch))
}

/// Multipole acceptance test: `half_width / |y − center| ≤ theta`.
#[inline]
pub fn well_separated(node: &TreeNode, y: f64, theta: f64) -> bool {
    let dist = (y - node.center).abs();
    dist > 0.0 && node.half_width <= theta * dist
}

impl Tree {
    /// Builds the tree and its moments up to order `config.p`.
    pub fn build(system: &ChargeSystem, config: &EvalConfig) -> Result<Self> {
        config.validate()?;
        if system.is_empty() {
            return Err(Error::EmptySystem);
        }
        let start = Instant::now();
        let positions = system.positions().to_vec();
        let strengths = system.strengths().to_vec();
        let order = config.p;
        let width = order + 1;

        let min = positions[0];
        let max = positions[positions.len() - 1];
        let pad = BOUNDS_PAD
            * (max - min)
                .max(min.abs())
                .max(max.abs())
                .max(f64::MIN_POSITIVE);
        let (lo, hi) = (min - pad, max + pad);

        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut moments: Vec<f64> = Vec::new();
        let mut depth = 0;
        let root = new_node(lo, hi, 0, 0..positions.len(), &strengths);
        nodes.push(root);
        let mut pending = vec![0usize];
        while let Some(id) = pending.pop() {
            let node = &nodes[id];
            depth = depth.max(node.level);
            if node.count() <= config.leaf_capacity || node.level >= config.max_depth {
                continue;
            }
            let (lo, hi, center, level) = (node.lo, node.hi, node.center, node.level);
            let range = node.sources.clone();
            let split = range.start + positions[range.clone()].partition_point(|&x| x < center);
            let halves = [
                (lo, center, range.start..split),
                (center, hi, split..range.end),
            ];
            let mut children = [None, None];
            for (slot, (a, b, r)) in children.iter_mut().zip(halves) {
                if !r.is_empty() {
                    *slot = Some(nodes.len());
                    nodes.push(new_node(a, b, level + 1, r, &strengths));
                }
            }
            nodes[id].children = children;
            // Right first so the left subtree is processed (and numbered) first.
            pending.extend(children.iter().rev().flatten());
        }

        moments.resize(nodes.len() * width, 0.0);
        for (node, out) in nodes.iter().zip(moments.chunks_exact_mut(width)) {
            let r = node.sources.clone();
            accumulate_moments(&positions[r.clone()], &strengths[r], node.center, out);
        }

        Ok(Self {
            nodes,
            moments,
            order,
            positions,
            strengths,
            depth,
            build_time: start.elapsed(),
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn moments(&self, id: usize) -> &[f64] {
        let w = self.order + 1;
        &self.moments[id * w..(id + 1) * w]
    }

    /// Highest moment order stored.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Deepest level below the root.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn mean_leaf_occupancy(&self) -> f64 {
        let (count, sum) = self
            .leaves()
            .fold((0usize, 0usize), |(c, s), n| (c + 1, s + n.count()));
        sum as f64 / count as f64
    }

    /// Walks the tree for target `y`, reporting accepted far-field nodes and
    /// directly summed leaves in traversal order.
    #[inline]
    pub fn traverse(
        &self,
        y: f64,
        theta: f64,
        stack: &mut Vec<usize>,
        mut visit: impl FnMut(Interaction),
    ) {
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if well_separated(node, y, theta) {
                visit(Interaction::Far(id));
            } else if node.is_leaf() {
                visit(Interaction::Near(id));
            } else {
                stack.extend(node.children.iter().rev().flatten());
            }
        }
    }

    pub fn interactions(&self, y: f64, theta: f64) -> Vec<Interaction> {
        let mut out = Vec::new();
        self.traverse(y, theta, &mut Vec::new(), |i| out.push(i));
        out
    }

    /// Far-field plus near-field sum `Σ_j q_j Φ(x_j, y)`; excludes the sign term.
    pub fn evaluate_point(&self, kernel: &DiscKernel, config: &EvalConfig, y: f64) -> Result<f64> {
        self.check_config(config)?;
        if !y.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        let mut scratch = vec![0.0; self.order + 1];
        Ok(self.sum_at(kernel, config, y, &mut Vec::new(), &mut scratch))
    }

    fn check_config(&self, config: &EvalConfig) -> Result<()> {
        config.validate()?;
        if config.p > self.order {
            return Err(Error::param(
                "p",
                format!(
                    "order {} exceeds the tree's moment order {}",
                    config.p, self.order
                ),
            ));
        }
        Ok(())
    }

    fn sum_at(
        &self,
        kernel: &DiscKernel,
        config: &EvalConfig,
        y: f64,
        stack: &mut Vec<usize>,
        scratch: &mut [f64],
    ) -> f64 {
        let per_node_tol = config.tolerance / (3 * self.depth.max(1)) as f64;
        let mut acc = 0.0;
        self.traverse(y, config.theta, stack, |step| match step {
            Interaction::Far(id) => {
                let node = &self.nodes[id];
                let p = if config.adaptive {
                    self.adaptive_order(kernel, node, y, per_node_tol, config.p)
                } else {
                    config.p
                };
                acc += expand(kernel, node.center, y, &self.moments(id)[..=p], scratch);
            }
            Interaction::Near(id) => {
                let r = self.nodes[id].sources.clone();
                for (&x, &q) in self.positions[r.clone()].iter().zip(&self.strengths[r]) {
                    acc += q * kernel.phi(x, y);
                }
            }
        });
        acc
    }

    fn adaptive_order(
        &self,
        kernel: &DiscKernel,
        node: &TreeNode,
        y: f64,
        tol: f64,
        p_max: usize,
    ) -> usize {
        if node.abs_charge == 0.0 {
            return 0;
        }
        let big_r = (y - node.center).abs();
        let m = kernel.contour_max(big_r, DEFAULT_CONTOUR_SAMPLES);
        select_order(m, big_r, node.half_width, tol / node.abs_charge, p_max).p
    }

    /// Full field `e(y) + Σ_j q_j Φ(x_j, y)` at every target. `system` must be
    /// the one the tree was built from.
    pub fn evaluate_all(
        &self,
        kernel: &DiscKernel,
        config: &EvalConfig,
        system: &ChargeSystem,
        targets: &[f64],
    ) -> Result<FieldResult> {
        self.check_config(config)?;
        if system.len() != self.positions.len() {
            return Err(Error::LengthMismatch {
                left: system.len(),
                right: self.positions.len(),
            });
        }
        let start = Instant::now();
        let mut values = system.sign_term_unsorted(targets)?;
        values
            .par_iter_mut()
            .zip(targets.par_iter())
            .with_min_len(256)
            .for_each_init(
                || (Vec::with_capacity(128), vec![0.0; self.order + 1]),
                |(stack, scratch), (v, &y)| *v += self.sum_at(kernel, config, y, stack, scratch),
            );
        Ok(FieldResult {
            values,
            build_time: self.build_time.as_secs_f64(),
            eval_time: start.elapsed().as_secs_f64(),
            method: Method::Tree,
        })
    }
}

fn new_node(lo: f64, hi: f64, level: usize, sources: Range<usize>, strengths: &[f64]) -> TreeNode {
    TreeNode {
        lo,
        hi,
        center: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        level,
        abs_charge: strengths[sources.clone()].iter().map(|q| q.abs()).sum(),
        sources,
        children: [None, None],
    }
}

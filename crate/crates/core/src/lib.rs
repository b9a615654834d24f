//! Fast summation of the disc-model axial electric field.
//!
//! `N` axial charges acting on `N` targets are summed in `O(N log N)` with a
//! binary treecode: well-separated source intervals are replaced by truncated
//! Taylor expansions of the kernel, neighbours are summed directly. The
//! truncation error has an explicit bound ([`kernel::TruncationBound`]) and a
//! direct `O(N²)` evaluator ([`direct::evaluate_direct`]) serves as oracle.
//!
//! ```
//! use disctree::{ChargeSystem, DiscKernel, EvalConfig, Tree, evaluate_direct};
//!
//! let system = ChargeSystem::from_particles((0..2000).map(|i| {
//!     let x = (i as f64 * 0.618_033_988_7).fract();
//!     (x, 1.0)
//! }))?;
//! let kernel = DiscKernel::new(0.1)?;
//! let config = EvalConfig { p: 20, ..Default::default() };
//! let tree = Tree::build(&system, &config)?;
//! let targets = [0.25, 0.5, 0.75];
//! let fast = tree.evaluate_all(&kernel, &config, &system, &targets)?;
//! let slow = evaluate_direct(&system, &kernel, &targets)?;
//! for (a, b) in fast.values.iter().zip(&slow.values) {
//!     assert!((a - b).abs() <= 1e-10 * system.len() as f64);
//! }
//! # Ok::<(), disctree::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charges;
pub mod direct;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod quadrature;
pub mod tree;

pub use charges::{Charge, ChargeSystem, DensitySpec, DensityValues, ImageSpec, EPSILON_0};
pub use direct::{evaluate_direct, evaluate_direct_with, FieldResult, Method, Summation};
pub use error::{Error, Result};
pub use kernel::{DiscKernel, OrderChoice, TruncationBound};
pub use metrics::{error_report, BenchRecord, DepthRecord, ErrorReport, TimeStats};
pub use tree::{well_separated, EvalConfig, Interaction, Tree, TreeNode};

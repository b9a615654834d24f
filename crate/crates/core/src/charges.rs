//! Discrete charge systems and the sign term of the field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Vacuum permittivity in SI units.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// A point charge on the axis. `q` already carries the `1/(2ε₀)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub x: f64,
    pub q: f64,
}

/// Charges sorted by position, with running sums of their strengths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChargeSystem {
    positions: Vec<f64>,
    strengths: Vec<f64>,
    prefix: Vec<f64>,
}

/// Per-cell description of a line charge density `σ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityValues {
    /// One constant value per cell.
    CellConstant(Vec<f64>),
    /// Values at the `cells + 1` cell endpoints, linear within each cell.
    Endpoints(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub domain: [f64; 2],
    pub cells: usize,
    pub values: DensityValues,
    pub quadrature_order: usize,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
}

fn default_eps0() -> f64 {
    EPSILON_0
}

/// Electrode planes used for image charges. The upper electrode sits at
/// `lower_electrode + gap_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub gap_length: f64,
    pub lower_electrode: f64,
    pub reflect_lower: bool,
    pub reflect_upper: bool,
}

impl ImageSpec {
    pub fn upper_electrode(&self) -> f64 {
        self.lower_electrode + self.gap_length
    }
}

impl ChargeSystem {
    /// Builds a system from `(x, q)` pairs in any order.
    pub fn from_particles<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut charges = Vec::new();
        for (index, (x, q)) in raw.into_iter().enumerate() {
            if !x.is_finite() || !q.is_finite() {
                return Err(Error::NonFinite { index });
            }
            charges.push(Charge { x, q });
        }
        Ok(Self::from_charges(charges))
    }

    fn from_charges(mut charges: Vec<Charge>) -> Self {
        // Stable so coincident particles keep their input order.
        charges.sort_by(|a, b| a.x.total_cmp(&b.x));
        let positions: Vec<f64> = charges.iter().map(|c| c.x).collect();
        let strengths: Vec<f64> = charges.iter().map(|c| c.q).collect();
        let prefix = strengths
            .iter()
            .scan(0.0, |acc, &q| {
                *acc += q;
                Some(*acc)
            })
            .collect();
        Self {
            positions,
            strengths,
            prefix,
        }
    }

    /// Discretizes `σ(x)` with Gauss–Legendre quadrature on each cell.
    ///
    /// Every node becomes a charge `q = ω σ(x) Δx / (2 ε₀)` with `ω` the
    /// reference weight on `[-1, 1]` halved, so a cell of constant density
    /// carries exactly `σ Δx / (2 ε₀)`.
    pub fn from_density(spec: &DensitySpec) -> Result<Self> {
        let [a, b] = spec.domain;
        if !a.is_finite() || !b.is_finite() || !(b > a) {
            return Err(Error::param(
                "domain",
                format!("need finite a < b, got [{a}, {b}]"),
            ));
        }
        if spec.cells == 0 {
            return Err(Error::param("cells", "must be >= 1"));
        }
        if !(spec.eps0 > 0.0) || !spec.eps0.is_finite() {
            return Err(Error::param(
                "eps0",
                format!("must be > 0, got {}", spec.eps0),
            ));
        }
        let rule = GaussLegendre::new(spec.quadrature_order)?;
        let expected = match &spec.values {
            DensityValues::CellConstant(_) => spec.cells,
            DensityValues::Endpoints(_) => spec.cells + 1,
        };
        let values = match &spec.values {
            DensityValues::CellConstant(v) | DensityValues::Endpoints(v) => v,
        };
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: expected,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }

        let dx = (b - a) / spec.cells as f64;
        let scale = 1.0 / (2.0 * spec.eps0);
        let mut charges = Vec::with_capacity(spec.cells * rule.order());
        for cell in 0..spec.cells {
            let lo = a + cell as f64 * dx;
            let hi = lo + dx;
            for (x, w) in rule.mapped(lo, hi) {
                let sigma = match &spec.values {
                    DensityValues::CellConstant(v) => v[cell],
                    DensityValues::Endpoints(v) => {
                        let t = (x - lo) / dx;
                        v[cell] + t * (v[cell + 1] - v[cell])
                    }
                };
                charges.push(Charge {
                    x,
                    q: 0.5 * w * sigma * dx * scale,
                });
            }
        }
        Ok(Self::from_charges(charges))
    }

    /// Adds sign-flipped mirror charges across the enabled electrodes. An
    /// image is kept only if it lies closer than the gap length to its
    /// electrode.
    pub fn with_images(&self, spec: &ImageSpec) -> Result<Self> {
        if !(spec.gap_length > 0.0) || !spec.gap_length.is_finite() {
            return Err(Error::param(
                "gap_length",
                format!("must be > 0, got {}", spec.gap_length),
            ));
        }
        if !spec.lower_electrode.is_finite() {
            return Err(Error::param("lower_electrode", "must be finite"));
        }
        let mut charges: Vec<Charge> = self.iter().collect();
        let mut planes = Vec::with_capacity(2);
        if spec.reflect_lower {
            planes.push(spec.lower_electrode);
        }
        if spec.reflect_upper {
            planes.push(spec.upper_electrode());
        }
        for plane in planes {
            for c in self.iter() {
                if (c.x - plane).abs() < spec.gap_length {
                    charges.push(Charge {
                        x: 2.0 * plane - c.x,
                        q: -c.q,
                    });
                }
            }
        }
        Ok(Self::from_charges(charges))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    /// `prefix[m] = q_0 + … + q_m`.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Charge> + '_ {
        self.positions
            .iter()
            .zip(&self.strengths)
            .map(|(&x, &q)| Charge { x, q })
    }

    /// Sum of charges strictly below `y`, given the number of such charges.
    #[inline]
    fn below(&self, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.prefix[count - 1]
        }
    }

    /// `e(y) = Σ_{x_j < y} q_j − Σ_{x_j ≥ y} q_j` for each of the ascending
    /// `targets`, by a single merge over both sorted sequences.
    pub fn sign_term_all(&self, targets: &[f64]) -> Result<Vec<f64>> {
        if let Some(i) = targets.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::UnsortedTargets { index: i + 1 });
        }
        let total = self.total();
        let mut count = 0;
        Ok(targets
            .iter()
            .map(|&y| {
                while count < self.positions.len() && self.positions[count] < y {
                    count += 1;
                }
                let below = self.below(count);
                below - (total - below)
            })
            .collect())
    }

    /// [`Self::sign_term_all`] for targets in arbitrary order.
    pub fn sign_term_unsorted(&self, targets: &[f64]) -> Result<Vec<f64>> {
        if let Some(index) = targets.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut order: Vec<usize> = (0..targets.len()).collect();
        order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
        let terms = self.sign_term_all(&sorted)?;
        let mut out = vec![0.0; targets.len()];
        for (&i, e) in order.iter().zip(terms) {
            out[i] = e;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> ChargeSystem {
        ChargeSystem::from_particles([(0.8, 1.0), (0.2, 1.0)]).unwrap()
    }

    #[test]
    fn empty_system() {
        let s = ChargeSystem::from_particles(Vec::new()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.total(), 0.0);
        assert_eq!(s.sign_term_all(&[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sorts_and_sums() {
        let s = two();
        assert_eq!(s.positions(), &[0.2, 0.8]);
        assert_eq!(s.prefix(), &[1.0, 2.0]);
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            ChargeSystem::from_particles([(0.0, 1.0), (f64::NAN, 1.0)]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(ChargeSystem::from_particles([(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn duplicates_are_kept() {
        let s = ChargeSystem::from_particles([(0.5, 1.0), (0.5, 2.0)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.strengths(), &[1.0, 2.0]);
    }

    #[test]
    fn sign_term_examples() {
        let s = two();
        assert_eq!(s.sign_term_all(&[0.5]).unwrap(), vec![0.0]);
        assert_eq!(s.sign_term_all(&[0.9]).unwrap(), vec![2.0]);
        // A charge at the target counts on the minus side.
        assert_eq!(s.sign_term_all(&[0.8]).unwrap(), vec![0.0]);
        assert_eq!(s.sign_term_all(&[0.2]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn sign_term_rejects_unsorted() {
        assert_eq!(
            two().sign_term_all(&[0.5, 0.1]),
            Err(Error::UnsortedTargets { index: 1 })
        );
    }

    #[test]
    fn sign_term_unsorted_scatters_back() {
        let s = two();
        assert_eq!(
            s.sign_term_unsorted(&[0.9, 0.1, 0.5]).unwrap(),
            vec![2.0, -2.0, 0.0]
        );
    }

    fn constant(sigma: f64, eps0: f64, cells: usize, order: usize) -> DensitySpec {
        DensitySpec {
            domain: [0.0, 1.0],
            cells,
            values: DensityValues::CellConstant(vec![sigma; cells]),
            quadrature_order: order,
            eps0,
        }
    }

    #[test]
    fn zero_density_gives_zero_charges() {
        let s = ChargeSystem::from_density(&constant(0.0, EPSILON_0, 3, 4)).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.strengths().iter().all(|&q| q == 0.0));
    }

    #[test]
    fn constant_density_total() {
        for order in 1..=16 {
            let spec = constant(2.0 * EPSILON_0, EPSILON_0, 1, order);
            let s = ChargeSystem::from_density(&spec).unwrap();
            assert!(
                (s.total() - 1.0).abs() < 1e-14,
                "order {order}: {}",
                s.total()
            );
        }
    }

    #[test]
    fn linear_density_two_point_rule() {
        // σ(x) = x on [0, 1], one cell, 2 nodes at (1 ∓ 1/√3)/2 with weight 1.
        let spec = DensitySpec {
            domain: [0.0, 1.0],
            cells: 1,
            values: DensityValues::Endpoints(vec![0.0, 1.0]),
            quadrature_order: 2,
            eps0: 0.5,
        };
        let s = ChargeSystem::from_density(&spec).unwrap();
        let a = 1.0 / 3.0_f64.sqrt();
        let nodes = [0.5 * (1.0 - a), 0.5 * (1.0 + a)];
        for (i, &x) in nodes.iter().enumerate() {
            assert!((s.positions()[i] - x).abs() < 1e-15);
            // q = (ω/2) σ(x) Δx / (2 ε₀) = 0.5 · x
            assert!((s.strengths()[i] - 0.5 * x).abs() < 1e-15);
        }
        assert!((s.total() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let mut spec = constant(1.0, 1.0, 2, 17);
        assert_eq!(
            ChargeSystem::from_density(&spec),
            Err(Error::UnsupportedQuadratureOrder(17))
        );
        spec.quadrature_order = 2;
        spec.cells = 0;
        assert!(ChargeSystem::from_density(&spec).is_err());
        spec.cells = 3;
        assert!(matches!(
            ChargeSystem::from_density(&spec),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        ));
        let mut spec = constant(1.0, 0.0, 2, 2);
        assert!(ChargeSystem::from_density(&spec).is_err());
        spec.eps0 = 1.0;
        spec.domain = [1.0, 0.0];
        assert!(ChargeSystem::from_density(&spec).is_err());
    }

    fn images(lower: bool, upper: bool, gap: f64) -> ImageSpec {
        ImageSpec {
            gap_length: gap,
            lower_electrode: 0.0,
            reflect_lower: lower,
            reflect_upper: upper,
        }
    }

    #[test]
    fn lower_image() {
        let s = ChargeSystem::from_particles([(0.3, 1.0)]).unwrap();
        let m = s.with_images(&images(true, false, 1.0)).unwrap();
        assert_eq!(
            m.iter().collect::<Vec<_>>(),
            vec![Charge { x: -0.3, q: -1.0 }, Charge { x: 0.3, q: 1.0 },]
        );
    }

    #[test]
    fn distant_charge_has_no_image() {
        let s = ChargeSystem::from_particles([(0.3, 1.0)]).unwrap();
        let m = s.with_images(&images(true, false, 0.2)).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn both_images() {
        let s = ChargeSystem::from_particles([(0.3, 1.0)]).unwrap();
        let m = s.with_images(&images(true, true, 1.0)).unwrap();
        assert_eq!(m.positions(), &[-0.3, 0.3, 1.7]);
        assert_eq!(m.strengths(), &[-1.0, 1.0, -1.0]);
        assert_eq!(m.total(), -1.0);
    }
}

//! The disc-model interaction kernel, its derivatives and the far-field
//! truncation bound.
//!
//! A uniformly charged disc of radius `r_d` centred at `x` contributes
//! `Φ(x, y) = (x − y) / √((x − y)² + r_d²)` (plus a ±1 sign term handled in
//! [`crate::charges`]) to the axial field at `y`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Contour samples used for the bound when the caller has no preference.
pub const DEFAULT_CONTOUR_SAMPLES: usize = 64;

/// Multiplier applied to the sampled contour maximum.
pub const CONTOUR_SAFETY_FACTOR: f64 = 1.1;

/// Largest truncation order considered by [`DiscKernel::choose_p`] by default.
pub const DEFAULT_P_MAX: usize = 30;

/// Kernel parameters: the disc radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscKernel {
    radius: f64,
    radius_sq: f64,
}

/// `|R_p| ≤ M · R/(R − r) · (r/R)^(p+1)` for a unit charge anywhere within `r`
/// of the expansion centre, seen from a target at distance `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBound {
    /// Maximum of `|f|` on the contour `|ξ − x_c| = R`.
    pub m: f64,
    /// Contour radius, the distance from expansion centre to target.
    pub big_r: f64,
    /// Cluster radius.
    pub r: f64,
    pub p: usize,
    pub value: f64,
}

impl TruncationBound {
    /// Assembles the bound from its parts without touching the kernel.
    pub fn from_parts(m: f64, big_r: f64, r: f64, p: usize) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::param(
                "m",
                format!("must be finite and >= 0, got {m}"),
            ));
        }
        if !(r >= 0.0) || !(r < big_r) || !big_r.is_finite() {
            return Err(Error::NotSeparated { r, big_r });
        }
        let value = m * big_r / (big_r - r) * (r / big_r).powi(p as i32 + 1);
        Ok(Self {
            m,
            big_r,
            r,
            p,
            value,
        })
    }

    /// Same `M`, `R`, `r` at a different order.
    pub fn with_order(&self, p: usize) -> Self {
        Self::from_parts(self.m, self.big_r, self.r, p).expect("parts already validated")
    }
}

/// Outcome of the adaptive order search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderChoice {
    pub p: usize,
    /// True when no order up to the cap met the tolerance.
    pub saturated: bool,
    pub bound: TruncationBound,
}

impl DiscKernel {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param(
                "r_d",
                format!("disc radius must be finite and > 0, got {radius}"),
            ));
        }
        Ok(Self {
            radius,
            radius_sq: radius * radius,
        })
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `Φ(x, y)`. Exactly antisymmetric under swapping `x` and `y`.
    #[inline(always)]
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        d / (d * d + self.radius_sq).sqrt()
    }

    /// `∂^k Φ / ∂x^k (x_c, y)` for `k = 0..=p`.
    pub fn phi_derivatives(&self, x_c: f64, y: f64, p: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; p + 1];
        self.phi_derivatives_into(x_c, y, &mut out)?;
        Ok(out)
    }

    /// Fills `out[k]` with the `k`-th derivative, `k < out.len()`.
    pub fn phi_derivatives_into(&self, x_c: f64, y: f64, out: &mut [f64]) -> Result<()> {
        if !x_c.is_finite() || !y.is_finite() {
            return Err(Error::param("x_c, y", "must be finite"));
        }
        if x_c == y {
            return Err(Error::CoincidentExpansion(x_c));
        }
        self.derivatives_unchecked(x_c - y, out);
        Ok(())
    }

    /// Derivatives at separation `d = x_c − y`, which must be nonzero.
    ///
    /// For `|d| ≥ r_d` this is the three-term recurrence obtained by
    /// differentiating `r_d² Φ = Φ' [(x−y)³ + r_d²(x−y)]`. Below that the
    /// recurrence loses about `log10(r_d/|d|)` digits per order, so the
    /// Taylor coefficients are produced instead from the power-series
    /// recurrence of `((x−y)² + r_d²)^(-1/2)`, which has no cancellation there.
    #[inline]
    pub(crate) fn derivatives_unchecked(&self, d: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        if d.abs() >= self.radius {
            self.leibniz_recurrence(d, out);
        } else {
            self.series_recurrence(d, out);
        }
    }

    fn leibniz_recurrence(&self, d: f64, out: &mut [f64]) {
        let r2 = self.radius_sq;
        let s2 = d * d + r2;
        let s = s2.sqrt();
        out[0] = d / s;
        if out.len() == 1 {
            return;
        }
        out[1] = r2 / (s2 * s);
        let inv = 1.0 / (d * s2);
        let lead = 3.0 * d * d + r2;
        for k in 2..out.len() {
            let a = (k - 1) as f64;
            let mut acc = (r2 - a * lead) * out[k - 1];
            // The (k−1)(k−2) and (k−1)(k−2)(k−3) coefficients vanish at k = 2, 3.
            if k >= 3 {
                let b = a * (k - 2) as f64;
                acc -= 3.0 * b * d * out[k - 2];
                if k >= 4 {
                    acc -= b * (k - 3) as f64 * out[k - 3];
                }
            }
            out[k] = acc * inv;
        }
    }

    fn series_recurrence(&self, d: f64, out: &mut [f64]) {
        // h_k: Taylor coefficients of (s² + 2 d t + t²)^(-1/2) in t.
        let s2 = d * d + self.radius_sq;
        let n = out.len();
        out[0] = 1.0 / s2.sqrt();
        if n > 1 {
            out[1] = -d * out[0] / s2;
        }
        for k in 2..n {
            let kf = k as f64;
            out[k] = (-(2.0 * kf - 1.0) * d * out[k - 1] - (kf - 1.0) * out[k - 2]) / (kf * s2);
        }
        // Φ(x_c + t) = (d + t) · h(t)  ⇒  c_k = d h_k + h_{k−1}.
        for k in (1..n).rev() {
            out[k] = d * out[k] + out[k - 1];
        }
        out[0] *= d;
        let mut fact = 1.0;
        for (k, v) in out.iter_mut().enumerate().skip(2) {
            fact *= k as f64;
            *v *= fact;
        }
    }

    /// Complex extension `f(ξ) = (ξ − y)/√((ξ − y)² + r_d²)`, principal branch.
    #[inline]
    pub fn phi_complex(&self, xi: Complex64, y: f64) -> Complex64 {
        let w = xi - y;
        w / (w * w + self.radius_sq).sqrt()
    }

    /// Estimated `max |f|` over the circle of radius `big_r` about `x_c`, where
    /// `big_r = |y − x_c|`. Depends only on `big_r` and `r_d`.
    ///
    /// Equally spaced samples, plus a golden-section refinement around the
    /// two contour points nearest the branch points `y ± i r_d`, where the
    /// peak becomes too narrow for uniform sampling once `r_d ≪ R`. The
    /// result is scaled by [`CONTOUR_SAFETY_FACTOR`].
    pub fn contour_max(&self, big_r: f64, samples: usize) -> f64 {
        let samples = samples.max(1);
        let branch_radius = (big_r * big_r + self.radius_sq).sqrt();
        debug_assert!(big_r < branch_radius);

        // Place x_c at the origin and the target at +R.
        let y = big_r;
        let abs_f = |theta: f64| {
            self.phi_complex(Complex64::from_polar(big_r, theta), y)
                .norm()
        };

        let mut best = (0..samples)
            .map(|i| abs_f(2.0 * PI * i as f64 / samples as f64))
            .fold(0.0_f64, f64::max);

        let nearest = (self.radius).atan2(big_r);
        let half_window = (2.0 * PI / samples as f64).min(PI);
        for centre in [nearest, -nearest] {
            best = best.max(golden_max(
                &abs_f,
                centre - half_window,
                centre + half_window,
            ));
        }
        best * CONTOUR_SAFETY_FACTOR
    }

    /// Truncation bound for a cluster of radius `r` about `x_c` seen from `y`.
    pub fn truncation_bound(
        &self,
        x_c: f64,
        y: f64,
        r: f64,
        p: usize,
        contour_samples: usize,
    ) -> Result<TruncationBound> {
        let big_r = (y - x_c).abs();
        if !(r >= 0.0) || !(r < big_r) {
            return Err(Error::NotSeparated { r, big_r });
        }
        if contour_samples == 0 {
            return Err(Error::param("contour_samples", "must be positive"));
        }
        TruncationBound::from_parts(self.contour_max(big_r, contour_samples), big_r, r, p)
    }

    /// Smallest order `p ≤ p_max` whose bound is at most `tolerance`.
    pub fn choose_p(
        &self,
        r: f64,
        big_r: f64,
        tolerance: f64,
        p_max: usize,
    ) -> Result<OrderChoice> {
        if !(tolerance > 0.0) {
            return Err(Error::param(
                "tolerance",
                format!("must be > 0, got {tolerance}"),
            ));
        }
        if !(r >= 0.0) || !(r < big_r) {
            return Err(Error::NotSeparated { r, big_r });
        }
        let m = self.contour_max(big_r, DEFAULT_CONTOUR_SAMPLES);
        Ok(select_order(m, big_r, r, tolerance, p_max))
    }
}

/// Linear scan over orders for a fixed contour maximum.
pub(crate) fn select_order(
    m: f64,
    big_r: f64,
    r: f64,
    tolerance: f64,
    p_max: usize,
) -> OrderChoice {
    let base = TruncationBound::from_parts(m, big_r, r, 0).expect("validated by caller");
    let ratio = r / big_r;
    let mut value = base.value;
    for p in 0..=p_max {
        if value <= tolerance {
            return OrderChoice {
                p,
                saturated: false,
                bound: base.with_order(p),
            };
        }
        value *= ratio;
    }
    OrderChoice {
        p: p_max,
        saturated: true,
        bound: base.with_order(p_max),
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut best = fa.max(fb).max(f(lo)).max(f(hi));
    for _ in 0..80 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
        best = best.max(fa).max(fb);
        if hi - lo < 1e-15 {
            break;
        }
    }
    best
}

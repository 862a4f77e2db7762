//! Metrics on the sphere S^m, represented structurally.
//!
//! A [`SphereMetric`] is a small expression tree over a fixed two-chart
//! atlas: the round metric, positive rescalings, convex blends, and two
//! ambient-polynomial perturbations. Component matrices are evaluated
//! lazily from the tree, never tabulated. This matters: deformation
//! operators build blends whose weights hit exact `0.0` / `1.0` plateaus,
//! and the constructors short-circuit those cases to the unchanged operand,
//! so composed deformations agree *bitwise* with their closed-form
//! descriptions wherever the gluing profiles are flat.

pub mod atlas;

pub mod geodesic;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::GridField;

pub use atlas::{SphereAtlas, SpherePoint};

/// A polynomial in the ambient coordinates of R^{m+1}, used to define
/// perturbations that are automatically consistent across charts.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    terms: Vec<(f64, Vec<u32>)>,
    nvars: usize,
}

impl Poly {
    /// `terms` is a list of `(coefficient, powers)` monomials; all power
    /// vectors must share one length, the number of ambient variables.
    pub fn new(terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let nvars = match terms.first() {
            Some((_, p)) => p.len(),
            None => return Err(Error::Argument("polynomial needs at least one term".into())),
        };
        if nvars == 0 {
            return Err(Error::Argument("polynomial must have at least one variable".into()));
        }
        for (c, p) in &terms {
            if p.len() != nvars {
                return Err(Error::Dimension { expected: nvars, got: p.len() });
            }
            if !c.is_finite() {
                return Err(Error::Argument("polynomial coefficients must be finite".into()));
            }
        }
        Ok(Poly { terms, nvars })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        debug_assert_eq!(y.len(), self.nvars);
        self.terms
            .iter()
            .map(|(c, powers)| {
                c * powers
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| y[i].powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn grad(&self, y: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(y.len(), self.nvars);
        let mut g = DVector::zeros(self.nvars);
        for (c, powers) in &self.terms {
            for (j, &pj) in powers.iter().enumerate() {
                if pj == 0 {
                    continue;
                }
                let mut v = c * pj as f64;
                for (i, &p) in powers.iter().enumerate() {
                    let q = if i == j { p - 1 } else { p };
                    v *= y[i].powi(q as i32);
                }
                g[j] += v;
            }
        }
        g
    }
}

/// Entrywise convex combination `a + w (b - a)`.
///
/// Every blend in this crate, including the closed-form descriptions that
/// deformation outputs are tested against, goes through this one function so
/// that equal inputs produce bitwise equal outputs.
pub fn lerp_components(a: &DMatrix<f64>, b: &DMatrix<f64>, w: f64) -> DMatrix<f64> {
    a + (b - a) * w
}

enum SphereKind {
    Round,
    Scaled {
        factor: f64,
        inner: SphereMetric,
    },
    Blend {
        from: SphereMetric,
        to: SphereMetric,
        weight: f64,
    },
    /// `(1 + amplitude * P(y)) * inner`, `P` an ambient polynomial.
    ConformalPoly {
        inner: SphereMetric,
        amplitude: f64,
        poly: Poly,
    },
    /// `inner + amplitude * (J^T grad P)(J^T grad P)^T`, the pullback of
    /// `dP (x) dP` from the ambient space.
    GradPoly {
        inner: SphereMetric,
        amplitude: f64,
        poly: Poly,
    },
    FromFn {
        f: Arc<dyn Fn(usize, &DVector<f64>) -> DMatrix<f64> + Send + Sync>,
    },
}

impl SphereKind {
    fn name(&self) -> &'static str {
        match self {
            SphereKind::Round => "Round",
            SphereKind::Scaled { .. } => "Scaled",
            SphereKind::Blend { .. } => "Blend",
            SphereKind::ConformalPoly { .. } => "ConformalPoly",
            SphereKind::GradPoly { .. } => "GradPoly",
            SphereKind::FromFn { .. } => "FromFn",
        }
    }
}

/// A Riemannian metric on S^m, evaluated lazily in atlas coordinates.
#[derive(Clone)]
pub struct SphereMetric {
    atlas: SphereAtlas,
    kind: Arc<SphereKind>,
}

impl fmt::Debug for SphereMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SphereMetric({}, dim {})", self.kind.name(), self.atlas.dim())
    }
}

impl SphereMetric {
    /// The unit round metric.
    pub fn round(dim: usize) -> Result<Self> {
        Ok(SphereMetric { atlas: SphereAtlas::new(dim)?, kind: Arc::new(SphereKind::Round) })
    }

    /// `factor * self`; `factor == 1` returns the metric unchanged.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Domain(format!("scale factor must be positive and finite, got {factor}")));
        }
        if factor == 1.0 {
            return Ok(self.clone());
        }
        Ok(SphereMetric {
            atlas: self.atlas,
            kind: Arc::new(SphereKind::Scaled { factor, inner: self.clone() }),
        })
    }

    /// Convex blend `from + weight (to - from)` with `weight` in `[0, 1]`.
    ///
    /// Plateau weights short-circuit: weight `0` returns `from` itself and
    /// weight `1` returns `to` itself, and blending two structurally equal
    /// metrics returns the first one, so no arithmetic is introduced where
    /// the blend is trivial.
    pub fn blend(from: &SphereMetric, to: &SphereMetric, weight: f64) -> Result<Self> {
        if from.atlas != to.atlas {
            return Err(Error::Argument(format!(
                "cannot blend metrics on different spheres (dims {} and {})",
                from.atlas.dim(),
                to.atlas.dim()
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Domain(format!("blend weight must lie in [0,1], got {weight}")));
        }
        if weight == 0.0 || from.structurally_equal(to) {
            return Ok(from.clone());
        }
        if weight == 1.0 {
            return Ok(to.clone());
        }
        Ok(SphereMetric {
            atlas: from.atlas,
            kind: Arc::new(SphereKind::Blend { from: from.clone(), to: to.clone(), weight }),
        })
    }

    /// Conformal perturbation `(1 + amplitude * P) * self` by an ambient
    /// polynomial `P` in m+1 variables. The conformal factor is sampled over
    /// both charts and must stay positive.
    pub fn conformal_poly(&self, amplitude: f64, poly: Poly) -> Result<Self> {
        if poly.nvars() != self.atlas.dim() + 1 {
            return Err(Error::Dimension { expected: self.atlas.dim() + 1, got: poly.nvars() });
        }
        if !amplitude.is_finite() {
            return Err(Error::Domain("perturbation amplitude must be finite".into()));
        }
        if amplitude == 0.0 {
            return Ok(self.clone());
        }
        let metric = SphereMetric {
            atlas: self.atlas,
            kind: Arc::new(SphereKind::ConformalPoly { inner: self.clone(), amplitude, poly }),
        };
        metric.validate_sampled()?;
        Ok(metric)
    }

    /// Rank-one perturbation of `self` by the pullback of `dP (x) dP`,
    /// scaled by `amplitude`. Sampled for positive definiteness.
    pub fn grad_poly(&self, amplitude: f64, poly: Poly) -> Result<Self> {
        if poly.nvars() != self.atlas.dim() + 1 {
            return Err(Error::Dimension { expected: self.atlas.dim() + 1, got: poly.nvars() });
        }
        if !amplitude.is_finite() {
            return Err(Error::Domain("perturbation amplitude must be finite".into()));
        }
        if amplitude == 0.0 {
            return Ok(self.clone());
        }
        let metric = SphereMetric {
            atlas: self.atlas,
            kind: Arc::new(SphereKind::GradPoly { inner: self.clone(), amplitude, poly }),
        };
        metric.validate_sampled()?;
        Ok(metric)
    }

    /// Wrap raw component functions. The closure receives a chart index and
    /// chart coordinates and must return symmetric positive definite m x m
    /// matrices that agree across the chart overlap; this is not checked.
    pub fn from_fn(
        dim: usize,
        f: impl Fn(usize, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        Ok(SphereMetric {
            atlas: SphereAtlas::new(dim)?,
            kind: Arc::new(SphereKind::FromFn { f: Arc::new(f) }),
        })
    }

    pub fn atlas(&self) -> SphereAtlas {
        self.atlas
    }

    /// Sphere dimension m.
    pub fn dim(&self) -> usize {
        self.atlas.dim()
    }

    /// True when the two metrics are the same object (or both round on the
    /// same sphere), so their components are bitwise equal by construction.
    pub fn structurally_equal(&self, other: &SphereMetric) -> bool {
        if self.atlas != other.atlas {
            return false;
        }
        if Arc::ptr_eq(&self.kind, &other.kind) {
            return true;
        }
        matches!(
            (&*self.kind, &*other.kind),
            (SphereKind::Round, SphereKind::Round)
        )
    }

    /// Component matrix in the given chart. Coordinates may lie anywhere the
    /// chart formulas extend; containment in the chart domain is the
    /// caller's concern.
    pub fn components(&self, chart: usize, x: &DVector<f64>) -> DMatrix<f64> {
        match &*self.kind {
            SphereKind::Round => self
                .atlas
                .round_components(chart, x)
                .expect("round components in valid chart"),
            SphereKind::Scaled { factor, inner } => inner.components(chart, x) * *factor,
            SphereKind::Blend { from, to, weight } => {
                let a = from.components(chart, x);
                let b = to.components(chart, x);
                lerp_components(&a, &b, *weight)
            }
            SphereKind::ConformalPoly { inner, amplitude, poly } => {
                let y = self.atlas.embed(chart, x).expect("embed in valid chart");
                let factor = 1.0 + amplitude * poly.eval(&y);
                inner.components(chart, x) * factor
            }
            SphereKind::GradPoly { inner, amplitude, poly } => {
                let y = self.atlas.embed(chart, x).expect("embed in valid chart");
                let j = self.atlas.ambient_jacobian(chart, x).expect("jacobian in valid chart");
                let v = j.transpose() * poly.grad(&y);
                let mut g = inner.components(chart, x);
                let rank1 = &v * v.transpose() * *amplitude;
                g += rank1;
                g
            }
            SphereKind::FromFn { f } => f(chart, x),
        }
    }

    /// Sampled validity check: components must be symmetric positive
    /// definite on a coarse lattice over both preferred regions.
    fn validate_sampled(&self) -> Result<()> {
        let m = self.dim();
        let pref = self.atlas.preferred_radius();
        let per_axis = 5usize;
        let step = 2.0 * pref / (per_axis - 1) as f64;
        for chart in 0..2 {
            let mut idx = vec![0usize; m];
            let total = per_axis.pow(m as u32);
            for _ in 0..total {
                let x = DVector::from_fn(m, |i, _| -pref + idx[i] as f64 * step);
                if x.norm() <= pref + 1e-9 {
                    let g = self.components(chart, &x);
                    let sym_err = (&g - g.transpose()).abs().max();
                    if sym_err > 1e-9 * g.abs().max().max(1.0) {
                        return Err(Error::InvalidMetric(format!(
                            "components asymmetric by {sym_err:.3e} at sampled point"
                        )));
                    }
                    if g.clone().cholesky().is_none() {
                        return Err(Error::InvalidMetric(format!(
                            "components not positive definite at sampled point (chart {chart}, |x|={:.3})",
                            x.norm()
                        )));
                    }
                }
                // advance multi-index
                for a in (0..m).rev() {
                    idx[a] += 1;
                    if idx[a] < per_axis {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
        Ok(())
    }

    /// Sample `self - other` over both preferred chart regions on a lattice
    /// with the given step and return the C^2 lattice norm of the
    /// difference, maximized over the two charts.
    pub fn c2_distance(&self, other: &SphereMetric, grid_step: f64) -> Result<f64> {
        if self.atlas != other.atlas {
            return Err(Error::Argument("cannot compare metrics on different spheres".into()));
        }
        if self.structurally_equal(other) {
            return Ok(0.0);
        }
        let mut worst = 0.0f64;
        for chart in 0..2 {
            let field = self.chart_lattice(chart, grid_step, |chart, x| {
                Some(self.components(chart, x) - other.components(chart, x))
            })?;
            worst = worst.max(field.c2_norm()?);
        }
        Ok(worst)
    }

    /// Lattice norms of the metric itself together with a lower bound on
    /// |det|: returns `max(|g|_C2, 1 / inf |det g|)` over both charts,
    /// padded by a relative 1e-9 so downstream comparisons are safely
    /// one-sided.
    pub fn c_bound(&self, grid_step: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for chart in 0..2 {
            let field =
                self.chart_lattice(chart, grid_step, |chart, x| Some(self.components(chart, x)))?;
            let norm = field.c2_norm()?;
            let det = field.inf_abs_det()?;
            if det <= 0.0 {
                return Err(Error::InvalidMetric("vanishing determinant on sample lattice".into()));
            }
            worst = worst.max(norm.max(1.0 / det));
        }
        Ok(worst * (1.0 + 1e-9))
    }

    /// Build a lattice over this chart's preferred region (plus a stencil
    /// ring) and sample `f` on it. Points more than two steps outside the
    /// preferred radius are masked out.
    fn chart_lattice(
        &self,
        chart: usize,
        grid_step: f64,
        f: impl FnMut(usize, &DVector<f64>) -> Option<DMatrix<f64>>,
    ) -> Result<GridField> {
        if !(grid_step > 0.0) || !grid_step.is_finite() {
            return Err(Error::Argument(format!("grid step must be positive, got {grid_step}")));
        }
        let m = self.dim();
        let pref = self.atlas.preferred_radius();
        if grid_step > pref / 2.0 {
            return Err(Error::Argument(format!(
                "grid step {grid_step} too coarse for preferred radius {pref}"
            )));
        }
        let half_points = (pref / grid_step).ceil() as usize + 1;
        let per_axis = 2 * half_points + 1;
        let origin = -(half_points as f64) * grid_step;
        let mask_radius = pref + 1.6 * grid_step;
        let mut f = f;
        GridField::from_fn(
            vec![per_axis; m],
            vec![grid_step; m],
            vec![origin; m],
            |coords| {
                let x = DVector::from_column_slice(coords);
                if x.norm() > mask_radius {
                    None
                } else {
                    f(chart, &x)
                }
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sample_poly(m: usize) -> Poly {
        // P(y) = y_0 y_1 + 0.5 y_m
        let mut t1 = vec![0u32; m + 1];
        t1[0] = 1;
        if m >= 1 {
            t1[1] = 1;
        }
        let mut t2 = vec![0u32; m + 1];
        t2[m] = 1;
        Poly::new(vec![(1.0, t1), (0.5, t2)]).unwrap()
    }

    #[test]
    fn poly_eval_and_grad() {
        let p = Poly::new(vec![(2.0, vec![2, 1]), (-1.0, vec![0, 3])]).unwrap();
        let y = DVector::from_column_slice(&[1.5, -0.5]);
        // 2 x^2 z - z^3 at (1.5, -0.5)
        assert_relative_eq!(p.eval(&y), 2.0 * 2.25 * -0.5 - (-0.125), epsilon = 1e-14);
        let g = p.grad(&y);
        assert_relative_eq!(g[0], 4.0 * 1.5 * -0.5, epsilon = 1e-14);
        assert_relative_eq!(g[1], 2.0 * 2.25 - 3.0 * 0.25, epsilon = 1e-14);
    }

    #[test]
    fn blend_short_circuits_structurally() {
        let round = SphereMetric::round(2).unwrap();
        let scaled = round.scale(1.3).unwrap();
        let b0 = SphereMetric::blend(&round, &scaled, 0.0).unwrap();
        assert!(b0.structurally_equal(&round));
        let b1 = SphereMetric::blend(&round, &scaled, 1.0).unwrap();
        assert!(b1.structurally_equal(&scaled));
        // Blending two rounds collapses even though the Arcs differ.
        let other_round = SphereMetric::round(2).unwrap();
        let b = SphereMetric::blend(&round, &other_round, 0.37).unwrap();
        assert!(b.structurally_equal(&round));
        // Blending a metric with itself collapses too.
        let self_blend = SphereMetric::blend(&scaled, &scaled, 0.37).unwrap();
        assert!(self_blend.structurally_equal(&scaled));
    }

    #[test]
    fn blend_components_are_exact_lerp() {
        let round = SphereMetric::round(2).unwrap();
        let pert = round.conformal_poly(0.05, sample_poly(2)).unwrap();
        let w = 0.37;
        let blend = SphereMetric::blend(&round, &pert, w).unwrap();
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..50 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let chart = rng.gen_range(0..2usize);
            let a = round.components(chart, &x);
            let b = pert.components(chart, &x);
            let expect = lerp_components(&a, &b, w);
            assert_eq!(blend.components(chart, &x), expect);
        }
    }

    #[test]
    fn blend_rejects_mismatched_inputs() {
        let a = SphereMetric::round(2).unwrap();
        let b = SphereMetric::round(3).unwrap();
        assert!(SphereMetric::blend(&a, &b, 0.5).is_err());
        let c = SphereMetric::round(2).unwrap();
        assert!(SphereMetric::blend(&a, &c, 1.5).is_err());
        assert!(SphereMetric::blend(&a, &c, -0.1).is_err());
    }

    #[test]
    fn perturbations_are_tensorial_across_charts() {
        for m in [1usize, 2] {
            let round = SphereMetric::round(m).unwrap();
            let conf = round.conformal_poly(0.1, sample_poly(m)).unwrap();
            let grad = round.grad_poly(0.1, sample_poly(m)).unwrap();
            let atlas = conf.atlas();
            let mut rng = StdRng::seed_from_u64(67);
            for metric in [&conf, &grad] {
                for _ in 0..60 {
                    let dir = {
                        let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0f64..1.0));
                        let n = v.norm();
                        if n < 0.3 {
                            continue;
                        }
                        v / n
                    };
                    let x = dir * rng.gen_range(0.8 * atlas.preferred_radius()..1.1 * atlas.preferred_radius());
                    let (other, xp) = atlas.transition(0, &x).unwrap();
                    let j = atlas.transition_jacobian(0, &x).unwrap();
                    let here = metric.components(0, &x);
                    let there = metric.components(other, &xp);
                    let pulled = j.transpose() * there * &j;
                    assert_relative_eq!((pulled - here).norm(), 0.0, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn conformal_validation_rejects_degenerate_factor() {
        let round = SphereMetric::round(2).unwrap();
        // 1 + amplitude * P crosses zero for a large negative amplitude.
        assert!(round.conformal_poly(-3.0, sample_poly(2)).is_err());
        assert!(round.conformal_poly(0.2, sample_poly(2)).is_ok());
    }

    #[test]
    fn c2_distance_of_scaled_circle_metrics() {
        let round = SphereMetric::round(1).unwrap();
        let scaled = round.scale(1.1).unwrap();
        // Circle components are the constant [1] vs [1.1]: distance is the
        // value gap, with zero derivative content.
        let d = round.c2_distance(&scaled, 0.05).unwrap();
        assert_relative_eq!(d, 0.1, epsilon = 1e-12);
        assert_eq!(round.c2_distance(&round, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn c_bound_of_round_circle() {
        let round = SphereMetric::round(1).unwrap();
        let c = round.c_bound(0.05).unwrap();
        assert_relative_eq!(c, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn scale_one_is_identity() {
        let round = SphereMetric::round(3).unwrap();
        let s = round.scale(1.0).unwrap();
        assert!(s.structurally_equal(&round));
        assert!(round.scale(0.0).is_err());
        assert!(round.scale(-2.0).is_err());
    }
}

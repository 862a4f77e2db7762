//! Radial metrics `g = g_r + dr^2` on S^{n-1} x (r_min, infinity).
//!
//! Every radial metric here is represented by its *cut curve*
//! `r -> cut(r)`, the family of sphere metrics with
//! `g_r = sinh^2(r) * cut(r)`. The normalized cut is the stored object and
//! the `sinh^2` factor is applied exactly once, outermost, when sphere
//! components are requested. This is the crate's central exactness device:
//! extracting a cut never divides by `sinh^2(r)`, composing deformations
//! stays in cut space where blend weights short-circuit structurally, and
//! the hyperbolic metric's cut is the round metric itself at every radius.
//!
//! `sinh^2(r) * round + dr^2` is the hyperbolic metric in these
//! coordinates; a metric is "warped" when its cut curve is constant.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bump::{margin_step_at, scaled_step, PLATEAU_MARGIN};
use crate::error::{Error, Result};
use crate::sphere::SphereMetric;

/// The conformal factor `sinh^2(r)`; shared so every site that scales a cut
/// back to sphere size performs the identical arithmetic.
pub fn sinh_sq(r: f64) -> f64 {
    let s = r.sinh();
    s * s
}

enum RadialKind {
    /// Constant cut curve: a genuinely warped metric.
    Warped { cut: SphereMetric },
    /// Arbitrary cut curve.
    CutCurve {
        f: Arc<dyn Fn(f64) -> SphereMetric + Send + Sync>,
    },
    /// Warp forcing: below the gluing zone the cut is frozen at its `r0`
    /// value, above it the inner metric continues unchanged.
    WarpForced {
        inner: RadialMetric,
        r0: f64,
        frozen: SphereMetric,
    },
    /// Two-variable warping: the cut is blended towards the round cut
    /// across `[a, a + d/2]`, leaving `sinh^2(r) * round` below.
    TwoVarForced {
        inner: RadialMetric,
        a: f64,
        d: f64,
        sigma: SphereMetric,
    },
}

impl RadialKind {
    fn name(&self) -> &'static str {
        match self {
            RadialKind::Warped { .. } => "Warped",
            RadialKind::CutCurve { .. } => "CutCurve",
            RadialKind::WarpForced { .. } => "WarpForced",
            RadialKind::TwoVarForced { .. } => "TwoVarForced",
        }
    }
}

/// A radial metric on S^{n-1} x (r_min, infinity), evaluated lazily.
#[derive(Clone)]
pub struct RadialMetric {
    dim: usize,
    r_min: f64,
    kind: Arc<RadialKind>,
}

impl fmt::Debug for RadialMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RadialMetric({}, dim {}, r_min {})",
            self.kind.name(),
            self.dim,
            self.r_min
        )
    }
}

fn check_dim_rmin(dim: usize, r_min: f64) -> Result<()> {
    if dim < 2 {
        return Err(Error::Argument(format!("manifold dimension must be at least 2, got {dim}")));
    }
    if !(r_min >= 0.0) || !r_min.is_finite() {
        return Err(Error::Domain(format!("r_min must be finite and nonnegative, got {r_min}")));
    }
    Ok(())
}

impl RadialMetric {
    /// Warped metric `sinh^2(r) * cut + dr^2` with a constant cut.
    pub fn warped(dim: usize, r_min: f64, cut: SphereMetric) -> Result<Self> {
        check_dim_rmin(dim, r_min)?;
        if cut.dim() != dim - 1 {
            return Err(Error::Dimension { expected: dim - 1, got: cut.dim() });
        }
        Ok(RadialMetric { dim, r_min, kind: Arc::new(RadialKind::Warped { cut }) })
    }

    /// The hyperbolic metric `sinh^2(r) * round + dr^2`.
    pub fn hyperbolic(dim: usize, r_min: f64) -> Result<Self> {
        let cut = SphereMetric::round(dim - 1)?;
        Self::warped(dim, r_min, cut)
    }

    /// General radial metric given by its normalized cut curve. The closure
    /// must return metrics on S^{n-1} and be deterministic; it is evaluated
    /// lazily and may be called many times per radius.
    pub fn from_cut_curve(
        dim: usize,
        r_min: f64,
        f: impl Fn(f64) -> SphereMetric + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim_rmin(dim, r_min)?;
        let probe = f(r_min + 1.0);
        if probe.dim() != dim - 1 {
            return Err(Error::Dimension { expected: dim - 1, got: probe.dim() });
        }
        Ok(RadialMetric { dim, r_min, kind: Arc::new(RadialKind::CutCurve { f: Arc::new(f) }) })
    }

    /// Below `r0 + 1/16` the result is a warped extension, defined for all
    /// positive radii, so the forced metric's domain is (0, infinity)
    /// regardless of the input's `r_min`; the inner metric is only ever
    /// evaluated above `r0 + 1/16`.
    pub(crate) fn warp_forced_unchecked(inner: RadialMetric, r0: f64, frozen: SphereMetric) -> Self {
        let dim = inner.dim;
        Self {
            dim,
            r_min: 0.0,
            kind: Arc::new(RadialKind::WarpForced { inner, r0, frozen }),
        }
    }

    /// Below `a` the result is hyperbolic, defined for all positive radii;
    /// the inner metric is only ever evaluated above `a`.
    pub(crate) fn two_var_forced_unchecked(inner: RadialMetric, a: f64, d: f64) -> Result<Self> {
        let dim = inner.dim;
        let sigma = SphereMetric::round(dim - 1)?;
        Ok(Self {
            dim,
            r_min: 0.0,
            kind: Arc::new(RadialKind::TwoVarForced { inner, a, d, sigma }),
        })
    }

    /// Manifold dimension n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sphere dimension n - 1.
    pub fn sphere_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// True when the metric is warped by construction (constant cut curve).
    pub fn is_structurally_warped(&self) -> bool {
        matches!(&*self.kind, RadialKind::Warped { .. })
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > self.r_min) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "radius {r} outside the metric's domain (r_min = {})",
                self.r_min
            )));
        }
        Ok(())
    }

    /// The spherical cut at radius `r`: the sphere metric `g_r / sinh^2(r)`,
    /// produced structurally (no divisions happen for metrics built by this
    /// crate's constructors and operators).
    pub fn cut_at(&self, r: f64) -> Result<SphereMetric> {
        self.check_radius(r)?;
        Ok(self.cut_unchecked(r))
    }

    fn cut_unchecked(&self, r: f64) -> SphereMetric {
        match &*self.kind {
            RadialKind::Warped { cut } => cut.clone(),
            RadialKind::CutCurve { f } => f(r),
            RadialKind::WarpForced { inner, r0, frozen } => {
                let w = margin_step_at(*r0, r);
                if w == 0.0 {
                    frozen.clone()
                } else if w == 1.0 {
                    inner.cut_unchecked(r)
                } else {
                    SphereMetric::blend(frozen, &inner.cut_unchecked(r), w)
                        .expect("warp-forced blend weight in range")
                }
            }
            RadialKind::TwoVarForced { inner, a, d, sigma } => {
                let w = scaled_step(*a, *d, r).expect("validated width");
                if w == 0.0 {
                    sigma.clone()
                } else if w == 1.0 {
                    inner.cut_unchecked(r)
                } else {
                    SphereMetric::blend(sigma, &inner.cut_unchecked(r), w)
                        .expect("two-var blend weight in range")
                }
            }
        }
    }

    /// The sphere part `g_r = sinh^2(r) * cut(r)` at radius `r`.
    pub fn sphere_at(&self, r: f64) -> Result<SphereMetric> {
        self.cut_at(r)?.scale(sinh_sq(r))
    }

    /// Full n x n component matrix at chart coordinates `x` and radius `r`,
    /// in block form `[[g_r, 0], [0, 1]]` with the radial coordinate last.
    pub fn components(&self, chart: usize, x: &DVector<f64>, r: f64) -> Result<DMatrix<f64>> {
        let cut = self.cut_at(r)?;
        let m = self.sphere_dim();
        if x.len() != m {
            return Err(Error::Dimension { expected: m, got: x.len() });
        }
        let block = cut.components(chart, x) * sinh_sq(r);
        let mut g = DMatrix::zeros(self.dim, self.dim);
        g.view_mut((0, 0), (m, m)).copy_from(&block);
        g[(m, m)] = 1.0;
        Ok(g)
    }

    /// Largest drift of the cut curve across `[r_lo, r_hi]`, measured as the
    /// sup of component differences against the cut at `r_lo` over a coarse
    /// deterministic sample of chart points. Zero for structurally warped
    /// metrics without any sampling.
    pub fn cut_drift(&self, r_lo: f64, r_hi: f64, radial_samples: usize) -> Result<f64> {
        self.check_radius(r_lo)?;
        if !(r_hi >= r_lo) {
            return Err(Error::Argument(format!("empty radius interval [{r_lo}, {r_hi}]")));
        }
        if radial_samples < 2 {
            return Err(Error::Argument("cut drift needs at least 2 radial samples".into()));
        }
        if self.is_structurally_warped() {
            return Ok(0.0);
        }
        let reference = self.cut_unchecked(r_lo);
        let m = self.sphere_dim();
        let probes = chart_probe_points(m, reference.atlas().preferred_radius());
        let mut worst = 0.0f64;
        for k in 0..radial_samples {
            let r = r_lo + (r_hi - r_lo) * k as f64 / (radial_samples - 1) as f64;
            let cut = self.cut_unchecked(r);
            if cut.structurally_equal(&reference) {
                continue;
            }
            for (chart, x) in &probes {
                let diff = cut.components(*chart, x) - reference.components(*chart, x);
                worst = worst.max(diff.abs().max());
            }
        }
        Ok(worst)
    }
}

/// Deterministic probe points spread over both charts.
fn chart_probe_points(m: usize, pref: f64) -> Vec<(usize, DVector<f64>)> {
    let mut out = Vec::new();
    for chart in 0..2usize {
        out.push((chart, DVector::zeros(m)));
        for axis in 0..m {
            for sign in [-1.0, 1.0] {
                let mut x = DVector::zeros(m);
                x[axis] = sign * 0.6 * pref;
                out.push((chart, x));
            }
        }
        // One off-axis probe so products of coordinates are exercised.
        out.push((chart, DVector::from_fn(m, |i, _| 0.35 * pref * (1.0 + i as f64 * 0.3))));
    }
    out
}

/// Weight of the warp-forcing blend at radius `r` for a forcing radius
/// `r0`: 0 up to `r0 + 1/16`, 1 from `r0 + 7/16` on.
pub fn warp_weight(r0: f64, r: f64) -> f64 {
    margin_step_at(r0, r)
}

/// End of the warp-forcing gluing zone: beyond `r0 + 1/2 - 1/16` the
/// forced metric is the input metric itself.
pub fn warp_zone_end(r0: f64) -> f64 {
    r0 + 0.5 - PLATEAU_MARGIN
}

//! Radial charts and tube-based C^2 closeness measurement.
//!
//! A radial chart at offset `a` parametrizes a tube around the radius-`a`
//! sphere by `(x, t)` in (unit ball) x (-(1+xi), 1+xi): the sphere factor
//! through the exponential map of the cut at `a` seeded with a frame that
//! is orthonormal for that cut, the second factor by sliding the radius.
//! In these coordinates an exactly hyperbolic metric approaches the model
//! `e^{2t} delta + dt^2` as `a` grows, so the C^2 lattice norm of
//! (pulled-back metric - model) measures closeness to hyperbolic in a way
//! that is uniform in the radius.
//!
//! Certification is one-sided: `certified` means every sampled lattice
//! norm stayed at or below the requested bound. Lattice points slightly
//! outside the unit ball are included (the guard ring), which can only
//! enlarge the measured deviation.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::fd::{C2Norms, GridField};
use crate::radial::{sinh_sq, RadialMetric};
use crate::sphere::geodesic::{exp_map, exp_map_with_jacobian, GeodesicOpts, ShootResult};
use crate::sphere::{SphereAtlas, SpherePoint};
use crate::verify::curvature::{radial_curvature_check, CurvatureOpts, CurvatureReport};

/// Lattice and direction sampling for tube measurements.
#[derive(Debug, Clone, Copy)]
pub struct TubeSampling {
    /// Lattice points across the unit interval of each tube axis; a guard
    /// ring is added outside the ball automatically.
    pub tube_points: usize,
    /// Sphere base points per offset in region checks.
    pub base_points: usize,
    /// Chart offsets per unit of radial length in region checks.
    pub offsets_per_unit: f64,
    /// Multiplies `tube_points`, for resolution studies.
    pub grid_scale: f64,
    /// Seed for the base-point sampler.
    pub seed: u64,
}

impl Default for TubeSampling {
    fn default() -> Self {
        TubeSampling { tube_points: 17, base_points: 16, offsets_per_unit: 8.0, grid_scale: 1.0, seed: 7 }
    }
}

/// Numerical controls for the chart shoots.
#[derive(Debug, Clone, Copy)]
pub struct ChartOpts {
    /// RK4 step for the exponential-map shoots.
    pub ode_step: f64,
    /// Finite-difference step for metric jets along the shoots.
    pub jet_step: f64,
    /// Tolerance for the step-halving audit run on the longest shoot of
    /// each chart.
    pub richardson_tol: f64,
}

impl Default for ChartOpts {
    fn default() -> Self {
        ChartOpts { ode_step: 1e-3, jet_step: 1e-4, richardson_tol: 1e-7 }
    }
}

impl ChartOpts {
    fn geodesic(&self) -> GeodesicOpts {
        GeodesicOpts { step: self.ode_step, jet_step: self.jet_step }
    }
}

/// A radial chart: offset, tube half-width excess, sphere base point, and
/// the frame whose columns are orthonormal for the cut at the offset.
#[derive(Debug, Clone)]
pub struct RadialChart {
    pub offset: f64,
    pub chart_excess: f64,
    pub base: SpherePoint,
    pub frame: DMatrix<f64>,
}

pub fn build_radial_chart(
    g: &RadialMetric,
    base: SpherePoint,
    offset: f64,
    chart_excess: f64,
) -> Result<RadialChart> {
    if !(chart_excess >= 0.0) || !chart_excess.is_finite() {
        return Err(Error::Domain(format!("chart excess must be nonnegative, got {chart_excess}")));
    }
    if !(offset - (1.0 + chart_excess) > g.r_min()) {
        return Err(Error::Domain(format!(
            "tube at offset {offset} with half-width {} leaves the metric domain (r > {})",
            1.0 + chart_excess,
            g.r_min()
        )));
    }
    let atlas = SphereAtlas::new(g.sphere_dim())?;
    if base.chart > 1 || !atlas.contains(&base.x) {
        return Err(Error::ChartConstruction("chart base lies outside the sphere atlas".into()));
    }
    let cut = g.cut_at(offset)?;
    let comps = cut.components(base.chart, &base.x);
    let chol = comps
        .cholesky()
        .ok_or_else(|| Error::InvalidMetric("cut is not positive definite at the chart base".into()))?;
    let frame = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::ChartConstruction("chart frame is not invertible".into()))?;
    Ok(RadialChart { offset, chart_excess, base, frame })
}

/// Shared lattice geometry for one tube.
struct TubeLattice {
    m: usize,
    /// Points per sphere axis, guard ring included.
    px: usize,
    /// Points on the t axis, strictly inside the open interval.
    tp: usize,
    hx: f64,
    ht: f64,
    half_width: f64,
    mask_radius: f64,
}

fn tube_lattice(m: usize, chart_excess: f64, sampling: &TubeSampling) -> Result<TubeLattice> {
    if !(sampling.grid_scale > 0.0) || !sampling.grid_scale.is_finite() {
        return Err(Error::Argument(format!("grid scale must be positive, got {}", sampling.grid_scale)));
    }
    let scaled = (sampling.tube_points as f64 * sampling.grid_scale).round() as i64;
    if scaled < 5 {
        return Err(Error::Argument(format!(
            "tube resolution {scaled} too small: need at least 5 points per axis"
        )));
    }
    let p = scaled as usize;
    let hx = 2.0 / (p - 1) as f64;
    let half_width = 1.0 + chart_excess;
    let ht = 2.0 * half_width / p as f64;
    Ok(TubeLattice { m, px: p + 2, tp: p, hx, ht, half_width, mask_radius: 1.0 + 1.5 * hx })
}

impl TubeLattice {
    fn x_coord(&self, i: usize) -> f64 {
        -1.0 - self.hx + i as f64 * self.hx
    }

    /// Cell midpoints, so derivatives never need samples at the open ends.
    fn t_coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.ht
    }

    fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.px; self.m];
        s.push(self.tp);
        s
    }

    fn steps(&self) -> Vec<f64> {
        let mut s = vec![self.hx; self.m];
        s.push(self.ht);
        s
    }
}

fn advance(idx: &mut [usize], extent: usize) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < extent {
            return;
        }
        idx[a] = 0;
    }
}

/// Difference between the pulled-back metric and the model `e^{2t} delta +
/// dt^2` on the tube lattice, as a field of sphere-block matrices. The
/// radial row and column of the pullback match the model exactly by
/// construction (the chart slides the radius isometrically), so only the
/// sphere block is stored; its lattice norms are the full deviation.
pub fn tube_difference_field(
    g: &RadialMetric,
    chart: &RadialChart,
    sampling: &TubeSampling,
    opts: &ChartOpts,
) -> Result<GridField> {
    Ok(tube_difference_impl(g, chart, sampling, opts)?.0)
}

fn tube_difference_impl(
    g: &RadialMetric,
    chart: &RadialChart,
    sampling: &TubeSampling,
    opts: &ChartOpts,
) -> Result<(GridField, usize)> {
    let m = g.sphere_dim();
    if chart.frame.nrows() != m || chart.frame.ncols() != m {
        return Err(Error::Dimension { expected: m, got: chart.frame.nrows() });
    }
    let lat = tube_lattice(m, chart.chart_excess, sampling)?;
    let a = chart.offset;
    if !(a - lat.half_width > g.r_min()) {
        return Err(Error::Domain(format!(
            "tube at offset {a} with half-width {} leaves the metric domain",
            lat.half_width
        )));
    }

    let cut_a = g.cut_at(a)?;
    let sinh_a = a.sinh();
    let geo = opts.geodesic();

    // Radial slices are shared by every shoot: cut, sphere scale, model.
    let mut slices = Vec::with_capacity(lat.tp);
    for k in 0..lat.tp {
        let t = lat.t_coord(k);
        let r = a + t;
        slices.push((g.cut_at(r)?, sinh_sq(r), (2.0 * t).exp()));
    }

    // One shoot per sphere-lattice node inside the mask; each shoot is
    // reused across the whole t column.
    let x_total = lat.px.pow(m as u32);
    let mut shoots: Vec<Option<ShootResult>> = Vec::with_capacity(x_total);
    let mut idx = vec![0usize; m];
    let mut longest: Option<(f64, DVector<f64>)> = None;
    for _ in 0..x_total {
        let x = DVector::from_fn(m, |d, _| lat.x_coord(idx[d]));
        let norm = x.norm();
        let entry = if norm <= lat.mask_radius {
            let v0 = (&chart.frame * &x) / sinh_a;
            let w0 = &chart.frame / sinh_a;
            match exp_map_with_jacobian(&cut_a, &chart.base, &v0, &w0, &geo) {
                Ok(s) => {
                    if longest.as_ref().is_none_or(|(n, _)| norm > *n) {
                        longest = Some((norm, x.clone()));
                    }
                    Some(s)
                }
                // Failures inside the ball poison the measurement; guard
                // ring nodes may drop out silently.
                Err(e) if norm <= 1.0 => return Err(e),
                Err(_) => None,
            }
        } else {
            None
        };
        shoots.push(entry);
        advance(&mut idx, lat.px);
    }

    // Step-halving audit on the longest shoot: the endpoints at step h and
    // h/2 must agree in the ambient embedding.
    if let Some((_, x)) = &longest {
        let v0 = (&chart.frame * x) / sinh_a;
        let full = exp_map(&cut_a, &chart.base, &v0, &geo)?;
        let half = exp_map(
            &cut_a,
            &chart.base,
            &v0,
            &GeodesicOpts { step: 0.5 * opts.ode_step, ..geo },
        )?;
        let atlas = cut_a.atlas();
        let e_full = atlas.embed(full.point.chart, &full.point.x)?;
        let e_half = atlas.embed(half.point.chart, &half.point.x)?;
        let drift = (&e_full - &e_half).norm();
        if drift > opts.richardson_tol {
            return Err(Error::IntegrationFailure(format!(
                "step-halving drift {drift:.3e} exceeds tolerance {:.3e}; reduce the ode step",
                opts.richardson_tol
            )));
        }
    }

    let mut data = Vec::with_capacity(x_total * lat.tp);
    let mut mask = Vec::with_capacity(x_total * lat.tp);
    let mut n_shoots = 0usize;
    for entry in &shoots {
        match entry {
            Some(s) => {
                n_shoots += 1;
                let jac = s.jacobian.as_ref().expect("variational shoot carries a Jacobian");
                for (cut, scale, model) in &slices {
                    let comps = cut.components(s.point.chart, &s.point.x) * *scale;
                    let mut d = jac.transpose() * comps * jac;
                    for i in 0..m {
                        d[(i, i)] -= model;
                    }
                    data.push(d);
                    mask.push(true);
                }
            }
            None => {
                for _ in 0..lat.tp {
                    data.push(DMatrix::zeros(m, m));
                    mask.push(false);
                }
            }
        }
    }

    let field = GridField::with_mask(lat.shape(), lat.steps(), data, Some(mask))?;
    Ok((field, n_shoots))
}

/// One chart's measured deviation from the model.
#[derive(Debug, Clone)]
pub struct ChartDeviation {
    pub offset: f64,
    /// C^2 lattice norm of the difference field.
    pub deviation: f64,
    pub norms: C2Norms,
    pub shoots: usize,
}

pub fn chart_deviation(
    g: &RadialMetric,
    chart: &RadialChart,
    sampling: &TubeSampling,
    opts: &ChartOpts,
) -> Result<ChartDeviation> {
    let (field, shoots) = tube_difference_impl(g, chart, sampling, opts)?;
    let norms = field.norms()?;
    Ok(ChartDeviation { offset: chart.offset, deviation: norms.max(), norms, shoots })
}

/// Deterministic sphere points, roughly uniform, for chart bases.
pub fn sample_base_points(atlas: &SphereAtlas, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if count == 0 {
        return Err(Error::Argument("need at least one base point".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let ambient = atlas.dim() + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = DVector::from_fn(ambient, |_, _| rng.gen_range(-1.0..1.0f64));
        let norm = v.norm();
        if !(0.3..=1.0).contains(&norm) {
            continue;
        }
        out.push(atlas.project(&v)?);
    }
    Ok(out)
}

/// Result of sweeping charts over a window of offsets.
#[derive(Debug, Clone)]
pub struct ClosenessReport {
    pub eps: f64,
    pub chart_excess: f64,
    pub offsets: Vec<f64>,
    /// Worst deviation per offset, max over base points.
    pub per_offset: Vec<f64>,
    pub worst: f64,
    pub worst_offset: f64,
    pub charts_checked: usize,
    /// All sampled deviations stayed at or below `eps`.
    pub certified: bool,
}

/// Measure chart deviations at every offset in `[offset_lo, offset_hi]`
/// (spacing from `sampling.offsets_per_unit`) and certify them against
/// `eps`. Charts at offset `o` see radii in `(o - 1 - xi, o + 1 + xi)`, so
/// the window must keep that interval inside the metric domain.
pub fn check_eps_close(
    g: &RadialMetric,
    offset_lo: f64,
    offset_hi: f64,
    eps: f64,
    chart_excess: f64,
    sampling: &TubeSampling,
    opts: &ChartOpts,
) -> Result<ClosenessReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(offset_lo <= offset_hi) || !offset_hi.is_finite() {
        return Err(Error::Domain(format!("bad offset window [{offset_lo}, {offset_hi}]")));
    }
    if !(sampling.offsets_per_unit > 0.0) {
        return Err(Error::Argument("offsets_per_unit must be positive".into()));
    }

    let atlas = SphereAtlas::new(g.sphere_dim())?;
    let bases = sample_base_points(&atlas, sampling.base_points, sampling.seed)?;

    let count = if offset_hi == offset_lo {
        1
    } else {
        (((offset_hi - offset_lo) * sampling.offsets_per_unit).ceil() as usize + 1).max(2)
    };

    let mut offsets = Vec::with_capacity(count);
    let mut per_offset = Vec::with_capacity(count);
    let mut worst = 0.0f64;
    let mut worst_offset = offset_lo;
    let mut charts_checked = 0usize;

    for i in 0..count {
        let offset = if count == 1 {
            offset_lo
        } else {
            offset_lo + (offset_hi - offset_lo) * i as f64 / (count - 1) as f64
        };
        let mut local = 0.0f64;
        for base in &bases {
            let chart = build_radial_chart(g, base.clone(), offset, chart_excess)?;
            let dev = chart_deviation(g, &chart, sampling, opts)?;
            local = local.max(dev.deviation);
            charts_checked += 1;
        }
        if local > worst {
            worst = local;
            worst_offset = offset;
        }
        offsets.push(offset);
        per_offset.push(local);
    }

    Ok(ClosenessReport {
        eps,
        chart_excess,
        offsets,
        per_offset,
        worst,
        worst_offset,
        charts_checked,
        certified: worst <= eps,
    })
}

/// Result of a ball check: curvature inside the ball, chart closeness
/// outside it.
#[derive(Debug, Clone)]
pub struct BallReport {
    pub ball_radius: f64,
    pub curvature_tol: f64,
    pub curvature: CurvatureReport,
    pub closeness: ClosenessReport,
    pub certified: bool,
}

/// Certify that `g` is hyperbolic (to `curvature_tol`) on radii up to
/// `ball_radius` and chart-close (to `eps`) beyond it, sampling offsets up
/// to `offset_hi`.
#[allow(clippy::too_many_arguments)]
pub fn check_ball_close(
    g: &RadialMetric,
    ball_radius: f64,
    offset_hi: f64,
    eps: f64,
    curvature_tol: f64,
    chart_excess: f64,
    sampling: &TubeSampling,
    opts: &ChartOpts,
    copts: &CurvatureOpts,
) -> Result<BallReport> {
    if !(curvature_tol > 0.0) {
        return Err(Error::Domain(format!("curvature tolerance must be positive, got {curvature_tol}")));
    }
    if !(offset_hi >= ball_radius) {
        return Err(Error::Domain(format!(
            "offset window top {offset_hi} must not sit below the ball radius {ball_radius}"
        )));
    }
    // Keep the curvature stencils off the domain edge.
    let curv_lo = g.r_min() + (0.25f64).max(4.0 * copts.fd_step);
    if !(ball_radius > curv_lo + 0.1) {
        return Err(Error::Domain(format!(
            "ball radius {ball_radius} leaves no room for curvature samples above r = {curv_lo}"
        )));
    }
    let curvature = radial_curvature_check(g, curv_lo, ball_radius, copts)?;
    let closeness = check_eps_close(g, ball_radius, offset_hi, eps, chart_excess, sampling, opts)?;
    let certified = curvature.max_deviation <= curvature_tol && closeness.certified;
    Ok(BallReport { ball_radius, curvature_tol, curvature, closeness, certified })
}

/// Smallest sampled offset at which every chart deviation drops to `eps`,
/// located by a coarse scan and bisection over `[a_lo, a_hi]`. Assumes the
/// deviation decays with the offset, as it does for anything close to
/// hyperbolic; the returned offset is one whose measured deviation is at
/// or below `eps`.
pub fn estimate_closeness_threshold(
    g: &RadialMetric,
    eps: f64,
    chart_excess: f64,
    a_lo: f64,
    a_hi: f64,
    sampling: &TubeSampling,
    opts: &ChartOpts,
) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(a_lo < a_hi) {
        return Err(Error::Domain(format!("bad offset range [{a_lo}, {a_hi}]")));
    }
    let atlas = SphereAtlas::new(g.sphere_dim())?;
    let bases = sample_base_points(&atlas, sampling.base_points, sampling.seed)?;
    let measure = |a: f64| -> Result<f64> {
        let mut local = 0.0f64;
        for base in &bases {
            let chart = build_radial_chart(g, base.clone(), a, chart_excess)?;
            local = local.max(chart_deviation(g, &chart, sampling, opts)?.deviation);
        }
        Ok(local)
    };

    let steps = ((a_hi - a_lo) / 0.5).ceil() as usize;
    let mut prev = a_lo;
    let mut found: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let a = (a_lo + 0.5 * i as f64).min(a_hi);
        let dev = measure(a)?;
        if dev <= eps {
            if i == 0 {
                return Ok(a_lo);
            }
            found = Some((prev, a));
            break;
        }
        prev = a;
    }
    let (mut lo, mut hi) = found.ok_or_else(|| {
        Error::Precondition(format!("deviation stays above {eps} for every offset up to {a_hi}"))
    })?;
    for _ in 0..4 {
        let mid = 0.5 * (lo + hi);
        if measure(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

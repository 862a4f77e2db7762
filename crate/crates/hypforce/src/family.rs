//! One-parameter families of radial metrics and their cut limits.
//!
//! A family assigns to each parameter `lambda >= lambda_min` a radial
//! metric whose domain contains `r > lambda - (1 + xi)`, so the window a
//! chart at offset `lambda + b` needs is always available. The interesting
//! question is what the cuts near radius `lambda` converge to as the
//! parameter grows; `estimate_cut_limit` measures that, and for forced
//! families the limit has a closed form assembled from the same blend and
//! profile primitives the members use, so the two agree bitwise wherever
//! the arithmetic is exact.

use std::sync::Arc;

use crate::bump::{margin_step, scaled_step};
use crate::deform::hyperbolic_force;
use crate::error::{Error, Result};
use crate::radial::RadialMetric;
use crate::sphere::SphereMetric;

type MemberFn = dyn Fn(f64) -> Result<RadialMetric> + Send + Sync;

#[derive(Clone)]
pub struct RadialFamily {
    dim: usize,
    lambda_min: f64,
    chart_excess: f64,
    member: Arc<MemberFn>,
}

impl std::fmt::Debug for RadialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialFamily")
            .field("dim", &self.dim)
            .field("lambda_min", &self.lambda_min)
            .field("chart_excess", &self.chart_excess)
            .finish()
    }
}

impl RadialFamily {
    /// Wrap a member function. The closure must be deterministic; each
    /// member must be an n-dimensional radial metric defined on every
    /// radius above `lambda - (1 + xi)`. The constructor probes the first
    /// member to catch obvious violations early, later parameters are
    /// checked as they are used.
    pub fn new(
        dim: usize,
        lambda_min: f64,
        chart_excess: f64,
        member: impl Fn(f64) -> Result<RadialMetric> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Dimension { expected: 2, got: dim });
        }
        if !(chart_excess >= 0.0) || !chart_excess.is_finite() {
            return Err(Error::Domain(format!("chart excess must be nonnegative, got {chart_excess}")));
        }
        if !lambda_min.is_finite() {
            return Err(Error::Domain(format!("lambda_min must be finite, got {lambda_min}")));
        }
        let family =
            RadialFamily { dim, lambda_min, chart_excess, member: Arc::new(member) };
        family.member(lambda_min)?;
        Ok(family)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn chart_excess(&self) -> f64 {
        self.chart_excess
    }

    pub fn member(&self, lambda: f64) -> Result<RadialMetric> {
        if !(lambda >= self.lambda_min) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "family parameter {lambda} below lambda_min = {}",
                self.lambda_min
            )));
        }
        let g = (self.member)(lambda)?;
        if g.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: g.dim() });
        }
        if !(g.r_min() <= lambda - (1.0 + self.chart_excess)) {
            return Err(Error::InvalidMetric(format!(
                "member at lambda = {lambda} starts at r_min = {} and misses the window down to {}",
                g.r_min(),
                lambda - (1.0 + self.chart_excess)
            )));
        }
        Ok(g)
    }

    /// Cut of the member at radius `lambda + b`.
    pub fn cut_at(&self, lambda: f64, b: f64) -> Result<SphereMetric> {
        self.member(lambda)?.cut_at(lambda + b)
    }

    /// Force every member hyperbolic below its own parameter: member
    /// `lambda` is forced at `r0 = lambda` with gluing width `d`.
    ///
    /// Only the operator's own requirements are imposed (`d >= 4`,
    /// `lambda_min > d`); a closeness claim at chart excess `xi` needs
    /// the stronger `d >= 4(1+xi)` and must be checked by whoever makes
    /// the claim. The family window guarantees each member reaches far
    /// enough below its own parameter for the freeze at `r0 = lambda`.
    pub fn force(&self, d: f64) -> Result<RadialFamily> {
        let probe = self.member(self.lambda_min)?;
        crate::deform::check_forcing_parameters(probe.r_min(), self.lambda_min, d, 0.0)?;
        let inner = self.member.clone();
        let xi = self.chart_excess;
        RadialFamily::new(self.dim, self.lambda_min, xi, move |lambda| {
            hyperbolic_force(&inner(lambda)?, lambda, d, 0.0)
        })
    }
}

/// Numerical estimate of the cut limit at relative offset `b`.
#[derive(Debug, Clone)]
pub struct CutLimitResult {
    pub b: f64,
    pub lambdas: Vec<f64>,
    /// Cut of the largest sampled parameter, standing in for the limit.
    pub candidate: SphereMetric,
    /// C^2 distances from each earlier member's cut to the candidate.
    pub deviations: Vec<f64>,
    /// Exponential decay rate fitted to the deviations, when they are
    /// positive; a constant-in-lambda family has none to fit.
    pub rate: Option<f64>,
    /// The second-largest parameter already sits within `tol` of the
    /// candidate.
    pub converged: bool,
}

pub fn estimate_cut_limit(
    family: &RadialFamily,
    b: f64,
    lambdas: &[f64],
    grid_step: f64,
    tol: f64,
) -> Result<CutLimitResult> {
    if lambdas.len() < 3 {
        return Err(Error::Argument(format!(
            "need at least three parameters to estimate a limit, got {}",
            lambdas.len()
        )));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("parameters must be strictly increasing".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let last = *lambdas.last().expect("nonempty");
    let candidate = family.cut_at(last, b)?;
    let mut deviations = Vec::with_capacity(lambdas.len() - 1);
    for &lambda in &lambdas[..lambdas.len() - 1] {
        deviations.push(family.cut_at(lambda, b)?.c2_distance(&candidate, grid_step)?);
    }

    // Least-squares slope of log(deviation) against lambda, using only the
    // positive entries; exact zeros mean that part of the family has
    // already collapsed onto the candidate.
    let points: Vec<(f64, f64)> = lambdas[..lambdas.len() - 1]
        .iter()
        .zip(&deviations)
        .filter(|(_, d)| **d > 0.0)
        .map(|(l, d)| (*l, d.ln()))
        .collect();
    let rate = if points.len() >= 2 {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|(x, _)| x).sum();
        let sy: f64 = points.iter().map(|(_, y)| y).sum();
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-12 {
            None
        } else {
            Some(-(n * sxy - sx * sy) / denom)
        }
    } else {
        None
    };

    let converged = *deviations.last().expect("nonempty") <= tol;
    Ok(CutLimitResult { b, lambdas: lambdas.to_vec(), candidate, deviations, rate, converged })
}

/// Closed-form cut limit of a forced family at relative offset `b`, given
/// the unforced family's limit `b -> L(b)`. Assembled from the same blend
/// and profile calls the members use: round below `b = -d`, the gluing
/// blend `blend(round, L(0), smooth_step(2 + 2b/d))` up to `b = -d/2`,
/// frozen `L(0)` through `b = 1/16`, the warp blend
/// `blend(L(0), L(b), margin_step(b))` up to `b = 7/16`, and `L(b)` above.
pub fn forced_cut_limit(
    limit: &dyn Fn(f64) -> Result<SphereMetric>,
    d: f64,
    b: f64,
) -> Result<SphereMetric> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("gluing width d must be positive, got {d}")));
    }
    if !b.is_finite() {
        return Err(Error::Domain(format!("relative offset must be finite, got {b}")));
    }
    let frozen = limit(0.0)?;
    let round = SphereMetric::round(frozen.dim())?;
    let warp_weight = margin_step(b);
    let warped = if warp_weight == 0.0 {
        frozen.clone()
    } else {
        SphereMetric::blend(&frozen, &limit(b)?, warp_weight)?
    };
    let trick_weight = scaled_step(-d, d, b)?;
    SphereMetric::blend(&round, &warped, trick_weight)
}

/// The gluing window `b` in `[-d, 0]` of [`forced_cut_limit`], written
/// directly: `blend(round, L(0), smooth_step(2 + 2b/d))`.
pub fn inner_cut_limit(limit_at_zero: &SphereMetric, d: f64, b: f64) -> Result<SphereMetric> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("gluing width d must be positive, got {d}")));
    }
    if !(-d..=0.0).contains(&b) {
        return Err(Error::Domain(format!("inner window is [-{d}, 0], got b = {b}")));
    }
    let round = SphereMetric::round(limit_at_zero.dim())?;
    SphereMetric::blend(&round, limit_at_zero, scaled_step(-d, d, b)?)
}

/// The warp window `b` in `[0, 1/2]` of [`forced_cut_limit`], written
/// directly: `blend(L(0), L(b), margin_step(b))`.
pub fn outer_cut_limit(
    limit_at_zero: &SphereMetric,
    limit_at_b: &SphereMetric,
    b: f64,
) -> Result<SphereMetric> {
    if !(0.0..=0.5).contains(&b) {
        return Err(Error::Domain(format!("outer window is [0, 1/2], got b = {b}")));
    }
    SphereMetric::blend(limit_at_zero, limit_at_b, margin_step(b))
}

/// Geometry bound for a family, from sampled members plus a stabilization
/// margin for the tail.
#[derive(Debug, Clone)]
pub struct FamilyBoundReport {
    pub lambdas: Vec<f64>,
    /// Worst cut bound per sampled parameter, max over the offset window.
    pub per_lambda: Vec<f64>,
    /// Largest sampled bound.
    pub sampled: f64,
    /// `max(sampled, 1 + bound at the largest parameter)`: the unit margin
    /// covers the unsampled tail once the snapshots have stabilized.
    pub c_bound: f64,
    /// The last two snapshots agree to the stabilization tolerance, so the
    /// tail margin is meaningful.
    pub tail_justified: bool,
}

pub fn family_c_bound(
    family: &RadialFamily,
    lambdas: &[f64],
    b_lo: f64,
    b_hi: f64,
    b_samples: usize,
    grid_step: f64,
    stab_tol: f64,
) -> Result<FamilyBoundReport> {
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("need at least two increasing parameters".into()));
    }
    if b_samples < 2 || !(b_lo < b_hi) {
        return Err(Error::Argument(format!(
            "need an offset window with at least two samples, got [{b_lo}, {b_hi}] x {b_samples}"
        )));
    }
    if !(b_lo > -(1.0 + family.chart_excess)) {
        return Err(Error::Domain(format!(
            "offset window must stay above -(1 + xi) = {}, got {b_lo}",
            -(1.0 + family.chart_excess)
        )));
    }
    if !(stab_tol > 0.0) {
        return Err(Error::Argument(format!("stabilization tolerance must be positive, got {stab_tol}")));
    }

    let mut per_lambda = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut worst = 0.0f64;
        for k in 0..b_samples {
            let b = b_lo + (b_hi - b_lo) * k as f64 / (b_samples - 1) as f64;
            worst = worst.max(family.cut_at(lambda, b)?.c_bound(grid_step)?);
        }
        per_lambda.push(worst);
    }
    let sampled = per_lambda.iter().fold(0.0f64, |a, b| a.max(*b));
    let tail = per_lambda[per_lambda.len() - 1];
    let prev = per_lambda[per_lambda.len() - 2];
    let tail_justified = (tail - prev).abs() <= stab_tol;
    Ok(FamilyBoundReport {
        lambdas: lambdas.to_vec(),
        per_lambda,
        sampled,
        c_bound: sampled.max(1.0 + tail),
        tail_justified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::sinh_sq;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Shift-invariant family: the cut at `lambda + b` depends only on `b`.
    fn shifted_family() -> RadialFamily {
        RadialFamily::new(3, 12.0, 0.0, |lambda| {
            RadialMetric::from_cut_curve(3, lambda - 8.0, move |r| {
                let b = r - lambda;
                let factor = 1.0 + 0.2 / (1.0 + b * b);
                SphereMetric::round(2).unwrap().scale(factor).expect("positive factor")
            })
        })
        .unwrap()
    }

    fn shifted_profile(b: f64) -> Result<SphereMetric> {
        let factor = 1.0 + 0.2 / (1.0 + b * b);
        SphereMetric::round(2)?.scale(factor)
    }

    #[test]
    fn constant_family_has_exact_limit() {
        let family = RadialFamily::new(3, 2.0, 0.0, |_| RadialMetric::hyperbolic(3, 0.0)).unwrap();
        let result = estimate_cut_limit(&family, 0.3, &[2.0, 3.0, 4.0, 5.0], 0.4, 1e-12).unwrap();
        assert!(result.converged);
        for d in &result.deviations {
            assert_eq!(*d, 0.0);
        }
        assert!(result.rate.is_none());
    }

    #[test]
    fn decaying_family_rate_is_recovered() {
        // Cut = (1 + e^{-lambda}) round: deviations decay at rate 1.
        let family = RadialFamily::new(3, 4.0, 0.0, |lambda| {
            let cut = SphereMetric::round(2)?.scale(1.0 + (-lambda).exp())?;
            RadialMetric::warped(3, 0.0, cut)
        })
        .unwrap();
        let lambdas = [4.0, 5.0, 6.0, 7.0, 10.0];
        let result = estimate_cut_limit(&family, 0.0, &lambdas, 0.4, 0.05).unwrap();
        assert!(result.converged, "deviations {:?}", result.deviations);
        let rate = result.rate.expect("positive deviations give a rate");
        assert!((rate - 1.0).abs() < 0.1, "fitted rate {rate}");
        // Deviations really decrease.
        for w in result.deviations.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn forced_family_matches_closed_form_limit_bitwise() {
        // The family is shift-invariant, so its cut limit is just the
        // profile, and the forced members must agree with the closed-form
        // forced limit bitwise at dyadic offsets.
        let family = shifted_family();
        let d = 4.0f64;
        let forced = family.force(d).unwrap();

        let mut rng = StdRng::seed_from_u64(23);
        for lambda in [16.0f64, 32.0] {
            let member = forced.member(lambda).unwrap();
            // Dyadic offsets across every zone: multiples of 1/16 from
            // -d - 1 to 1.
            for k in -80i32..=16 {
                let b = k as f64 / 16.0;
                let r = lambda + b;
                let expected = forced_cut_limit(&shifted_profile, d, b).unwrap();
                let x = DVector::from_vec(vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)]);
                let chart = rng.gen_range(0..2usize);
                let got = member.cut_at(r).unwrap();
                assert_eq!(
                    got.components(chart, &x),
                    expected.components(chart, &x),
                    "lambda = {lambda}, b = {b}"
                );
                // And through the sphere factor at the full radius.
                assert_eq!(
                    member.sphere_at(r).unwrap().components(chart, &x),
                    expected.components(chart, &x) * sinh_sq(r),
                    "lambda = {lambda}, b = {b}"
                );
            }
        }
    }

    #[test]
    fn inner_and_outer_windows_match_the_general_form() {
        let d = 4.0f64;
        let limit0 = shifted_profile(0.0).unwrap();
        let x = DVector::from_vec(vec![0.4, -0.2]);
        for k in 0..=16 {
            let b = -d + d * k as f64 / 16.0;
            let inner = inner_cut_limit(&limit0, d, b).unwrap();
            let general = forced_cut_limit(&shifted_profile, d, b).unwrap();
            assert_eq!(inner.components(0, &x), general.components(0, &x), "b = {b}");
        }
        for k in 0..=8 {
            let b = k as f64 / 16.0;
            let outer =
                outer_cut_limit(&limit0, &shifted_profile(b).unwrap(), b).unwrap();
            let general = forced_cut_limit(&shifted_profile, d, b).unwrap();
            assert_eq!(outer.components(1, &x), general.components(1, &x), "b = {b}");
        }
    }

    #[test]
    fn forced_family_limit_endpoints() {
        // Below the gluing zone the forced limit is round; far above the
        // warp zone it is the unforced limit.
        let d = 4.0f64;
        let x = DVector::from_vec(vec![0.1, 0.6]);
        let round = SphereMetric::round(2).unwrap();
        let low = forced_cut_limit(&shifted_profile, d, -d - 0.5).unwrap();
        assert_eq!(low.components(0, &x), round.components(0, &x));
        let high = forced_cut_limit(&shifted_profile, d, 0.75).unwrap();
        assert_eq!(high.components(0, &x), shifted_profile(0.75).unwrap().components(0, &x));
    }

    #[test]
    fn family_bound_stabilizes() {
        let family = shifted_family();
        let report =
            family_c_bound(&family, &[12.0, 14.0, 16.0], -0.75, 1.0, 5, 0.4, 1e-6).unwrap();
        assert!(report.tail_justified);
        // Shift invariance: every parameter sees the same cuts.
        assert_relative_eq!(report.per_lambda[0], report.per_lambda[2], max_relative = 1e-12);
        assert!(report.c_bound >= 1.0 + report.per_lambda[2]);
        assert!(report.sampled > 1.0);
    }

    #[test]
    fn member_window_is_enforced() {
        // Members whose r_min crawls above lambda - (1 + xi) are rejected.
        let family = RadialFamily::new(3, 5.0, 0.0, |lambda| {
            RadialMetric::from_cut_curve(3, lambda - 0.5, move |_| SphereMetric::round(2).unwrap())
        });
        assert!(family.is_err());

        // Parameters below lambda_min are rejected.
        let ok = shifted_family();
        assert!(ok.member(11.0).is_err());
        assert!(ok.member(12.0).is_ok());
    }

    #[test]
    fn force_requires_room() {
        // lambda_min = 12 with d = 16 violates r0 > d at the smallest
        // parameter.
        let family = shifted_family();
        assert!(family.force(16.0).is_err());
        // Width below the structural minimum is rejected.
        assert!(family.force(3.0).is_err());
    }

    #[test]
    fn limit_estimate_validations() {
        let family = shifted_family();
        assert!(estimate_cut_limit(&family, 0.0, &[12.0, 13.0], 0.4, 0.1).is_err());
        assert!(estimate_cut_limit(&family, 0.0, &[12.0, 12.0, 13.0], 0.4, 0.1).is_err());
        assert!(estimate_cut_limit(&family, 0.0, &[12.0, 13.0, 14.0], 0.4, 0.0).is_err());
        assert!(family_c_bound(&family, &[12.0], -1.0, 1.0, 5, 0.4, 1e-6).is_err());
        assert!(family_c_bound(&family, &[12.0, 13.0], -2.0, 1.0, 5, 0.4, 1e-6).is_err());

        // Window formulas reject offsets outside their windows.
        let round = SphereMetric::round(3).unwrap();
        assert!(inner_cut_limit(&round, 4.0, -4.1).is_err());
        assert!(inner_cut_limit(&round, 4.0, 0.1).is_err());
        assert!(outer_cut_limit(&round, &round, -0.1).is_err());
        assert!(outer_cut_limit(&round, &round, 0.51).is_err());
    }

    #[test]
    fn shifted_family_cut_is_parameter_free() {
        let family = shifted_family();
        let a = family.cut_at(13.0, 0.25).unwrap();
        let b = family.cut_at(20.0, 0.25).unwrap();
        let x = DVector::from_vec(vec![0.3, 0.3]);
        assert_eq!(a.components(0, &x), b.components(0, &x));
    }
}

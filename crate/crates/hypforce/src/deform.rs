//! The deformation operators on radial metrics.
//!
//! Three operators, all lazy and all structural on cut curves:
//!
//! * **Warp forcing** freezes the cut at a radius `r0`: below the gluing
//!   zone `[r0 + 1/16, r0 + 7/16]` the result is the warped extension
//!   `sinh^2(r) * cut(r0) + dr^2`, above it the input continues unchanged.
//! * **The two-variable warping trick** deforms a warped metric to the
//!   hyperbolic one from below: across `[a, a + d/2]` the cut is blended
//!   from the round metric (weight profile `scaled_step(a, d, .)`) to the
//!   metric's own cut; below `a` the result is exactly hyperbolic.
//! * **Hyperbolic forcing** is their composition: warp-force at `r0`, then
//!   run the trick on `[r0 - d, r0 - d/2]`, which lands inside the region
//!   where the cut is frozen. The result is hyperbolic for `r <= r0 - d`
//!   and untouched for `r >= r0 + 7/16`.
//!
//! [`forced_cut_oracle`] states the composed result as an explicit
//! four-branch formula, written directly from the operator definitions and
//! sharing the blend arithmetic, so tests can demand bitwise agreement
//! between the lazy composition and the closed form.

use crate::bump::{margin_step_at, scaled_step};
use crate::error::{Error, Result};
use crate::radial::RadialMetric;
use crate::sphere::SphereMetric;

/// Warped extension of `g` from radius `r0`: the warped metric whose
/// constant cut is `g`'s cut at `r0`, defined on all of (0, infinity).
pub fn warped_extension(g: &RadialMetric, r0: f64) -> Result<RadialMetric> {
    let frozen = g.cut_at(r0)?;
    RadialMetric::warped(g.dim(), 0.0, frozen)
}

/// Warp forcing at `r0`. The output agrees with [`warped_extension`] for
/// `r <= r0 + 1/16` and with `g` for `r >= r0 + 7/16`, and is defined on
/// all of (0, infinity).
pub fn warp_force(g: &RadialMetric, r0: f64) -> Result<RadialMetric> {
    let frozen = g.cut_at(r0)?;
    Ok(RadialMetric::warp_forced_unchecked(g.clone(), r0, frozen))
}

/// How far the input may drift from a warped metric before the warping
/// trick refuses it.
pub const WARPED_DRIFT_TOLERANCE: f64 = 1e-10;

/// The two-variable warping trick on `[a, a + d/2]`.
///
/// Requires a warped input: the cut curve is sampled across the gluing
/// zone (padded by 0.1) and must not drift by more than
/// [`WARPED_DRIFT_TOLERANCE`], else [`Error::NotWarped`] is returned.
/// The output is hyperbolic for `r <= a`, the input itself for
/// `r >= a + d/2`, and is defined on all of (0, infinity).
pub fn warping_trick(g: &RadialMetric, a: f64, d: f64) -> Result<RadialMetric> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("gluing width d must be positive, got {d}")));
    }
    if !(a > g.r_min()) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "gluing start a = {a} must lie inside the metric's domain (r_min = {})",
            g.r_min()
        )));
    }
    let lo = (a - 0.1).max(g.r_min() + 1e-6);
    let hi = a + d / 2.0 + 0.1;
    let drift = g.cut_drift(lo, hi, 17)?;
    if drift > WARPED_DRIFT_TOLERANCE {
        return Err(Error::NotWarped { drift });
    }
    RadialMetric::two_var_forced_unchecked(g.clone(), a, d)
}

/// Preconditions of [`hyperbolic_force`], split out so callers can test a
/// parameter set without owning a metric.
pub fn check_forcing_parameters(r_min: f64, r0: f64, d: f64, chart_excess: f64) -> Result<()> {
    if !(chart_excess >= 0.0) || !chart_excess.is_finite() {
        return Err(Error::Domain(format!("chart excess must be nonnegative, got {chart_excess}")));
    }
    if !(d > 0.0) || !d.is_finite() || !r0.is_finite() {
        return Err(Error::Domain(format!("forcing parameters must be finite with d > 0, got r0 = {r0}, d = {d}")));
    }
    if d < 4.0 * (1.0 + chart_excess) {
        return Err(Error::Constraint(format!(
            "gluing width too small: need d >= 4(1+xi), got d = {d}, xi = {chart_excess}"
        )));
    }
    if r0 <= d {
        return Err(Error::Constraint(format!(
            "forcing radius too small: need r0 > d, got r0 = {r0}, d = {d}"
        )));
    }
    if r_min > r0 - (1.0 + chart_excess) {
        return Err(Error::Constraint(format!(
            "metric domain starts too high: need r_min <= r0 - (1+xi), got r_min = {r_min}, r0 = {r0}, xi = {chart_excess}"
        )));
    }
    Ok(())
}

/// Hyperbolic forcing: warp-force at `r0`, then deform the frozen region to
/// hyperbolic across `[r0 - d, r0 - d/2]`.
///
/// `chart_excess` is the tube half-width parameter xi of the closeness
/// notion the caller is working with; the gluing needs `d >= 4(1+xi)` so
/// the deformation zones of the two stages stay separated by tube-sized
/// margins. The output is hyperbolic on `(0, r0 - d]` and agrees with `g`
/// on `[r0 + 7/16, infinity)`.
pub fn hyperbolic_force(
    g: &RadialMetric,
    r0: f64,
    d: f64,
    chart_excess: f64,
) -> Result<RadialMetric> {
    check_forcing_parameters(g.r_min(), r0, d, chart_excess)?;
    let warped = warp_force(g, r0)?;
    // The trick zone [r0 - d, r0 - d/2] sits inside the region where the
    // warp-forced cut is frozen, so the warpedness the trick needs holds by
    // construction and is not re-sampled.
    RadialMetric::two_var_forced_unchecked(warped, r0 - d, d)
}

/// Closed-form description of the hyperbolic-forcing cut at radius `r`,
/// written branch by branch from the definitions of the two stages:
///
/// * `r <= r0 - d`: the round cut;
/// * `r0 - d <= r <= r0 - d/2`: round blended toward the frozen cut
///   `cut(r0)` with weight `scaled_step(r0 - d, d, r)`;
/// * `r0 - d/2 <= r <= r0 + 1/16`: the frozen cut;
/// * `r0 + 1/16 <= r <= r0 + 7/16`: frozen cut blended toward the input's
///   cut with weight `margin_step_at(r0, r)`;
/// * above: the input's cut.
pub fn forced_cut_oracle(g: &RadialMetric, r0: f64, d: f64, r: f64) -> Result<SphereMetric> {
    if !(d > 0.0) || !(r0 > d) {
        return Err(Error::Constraint(format!("oracle needs 0 < d < r0, got r0 = {r0}, d = {d}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("oracle radius must be positive, got {r}")));
    }
    let sigma = SphereMetric::round(g.sphere_dim())?;
    let rho_trick = scaled_step(r0 - d, d, r)?;
    if rho_trick == 0.0 {
        return Ok(sigma);
    }
    let frozen = g.cut_at(r0)?;
    if rho_trick < 1.0 {
        return SphereMetric::blend(&sigma, &frozen, rho_trick);
    }
    let rho_warp = margin_step_at(r0, r);
    if rho_warp == 0.0 {
        return Ok(frozen);
    }
    if rho_warp < 1.0 {
        return SphereMetric::blend(&frozen, &g.cut_at(r)?, rho_warp);
    }
    g.cut_at(r)
}

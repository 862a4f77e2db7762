//! Closed-form deviation bounds for the deformation operators.
//!
//! These are a priori bounds: arithmetic in the parameters only, no metric
//! evaluation. Measured deviations are compared against them in reports and
//! sweeps. `c_input` is the caller's constant for the input-dependent part
//! of the estimates (it absorbs the input metric's geometry bound and the
//! dimension); it must be supplied explicitly wherever it matters.

use crate::error::{Error, Result};

/// Growth constant `e^{16 + 6 xi}` attached to a tube of chart excess `xi`:
/// the price of carrying C^2 data across a tube of that width.
pub fn closeness_constant(chart_excess: f64) -> Result<f64> {
    if !(chart_excess >= 0.0) || !chart_excess.is_finite() {
        return Err(Error::Domain(format!("chart excess must be nonnegative, got {chart_excess}")));
    }
    Ok((16.0 + 6.0 * chart_excess).exp())
}

/// A priori deviation bound for warp forcing at `r0` applied to a metric
/// that is eps-close to hyperbolic: `e^{16+6xi} (e^{-2 r0} + eps)`.
pub fn warp_forcing_bound(r0: f64, chart_excess: f64, eps: f64) -> Result<f64> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!("forcing radius must be positive, got {r0}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be nonnegative, got {eps}")));
    }
    let c2 = closeness_constant(chart_excess)?;
    Ok(c2 * ((-2.0 * r0).exp() + eps))
}

/// A priori deviation bound for the two-variable warping trick on
/// `[a, a + d/2]`: `c_input (e^{-a} + 1/d)`.
pub fn warping_trick_bound(c_input: f64, a: f64, d: f64) -> Result<f64> {
    if !(c_input >= 1.0) || !c_input.is_finite() {
        return Err(Error::Domain(format!("c_input must be at least 1, got {c_input}")));
    }
    if !(a > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("need a > 0 and d > 0, got a = {a}, d = {d}")));
    }
    Ok(c_input * ((-a).exp() + 1.0 / d))
}

/// Breakdown of the hyperbolic-forcing bound
/// `C1 (1/d + e^{-(r0-d)}) + C2 eps` with `C2 = e^{16+6xi}` and
/// `C1 = c_input + C2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingBound {
    pub c1: f64,
    pub c2: f64,
    /// `C1 / d`: cost of the gluing derivative across the trick zone.
    pub seam_term: f64,
    /// `C1 e^{-(r0-d)}`: decay of the warped-extension mismatch at the
    /// bottom of the trick zone.
    pub tail_term: f64,
    /// `C2 eps`: pass-through of the input's own deviation.
    pub input_term: f64,
    pub total: f64,
}

fn forcing_bound_terms(chart_excess: f64, r0: f64, d: f64, eps: f64, c_input: f64) -> Result<ForcingBound> {
    if !(c_input >= 1.0) || !c_input.is_finite() {
        return Err(Error::Domain(format!("c_input must be at least 1, got {c_input}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be nonnegative, got {eps}")));
    }
    if !(d > 0.0) || !(r0 > d) {
        return Err(Error::Domain(format!("need 0 < d < r0, got r0 = {r0}, d = {d}")));
    }
    let c2 = closeness_constant(chart_excess)?;
    let c1 = c_input + c2;
    let seam_term = c1 / d;
    let tail_term = c1 * (-(r0 - d)).exp();
    let input_term = c2 * eps;
    Ok(ForcingBound { c1, c2, seam_term, tail_term, input_term, total: seam_term + tail_term + input_term })
}

/// The hyperbolic-forcing bound under its full preconditions: the input is
/// a `c`-bounded metric on an n-manifold, eps-close to hyperbolic with
/// chart excess `xi`, and the gluing parameters satisfy `d >= 4(1+xi)` and
/// `r0 > d`.
pub fn forcing_bound(
    c: f64,
    n: usize,
    chart_excess: f64,
    r0: f64,
    d: f64,
    eps: f64,
    c_input: f64,
) -> Result<ForcingBound> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::Precondition(format!("geometry bound c must be at least 1, got {c}")));
    }
    if n < 2 {
        return Err(Error::Precondition(format!("manifold dimension must be at least 2, got {n}")));
    }
    if !(eps < 1.0) {
        return Err(Error::Precondition(format!("eps must be below 1 for the bound to apply, got {eps}")));
    }
    if d < 4.0 * (1.0 + chart_excess) {
        return Err(Error::Constraint(format!(
            "gluing width too small: need d >= 4(1+xi), got d = {d}, xi = {chart_excess}"
        )));
    }
    forcing_bound_terms(chart_excess, r0, d, eps, c_input)
}

/// The same arithmetic with only formula-domain checks (`0 < d < r0`,
/// `eps >= 0`), for parameter sweeps that deliberately step outside the
/// full preconditions to show where the bound stops being meaningful.
pub fn forcing_bound_value(
    chart_excess: f64,
    r0: f64,
    d: f64,
    eps: f64,
    c_input: f64,
) -> Result<ForcingBound> {
    forcing_bound_terms(chart_excess, r0, d, eps, c_input)
}

/// Gluing schedule that pushes the forcing bound below
/// `eps_target + C2 eps`: width `d >= 2 C1 / eps_target` (but at least the
/// structural `4(1+xi)`) and forcing radius at least
/// `d + ln(2 C1 / eps_target)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingSchedule {
    pub d: f64,
    pub r0_min: f64,
    /// Bound value at exactly (r0_min, d); decreases in r0 beyond that.
    pub projected: ForcingBound,
}

pub fn schedule_for_target(
    eps_target: f64,
    chart_excess: f64,
    eps: f64,
    c_input: f64,
) -> Result<ForcingSchedule> {
    if !(eps_target > 0.0) || !eps_target.is_finite() {
        return Err(Error::Domain(format!("target must be positive, got {eps_target}")));
    }
    let c2 = closeness_constant(chart_excess)?;
    if !(c_input >= 1.0) || !c_input.is_finite() {
        return Err(Error::Domain(format!("c_input must be at least 1, got {c_input}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be nonnegative, got {eps}")));
    }
    let c1 = c_input + c2;
    let d = (2.0 * c1 / eps_target).max(4.0 * (1.0 + chart_excess));
    // Floor of 1 keeps r0 > d meaningful when the target is so loose that
    // the logarithm goes nonpositive; a larger gap only shrinks the tail.
    let gap = (2.0 * c1 / eps_target).ln().max(1.0);
    let r0_min = d + gap;
    // The tail is evaluated from the scheduled gap itself. Recomputing it
    // as e^{-(r0_min - d)} would re-derive the gap by subtraction, which
    // loses it entirely once d is large enough that r0_min rounds to d.
    let seam_term = c1 / d;
    let tail_term = c1 * (-gap).exp();
    let input_term = c2 * eps;
    let projected = ForcingBound {
        c1,
        c2,
        seam_term,
        tail_term,
        input_term,
        total: seam_term + tail_term + input_term,
    };
    Ok(ForcingSchedule { d, r0_min, projected })
}

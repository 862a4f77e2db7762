//! Smooth cutoff profiles used to glue metrics along radial seams.
//!
//! Every gluing operator in this crate blends two metrics with a weight drawn
//! from the profiles here. The profiles are exact on their plateaus: they
//! return the literals `0.0` and `1.0` there, which lets metric constructors
//! short-circuit a blend to one of its operands and keep compositions of
//! deformations bitwise equal to their closed-form descriptions.

use crate::error::{Error, Result};

/// Plateau margin of [`margin_step`]: the transition is confined to
/// `[1/16, 1/2 - 1/16]` instead of `[0, 1/2]`, so grid points and seam
/// comparisons that land within `1/16` of a nominal seam still see a plateau.
pub const PLATEAU_MARGIN: f64 = 1.0 / 16.0;

fn seam_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C-infinity step: `0` for `t <= 0`, `1` for `t >= 1`, strictly increasing
/// in between, with `smooth_step(1/2) == 1/2` exactly and
/// `smooth_step(t) + smooth_step(1-t) == 1` up to roundoff.
///
/// All derivatives vanish at both seams, so blends made with this weight are
/// smooth no matter how the blended pieces differ.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = seam_exp(t);
    let b = seam_exp(1.0 - t);
    a / (a + b)
}

/// Transition profile of a gluing zone starting at `a` with nominal width
/// parameter `d`: `0` for `t <= a`, `1` for `t >= a + d/2`.
///
/// Errors with [`Error::Domain`] if `d <= 0` or any argument is not finite.
pub fn scaled_step(a: f64, d: f64, t: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("width parameter d must be positive and finite, got {d}")));
    }
    if !a.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("scaled_step arguments must be finite, got a={a}, t={t}")));
    }
    Ok(smooth_step(2.0 * (t - a) / d))
}

/// Margined unit step: `0` for `t <= 1/16`, `1` for `t >= 7/16`, with the
/// midpoint `margin_step(1/4) == 1/2` exactly.
///
/// This is the weight of the warp-forcing blend. Compared to
/// `scaled_step(0, 1, t)` it pulls the transition strictly inside `(0, 1/2)`
/// by [`PLATEAU_MARGIN`], so the blend provably agrees with its endpoints on
/// closed neighborhoods of the seams rather than only at single points.
pub fn margin_step(t: f64) -> f64 {
    smooth_step((t - PLATEAU_MARGIN) / (0.5 - 2.0 * PLATEAU_MARGIN))
}

/// [`margin_step`] translated to start at `r0`: `0` for `r <= r0 + 1/16`,
/// `1` for `r >= r0 + 7/16`.
pub fn margin_step_at(r0: f64, r: f64) -> f64 {
    margin_step(r - r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn plateaus_are_bitwise_exact() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(-3.7), 0.0);
        assert_eq!(smooth_step(-1e-300), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.5), 1.0);
        assert_eq!(smooth_step(1.0 + 1e-12), 1.0);
    }

    #[test]
    fn midpoint_is_exact() {
        assert_eq!(smooth_step(0.5), 0.5);
        assert_eq!(margin_step(0.25), 0.5);
    }

    #[test]
    fn symmetric_about_midpoint() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let s = smooth_step(t) + smooth_step(1.0 - t);
            assert!((s - 1.0).abs() < 1e-15, "asymmetric at t={t}: {s}");
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let t0: f64 = rng.gen_range(-0.5..1.5);
            let t1 = t0 + rng.gen_range(0.0..0.5);
            let (v0, v1) = (smooth_step(t0), smooth_step(t1));
            assert!(v1 >= v0, "decreasing: ({t0},{v0}) vs ({t1},{v1})");
            assert!((0.0..=1.0).contains(&v0));
            assert!((0.0..=1.0).contains(&v1));
        }
        // Strict growth holds away from the seams, where the quotient cannot
        // saturate to an exact 0 or 1 in double precision.
        let mut rng2 = StdRng::seed_from_u64(13);
        for _ in 0..500 {
            let t0: f64 = rng2.gen_range(0.1..0.88);
            let t1 = t0 + rng2.gen_range(1e-3..0.9 - t0);
            assert!(smooth_step(t1) > smooth_step(t0), "not strict at ({t0},{t1})");
        }
    }

    #[test]
    fn flat_to_all_orders_at_seams() {
        // smooth_step(t) <= exp(-1/(2t)) for t <= 1/3 dominates every
        // polynomial rate, which is what C-infinity flatness at 0 requires.
        for i in 1..=60 {
            let t = i as f64 * (1.0 / 3.0) / 60.0;
            let v = smooth_step(t);
            assert!(v <= (-0.5 / t).exp() * (1.0 + 1e-12), "seam bound fails at t={t}");
            let w = 1.0 - smooth_step(1.0 - t);
            assert!(w <= (-0.5 / t).exp() * (1.0 + 1e-12), "upper seam bound fails at t={t}");
        }
    }

    #[test]
    fn scaled_step_plateau_boundaries() {
        // Representable boundary values so the rescaling is exact.
        let (a, d) = (2.0, 8.0);
        assert_eq!(scaled_step(a, d, 2.0).unwrap(), 0.0);
        assert_eq!(scaled_step(a, d, 1.25).unwrap(), 0.0);
        assert_eq!(scaled_step(a, d, 6.0).unwrap(), 1.0);
        assert_eq!(scaled_step(a, d, 17.5).unwrap(), 1.0);
        assert_eq!(scaled_step(a, d, 4.0).unwrap(), 0.5);
        // Agreement with the unscaled profile under the affine change.
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let t: f64 = rng.gen_range(1.0..7.0);
            let u = 2.0 * (t - a) / d;
            assert_eq!(scaled_step(a, d, t).unwrap(), smooth_step(u));
        }
    }

    #[test]
    fn scaled_step_rejects_bad_width() {
        assert!(scaled_step(0.0, 0.0, 1.0).is_err());
        assert!(scaled_step(0.0, -2.0, 1.0).is_err());
        assert!(scaled_step(0.0, f64::NAN, 1.0).is_err());
        assert!(scaled_step(f64::INFINITY, 1.0, 1.0).is_err());
    }

    #[test]
    fn margin_step_plateaus() {
        assert_eq!(margin_step(0.0), 0.0);
        assert_eq!(margin_step(PLATEAU_MARGIN), 0.0);
        assert_eq!(margin_step(PLATEAU_MARGIN / 2.0), 0.0);
        assert_eq!(margin_step(0.5 - PLATEAU_MARGIN), 1.0);
        assert_eq!(margin_step(0.5), 1.0);
        assert_eq!(margin_step(3.0), 1.0);
        assert!(margin_step(0.2) > 0.0 && margin_step(0.2) < 1.0);
    }

    #[test]
    fn margin_step_at_translates() {
        // Dyadic samples keep (r0 + t) - r0 == t exact, so the translation
        // identity can be asserted bitwise.
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let r0 = rng.gen_range(-64i32..192) as f64 / 16.0;
            let t = rng.gen_range(-16i32..24) as f64 / 16.0;
            assert_eq!(margin_step_at(r0, r0 + t), margin_step(t));
        }
        assert_eq!(margin_step_at(6.0, 6.0 + PLATEAU_MARGIN), 0.0);
        assert_eq!(margin_step_at(6.0, 6.5 - PLATEAU_MARGIN), 1.0);
    }
}

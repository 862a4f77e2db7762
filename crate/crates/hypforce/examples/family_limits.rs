//! Push a one-parameter family of forced metrics toward its cut limits
//! and compare against the closed forms.
//!
//! The family carries a conformal perturbation of size `1 + e^{-lambda}`
//! centered at radius `lambda`, so near its own parameter each member
//! looks the same up to an `e^{-lambda}` correction. Forcing every member
//! at `r0 = lambda` and following the cuts at a fixed relative offset `b`
//! gives a convergent family whose limit is assembled from the same blend
//! primitives: round below the gluing zone, a glue blend, the frozen limit
//! cut, a warp blend, and the limit cut itself above.
//!
//! ```text
//! cargo run --example family_limits
//! ```

use hypforce::error::Result;
use hypforce::family::{
    estimate_cut_limit, family_c_bound, forced_cut_limit, inner_cut_limit, outer_cut_limit,
    RadialFamily,
};
use hypforce::radial::RadialMetric;
use hypforce::sphere::{Poly, SphereMetric};

fn main() -> Result<()> {
    let dim = 3;
    let xi = 0.5;
    let d = 4.0;
    let lambdas = [10.0, 13.0, 16.0, 19.0];

    let round = SphereMetric::round(dim - 1)?;
    let q = Poly::new(vec![(1.0, vec![2, 0, 0])])?;

    let family = RadialFamily::new(dim, lambdas[0], xi, {
        let (round, q) = (round.clone(), q.clone());
        move |lambda: f64| {
            let (round, q) = (round.clone(), q.clone());
            RadialMetric::from_cut_curve(dim, lambda - (1.0 + xi), move |r| {
                let b = r - lambda;
                let amp = 0.02 * (1.0 + (-lambda).exp()) / (1.0 + b * b);
                round.conformal_poly(amp, q.clone()).expect("small amplitude")
            })
        }
    })?;
    let forced = family.force(d)?;

    // Limit of the unforced cuts at offset b, with the e^{-lambda} factor
    // gone.
    let limit = {
        let (round, q) = (round.clone(), q.clone());
        move |b: f64| round.conformal_poly(0.02 / (1.0 + b * b), q.clone())
    };

    let grid = 0.25;
    println!("forced family, d = {d}, parameters {lambdas:?}");
    println!();
    println!(
        "{:>7}  {:>13}  {:>10}  {:>10}",
        "b", "|cand-limit|", "rate", "converged"
    );
    for b in [-d, -0.75 * d, -0.5 * d, -0.25 * d, 0.0, 0.25, 0.5] {
        let est = estimate_cut_limit(&forced, b, &lambdas, grid, 1e-6)?;
        let closed = forced_cut_limit(&limit, d, b)?;
        let dist = est.candidate.c2_distance(&closed, grid)?;
        let rate = est.rate.map_or("none".into(), |r| format!("{r:.4}"));
        println!("{b:>7.2}  {dist:>13.4e}  {rate:>10}  {:>10}", est.converged);
    }

    // The window formulas are the same arithmetic as the full piecewise
    // limit, restricted to their zones.
    let l0 = limit(0.0)?;
    let mut inner_worst = 0.0f64;
    for b in [-d, -0.6 * d, -0.3 * d, 0.0] {
        let dist = inner_cut_limit(&l0, d, b)?.c2_distance(&forced_cut_limit(&limit, d, b)?, grid)?;
        inner_worst = inner_worst.max(dist);
    }
    let mut outer_worst = 0.0f64;
    for b in [0.0, 0.2, 0.4, 0.5] {
        let dist =
            outer_cut_limit(&l0, &limit(b)?, b)?.c2_distance(&forced_cut_limit(&limit, d, b)?, grid)?;
        outer_worst = outer_worst.max(dist);
    }
    println!();
    println!("window formulas vs piecewise limit: inner {inner_worst:e}, outer {outer_worst:e}");

    let bound = family_c_bound(&forced, &lambdas, -1.0, 0.5, 7, grid, 1e-4)?;
    println!();
    println!(
        "geometry bound: sampled {:.6}, with tail margin {:.6} (tail justified: {})",
        bound.sampled, bound.c_bound, bound.tail_justified
    );
    Ok(())
}

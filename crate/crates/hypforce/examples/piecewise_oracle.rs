//! Check the composed forcing operator against its closed-form piecewise
//! description, branch by branch.
//!
//! `hyperbolic_force` is built as warp forcing followed by the
//! two-variable warping trick; `forced_cut_oracle` writes the resulting
//! cut at each radius directly from the zone formulas instead. Both sides
//! make the same blend calls with the same weights, so they agree exactly,
//! not just to rounding. The staged composition is also checked against
//! the one-shot operator.
//!
//! ```text
//! cargo run --example piecewise_oracle
//! ```

use hypforce::deform::{forced_cut_oracle, hyperbolic_force, warp_force, warping_trick};
use hypforce::error::Result;
use hypforce::radial::RadialMetric;
use hypforce::sphere::{Poly, SphereMetric};
use nalgebra::DVector;

fn main() -> Result<()> {
    let dim = 4;
    let (r0, d) = (14.0, 6.0);

    let round = SphereMetric::round(dim - 1)?;
    let q = Poly::new(vec![(1.0, vec![1, 1, 0, 0]), (0.5, vec![0, 0, 2, 0])])?;
    let g = RadialMetric::from_cut_curve(dim, 0.0, {
        let round = round.clone();
        move |r| {
            let amp = 0.03 * (1.0 + (0.4 * r).sin());
            round.conformal_poly(amp, q.clone()).expect("small amplitude")
        }
    })?;

    let forced = hyperbolic_force(&g, r0, d, 0.0)?;

    // Staged composition: warp forcing freezes the cut above r0, then the
    // trick glues hyperbolic space across [r0 - d, r0 - d/2]. The frozen
    // cut has zero drift there, so the trick accepts it.
    let staged = warping_trick(&warp_force(&g, r0)?, r0 - d, d)?;

    let x = DVector::from_vec(vec![0.2, -0.3, 0.1]);
    println!("cut of the forced metric vs the piecewise formula, n = {dim}, r0 = {r0}, d = {d}");
    println!();
    println!("{:>9}  {:>18}  {:>12}  {:>12}", "radius", "branch", "|op-oracle|", "|op-staged|");
    let probes = [
        (r0 - d - 2.0, "round"),
        (r0 - d, "round (seam)"),
        (r0 - 0.8 * d, "glue blend"),
        (r0 - 0.6 * d, "glue blend"),
        (r0 - d / 2.0, "frozen (seam)"),
        (r0 - 1.0, "frozen"),
        (r0 + 1.0 / 16.0, "frozen (seam)"),
        (r0 + 0.2, "warp blend"),
        (r0 + 0.4, "warp blend"),
        (r0 + 7.0 / 16.0, "input (seam)"),
        (r0 + 3.0, "input"),
    ];
    let mut worst = 0.0f64;
    for (r, branch) in probes {
        let op = forced.cut_at(r)?.components(0, &x);
        let oracle = forced_cut_oracle(&g, r0, d, r)?.components(0, &x);
        let st = staged.cut_at(r)?.components(0, &x);
        let vs_oracle = (&op - oracle).abs().max();
        let vs_staged = (&op - st).abs().max();
        worst = worst.max(vs_oracle).max(vs_staged);
        println!("{r:>9.4}  {branch:>18}  {vs_oracle:>12.3e}  {vs_staged:>12.3e}");
    }
    println!();
    println!("worst disagreement over all probes = {worst:e}");
    Ok(())
}

//! Measure how chart deviations from flat space decay with the offset on
//! hyperbolic space itself.
//!
//! A radial chart at offset `a` compares the metric, pulled back through
//! the exponential map of the chart frame, against the Euclidean metric on
//! a tube of half-width `1 + xi`. On hyperbolic space the deviation decays
//! like `e^{-2a}` as the chart moves out, which shows up as a log-slope
//! near -2; the threshold estimator then finds the smallest offset already
//! below a requested deviation.
//!
//! ```text
//! cargo run --example chart_decay
//! ```

use hypforce::error::Result;
use hypforce::radial::RadialMetric;
use hypforce::verify::{
    build_radial_chart, chart_deviation, estimate_closeness_threshold, sample_base_points,
    ChartOpts, TubeSampling,
};

fn main() -> Result<()> {
    let g = RadialMetric::hyperbolic(3, 0.0)?;
    let xi = 1.0;
    let sampling = TubeSampling { tube_points: 9, base_points: 2, ..Default::default() };
    let opts = ChartOpts { ode_step: 1e-2, ..Default::default() };

    let atlas = g.cut_at(5.0)?.atlas();
    let bases = sample_base_points(&atlas, sampling.base_points, sampling.seed)?;

    println!("chart deviations of hyperbolic 3-space, tube half-width 1 + xi = {}", 1.0 + xi);
    println!();
    println!("{:>8}  {:>12}", "offset", "deviation");
    let offsets = [3.0, 4.0, 5.0, 6.0];
    let mut devs = Vec::new();
    for &a in &offsets {
        let mut worst = 0.0f64;
        for base in &bases {
            let chart = build_radial_chart(&g, base.clone(), a, xi)?;
            worst = worst.max(chart_deviation(&g, &chart, &sampling, &opts)?.deviation);
        }
        println!("{a:>8.2}  {worst:>12.4e}");
        devs.push(worst);
    }

    // Least-squares slope of log(deviation) against the offset.
    let n = offsets.len() as f64;
    let xbar = offsets.iter().sum::<f64>() / n;
    let ybar = devs.iter().map(|d| d.ln()).sum::<f64>() / n;
    let slope = offsets
        .iter()
        .zip(&devs)
        .map(|(a, dv)| (a - xbar) * (dv.ln() - ybar))
        .sum::<f64>()
        / offsets.iter().map(|a| (a - xbar) * (a - xbar)).sum::<f64>();
    println!();
    println!("log-slope = {slope:.4} (the warped structure predicts -2)");

    let eps = 0.1;
    let a_hat = estimate_closeness_threshold(&g, eps, xi, 3.0, 8.0, &sampling, &opts)?;
    println!("smallest sampled offset with deviation <= {eps}: a = {a_hat:.4}");
    Ok(())
}

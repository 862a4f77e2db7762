//! Curvature-side verification for radial metrics.
//!
//! Sectional curvatures are sampled through the generic chart machinery:
//! a radial metric in a sphere chart is just an n-by-n metric in the
//! coordinates (x, r), so the same finite-difference curvature code that
//! handles sphere metrics handles these. For surfaces the scalar curvature
//! has a one-line second oracle through the radial coefficient alone, which
//! is exposed for cross-checks.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::curvature::{christoffels, metric_jet4, sectional_curvature};
use crate::error::{Error, Result};
use crate::fd::central_second4;
use crate::radial::RadialMetric;
use crate::sphere::SpherePoint;

#[derive(Debug, Clone, Copy)]
pub struct CurvatureOpts {
    /// Radii sampled per check, evenly spaced over the requested interval.
    pub radial_samples: usize,
    /// Sphere points sampled per radius.
    pub base_points: usize,
    /// Tangent planes sampled per point (coordinate planes first, then
    /// random ones once those run out).
    pub planes_per_point: usize,
    /// Finite-difference step for the curvature jets.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for CurvatureOpts {
    fn default() -> Self {
        CurvatureOpts { radial_samples: 9, base_points: 4, planes_per_point: 4, fd_step: 1e-3, seed: 11 }
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// Largest |K + 1| over all sampled planes.
    pub max_deviation: f64,
    /// Radius at which the worst plane was found.
    pub worst_radius: f64,
    /// Number of sectional values sampled.
    pub samples: usize,
    /// Largest |Gamma^k_{rr}| over the sample points: the defect of radial
    /// lines from being unit-speed geodesics. Zero for any radial metric,
    /// up to finite-difference error.
    pub radial_residual: f64,
}

/// Metric components of `g` as a function of stacked coordinates
/// `z = (x, r)` in a fixed sphere chart.
fn cylinder_closure(g: &RadialMetric, chart: usize) -> impl Fn(&DVector<f64>) -> DMatrix<f64> + '_ {
    let m = g.sphere_dim();
    move |z: &DVector<f64>| {
        let x = DVector::from_iterator(m, z.iter().take(m).copied());
        let r = z[m];
        g.components(chart, &x, r).expect("curvature sample outside metric domain")
    }
}

fn sample_chart_point(rng: &mut StdRng, m: usize, extent: f64) -> DVector<f64> {
    // Stay well inside the preferred disk so stencils never leave the chart.
    DVector::from_fn(m, |_, _| rng.gen_range(-0.4 * extent..0.4 * extent))
}

fn plane_for_index(rng: &mut StdRng, n: usize, idx: usize) -> (DVector<f64>, DVector<f64>) {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    if idx < pairs.len() {
        let (i, j) = pairs[idx];
        let mut u = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        u[i] = 1.0;
        v[j] = 1.0;
        (u, v)
    } else {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
        (u, v)
    }
}

/// Sample sectional curvatures of `g` over radii in `[r_lo, r_hi]` and
/// report the worst deviation from the hyperbolic value -1, together with
/// the radial geodesic residual.
pub fn radial_curvature_check(
    g: &RadialMetric,
    r_lo: f64,
    r_hi: f64,
    opts: &CurvatureOpts,
) -> Result<CurvatureReport> {
    if !(r_lo > g.r_min()) || !(r_hi >= r_lo) || !r_hi.is_finite() {
        return Err(Error::Domain(format!(
            "radius interval [{r_lo}, {r_hi}] must sit inside the metric domain (r > {})",
            g.r_min()
        )));
    }
    if opts.radial_samples == 0 || opts.base_points == 0 || opts.planes_per_point == 0 {
        return Err(Error::Argument("curvature sampling counts must be positive".into()));
    }
    if !(opts.fd_step > 0.0) || opts.fd_step >= 0.1 {
        return Err(Error::Argument(format!("fd step must be in (0, 0.1), got {}", opts.fd_step)));
    }
    // Keep the radial stencil (spread 2h for the wide cross terms) inside
    // the domain.
    if r_lo - 2.0 * opts.fd_step <= g.r_min() {
        return Err(Error::Domain(format!(
            "r_lo = {r_lo} leaves no room for the stencil above r_min = {}",
            g.r_min()
        )));
    }

    let m = g.sphere_dim();
    let n = m + 1;
    let atlas = crate::sphere::SphereAtlas::new(m)?;
    let mut rng = StdRng::seed_from_u64(opts.seed);

    let mut max_deviation = 0.0f64;
    let mut worst_radius = r_lo;
    let mut samples = 0usize;
    let mut radial_residual = 0.0f64;

    for i in 0..opts.radial_samples {
        let r = if opts.radial_samples == 1 {
            r_lo
        } else {
            r_lo + (r_hi - r_lo) * i as f64 / (opts.radial_samples - 1) as f64
        };
        for _ in 0..opts.base_points {
            let chart = rng.gen_range(0..2usize);
            let x = sample_chart_point(&mut rng, m, atlas.preferred_radius());
            let f = cylinder_closure(g, chart);
            let z = DVector::from_fn(n, |k, _| if k < m { x[k] } else { r });

            for p in 0..opts.planes_per_point {
                let (u, v) = plane_for_index(&mut rng, n, p);
                let k = sectional_curvature(&f, &z, &u, &v, opts.fd_step)?;
                let dev = (k + 1.0).abs();
                if dev > max_deviation {
                    max_deviation = dev;
                    worst_radius = r;
                }
                samples += 1;
            }

            let jet = metric_jet4(&f, &z, opts.fd_step);
            let gamma = christoffels(&jet.g, &jet.dg)?;
            for k in 0..n {
                radial_residual = radial_residual.max(gamma[k][(m, m)].abs());
            }
        }
    }

    Ok(CurvatureReport { max_deviation, worst_radius, samples, radial_residual })
}

/// Gauss curvature of a surface metric `E(theta, r) dtheta^2 + dr^2` at a
/// point, through the scalar formula `K = -(sqrt(E))_rr / sqrt(E)`. In
/// orthogonal coordinates with g_rr = 1 the angular derivatives drop out of
/// the curvature entirely, so only the radial dependence of one component
/// enters. Every radial surface metric has this form in a chart, which
/// makes this an independent oracle for the full tensor machinery when
/// n = 2.
pub fn gauss_curvature_scalar(g: &RadialMetric, point: &SpherePoint, r: f64, h: f64) -> Result<f64> {
    if g.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: g.dim() });
    }
    if !(h > 0.0) || !(r - 2.0 * h > g.r_min()) {
        return Err(Error::Domain(format!("stencil [{} , {}] leaves the domain", r - 2.0 * h, r + 2.0 * h)));
    }
    let sqrt_e = |s: f64| -> f64 {
        let comps = g
            .components(point.chart, &point.x, s)
            .expect("scalar curvature stencil outside metric domain");
        comps[(0, 0)].sqrt()
    };
    let d2 = central_second4(sqrt_e, r, h);
    Ok(-d2 / sqrt_e(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphereMetric;
    use approx::assert_relative_eq;

    fn quick_opts() -> CurvatureOpts {
        CurvatureOpts { radial_samples: 3, base_points: 2, planes_per_point: 3, fd_step: 1e-3, seed: 11 }
    }

    #[test]
    fn hyperbolic_metric_passes() {
        for n in [2usize, 3] {
            let g = RadialMetric::hyperbolic(n, 0.0).unwrap();
            let report = radial_curvature_check(&g, 1.0, 3.0, &quick_opts()).unwrap();
            assert!(report.max_deviation < 2e-5, "n = {n}: deviation {}", report.max_deviation);
            assert!(report.radial_residual < 1e-7, "n = {n}: residual {}", report.radial_residual);
            assert_eq!(report.samples, 3 * 2 * 3);
        }
    }

    #[test]
    fn warped_product_oracle_scaled_cut() {
        // For sinh^2(r) c^2 round + dr^2 the closed forms are
        // K_mixed = -1 and K_sphere = (1 - c^2 cosh^2 r) / (c^2 sinh^2 r):
        // the standard warped-product curvatures with F(r) = c sinh(r).
        let c = 1.1f64;
        let cut = SphereMetric::round(2).unwrap().scale(c * c).unwrap();
        let g = RadialMetric::warped(3, 0.0, cut).unwrap();
        let f = cylinder_closure(&g, 0);
        let r = 1.7f64;
        let z = DVector::from_vec(vec![0.2, -0.3, r]);

        // Mixed plane: one sphere direction, one radial direction.
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let k_mixed = sectional_curvature(&f, &z, &u, &v, 1e-3).unwrap();
        assert_relative_eq!(k_mixed, -1.0, epsilon = 2e-5);

        // Sphere plane.
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let k_sph = sectional_curvature(&f, &z, &u, &v, 1e-3).unwrap();
        let expected = (1.0 - c * c * r.cosh().powi(2)) / (c * c * r.sinh().powi(2));
        assert_relative_eq!(k_sph, expected, epsilon = 2e-5);

        // And the report notices the defect: for c != 1 the sphere planes
        // are not at curvature -1.
        let report = radial_curvature_check(&g, 1.5, 2.0, &quick_opts()).unwrap();
        let min_defect = (expected + 1.0).abs() * 0.5;
        assert!(report.max_deviation > min_defect, "deviation {} too small", report.max_deviation);
    }

    #[test]
    fn scalar_oracle_agrees_with_tensor_machinery() {
        // A genuinely r-dependent surface metric: conformal bump on the
        // circle factor, strength varying with radius through a cut curve.
        let atlas = crate::sphere::SphereAtlas::new(1).unwrap();
        let g = RadialMetric::from_cut_curve(2, 0.5, {
            move |r: f64| {
                let poly = crate::sphere::Poly::new(vec![(1.0, vec![2, 0])]).unwrap();
                let amp = 0.05 * (1.0 + (0.7 * r).sin());
                SphereMetric::round(1)
                    .unwrap()
                    .conformal_poly(amp, poly)
                    .expect("valid perturbation")
            }
        })
        .unwrap();
        let point = SpherePoint { chart: 0, x: DVector::from_vec(vec![0.3]) };
        for r in [1.2f64, 2.0, 2.9] {
            let k_scalar = gauss_curvature_scalar(&g, &point, r, 1e-3).unwrap();
            let f = cylinder_closure(&g, 0);
            let z = DVector::from_vec(vec![0.3, r]);
            let u = DVector::from_vec(vec![1.0, 0.0]);
            let v = DVector::from_vec(vec![0.0, 1.0]);
            let k_tensor = sectional_curvature(&f, &z, &u, &v, 1e-3).unwrap();
            assert_relative_eq!(k_scalar, k_tensor, epsilon = 1e-4, max_relative = 1e-4);
            // Sanity: this metric is not hyperbolic, and both oracles agree
            // on that.
            assert!((k_scalar + 1.0).abs() > 1e-3);
        }
        assert!(atlas.contains(&DVector::from_vec(vec![0.3])));
    }

    #[test]
    fn scalar_oracle_on_hyperbolic_plane() {
        let g = RadialMetric::hyperbolic(2, 0.0).unwrap();
        let point = SpherePoint { chart: 1, x: DVector::from_vec(vec![-0.9]) };
        for r in [0.8f64, 1.6, 3.2] {
            let k = gauss_curvature_scalar(&g, &point, r, 1e-3).unwrap();
            assert_relative_eq!(k, -1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn domain_checks() {
        let g = RadialMetric::hyperbolic(3, 0.0).unwrap();
        assert!(radial_curvature_check(&g, 0.0, 1.0, &quick_opts()).is_err());
        assert!(radial_curvature_check(&g, 2.0, 1.0, &quick_opts()).is_err());
        assert!(radial_curvature_check(&g, 1e-4, 1.0, &quick_opts()).is_err());
        let point = SpherePoint { chart: 0, x: DVector::from_vec(vec![0.0, 0.0]) };
        assert!(gauss_curvature_scalar(&g, &point, 1.0, 1e-3).is_err());
    }
}

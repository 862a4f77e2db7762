//! Configured experiment runners shared by the command-line tool and the
//! examples. Each runner builds what the configuration describes, measures
//! it, writes a JSON report that echoes the full resolved configuration,
//! and returns a pass/fail outcome. All sampling is seeded, and floats are
//! written through deterministic formatters, so reruns with the same
//! configuration produce byte-identical outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{build_metric, Config};
use crate::deform::{forced_cut_oracle, hyperbolic_force};
use crate::error::{Error, Result};
use crate::family::{estimate_cut_limit, forced_cut_limit, RadialFamily};
use crate::radial::RadialMetric;
use crate::sphere::{SphereAtlas, SphereMetric};
use crate::verify::{
    build_radial_chart, chart_deviation, check_ball_close, check_eps_close, closeness_constant,
    forcing_bound, forcing_bound_value, gauss_curvature_scalar, radial_curvature_check,
    sample_base_points, schedule_for_target, warp_forcing_bound, warping_trick_bound, BallReport,
    ClosenessReport, CurvatureReport,
};

/// What a runner hands back to its caller.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// The run's claim held (certified, converged, within bound).
    pub pass: bool,
    /// One-line human summary.
    pub summary: String,
    /// Files written under the output directory.
    pub files: Vec<PathBuf>,
}

fn write_report<T: Serialize>(
    out_dir: &Path,
    name: &str,
    config: &Config,
    result: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let report = serde_json::json!({ "config": config, "result": result });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Io(format!("cannot serialize report: {e}")))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

#[derive(Serialize)]
struct ClosenessSummary {
    eps: f64,
    chart_excess: f64,
    offsets: Vec<f64>,
    per_offset: Vec<f64>,
    worst: f64,
    worst_offset: f64,
    charts_checked: usize,
    certified: bool,
}

impl From<&ClosenessReport> for ClosenessSummary {
    fn from(r: &ClosenessReport) -> Self {
        ClosenessSummary {
            eps: r.eps,
            chart_excess: r.chart_excess,
            offsets: r.offsets.clone(),
            per_offset: r.per_offset.clone(),
            worst: r.worst,
            worst_offset: r.worst_offset,
            charts_checked: r.charts_checked,
            certified: r.certified,
        }
    }
}

#[derive(Serialize)]
struct CurvatureSummary {
    max_deviation: f64,
    worst_radius: f64,
    samples: usize,
    radial_residual: f64,
}

impl From<&CurvatureReport> for CurvatureSummary {
    fn from(r: &CurvatureReport) -> Self {
        CurvatureSummary {
            max_deviation: r.max_deviation,
            worst_radius: r.worst_radius,
            samples: r.samples,
            radial_residual: r.radial_residual,
        }
    }
}

#[derive(Serialize)]
struct BallSummary {
    ball_radius: f64,
    curvature_tol: f64,
    curvature: CurvatureSummary,
    closeness: ClosenessSummary,
    certified: bool,
}

impl From<&BallReport> for BallSummary {
    fn from(r: &BallReport) -> Self {
        BallSummary {
            ball_radius: r.ball_radius,
            curvature_tol: r.curvature_tol,
            curvature: (&r.curvature).into(),
            closeness: (&r.closeness).into(),
            certified: r.certified,
        }
    }
}

/// Build the configured metric, forced or not per `verify.force`.
fn subject_metric(config: &Config) -> Result<RadialMetric> {
    let g = build_metric(&config.metric)?;
    if config.verify.force {
        hyperbolic_force(&g, config.force.r0, config.force.d, config.force.xi)
    } else {
        Ok(g)
    }
}

/// Apply the forcing operator and report its structural facts: the zone
/// radii, agreement with the piecewise closed form, and the exact
/// identities below and above the deformation zones.
pub fn run_force(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let g = build_metric(&config.metric)?;
    let r0 = config.force.r0;
    let d = config.force.d;
    let forced = hyperbolic_force(&g, r0, d, config.force.xi)?;

    let rd = r0 - d;
    let grid_step = config.family.grid_step;
    let round = SphereMetric::round(g.sphere_dim())?;

    // Deterministic probe radii covering every zone and its seams.
    let radii = vec![
        rd - 1.0,
        rd,
        rd + 0.25 * d,
        rd + 0.5 * d,
        0.5 * (rd + 0.5 * d + r0),
        r0,
        r0 + 1.0 / 16.0,
        r0 + 0.25,
        r0 + 7.0 / 16.0,
        r0 + 1.0,
        r0 + 2.0,
    ];
    let mut oracle_max = 0.0f64;
    for &r in &radii {
        if r <= 0.0 {
            continue;
        }
        let lazy = forced.cut_at(r)?;
        let oracle = forced_cut_oracle(&g, r0, d, r)?;
        oracle_max = oracle_max.max(lazy.c2_distance(&oracle, grid_step)?);
    }

    let below_round = forced.cut_at((rd - 0.5).max(rd * 0.5))?.c2_distance(&round, grid_step)?;
    let above_input =
        forced.cut_at(r0 + 1.0)?.c2_distance(&g.cut_at(r0 + 1.0)?, grid_step)?;

    #[derive(Serialize)]
    struct ForceFacts {
        r0: f64,
        d: f64,
        chart_excess: f64,
        forced_r_min: f64,
        glue_zone: (f64, f64),
        frozen_zone: (f64, f64),
        warp_zone: (f64, f64),
        probe_radii: Vec<f64>,
        oracle_max_distance: f64,
        below_zone_round_distance: f64,
        above_zone_input_distance: f64,
    }
    let facts = ForceFacts {
        r0,
        d,
        chart_excess: config.force.xi,
        forced_r_min: forced.r_min(),
        glue_zone: (rd, rd + 0.5 * d),
        frozen_zone: (rd + 0.5 * d, r0 + 1.0 / 16.0),
        warp_zone: (r0 + 1.0 / 16.0, r0 + 7.0 / 16.0),
        probe_radii: radii,
        oracle_max_distance: oracle_max,
        below_zone_round_distance: below_round,
        above_zone_input_distance: above_input,
    };
    let pass = oracle_max == 0.0 && below_round == 0.0 && above_input == 0.0;
    let path = write_report(out_dir, "force.json", config, &facts)?;
    Ok(RunOutcome {
        pass,
        summary: format!(
            "force: oracle distance {oracle_max:e}, round below {below_round:e}, input above {above_input:e}"
        ),
        files: vec![path],
    })
}

/// Certify closeness of the configured metric (optionally after forcing):
/// either plain chart closeness over the offset window or, when
/// `verify.ball_radius` is set, curvature inside the ball plus chart
/// closeness beyond it.
pub fn run_verify(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let g = subject_metric(config)?;
    let v = &config.verify;
    let sampling = config.sampling.tube_sampling();
    let opts = config.sampling.chart_opts();

    match v.ball_radius {
        Some(ball) => {
            let report = check_ball_close(
                &g,
                ball,
                v.offset_hi,
                v.eps,
                v.curvature_tol,
                config.force.xi,
                &sampling,
                &opts,
                &config.sampling.curvature_opts(),
            )?;
            let summary: BallSummary = (&report).into();
            let path = write_report(out_dir, "verify.json", config, &summary)?;
            Ok(RunOutcome {
                pass: report.certified,
                summary: format!(
                    "verify: ball to {ball}: curvature dev {:.3e}, chart worst {:.3e} vs eps {:.3e} -> {}",
                    report.curvature.max_deviation,
                    report.closeness.worst,
                    v.eps,
                    if report.certified { "certified" } else { "not certified" }
                ),
                files: vec![path],
            })
        }
        None => {
            let report = check_eps_close(
                &g,
                v.offset_lo,
                v.offset_hi,
                v.eps,
                config.force.xi,
                &sampling,
                &opts,
            )?;
            let summary: ClosenessSummary = (&report).into();
            let path = write_report(out_dir, "verify.json", config, &summary)?;
            Ok(RunOutcome {
                pass: report.certified,
                summary: format!(
                    "verify: worst deviation {:.3e} over {} charts vs eps {:.3e} -> {}",
                    report.worst,
                    report.charts_checked,
                    v.eps,
                    if report.certified { "certified" } else { "not certified" }
                ),
                files: vec![path],
            })
        }
    }
}

/// Sample sectional curvatures over the configured radius window and,
/// on surfaces, cross-check the tensor machinery against the scalar
/// curvature formula.
pub fn run_curvature(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let g = subject_metric(config)?;
    let v = &config.verify;
    let report =
        radial_curvature_check(&g, v.curvature_lo, v.curvature_hi, &config.sampling.curvature_opts())?;

    let mut scalar_max: Option<f64> = None;
    if g.dim() == 2 {
        let point = crate::sphere::SpherePoint {
            chart: 0,
            x: nalgebra::DVector::from_vec(vec![0.3]),
        };
        let mut worst = 0.0f64;
        for i in 0..5 {
            let r = v.curvature_lo + (v.curvature_hi - v.curvature_lo) * i as f64 / 4.0;
            let k = gauss_curvature_scalar(&g, &point, r, config.sampling.fd_step)?;
            worst = worst.max((k + 1.0).abs());
        }
        scalar_max = Some(worst);
    }

    #[derive(Serialize)]
    struct CurvatureRun {
        window: (f64, f64),
        tolerance: f64,
        tensor: CurvatureSummary,
        scalar_max_deviation: Option<f64>,
    }
    let result = CurvatureRun {
        window: (v.curvature_lo, v.curvature_hi),
        tolerance: v.curvature_tol,
        tensor: (&report).into(),
        scalar_max_deviation: scalar_max,
    };
    let pass = report.max_deviation <= v.curvature_tol
        && scalar_max.is_none_or(|s| s <= v.curvature_tol);
    let path = write_report(out_dir, "curvature.json", config, &result)?;
    Ok(RunOutcome {
        pass,
        summary: format!(
            "curvature: max |K + 1| = {:.3e} over {} samples (tolerance {:.3e}), radial residual {:.3e}",
            report.max_deviation, report.samples, v.curvature_tol, report.radial_residual
        ),
        files: vec![path],
    })
}

/// Force the configured metric at every parameter of the family window and
/// estimate the cut limits at the configured relative offsets.
pub fn run_family(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let fam = &config.family;
    if fam.lambdas.len() < 3 {
        return Err(Error::Config(format!(
            "family needs at least three parameters, got {}",
            fam.lambdas.len()
        )));
    }
    let g = build_metric(&config.metric)?;
    let d = config.force.d;
    let xi = config.force.xi;
    let lambda_min = fam.lambdas[0];
    let dim = g.dim();
    let base = {
        let g = g.clone();
        RadialFamily::new(dim, lambda_min, xi, move |_| Ok(g.clone()))?
    };
    let forced = base.force(d)?;
    let lambda_max = *fam.lambdas.last().expect("nonempty");
    let round = SphereMetric::round(dim - 1)?;

    #[derive(Serialize)]
    struct FamilyRow {
        b: f64,
        deviations: Vec<f64>,
        rate: Option<f64>,
        converged: bool,
        /// Distance from the estimated limit to the closed form assembled
        /// from the largest member's cuts.
        formula_distance: f64,
        /// Distance from the estimated limit to the round cut.
        round_distance: f64,
    }

    let limit_fn = |b: f64| g.cut_at(lambda_max + b);
    let mut rows = Vec::with_capacity(fam.bs.len());
    let mut all_converged = true;
    for &b in &fam.bs {
        let est = estimate_cut_limit(&forced, b, &fam.lambdas, fam.grid_step, fam.tol)?;
        let formula = forced_cut_limit(&limit_fn, d, b)?;
        let formula_distance = est.candidate.c2_distance(&formula, fam.grid_step)?;
        let round_distance = est.candidate.c2_distance(&round, fam.grid_step)?;
        all_converged &= est.converged;
        rows.push(FamilyRow {
            b,
            deviations: est.deviations,
            rate: est.rate,
            converged: est.converged,
            formula_distance,
            round_distance,
        });
    }

    #[derive(Serialize)]
    struct FamilySummary {
        lambdas: Vec<f64>,
        d: f64,
        tol: f64,
        rows: Vec<FamilyRow>,
        all_converged: bool,
    }
    let worst_formula =
        rows.iter().map(|r| r.formula_distance).fold(0.0f64, f64::max);
    let result = FamilySummary {
        lambdas: fam.lambdas.clone(),
        d,
        tol: fam.tol,
        rows,
        all_converged,
    };
    let path = write_report(out_dir, "family.json", config, &result)?;
    Ok(RunOutcome {
        pass: all_converged,
        summary: format!(
            "family: {} offsets, converged = {all_converged}, worst formula distance {worst_formula:e}",
            fam.bs.len()
        ),
        files: vec![path],
    })
}

/// One line of the sweep output.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub xi: f64,
    pub r0: f64,
    pub d: f64,
    pub eps_in: f64,
    pub eta_measured: f64,
    pub eta_bound: f64,
    pub pass: bool,
}

/// Render sweep rows with the pinned header and deterministic formatting.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n, xi, r0, d, eps_in, eta_measured, eta_bound, pass\n");
    for r in rows {
        out.push_str(&format!(
            "{}, {}, {}, {}, {:.9e}, {:.9e}, {:.9e}, {}\n",
            r.n, r.xi, r.r0, r.d, r.eps_in, r.eta_measured, r.eta_bound, r.pass
        ));
    }
    out
}

/// Worst chart deviation of `g` over the given offsets, max over the
/// seeded base points.
fn worst_deviation(
    g: &RadialMetric,
    offsets: &[f64],
    chart_excess: f64,
    config: &Config,
) -> Result<f64> {
    let sampling = config.sampling.tube_sampling();
    let opts = config.sampling.chart_opts();
    let atlas = SphereAtlas::new(g.sphere_dim())?;
    let bases = sample_base_points(&atlas, sampling.base_points, sampling.seed)?;
    let mut worst = 0.0f64;
    for &offset in offsets {
        for base in &bases {
            let chart = build_radial_chart(g, base.clone(), offset, chart_excess)?;
            worst = worst.max(chart_deviation(g, &chart, &sampling, &opts)?.deviation);
        }
    }
    Ok(worst)
}

/// Sweep the forcing parameters over the configured grid: for each cell,
/// measure the input's closeness, force it, measure the result over
/// offsets covering the deformation zones, and compare against the
/// closed-form bound. Writes both a JSON report and the CSV table.
pub fn run_sweep(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let sweep = &config.sweep;
    if sweep.dims.is_empty() || sweep.xis.is_empty() || sweep.r0s.is_empty() || sweep.ds.is_empty()
    {
        return Err(Error::Config("sweep grid has an empty axis".into()));
    }

    let mut rows = Vec::new();
    for &n in &sweep.dims {
        let metric_cfg = crate::config::MetricConfig {
            dim: n,
            poly: default_poly_for_dim(n, &config.metric),
            ..config.metric.clone()
        };
        let g = build_metric(&metric_cfg)?;
        for &xi in &sweep.xis {
            for &r0 in &sweep.r0s {
                for &d in &sweep.ds {
                    let rd = r0 - d;
                    // Offsets pinned to the zone layout: bottom seam,
                    // inside the gluing ramp, its top, the warp seam, and
                    // clear of the zones.
                    let offsets =
                        [rd, rd + 0.25 * d, rd + 0.5 * d, r0, r0 + 1.0];
                    let lowest = offsets[0] - (1.0 + xi);
                    if !(lowest > g.r_min()) {
                        return Err(Error::Constraint(format!(
                            "sweep cell (n = {n}, xi = {xi}, r0 = {r0}, d = {d}): charts at offset {} \
                             need radii below r_min = {}",
                            offsets[0],
                            g.r_min()
                        )));
                    }
                    let eps_in = worst_deviation(&g, &offsets, xi, config)?;
                    let forced = hyperbolic_force(&g, r0, d, xi)?;
                    let eta_measured = worst_deviation(&forced, &offsets, xi, config)?;
                    let eta_bound =
                        forcing_bound_value(xi, r0, d, eps_in, config.bounds.c_input)?.total;
                    rows.push(SweepRow {
                        n,
                        xi,
                        r0,
                        d,
                        eps_in,
                        eta_measured,
                        eta_bound,
                        pass: eta_measured <= eta_bound,
                    });
                }
            }
        }
    }

    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("sweep.csv");
    std::fs::write(&csv_path, sweep_csv(&rows))?;

    #[derive(Serialize)]
    struct SweepSummary {
        rows: Vec<SweepRow>,
        all_pass: bool,
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let result = SweepSummary { rows, all_pass };
    let json_path = write_report(out_dir, "sweep.json", config, &result)?;
    Ok(RunOutcome {
        pass: all_pass,
        summary: format!(
            "sweep: {} cells, all within bound = {all_pass}",
            result.rows.len()
        ),
        files: vec![csv_path, json_path],
    })
}

/// The default polynomial follows the configured dimension; an explicitly
/// configured polynomial of the right arity is kept.
fn default_poly_for_dim(
    dim: usize,
    metric: &crate::config::MetricConfig,
) -> Vec<crate::config::PolyTerm> {
    if metric.poly.iter().all(|t| t.powers.len() == dim) {
        return metric.poly.clone();
    }
    let mut powers = vec![0u32; dim];
    powers[0] = 2;
    vec![crate::config::PolyTerm { coeff: 1.0, powers }]
}

/// Evaluate the closed-form bounds for the configured parameters.
pub fn run_bounds(config: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let f = &config.force;
    let b = &config.bounds;

    let c2 = closeness_constant(f.xi)?;
    let warp = warp_forcing_bound(f.r0, f.xi, b.eps_in)?;
    let trick = warping_trick_bound(b.c_input, f.r0 - f.d, f.d)?;
    let strict = forcing_bound(b.c, config.metric.dim, f.xi, f.r0, f.d, b.eps_in, b.c_input)?;
    let value = forcing_bound_value(f.xi, f.r0, f.d, b.eps_in, b.c_input)?;
    let schedule = schedule_for_target(b.eps_target, f.xi, b.eps_in, b.c_input)?;

    #[derive(Serialize)]
    struct BoundsSummary {
        closeness_constant: f64,
        warp_forcing_bound: f64,
        warping_trick_bound: f64,
        forcing: TermsSummary,
        schedule_d: f64,
        schedule_r0_min: f64,
        schedule_projected: TermsSummary,
    }
    #[derive(Serialize)]
    struct TermsSummary {
        c1: f64,
        c2: f64,
        seam_term: f64,
        tail_term: f64,
        input_term: f64,
        total: f64,
    }
    impl From<crate::verify::ForcingBound> for TermsSummary {
        fn from(fb: crate::verify::ForcingBound) -> Self {
            TermsSummary {
                c1: fb.c1,
                c2: fb.c2,
                seam_term: fb.seam_term,
                tail_term: fb.tail_term,
                input_term: fb.input_term,
                total: fb.total,
            }
        }
    }
    debug_assert_eq!(strict.total, value.total);
    let result = BoundsSummary {
        closeness_constant: c2,
        warp_forcing_bound: warp,
        warping_trick_bound: trick,
        forcing: strict.into(),
        schedule_d: schedule.d,
        schedule_r0_min: schedule.r0_min,
        schedule_projected: schedule.projected.into(),
    };
    let path = write_report(out_dir, "bounds.json", config, &result)?;
    Ok(RunOutcome {
        pass: true,
        summary: format!(
            "bounds: forcing total {:.6e} (seam {:.3e}, tail {:.3e}, input {:.3e}); schedule d = {:.3e}, r0 >= {:.3e}",
            value.total, value.seam_term, value.tail_term, value.input_term, schedule.d, schedule.r0_min
        ),
        files: vec![path],
    })
}

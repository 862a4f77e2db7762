//! Run configuration: a TOML schema covering the metric under study, the
//! forcing parameters, verification tolerances, sampling budgets, sweep
//! grids, and bound constants. Every section has defaults, so a partial
//! (or empty) file is a valid configuration; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialMetric;
use crate::sphere::{Poly, SphereMetric};

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub metric: MetricConfig,
    pub force: ForceConfig,
    pub verify: VerifyConfig,
    pub sampling: SamplingConfig,
    pub sweep: SweepConfig,
    pub family: FamilyConfig,
    pub bounds: BoundsConfig,
    pub output: OutputConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad configuration: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read configuration {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }
}

/// Which radial metric to build and how strongly to perturb it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    /// Manifold dimension n; the spheres have dimension n - 1.
    pub dim: usize,
    pub r_min: f64,
    pub kind: MetricKind,
    /// Peak strength of the perturbation; ignored for `hyperbolic`.
    pub amplitude: f64,
    /// Radial envelope of the perturbation: a Gaussian bump
    /// `exp(-((r - center) / width)^2)`.
    pub profile: ProfileConfig,
    /// Polynomial in the ambient sphere coordinates shaping the
    /// perturbation across the sphere.
    pub poly: Vec<PolyTerm>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            dim: 3,
            r_min: 0.0,
            kind: MetricKind::Hyperbolic,
            amplitude: 0.01,
            profile: ProfileConfig::default(),
            poly: vec![PolyTerm { coeff: 1.0, powers: vec![2, 0, 0] }],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `sinh^2(r) round + dr^2`, unperturbed.
    Hyperbolic,
    /// Cuts are conformal perturbations of round: `(1 + a(r) P) round`.
    Conformal,
    /// Cuts gain a rank-one gradient term: `round + a(r) dP (x) dP`.
    Gradient,
    /// Cuts are scaled round: `(1 + a(r)) round`.
    Scaled,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub center: f64,
    pub width: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { center: 6.0, width: 1.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Parameters of the hyperbolic forcing operator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ForceConfig {
    pub r0: f64,
    pub d: f64,
    /// Chart excess xi: tubes have half-width 1 + xi.
    pub xi: f64,
}

impl Default for ForceConfig {
    fn default() -> Self {
        ForceConfig { r0: 12.0, d: 4.0, xi: 0.0 }
    }
}

/// Verification targets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Closeness bound the chart deviations are certified against.
    pub eps: f64,
    /// Largest tolerated |K + 1| in curvature checks.
    pub curvature_tol: f64,
    /// Chart offset window for closeness checks.
    pub offset_lo: f64,
    pub offset_hi: f64,
    /// When set, run the two-part check instead: hyperbolic up to this
    /// radius, chart-close beyond it.
    pub ball_radius: Option<f64>,
    /// Verify the forced metric instead of the input metric.
    pub force: bool,
    /// Radius window for the standalone curvature command.
    pub curvature_lo: f64,
    pub curvature_hi: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            eps: 0.05,
            curvature_tol: 1e-4,
            offset_lo: 12.0,
            offset_hi: 13.0,
            ball_radius: None,
            force: false,
            curvature_lo: 1.0,
            curvature_hi: 4.0,
        }
    }
}

/// Sampling budgets for lattice measurements and curvature checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub tube_points: usize,
    pub base_points: usize,
    pub offsets_per_unit: f64,
    pub grid_scale: f64,
    pub seed: u64,
    pub ode_step: f64,
    pub jet_step: f64,
    pub richardson_tol: f64,
    pub radial_samples: usize,
    pub curvature_points: usize,
    pub planes_per_point: usize,
    pub fd_step: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            tube_points: 17,
            base_points: 16,
            offsets_per_unit: 8.0,
            grid_scale: 1.0,
            seed: 7,
            ode_step: 1e-3,
            jet_step: 1e-4,
            richardson_tol: 1e-7,
            radial_samples: 9,
            curvature_points: 4,
            planes_per_point: 4,
            fd_step: 1e-3,
        }
    }
}

impl SamplingConfig {
    pub fn tube_sampling(&self) -> crate::verify::TubeSampling {
        crate::verify::TubeSampling {
            tube_points: self.tube_points,
            base_points: self.base_points,
            offsets_per_unit: self.offsets_per_unit,
            grid_scale: self.grid_scale,
            seed: self.seed,
        }
    }

    pub fn chart_opts(&self) -> crate::verify::ChartOpts {
        crate::verify::ChartOpts {
            ode_step: self.ode_step,
            jet_step: self.jet_step,
            richardson_tol: self.richardson_tol,
        }
    }

    pub fn curvature_opts(&self) -> crate::verify::CurvatureOpts {
        crate::verify::CurvatureOpts {
            radial_samples: self.radial_samples,
            base_points: self.curvature_points,
            planes_per_point: self.planes_per_point,
            fd_step: self.fd_step,
            seed: self.seed,
        }
    }
}

/// Grid for the parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub xis: Vec<f64>,
    pub r0s: Vec<f64>,
    pub ds: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { dims: vec![2], xis: vec![0.0], r0s: vec![12.0, 16.0], ds: vec![4.0, 8.0] }
    }
}

/// Sampling of the forced parameter family.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    /// Parameters at which members are built; the largest stands in for
    /// the limit.
    pub lambdas: Vec<f64>,
    /// Relative offsets at which cut limits are estimated.
    pub bs: Vec<f64>,
    /// Convergence tolerance for the limit estimates.
    pub tol: f64,
    /// Lattice step for cut comparisons.
    pub grid_step: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            lambdas: vec![12.0, 13.0, 14.0, 16.0],
            bs: vec![-5.0, -4.5, -3.0, -2.25, 0.0, 0.25, 1.0],
            tol: 0.02,
            grid_step: 0.25,
        }
    }
}

/// Constants entering the closed-form bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Input-dependent constant of the gluing estimates. There is no
    /// universal default that is honest for every input, so runs that use
    /// bounds should set it deliberately.
    pub c_input: f64,
    /// Geometry bound claimed for the input metric, for the strict bound.
    pub c: f64,
    /// Input closeness fed to the bound arithmetic.
    pub eps_in: f64,
    /// Target for the gluing schedule.
    pub eps_target: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { c_input: 1000.0, c: 2.0, eps_in: 0.01, eps_target: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

/// Gaussian radial envelope used by the perturbed metric kinds.
pub fn envelope(profile: &ProfileConfig, r: f64) -> f64 {
    let u = (r - profile.center) / profile.width;
    (-u * u).exp()
}

/// Build the configured radial metric.
pub fn build_metric(cfg: &MetricConfig) -> Result<RadialMetric> {
    if cfg.dim < 2 {
        return Err(Error::Config(format!("metric dim must be at least 2, got {}", cfg.dim)));
    }
    if !(cfg.r_min >= 0.0) || !cfg.r_min.is_finite() {
        return Err(Error::Config(format!("metric r_min must be nonnegative, got {}", cfg.r_min)));
    }
    if !(cfg.profile.width > 0.0) {
        return Err(Error::Config(format!("profile width must be positive, got {}", cfg.profile.width)));
    }
    if !cfg.amplitude.is_finite() {
        return Err(Error::Config(format!("amplitude must be finite, got {}", cfg.amplitude)));
    }
    if matches!(cfg.kind, MetricKind::Hyperbolic) {
        return RadialMetric::hyperbolic(cfg.dim, cfg.r_min);
    }

    let round = SphereMetric::round(cfg.dim - 1)?;
    let profile = cfg.profile;
    let amplitude = cfg.amplitude;

    match cfg.kind {
        MetricKind::Hyperbolic => unreachable!("handled above"),
        MetricKind::Scaled => {
            if cfg.amplitude.abs() >= 1.0 {
                return Err(Error::Config(format!(
                    "scaled metric needs |amplitude| < 1, got {}",
                    cfg.amplitude
                )));
            }
            RadialMetric::from_cut_curve(cfg.dim, cfg.r_min, move |r| {
                round
                    .scale(1.0 + amplitude * envelope(&profile, r))
                    .expect("scale factor stays positive for |amplitude| < 1")
            })
        }
        MetricKind::Conformal | MetricKind::Gradient => {
            let terms: Vec<(f64, Vec<u32>)> = cfg
                .poly
                .iter()
                .map(|t| {
                    if t.powers.len() != cfg.dim {
                        return Err(Error::Config(format!(
                            "poly term needs {} powers (ambient sphere coordinates), got {}",
                            cfg.dim,
                            t.powers.len()
                        )));
                    }
                    Ok((t.coeff, t.powers.clone()))
                })
                .collect::<Result<_>>()?;
            let poly = Poly::new(terms)?;
            let conformal = matches!(cfg.kind, MetricKind::Conformal);
            // The perturbation is validated once at peak strength; the
            // envelope only shrinks it, which preserves positivity.
            let probe = if conformal {
                round.conformal_poly(amplitude, poly.clone())
            } else {
                round.grad_poly(amplitude, poly.clone())
            };
            probe.map_err(|e| Error::Config(format!("perturbation rejected at peak strength: {e}")))?;
            RadialMetric::from_cut_curve(cfg.dim, cfg.r_min, move |r| {
                let a = amplitude * envelope(&profile, r);
                let result = if conformal {
                    round.conformal_poly(a, poly.clone())
                } else {
                    round.grad_poly(a, poly.clone())
                };
                result.expect("perturbation validated at peak strength")
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let config = Config::default();
        let text = config.to_toml().unwrap();
        let back = Config::from_toml(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn empty_and_partial_configs_parse() {
        let empty = Config::from_toml("").unwrap();
        assert_eq!(empty, Config::default());

        let partial = Config::from_toml(
            "[force]\nr0 = 20.0\n\n[metric]\nkind = \"conformal\"\namplitude = 0.002\n",
        )
        .unwrap();
        assert_eq!(partial.force.r0, 20.0);
        assert_eq!(partial.force.d, 4.0);
        assert_eq!(partial.metric.kind, MetricKind::Conformal);
        assert_eq!(partial.metric.amplitude, 0.002);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml("[force]\nradius = 3.0\n").is_err());
        assert!(Config::from_toml("[typo]\nx = 1\n").is_err());
    }

    #[test]
    fn hyperbolic_build_is_structural() {
        let metric = build_metric(&MetricConfig::default()).unwrap();
        assert!(metric.is_structurally_warped());
        assert_eq!(metric.dim(), 3);
    }

    #[test]
    fn perturbed_kinds_build_and_deviate() {
        for kind in [MetricKind::Conformal, MetricKind::Gradient, MetricKind::Scaled] {
            let cfg = MetricConfig { kind, amplitude: 0.05, ..MetricConfig::default() };
            let g = build_metric(&cfg).unwrap();
            // At the profile center the cut differs from round; far away
            // it is round to within the Gaussian tail.
            let round = SphereMetric::round(2).unwrap();
            let at_center = g.cut_at(6.0).unwrap().c2_distance(&round, 0.5).unwrap();
            let far = g.cut_at(30.0).unwrap().c2_distance(&round, 0.5).unwrap();
            assert!(at_center > 1e-4, "{kind:?}: center deviation {at_center}");
            assert!(far < 1e-10, "{kind:?}: far deviation {far}");
        }
    }

    #[test]
    fn bad_metric_configs_are_refused() {
        let mut cfg = MetricConfig { kind: MetricKind::Scaled, amplitude: 1.5, ..Default::default() };
        assert!(build_metric(&cfg).is_err());
        cfg = MetricConfig { dim: 1, ..Default::default() };
        assert!(build_metric(&cfg).is_err());
        cfg = MetricConfig { profile: ProfileConfig { center: 6.0, width: 0.0 }, ..Default::default() };
        cfg.kind = MetricKind::Conformal;
        assert!(build_metric(&cfg).is_err());
        // Power list of the wrong length.
        cfg = MetricConfig {
            kind: MetricKind::Conformal,
            poly: vec![PolyTerm { coeff: 1.0, powers: vec![2, 0] }],
            ..Default::default()
        };
        assert!(build_metric(&cfg).is_err());
        // Perturbation too strong to stay positive definite.
        cfg = MetricConfig { kind: MetricKind::Conformal, amplitude: -5.0, ..Default::default() };
        assert!(build_metric(&cfg).is_err());
    }

    #[test]
    fn envelope_peaks_at_center() {
        let p = ProfileConfig { center: 6.0, width: 2.0 };
        assert_eq!(envelope(&p, 6.0), 1.0);
        assert!(envelope(&p, 8.0) < 0.5);
        assert!(envelope(&p, 4.0) == envelope(&p, 8.0));
    }
}

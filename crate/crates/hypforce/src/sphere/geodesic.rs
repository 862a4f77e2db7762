//! Geodesics of sphere metrics, with endpoint Jacobians.
//!
//! The exponential map is integrated with fixed-step RK4 on the system
//! `x' = v`, `v'^k = -Gamma^k_ij v^i v^j`, with Christoffel symbols
//! evaluated on the fly from finite-difference jets of the metric
//! components. When a trajectory leaves the switch radius of its chart it
//! hops to the other chart of the atlas, transporting position, velocity,
//! and any variational state through the transition map.
//!
//! Endpoint Jacobians are *not* taken by differencing whole shoots; they
//! are integrated alongside the geodesic as the variational system
//! `M' = W`, `W'^k_c = -d_a Gamma^k_ij M^a_c v^i v^j - 2 Gamma^k_ij W^i_c v^j`,
//! which keeps their accuracy at the integrator's level instead of the
//! much worse difference-quotient level. This matters downstream: chart
//! deviation measurements resolve signals around 1e-8.

use nalgebra::{DMatrix, DVector};

use crate::curvature::{christoffels_with_derivatives, metric_jet};
use crate::error::{Error, Result};
use crate::sphere::{SphereMetric, SpherePoint};

/// Integration controls for [`exp_map`] and [`exp_map_with_jacobian`].
#[derive(Debug, Clone, Copy)]
pub struct GeodesicOpts {
    /// RK4 step in geodesic parameter time (the shoot always runs to t = 1).
    pub step: f64,
    /// Finite-difference step for metric jets along the way.
    pub jet_step: f64,
}

impl Default for GeodesicOpts {
    fn default() -> Self {
        GeodesicOpts { step: 1e-3, jet_step: 1e-4 }
    }
}

/// Where a shoot ended up.
#[derive(Debug, Clone)]
pub struct ShootResult {
    pub point: SpherePoint,
    /// Final velocity, in the final chart's coordinates.
    pub velocity: DVector<f64>,
    /// `d endpoint / d parameter` for the variational columns that were
    /// seeded, in the final chart's coordinates.
    pub jacobian: Option<DMatrix<f64>>,
}

struct State {
    chart: usize,
    x: DVector<f64>,
    v: DVector<f64>,
    /// Variational position block, one column per seeded parameter.
    m: Option<DMatrix<f64>>,
    /// Variational velocity block.
    w: Option<DMatrix<f64>>,
}

struct Derivative {
    dx: DVector<f64>,
    dv: DVector<f64>,
    dm: Option<DMatrix<f64>>,
    dw: Option<DMatrix<f64>>,
}

fn eval_derivative(metric: &SphereMetric, st: &State, jet_step: f64) -> Result<Derivative> {
    let dim = st.x.len();
    let chart = st.chart;
    let f = |x: &DVector<f64>| metric.components(chart, x);
    let need_variational = st.m.is_some();
    if need_variational {
        let jet = metric_jet(&f, &st.x, jet_step);
        let (gamma, dgamma) = christoffels_with_derivatives(&jet)?;
        let mut dv = DVector::zeros(dim);
        for k in 0..dim {
            let mut acc = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    acc += gamma[k][(i, j)] * st.v[i] * st.v[j];
                }
            }
            dv[k] = -acc;
        }
        let m = st.m.as_ref().unwrap();
        let w = st.w.as_ref().unwrap();
        let cols = m.ncols();
        let mut dw = DMatrix::zeros(dim, cols);
        for c in 0..cols {
            for k in 0..dim {
                let mut acc = 0.0;
                for a in 0..dim {
                    let mut da = 0.0;
                    for i in 0..dim {
                        for j in 0..dim {
                            da += dgamma[a][k][(i, j)] * st.v[i] * st.v[j];
                        }
                    }
                    acc += da * m[(a, c)];
                }
                for i in 0..dim {
                    let mut gi = 0.0;
                    for j in 0..dim {
                        gi += gamma[k][(i, j)] * st.v[j];
                    }
                    acc += 2.0 * gi * w[(i, c)];
                }
                dw[(k, c)] = -acc;
            }
        }
        Ok(Derivative { dx: st.v.clone(), dv, dm: Some(w.clone()), dw: Some(dw) })
    } else {
        // First derivatives of the metric are enough without a variational
        // block; skip the second-derivative samples.
        let g = f(&st.x);
        let mut dg = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut xp = st.x.clone();
            xp[a] += jet_step;
            let mut xm = st.x.clone();
            xm[a] -= jet_step;
            dg.push((f(&xp) - f(&xm)) / (2.0 * jet_step));
        }
        let gamma = crate::curvature::christoffels(&g, &dg)?;
        let mut dv = DVector::zeros(dim);
        for k in 0..dim {
            let mut acc = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    acc += gamma[k][(i, j)] * st.v[i] * st.v[j];
                }
            }
            dv[k] = -acc;
        }
        Ok(Derivative { dx: st.v.clone(), dv, dm: None, dw: None })
    }
}

fn advance(st: &State, d: &Derivative, h: f64) -> State {
    State {
        chart: st.chart,
        x: &st.x + &d.dx * h,
        v: &st.v + &d.dv * h,
        m: st.m.as_ref().map(|m| m + d.dm.as_ref().unwrap() * h),
        w: st.w.as_ref().map(|w| w + d.dw.as_ref().unwrap() * h),
    }
}

fn rk4_step(metric: &SphereMetric, st: &State, h: f64, jet_step: f64) -> Result<State> {
    let k1 = eval_derivative(metric, st, jet_step)?;
    let s2 = advance(st, &k1, 0.5 * h);
    let k2 = eval_derivative(metric, &s2, jet_step)?;
    let s3 = advance(st, &k2, 0.5 * h);
    let k3 = eval_derivative(metric, &s3, jet_step)?;
    let s4 = advance(st, &k3, h);
    let k4 = eval_derivative(metric, &s4, jet_step)?;
    let combine_v = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>| {
        (a + b * 2.0 + c * 2.0 + d) * (h / 6.0)
    };
    let combine_m = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
        (a + b * 2.0 + c * 2.0 + d) * (h / 6.0)
    };
    Ok(State {
        chart: st.chart,
        x: &st.x + combine_v(&k1.dx, &k2.dx, &k3.dx, &k4.dx),
        v: &st.v + combine_v(&k1.dv, &k2.dv, &k3.dv, &k4.dv),
        m: st.m.as_ref().map(|m| {
            m + combine_m(
                k1.dm.as_ref().unwrap(),
                k2.dm.as_ref().unwrap(),
                k3.dm.as_ref().unwrap(),
                k4.dm.as_ref().unwrap(),
            )
        }),
        w: st.w.as_ref().map(|w| {
            w + combine_m(
                k1.dw.as_ref().unwrap(),
                k2.dw.as_ref().unwrap(),
                k3.dw.as_ref().unwrap(),
                k4.dw.as_ref().unwrap(),
            )
        }),
    })
}

fn switch_chart(metric: &SphereMetric, st: State) -> Result<State> {
    let atlas = metric.atlas();
    let (other, xp) = atlas.transition(st.chart, &st.x)?;
    let j = atlas.transition_jacobian(st.chart, &st.x)?;
    let (m, w) = match (&st.m, &st.w) {
        (Some(m), Some(w)) => {
            let a = atlas.transition_hessian_contract(st.chart, &st.x, &st.v)?;
            let new_m = &j * m;
            let new_w = &a * m + &j * w;
            (Some(new_m), Some(new_w))
        }
        _ => (None, None),
    };
    Ok(State { chart: other, x: xp, v: &j * &st.v, m, w })
}

fn integrate(metric: &SphereMetric, start: State, opts: &GeodesicOpts) -> Result<State> {
    if !(opts.step > 0.0) || opts.step > 0.5 {
        return Err(Error::Argument(format!("geodesic step must lie in (0, 0.5], got {}", opts.step)));
    }
    if !(opts.jet_step > 0.0) {
        return Err(Error::Argument("jet step must be positive".into()));
    }
    let atlas = metric.atlas();
    let n_steps = (1.0 / opts.step).ceil() as usize;
    let h = 1.0 / n_steps as f64;
    let mut st = start;
    let mut time = 0.0;
    for _ in 0..n_steps {
        st = rk4_step(metric, &st, h, opts.jet_step)?;
        time += h;
        let r = st.x.norm();
        if r > atlas.switch_radius() {
            st = switch_chart(metric, st).map_err(|_| Error::GeodesicEscape { time })?;
        }
        if st.x.norm() >= atlas.chart_extent() {
            return Err(Error::GeodesicEscape { time });
        }
    }
    Ok(st)
}

/// Integrate the unit-time geodesic of `metric` from `base` with initial
/// velocity `v0` (chart coordinates of `base.chart`).
pub fn exp_map(
    metric: &SphereMetric,
    base: &SpherePoint,
    v0: &DVector<f64>,
    opts: &GeodesicOpts,
) -> Result<ShootResult> {
    shoot(metric, base, v0, None, opts)
}

/// Like [`exp_map`], but also integrates the variational system seeded with
/// `w0`: column `c` of the returned Jacobian is the derivative of the
/// endpoint with respect to a parameter that perturbs the initial velocity
/// by the column `w0[:, c]` (initial position held fixed).
pub fn exp_map_with_jacobian(
    metric: &SphereMetric,
    base: &SpherePoint,
    v0: &DVector<f64>,
    w0: &DMatrix<f64>,
    opts: &GeodesicOpts,
) -> Result<ShootResult> {
    shoot(metric, base, v0, Some(w0.clone()), opts)
}

fn shoot(
    metric: &SphereMetric,
    base: &SpherePoint,
    v0: &DVector<f64>,
    w0: Option<DMatrix<f64>>,
    opts: &GeodesicOpts,
) -> Result<ShootResult> {
    let dim = metric.dim();
    if base.x.len() != dim || v0.len() != dim {
        return Err(Error::Dimension { expected: dim, got: base.x.len().max(v0.len()) });
    }
    if base.chart >= 2 {
        return Err(Error::Argument(format!("chart index {} out of range", base.chart)));
    }
    if !metric.atlas().contains(&base.x) {
        return Err(Error::Domain("geodesic base point lies outside its chart".into()));
    }
    let (m, w) = match w0 {
        Some(w0) => {
            if w0.nrows() != dim {
                return Err(Error::Dimension { expected: dim, got: w0.nrows() });
            }
            (Some(DMatrix::zeros(dim, w0.ncols())), Some(w0))
        }
        None => (None, None),
    };
    let st = integrate(
        metric,
        State { chart: base.chart, x: base.x.clone(), v: v0.clone(), m, w },
        opts,
    )?;
    Ok(ShootResult {
        point: SpherePoint { chart: st.chart, x: st.x },
        velocity: st.v,
        jacobian: st.m,
    })
}

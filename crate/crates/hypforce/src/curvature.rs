//! Curvature from sampled metric components, in any dimension.
//!
//! Everything here works on a plain component closure `x -> g(x)` in a
//! single coordinate chart. Derivatives of the metric are taken by central
//! differences (a "jet" of g at a point), Christoffel symbols and their
//! first derivatives follow algebraically, and sectional curvature comes
//! from the curvature tensor
//! `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`
//! with the sign convention that makes the unit round sphere have K = +1.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Metric value and its first and second derivatives at a point.
pub struct MetricJet {
    pub g: DMatrix<f64>,
    /// `dg[a]` is the entrywise derivative of g along axis `a`.
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[a][b]` (stored for all pairs, symmetric in a, b).
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

/// Sample the metric jet at `x` with finite-difference step `h`.
///
/// Costs `1 + 2 dim + 2 dim (dim - 1)` component evaluations: pure second
/// derivatives reuse the first-derivative samples, mixed ones use the
/// four-point cross stencil.
pub fn metric_jet(f: &dyn Fn(&DVector<f64>) -> DMatrix<f64>, x: &DVector<f64>, h: f64) -> MetricJet {
    let dim = x.len();
    let g = f(x);
    let mut plus = Vec::with_capacity(dim);
    let mut minus = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut xp = x.clone();
        xp[a] += h;
        plus.push(f(&xp));
        let mut xm = x.clone();
        xm[a] -= h;
        minus.push(f(&xm));
    }
    let dg: Vec<DMatrix<f64>> = (0..dim).map(|a| (&plus[a] - &minus[a]) / (2.0 * h)).collect();
    let mut ddg = vec![vec![DMatrix::zeros(g.nrows(), g.ncols()); dim]; dim];
    for a in 0..dim {
        ddg[a][a] = (&plus[a] + &minus[a] - g.scale(2.0)) / (h * h);
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut xpp = x.clone();
            xpp[a] += h;
            xpp[b] += h;
            let mut xpm = x.clone();
            xpm[a] += h;
            xpm[b] -= h;
            let mut xmp = x.clone();
            xmp[a] -= h;
            xmp[b] += h;
            let mut xmm = x.clone();
            xmm[a] -= h;
            xmm[b] -= h;
            let mixed = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
            ddg[a][b] = mixed.clone();
            ddg[b][a] = mixed;
        }
    }
    MetricJet { g, dg, ddg }
}

/// Fourth-order variant of [`metric_jet`], five-point stencils on every
/// axis and the 16-point tensor-product cross stencil for mixed seconds.
/// Costs `1 + 4 dim + 8 dim (dim - 1)` evaluations; used where accuracy
/// matters more than evaluation count (curvature, not geodesic steps).
pub fn metric_jet4(
    f: &dyn Fn(&DVector<f64>) -> DMatrix<f64>,
    x: &DVector<f64>,
    h: f64,
) -> MetricJet {
    let dim = x.len();
    let g = f(x);
    let at = |offsets: &[(usize, f64)]| {
        let mut y = x.clone();
        for &(a, s) in offsets {
            y[a] += s * h;
        }
        f(&y)
    };
    let mut dg = Vec::with_capacity(dim);
    let mut ddg = vec![vec![DMatrix::zeros(g.nrows(), g.ncols()); dim]; dim];
    for a in 0..dim {
        let p1 = at(&[(a, 1.0)]);
        let p2 = at(&[(a, 2.0)]);
        let m1 = at(&[(a, -1.0)]);
        let m2 = at(&[(a, -2.0)]);
        dg.push((&m2 - &p2 + (&p1 - &m1).scale(8.0)) / (12.0 * h));
        ddg[a][a] =
            (-&p2 - &m2 + (&p1 + &m1).scale(16.0) - g.scale(30.0)) / (12.0 * h * h);
    }
    // Weights of the fourth-order first-derivative stencil, per offset.
    let w = [(2.0, -1.0 / 12.0), (1.0, 2.0 / 3.0), (-1.0, -2.0 / 3.0), (-2.0, 1.0 / 12.0)];
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut mixed = DMatrix::zeros(g.nrows(), g.ncols());
            for &(s, ws) in &w {
                for &(t, wt) in &w {
                    mixed += at(&[(a, s), (b, t)]).scale(ws * wt);
                }
            }
            mixed /= h * h;
            ddg[a][b] = mixed.clone();
            ddg[b][a] = mixed;
        }
    }
    MetricJet { g, dg, ddg }
}

/// Christoffel symbols from a metric value and first derivatives:
/// `out[k][(i,j)] = Gamma^k_ij`.
pub fn christoffels(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let dim = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidMetric("metric not invertible at sample point".into()))?;
    let mut out = vec![DMatrix::zeros(dim, dim); dim];
    for k in 0..dim {
        for i in 0..dim {
            for j in i..dim {
                let mut v = 0.0;
                for l in 0..dim {
                    v += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let v = 0.5 * v;
                out[k][(i, j)] = v;
                out[k][(j, i)] = v;
            }
        }
    }
    Ok(out)
}

/// Christoffel symbols and their first derivatives from a full jet:
/// returns `(gamma, dgamma)` with `dgamma[a][k][(i,j)] = d_a Gamma^k_ij`.
pub fn christoffels_with_derivatives(
    jet: &MetricJet,
) -> Result<(Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)> {
    let dim = jet.g.nrows();
    let ginv = jet
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidMetric("metric not invertible at sample point".into()))?;
    let gamma = christoffels(&jet.g, &jet.dg)?;
    // d_a g^{-1} = -g^{-1} (d_a g) g^{-1}
    let dginv: Vec<DMatrix<f64>> =
        (0..dim).map(|a| -(&ginv * &jet.dg[a] * &ginv)).collect();
    let mut dgamma = vec![vec![DMatrix::zeros(dim, dim); dim]; dim];
    for a in 0..dim {
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let mut v = 0.0;
                    for l in 0..dim {
                        v += dginv[a][(k, l)]
                            * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                        v += ginv[(k, l)]
                            * (jet.ddg[a][i][(j, l)] + jet.ddg[a][j][(i, l)]
                                - jet.ddg[a][l][(i, j)]);
                    }
                    let v = 0.5 * v;
                    dgamma[a][k][(i, j)] = v;
                    dgamma[a][k][(j, i)] = v;
                }
            }
        }
    }
    Ok((gamma, dgamma))
}

/// Sectional curvature of the plane spanned by `u`, `v` at `x`.
///
/// Errors if the plane is degenerate (angle deficit below 1e-8 of the norm
/// product) or the metric fails to invert.
pub fn sectional_curvature(
    f: &dyn Fn(&DVector<f64>) -> DMatrix<f64>,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    let dim = x.len();
    if u.len() != dim || v.len() != dim {
        return Err(Error::Dimension { expected: dim, got: u.len().max(v.len()) });
    }
    let jet = metric_jet4(f, x, h);
    let (gamma, dgamma) = christoffels_with_derivatives(&jet)?;
    let g = &jet.g;

    // R(u, v) v, assembled as
    // R^l_{kij} u^i v^j v^k
    //   = u^i v^j v^k (d_i Gamma^l_jk - d_j Gamma^l_ik
    //                  + Gamma^m_jk Gamma^l_im - Gamma^m_ik Gamma^l_jm).
    let mut w = DVector::zeros(dim);
    for l in 0..dim {
        let mut acc = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let uv = u[i] * v[j];
                if uv == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    let mut r = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                    for m in 0..dim {
                        r += gamma[m][(j, k)] * gamma[l][(i, m)]
                            - gamma[m][(i, k)] * gamma[l][(j, m)];
                    }
                    acc += uv * v[k] * r;
                }
            }
        }
        w[l] = acc;
    }

    let gu = g * u;
    let gv = g * v;
    let num = u.dot(&(g * &w));
    let uu = u.dot(&gu);
    let vv = v.dot(&gv);
    let uv = u.dot(&gv);
    let den = uu * vv - uv * uv;
    if den.abs() < 1e-8 * (uu * vv).abs().max(1e-300) {
        return Err(Error::Argument("sectional plane is degenerate".into()));
    }
    Ok(num / den)
}

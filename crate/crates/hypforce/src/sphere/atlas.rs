//! A fixed two-chart atlas for the sphere S^m.
//!
//! For m >= 2 the charts are the two antipodal stereographic
//! parametrizations, each truncated to the open ball of radius 2; chart 0
//! is centered on the south pole, chart 1 on the north pole, and the
//! transition is the inversion `x -> x / |x|^2` on the annulus
//! `1/2 < |x| < 2`. Points with `|x| <= 1` are "preferred" in their chart;
//! every point of the sphere is preferred in at least one chart.
//!
//! For m = 1 the charts are two arclength intervals `(-3pi/4, 3pi/4)`, the
//! second rotated by pi, with transition `x -> x -+ pi`.
//!
//! All metric components in this crate are expressed in these coordinates,
//! so the atlas also provides the derivatives of the transition map needed
//! to carry tangent vectors and variational states across a chart switch,
//! and the embedding into R^{m+1} used by ambient-polynomial perturbations.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of S^m addressed by chart index and chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub chart: usize,
    pub x: DVector<f64>,
}

/// The two-chart atlas of S^m; `dim` is the sphere dimension m >= 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereAtlas {
    dim: usize,
}

impl SphereAtlas {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("sphere dimension must be at least 1".into()));
        }
        Ok(SphereAtlas { dim })
    }

    /// Sphere dimension m.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_charts(&self) -> usize {
        2
    }

    /// Radius of each chart's coordinate domain.
    pub fn chart_extent(&self) -> f64 {
        if self.dim == 1 {
            0.75 * PI
        } else {
            2.0
        }
    }

    /// Radius of the region a chart covers better than the other one.
    pub fn preferred_radius(&self) -> f64 {
        if self.dim == 1 {
            0.5 * PI
        } else {
            1.0
        }
    }

    /// Radius beyond which integrators should hop to the other chart; lies
    /// strictly between the preferred radius and the chart extent, and maps
    /// into the preferred region of the other chart.
    pub fn switch_radius(&self) -> f64 {
        if self.dim == 1 {
            0.5 * PI + 0.2
        } else {
            1.25
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && x.norm() < self.chart_extent()
    }

    fn check_chart(&self, chart: usize) -> Result<()> {
        if chart >= 2 {
            return Err(Error::Argument(format!("chart index {chart} out of range (atlas has 2)")));
        }
        Ok(())
    }

    fn check_coords(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Embed chart coordinates into the unit sphere in R^{m+1}.
    pub fn embed(&self, chart: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        if self.dim == 1 {
            let theta = if chart == 0 { x[0] } else { x[0] + PI };
            return Ok(DVector::from_column_slice(&[theta.cos(), theta.sin()]));
        }
        let s = x.norm_squared();
        let u = 1.0 + s;
        let mut y = DVector::zeros(self.dim + 1);
        for i in 0..self.dim {
            y[i] = 2.0 * x[i] / u;
        }
        y[self.dim] = if chart == 0 { (s - 1.0) / u } else { (1.0 - s) / u };
        Ok(y)
    }

    /// Jacobian of [`Self::embed`]: an (m+1) x m matrix.
    pub fn ambient_jacobian(&self, chart: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        if self.dim == 1 {
            let theta = if chart == 0 { x[0] } else { x[0] + PI };
            return Ok(DMatrix::from_column_slice(2, 1, &[-theta.sin(), theta.cos()]));
        }
        let s = x.norm_squared();
        let u = 1.0 + s;
        let mut j = DMatrix::zeros(self.dim + 1, self.dim);
        for a in 0..self.dim {
            for c in 0..self.dim {
                let mut v = -4.0 * x[a] * x[c] / (u * u);
                if a == c {
                    v += 2.0 / u;
                }
                j[(a, c)] = v;
            }
        }
        let sign = if chart == 0 { 4.0 } else { -4.0 };
        for c in 0..self.dim {
            j[(self.dim, c)] = sign * x[c] / (u * u);
        }
        Ok(j)
    }

    /// Components of the round (unit) metric in chart coordinates.
    pub fn round_components(&self, chart: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        if self.dim == 1 {
            return Ok(DMatrix::from_element(1, 1, 1.0));
        }
        let u = 1.0 + x.norm_squared();
        let f = 4.0 / (u * u);
        Ok(DMatrix::from_diagonal_element(self.dim, self.dim, f))
    }

    /// Express an ambient (unit) vector as a sphere point in the chart that
    /// covers it best. `y` is normalized first.
    pub fn project(&self, y: &DVector<f64>) -> Result<SpherePoint> {
        if y.len() != self.dim + 1 {
            return Err(Error::Dimension { expected: self.dim + 1, got: y.len() });
        }
        let norm = y.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Argument("cannot project a zero or non-finite vector".into()));
        }
        let y = y / norm;
        if self.dim == 1 {
            let theta = y[1].atan2(y[0]);
            return Ok(if theta.abs() <= 0.5 * PI {
                SpherePoint { chart: 0, x: DVector::from_column_slice(&[theta]) }
            } else {
                let x = theta - PI * theta.signum();
                SpherePoint { chart: 1, x: DVector::from_column_slice(&[x]) }
            });
        }
        let last = y[self.dim];
        let (chart, denom) = if last <= 0.0 { (0usize, 1.0 - last) } else { (1usize, 1.0 + last) };
        let x = DVector::from_fn(self.dim, |i, _| y[i] / denom);
        Ok(SpherePoint { chart, x })
    }

    /// Coordinates of the same point in the other chart. Errors when the
    /// point lies outside the overlap (too close to the current chart's
    /// center).
    pub fn transition(&self, chart: usize, x: &DVector<f64>) -> Result<(usize, DVector<f64>)> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        let other = 1 - chart;
        if self.dim == 1 {
            let t = x[0];
            let xp = t - PI * t.signum();
            if xp.abs() >= self.chart_extent() {
                return Err(Error::Domain(format!(
                    "point at arclength {t} is outside the two-chart overlap"
                )));
            }
            return Ok((other, DVector::from_column_slice(&[xp])));
        }
        let s = x.norm_squared();
        if s == 0.0 {
            return Err(Error::Domain("chart center has no coordinates in the other chart".into()));
        }
        let xp = x / s;
        if xp.norm() >= self.chart_extent() {
            return Err(Error::Domain(format!(
                "point with |x| = {:.3} is outside the two-chart overlap",
                s.sqrt()
            )));
        }
        Ok((other, xp))
    }

    /// Jacobian of the transition map at `x` (square, m x m).
    pub fn transition_jacobian(&self, chart: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        if self.dim == 1 {
            return Ok(DMatrix::from_element(1, 1, 1.0));
        }
        let s = x.norm_squared();
        if s == 0.0 {
            return Err(Error::Domain("transition jacobian undefined at the chart center".into()));
        }
        let mut j = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let mut v = -2.0 * x[i] * x[k] / (s * s);
                if i == k {
                    v += 1.0 / s;
                }
                j[(i, k)] = v;
            }
        }
        Ok(j)
    }

    /// Contraction `A^k_i = sum_j d_i d_j T^k(x) v^j` of the transition
    /// map's second derivative with a vector, as needed to push a
    /// variational state across a chart switch.
    pub fn transition_hessian_contract(
        &self,
        chart: usize,
        x: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        self.check_chart(chart)?;
        self.check_coords(x)?;
        self.check_coords(v)?;
        if self.dim == 1 {
            return Ok(DMatrix::zeros(1, 1));
        }
        let s = x.norm_squared();
        if s == 0.0 {
            return Err(Error::Domain("transition hessian undefined at the chart center".into()));
        }
        let xv = x.dot(v);
        let m = self.dim;
        let mut a = DMatrix::zeros(m, m);
        // d_i d_j T^k = -2 (d_ki x_j + d_kj x_i + d_ij x_k) / s^2
        //              + 8 x_i x_j x_k / s^3, contracted with v^j.
        for k in 0..m {
            for i in 0..m {
                let mut val = 8.0 * x[i] * x[k] * xv / (s * s * s);
                val -= 2.0 * (x[i] * v[k] + x[k] * v[i]) / (s * s);
                if i == k {
                    val -= 2.0 * xv / (s * s);
                }
                a[(k, i)] = val;
            }
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_unit(rng: &mut StdRng, len: usize) -> DVector<f64> {
        loop {
            let y = DVector::from_fn(len, |_, _| rng.gen_range(-1.0..1.0));
            let n = y.norm();
            if n > 0.2 {
                return y / n;
            }
        }
    }

    #[test]
    fn embed_project_roundtrip() {
        for m in [1usize, 2, 3] {
            let atlas = SphereAtlas::new(m).unwrap();
            let mut rng = StdRng::seed_from_u64(17);
            for _ in 0..200 {
                let y = random_unit(&mut rng, m + 1);
                let p = atlas.project(&y).unwrap();
                assert!(p.x.norm() <= atlas.preferred_radius() + 1e-12);
                let back = atlas.embed(p.chart, &p.x).unwrap();
                assert_relative_eq!((back - &y).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn embeddings_are_unit_vectors() {
        for m in [1usize, 2, 4] {
            let atlas = SphereAtlas::new(m).unwrap();
            let mut rng = StdRng::seed_from_u64(23);
            for _ in 0..100 {
                let x = DVector::from_fn(m, |_, _| rng.gen_range(-1.2..1.2));
                if x.norm() >= atlas.chart_extent() {
                    continue;
                }
                for chart in 0..2 {
                    let y = atlas.embed(chart, &x).unwrap();
                    assert_relative_eq!(y.norm(), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn transition_matches_embeddings() {
        for m in [1usize, 2, 3] {
            let atlas = SphereAtlas::new(m).unwrap();
            let mut rng = StdRng::seed_from_u64(31);
            let lo = atlas.preferred_radius() * 0.6;
            let hi = atlas.preferred_radius() * 1.3;
            for _ in 0..200 {
                let dir = random_unit(&mut rng, m);
                let x = dir * rng.gen_range(lo..hi);
                let chart = rng.gen_range(0..2usize);
                let (other, xp) = atlas.transition(chart, &x).unwrap();
                assert_eq!(other, 1 - chart);
                let y0 = atlas.embed(chart, &x).unwrap();
                let y1 = atlas.embed(other, &xp).unwrap();
                assert_relative_eq!((y0 - y1).norm(), 0.0, epsilon = 1e-12);
                // The transition is an involution.
                let (back_chart, xb) = atlas.transition(other, &xp).unwrap();
                assert_eq!(back_chart, chart);
                assert_relative_eq!((xb - x).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn transition_outside_overlap_errors() {
        let atlas = SphereAtlas::new(2).unwrap();
        let x = DVector::from_column_slice(&[0.1, 0.0]);
        assert!(atlas.transition(0, &x).is_err());
        assert!(atlas.transition(0, &DVector::zeros(2)).is_err());
        let atlas1 = SphereAtlas::new(1).unwrap();
        assert!(atlas1.transition(0, &DVector::from_column_slice(&[0.1])).is_err());
    }

    #[test]
    fn transition_jacobian_matches_finite_differences() {
        let atlas = SphereAtlas::new(3).unwrap();
        let mut rng = StdRng::seed_from_u64(41);
        let h = 1e-6;
        for _ in 0..50 {
            let dir = random_unit(&mut rng, 3);
            let x = dir * rng.gen_range(0.7..1.4);
            let j = atlas.transition_jacobian(0, &x).unwrap();
            for c in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let (_, tp) = atlas.transition(0, &xp).unwrap();
                let (_, tm) = atlas.transition(0, &xm).unwrap();
                let fd = (tp - tm) / (2.0 * h);
                for k in 0..3 {
                    assert_relative_eq!(j[(k, c)], fd[k], epsilon = 1e-6, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn transition_hessian_matches_finite_differences() {
        let atlas = SphereAtlas::new(2).unwrap();
        let mut rng = StdRng::seed_from_u64(43);
        let h = 1e-5;
        for _ in 0..30 {
            let dir = random_unit(&mut rng, 2);
            let x = dir * rng.gen_range(0.7..1.4);
            let v = random_unit(&mut rng, 2);
            let a = atlas.transition_hessian_contract(0, &x, &v).unwrap();
            // FD of the jacobian along v.
            let xp = &x + &v * h;
            let xm = &x - &v * h;
            let jp = atlas.transition_jacobian(0, &xp).unwrap();
            let jm = atlas.transition_jacobian(0, &xm).unwrap();
            let fd = (jp - jm) / (2.0 * h);
            for k in 0..2 {
                for i in 0..2 {
                    assert_relative_eq!(a[(k, i)], fd[(k, i)], epsilon = 1e-5, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn round_metric_is_the_embedding_pullback() {
        for m in [1usize, 2, 3] {
            let atlas = SphereAtlas::new(m).unwrap();
            let mut rng = StdRng::seed_from_u64(47);
            for _ in 0..100 {
                let x = DVector::from_fn(m, |_, _| rng.gen_range(-0.9..0.9));
                for chart in 0..2 {
                    let j = atlas.ambient_jacobian(chart, &x).unwrap();
                    let pullback = j.transpose() * &j;
                    let round = atlas.round_components(chart, &x).unwrap();
                    assert_relative_eq!(
                        (pullback - round).norm(),
                        0.0,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn round_metric_is_transition_invariant() {
        for m in [1usize, 2, 3] {
            let atlas = SphereAtlas::new(m).unwrap();
            let mut rng = StdRng::seed_from_u64(53);
            for _ in 0..100 {
                let dir = random_unit(&mut rng, m);
                let x = dir * rng.gen_range(0.7 * atlas.preferred_radius()..1.2 * atlas.preferred_radius());
                let (other, xp) = atlas.transition(0, &x).unwrap();
                let j = atlas.transition_jacobian(0, &x).unwrap();
                let g_here = atlas.round_components(0, &x).unwrap();
                let g_there = atlas.round_components(other, &xp).unwrap();
                let pulled = j.transpose() * g_there * &j;
                assert_relative_eq!((pulled - g_here).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_dimension_zero() {
        assert!(SphereAtlas::new(0).is_err());
    }
}

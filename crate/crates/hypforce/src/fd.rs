//! Finite-difference stencils and a lattice engine for C^2 sup-norms.
//!
//! Closeness of metrics is always measured the same way: sample the component
//! matrices of both metrics on a regular lattice in chart coordinates, take
//! the difference, and bound the sup of the entries together with their first
//! and second lattice derivatives. [`GridField`] holds such a sampled field
//! and knows how to produce those sups; derivative stencils are evaluated
//! only at lattice points whose full stencil neighborhood is present and
//! unmasked, so callers sample one extra ring of points around the region
//! they actually need bounded.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Second-order central first derivative of a scalar function.
pub fn central_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Second-order central second derivative of a scalar function.
pub fn central_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Fourth-order central first derivative of a scalar function.
pub fn central_first4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// Fourth-order central second derivative of a scalar function.
pub fn central_second4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// Sup-norms of a sampled matrix field by derivative order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C2Norms {
    /// Sup over lattice points of the largest absolute matrix entry.
    pub sup_value: f64,
    /// Sup over interior points and axes of first central differences.
    pub sup_first: f64,
    /// Sup over interior points and axis pairs of second central differences.
    pub sup_second: f64,
}

impl C2Norms {
    /// The C^2 lattice norm: the largest of the three sups.
    pub fn max(&self) -> f64 {
        self.sup_value.max(self.sup_first).max(self.sup_second)
    }
}

/// A matrix-valued field sampled on a regular lattice over a box.
///
/// `shape[i]` lattice points along axis `i` with spacing `steps[i]`; `data`
/// is stored row-major (last axis fastest). An optional mask marks points
/// where the field is undefined; masked points contribute to no norm and
/// invalidate every stencil that touches them.
#[derive(Debug, Clone)]
pub struct GridField {
    shape: Vec<usize>,
    steps: Vec<f64>,
    data: Vec<DMatrix<f64>>,
    mask: Option<Vec<bool>>,
    strides: Vec<usize>,
}

fn strides_for(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

impl GridField {
    pub fn new(shape: Vec<usize>, steps: Vec<f64>, data: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::with_mask(shape, steps, data, None)
    }

    /// `mask[i] == true` marks a valid point.
    pub fn with_mask(
        shape: Vec<usize>,
        steps: Vec<f64>,
        data: Vec<DMatrix<f64>>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Argument("lattice shape must not be empty".into()));
        }
        if shape.len() != steps.len() {
            return Err(Error::Dimension { expected: shape.len(), got: steps.len() });
        }
        if steps.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::Argument(format!("lattice steps must be positive and finite: {steps:?}")));
        }
        let total: usize = shape.iter().product();
        if total == 0 {
            return Err(Error::Argument("lattice shape must have no zero axis".into()));
        }
        if data.len() != total {
            return Err(Error::Dimension { expected: total, got: data.len() });
        }
        if let Some(m) = &mask {
            if m.len() != total {
                return Err(Error::Dimension { expected: total, got: m.len() });
            }
        }
        let (r, c) = (data[0].nrows(), data[0].ncols());
        if data.iter().any(|m| m.nrows() != r || m.ncols() != c) {
            return Err(Error::Argument("all lattice values must share one matrix shape".into()));
        }
        let strides = strides_for(&shape);
        Ok(GridField { shape, steps, data, mask, strides })
    }

    /// Sample `f` over the lattice with `origin` at index zero; `f` returning
    /// `None` masks that point.
    pub fn from_fn(
        shape: Vec<usize>,
        steps: Vec<f64>,
        origin: Vec<f64>,
        mut f: impl FnMut(&[f64]) -> Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if origin.len() != shape.len() {
            return Err(Error::Dimension { expected: shape.len(), got: origin.len() });
        }
        let total: usize = shape.iter().product();
        let mut data = Vec::with_capacity(total);
        let mut mask = vec![true; total];
        let mut any_masked = false;
        let mut idx = vec![0usize; shape.len()];
        let mut coords = vec![0.0f64; shape.len()];
        let mut placeholder: Option<DMatrix<f64>> = None;
        for flat in 0..total {
            for (k, c) in coords.iter_mut().enumerate() {
                *c = origin[k] + idx[k] as f64 * steps[k];
            }
            match f(&coords) {
                Some(m) => {
                    placeholder.get_or_insert_with(|| DMatrix::zeros(m.nrows(), m.ncols()));
                    data.push(m);
                }
                None => {
                    mask[flat] = false;
                    any_masked = true;
                    data.push(DMatrix::zeros(0, 0));
                }
            }
            advance_index(&mut idx, &shape);
        }
        let placeholder = placeholder
            .ok_or_else(|| Error::Argument("field is undefined at every lattice point".into()))?;
        for (flat, valid) in mask.iter().enumerate() {
            if !valid {
                data[flat] = placeholder.clone();
            }
        }
        Self::with_mask(shape, steps, data, if any_masked { Some(mask) } else { None })
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    fn valid(&self, flat: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[flat])
    }

    /// Pointwise difference `self - other`; lattices must agree, masks
    /// intersect.
    pub fn difference(&self, other: &GridField) -> Result<GridField> {
        if self.shape != other.shape {
            return Err(Error::Argument(format!(
                "lattice shapes differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        if self.steps != other.steps {
            return Err(Error::Argument("lattice steps differ".into()));
        }
        let data: Vec<DMatrix<f64>> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        let mask = match (&self.mask, &other.mask) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| *x && *y).collect()),
        };
        GridField::with_mask(self.shape.clone(), self.steps.clone(), data, mask)
    }

    /// Sup of absolute entries over valid points.
    pub fn sup_value(&self) -> Result<f64> {
        let mut best: Option<f64> = None;
        for (flat, m) in self.data.iter().enumerate() {
            if !self.valid(flat) {
                continue;
            }
            let local = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            best = Some(best.map_or(local, |b| b.max(local)));
        }
        best.ok_or_else(|| Error::Argument("no valid lattice points".into()))
    }

    /// Smallest |det| of the sampled matrices over valid points.
    pub fn inf_abs_det(&self) -> Result<f64> {
        let mut best: Option<f64> = None;
        for (flat, m) in self.data.iter().enumerate() {
            if !self.valid(flat) {
                continue;
            }
            let d = m.determinant().abs();
            best = Some(best.map_or(d, |b| b.min(d)));
        }
        best.ok_or_else(|| Error::Argument("no valid lattice points".into()))
    }

    fn stencil_valid(&self, flat: usize, offsets: &[isize]) -> bool {
        offsets.iter().all(|&off| {
            let q = flat as isize + off;
            self.valid(q as usize)
        })
    }

    /// Sups of value, first, and second central lattice derivatives.
    ///
    /// Errors if any derivative order has no admissible stencil anywhere
    /// (lattice too small or mask too aggressive), since a silent zero would
    /// understate the norm.
    pub fn norms(&self) -> Result<C2Norms> {
        let sup_value = self.sup_value()?;
        let nd = self.ndim();
        let total: usize = self.shape.iter().product();
        let mut sup_first: Option<f64> = None;
        let mut sup_second: Option<f64> = None;

        let mut idx = vec![0usize; nd];
        for flat in 0..total {
            if self.valid(flat) {
                // Axis-aligned first and pure second derivatives.
                for a in 0..nd {
                    if idx[a] >= 1 && idx[a] + 1 < self.shape[a] {
                        let s = self.strides[a] as isize;
                        if self.stencil_valid(flat, &[-s, s]) {
                            let plus = &self.data[(flat as isize + s) as usize];
                            let minus = &self.data[(flat as isize - s) as usize];
                            let h = self.steps[a];
                            let d1 = (plus - minus)
                                .iter()
                                .fold(0.0f64, |acc, v| acc.max(v.abs()))
                                / (2.0 * h);
                            sup_first = Some(sup_first.map_or(d1, |b| b.max(d1)));
                            let center = &self.data[flat];
                            let d2 = (plus + minus - center.scale(2.0))
                                .iter()
                                .fold(0.0f64, |acc, v| acc.max(v.abs()))
                                / (h * h);
                            sup_second = Some(sup_second.map_or(d2, |b| b.max(d2)));
                        }
                    }
                }
                // Mixed second derivatives via the diagonal cross stencil.
                for a in 0..nd {
                    for b in (a + 1)..nd {
                        if idx[a] >= 1
                            && idx[a] + 1 < self.shape[a]
                            && idx[b] >= 1
                            && idx[b] + 1 < self.shape[b]
                        {
                            let sa = self.strides[a] as isize;
                            let sb = self.strides[b] as isize;
                            if self.stencil_valid(flat, &[sa + sb, sa - sb, -sa + sb, -sa - sb]) {
                                let pp = &self.data[(flat as isize + sa + sb) as usize];
                                let pm = &self.data[(flat as isize + sa - sb) as usize];
                                let mp = &self.data[(flat as isize - sa + sb) as usize];
                                let mm = &self.data[(flat as isize - sa - sb) as usize];
                                let quot = 4.0 * self.steps[a] * self.steps[b];
                                let d2 = (pp - pm - mp + mm)
                                    .iter()
                                    .fold(0.0f64, |acc, v| acc.max(v.abs()))
                                    / quot;
                                sup_second = Some(sup_second.map_or(d2, |v| v.max(d2)));
                            }
                        }
                    }
                }
            }
            advance_index(&mut idx, &self.shape);
        }

        let sup_first = sup_first
            .ok_or_else(|| Error::Argument("no admissible first-derivative stencil on lattice".into()))?;
        let sup_second = sup_second
            .ok_or_else(|| Error::Argument("no admissible second-derivative stencil on lattice".into()))?;
        Ok(C2Norms { sup_value, sup_first, sup_second })
    }

    /// The C^2 lattice norm of the field.
    pub fn c2_norm(&self) -> Result<f64> {
        Ok(self.norms()?.max())
    }
}

fn advance_index(idx: &mut [usize], shape: &[usize]) {
    for a in (0..shape.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}

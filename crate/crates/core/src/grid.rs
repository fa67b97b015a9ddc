//! Periodic scalar fields on a rectangular pixel grid and the one-sided and
//! second-order difference operators used by the restoration schemes.
//!
//! A field is stored row-major: pixel `(i, j)` (column `i` along x, row `j`
//! along y) lives at `data[j * width + i]`. Every index is interpreted modulo
//! the grid size, so the image is a torus.
//!
//! Reductions (sums, inner products, norms) are accumulated serially in
//! storage order. Results are therefore bitwise reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Coordinate direction of a difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Real-valued periodic image on a `width x height` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageField {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyField);
        }
        if data.len() != width * height {
            return Err(invalid(
                "data",
                format!("length {} does not match {}x{} grid", data.len(), width, height),
            ));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    /// Builds a field by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                data.push(f(i, j));
            }
        }
        Self::from_vec(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Value at `(i, j)`, both indices taken modulo the grid size.
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        let ii = i.rem_euclid(self.width as isize) as usize;
        let jj = j.rem_euclid(self.height as isize) as usize;
        self.data[jj * self.width + ii]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.width + i] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Pixelwise combination of two fields of equal shape.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Periodic translation: `out(i, j) = self(i - dx, j - dy)`.
    pub fn shifted(&self, dx: isize, dy: isize) -> Self {
        let mut out = self.clone();
        for j in 0..self.height {
            for i in 0..self.width {
                out.data[j * self.width + i] = self.get(i as isize - dx, j as isize - dy);
            }
        }
        out
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Space and time step of the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub h: f64,
    pub tau: f64,
}

impl GridGeometry {
    pub fn new(h: f64, tau: f64) -> Result<Self> {
        let geometry = Self { h, tau };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", format!("must be positive, got {}", self.h)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

impl Default for GridGeometry {
    fn default() -> Self {
        Self { h: 1.0, tau: 0.5 }
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(invalid("h", format!("must be positive, got {h}")))
    }
}

#[inline]
fn offset(axis: Axis) -> (isize, isize) {
    match axis {
        Axis::X => (1, 0),
        Axis::Y => (0, 1),
    }
}

/// Applies `f(center, neighbour_plus, neighbour_minus)` along `axis` at every pixel.
fn stencil(field: &ImageField, axis: Axis, f: impl Fn(f64, f64, f64) -> f64) -> ImageField {
    let (dx, dy) = offset(axis);
    let mut out = field.clone();
    for j in 0..field.height {
        for i in 0..field.width {
            let (ii, jj) = (i as isize, j as isize);
            let center = field.at(i, j);
            let plus = field.get(ii + dx, jj + dy);
            let minus = field.get(ii - dx, jj - dy);
            out.data[j * field.width + i] = f(center, plus, minus);
        }
    }
    out
}

/// Forward difference `(u[i+1] - u[i]) / h` along `axis`.
pub fn forward_diff(field: &ImageField, axis: Axis, h: f64) -> Result<ImageField> {
    check_h(h)?;
    field.ensure_finite()?;
    Ok(stencil(field, axis, |c, p, _| (p - c) / h))
}

/// Backward difference `(u[i] - u[i-1]) / h` along `axis`.
pub fn backward_diff(field: &ImageField, axis: Axis, h: f64) -> Result<ImageField> {
    check_h(h)?;
    field.ensure_finite()?;
    Ok(stencil(field, axis, |c, _, m| (c - m) / h))
}

/// Undivided second difference `u[i+1] - 2u[i] + u[i-1]` along `axis`.
pub fn second_diff(field: &ImageField, axis: Axis) -> Result<ImageField> {
    field.ensure_finite()?;
    Ok(stencil(field, axis, |c, p, m| p - 2.0 * c + m))
}

/// Conservative diffusion term `Δ₋ˣ(c Δ₊ˣ u) + Δ₋ʸ(c Δ₊ʸ u)`.
///
/// The coefficient is sampled at the left/lower pixel of each flux, so the
/// grid sum of the result telescopes to zero.
pub fn flux_divergence(coef: &ImageField, field: &ImageField, h: f64) -> Result<ImageField> {
    check_h(h)?;
    coef.ensure_same_dims(field)?;
    let (w, ht) = field.dims();
    let inv_h2 = 1.0 / (h * h);
    let mut out = field.clone();
    for j in 0..ht {
        let jp = (j + 1) % ht;
        let jm = (j + ht - 1) % ht;
        for i in 0..w {
            let ip = (i + 1) % w;
            let im = (i + w - 1) % w;
            let u = field.at(i, j);
            let flux_x = coef.at(i, j) * (field.at(ip, j) - u) - coef.at(im, j) * (u - field.at(im, j));
            let flux_y = coef.at(i, j) * (field.at(i, jp) - u) - coef.at(i, jm) * (u - field.at(i, jm));
            out.data[j * w + i] = (flux_x + flux_y) * inv_h2;
        }
    }
    Ok(out)
}

/// Exact reductions over every pixel of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sum_of_squares: f64,
}

pub fn field_stats(field: &ImageField) -> Result<FieldStats> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(FieldStats {
        min: field.min(),
        max: field.max(),
        mean: field.mean(),
        sum_of_squares: field.norm_sq(),
    })
}

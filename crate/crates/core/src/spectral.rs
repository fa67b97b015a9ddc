//! Two-dimensional DFT plumbing and fractional-order differences defined by
//! Fourier multipliers.
//!
//! Normalization: the forward transform is unnormalized and the inverse
//! carries the `1 / (W H)` factor, so `idft2(dft2(u)) == u`. Coefficient
//! `(p, q)` is stored at `q * W + p` and corresponds to the angular
//! frequencies `ω₁ = 2πp/W`, `ω₂ = 2πq/H` with `p = 0..W`, `q = 0..H`
//! (no re-centering).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, ImageField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Complex DFT coefficients of a `width x height` field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<Complex64>,
}

/// Complex-valued spatial field, the output of an inverse transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

macro_rules! complex_grid_accessors {
    ($ty:ident, $field:ident) => {
        impl $ty {
            pub fn from_vec(width: usize, height: usize, $field: Vec<Complex64>) -> Result<Self> {
                if width == 0 || height == 0 {
                    return Err(Error::EmptyField);
                }
                if $field.len() != width * height {
                    return Err(invalid(
                        stringify!($field),
                        format!("length {} does not match {}x{} grid", $field.len(), width, height),
                    ));
                }
                Ok(Self {
                    width,
                    height,
                    $field,
                })
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
            pub fn $field(&self) -> &[Complex64] {
                &self.$field
            }

            #[inline]
            pub fn at(&self, p: usize, q: usize) -> Complex64 {
                self.$field[q * self.width + p]
            }
        }
    };
}

complex_grid_accessors!(Spectrum, coeffs);
complex_grid_accessors!(ComplexField, data);

impl Spectrum {
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Elementwise product with a multiplier grid of the same shape.
    pub fn multiplied(&self, values: &[Complex64]) -> Result<Spectrum> {
        if values.len() != self.coeffs.len() {
            return Err(invalid("values", "multiplier length does not match spectrum"));
        }
        Ok(Spectrum {
            width: self.width,
            height: self.height,
            coeffs: self.coeffs.iter().zip(values).map(|(a, b)| a * b).collect(),
        })
    }
}

impl ComplexField {
    pub fn real_part(&self) -> ImageField {
        let data = self.data.iter().map(|z| z.re).collect();
        ImageField::from_vec(self.width, self.height, data).expect("shape already validated")
    }

    pub fn modulus(&self) -> ImageField {
        let data = self.data.iter().map(|z| z.norm()).collect();
        ImageField::from_vec(self.width, self.height, data).expect("shape already validated")
    }
}

/// Angular frequency of DFT index `k` on an axis of length `n`.
#[inline]
pub fn frequency(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

fn fft_rows(buf: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    buf.par_chunks_exact_mut(len).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); src.len()];
    out.par_chunks_exact_mut(height).enumerate().for_each(|(i, column)| {
        for (j, c) in column.iter_mut().enumerate() {
            *c = src[j * width + i];
        }
    });
    out
}

// Rows and columns are transformed independently, so the result does not
// depend on how the work is split across threads.
fn transform_in_place(width: usize, height: usize, buf: &mut [Complex64], direction: FftDirection) {
    let (row_fft, col_fft) = PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        (planner.plan_fft(width, direction), planner.plan_fft(height, direction))
    });
    fft_rows(buf, width, &row_fft);
    let mut columns = transpose(buf, width, height);
    fft_rows(&mut columns, height, &col_fft);
    buf.copy_from_slice(&transpose(&columns, height, width));
}

/// Unnormalized forward 2-D DFT.
pub fn dft2(field: &ImageField) -> Spectrum {
    let (width, height) = field.dims();
    let mut coeffs: Vec<Complex64> = field.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform_in_place(width, height, &mut coeffs, FftDirection::Forward);
    Spectrum { width, height, coeffs }
}

/// Inverse 2-D DFT including the `1 / (W H)` factor.
pub fn idft2(spec: &Spectrum) -> ComplexField {
    let (width, height) = spec.dims();
    let mut data = spec.coeffs.clone();
    transform_in_place(width, height, &mut data, FftDirection::Inverse);
    let scale = 1.0 / (width * height) as f64;
    for z in &mut data {
        *z *= scale;
    }
    ComplexField { width, height, data }
}

/// Checks that a spectrum matches the shape of a spatial field.
pub fn ensure_dims(spec: &Spectrum, field: &ImageField) -> Result<()> {
    if spec.dims() != field.dims() {
        return Err(Error::DimensionMismatch {
            expected: field.dims(),
            actual: spec.dims(),
        });
    }
    Ok(())
}

/// How the complex inverse transform of a fractional difference is turned
/// into a real field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FracOutput {
    #[default]
    RealPart,
    Modulus,
}

impl FracOutput {
    fn apply(self, z: &ComplexField) -> ImageField {
        match self {
            FracOutput::RealPart => z.real_part(),
            FracOutput::Modulus => z.modulus(),
        }
    }
}

/// Symbol `(1 - e^{-iωh})^α e^{iαωh/2}` of the shifted fractional difference,
/// tabulated on the full frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FracMultiplier {
    pub alpha: f64,
    pub axis: Axis,
    pub h: f64,
    width: usize,
    height: usize,
    values: Vec<Complex64>,
}

/// Symbol value at a single angular frequency. The complex power uses the
/// principal branch; the base vanishes only at `ω h ≡ 0`.
pub fn frac_symbol(alpha: f64, omega: f64, h: f64) -> Complex64 {
    let base = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -omega * h);
    if base == Complex64::new(0.0, 0.0) {
        return base;
    }
    base.powf(alpha) * Complex64::from_polar(1.0, alpha * omega * h / 2.0)
}

pub fn frac_multiplier(alpha: f64, axis: Axis, width: usize, height: usize, h: f64) -> Result<FracMultiplier> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::EmptyField);
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let table: Vec<Complex64> = match axis {
        Axis::X => (0..width).map(|p| frac_symbol(alpha, frequency(p, width), h)).collect(),
        Axis::Y => (0..height)
            .map(|q| frac_symbol(alpha, frequency(q, height), h))
            .collect(),
    };
    let mut values = Vec::with_capacity(width * height);
    for q in 0..height {
        for p in 0..width {
            values.push(match axis {
                Axis::X => table[p],
                Axis::Y => table[q],
            });
        }
    }
    Ok(FracMultiplier {
        alpha,
        axis,
        h,
        width,
        height,
        values,
    })
}

impl FracMultiplier {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn at(&self, p: usize, q: usize) -> Complex64 {
        self.values[q * self.width + p]
    }

    /// One-dimensional table `(index, value)` along the multiplier's own axis.
    pub fn axis_table(&self) -> Vec<(usize, Complex64)> {
        match self.axis {
            Axis::X => (0..self.width).map(|p| (p, self.at(p, 0))).collect(),
            Axis::Y => (0..self.height).map(|q| (q, self.at(0, q))).collect(),
        }
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(invalid(
            "alpha",
            format!("fractional order must lie in (0, 2), got {alpha}"),
        ))
    }
}

/// Fractional difference `D^α` along `axis` (real-part convention).
pub fn frac_diff(field: &ImageField, alpha: f64, axis: Axis, h: f64) -> Result<ImageField> {
    frac_diff_with(field, alpha, axis, h, FracOutput::RealPart)
}

pub fn frac_diff_with(field: &ImageField, alpha: f64, axis: Axis, h: f64, output: FracOutput) -> Result<ImageField> {
    check_order(alpha)?;
    field.ensure_finite()?;
    let m = frac_multiplier(alpha, axis, field.width(), field.height(), h)?;
    let spec = dft2(field).multiplied(m.values())?;
    Ok(output.apply(&idft2(&spec)))
}

/// Both components `(D_x^α u, D_y^α u)` of the discrete fractional gradient,
/// sharing one forward transform.
pub fn frac_gradient(field: &ImageField, alpha: f64, h: f64, output: FracOutput) -> Result<(ImageField, ImageField)> {
    check_order(alpha)?;
    field.ensure_finite()?;
    let (w, ht) = field.dims();
    let spec = dft2(field);
    let mx = frac_multiplier(alpha, Axis::X, w, ht, h)?;
    let my = frac_multiplier(alpha, Axis::Y, w, ht, h)?;
    let dx = output.apply(&idft2(&spec.multiplied(mx.values())?));
    let dy = output.apply(&idft2(&spec.multiplied(my.values())?));
    Ok((dx, dy))
}

/// Pixelwise `sqrt(Dx² + Dy²)` of the fractional gradient.
pub fn frac_grad_magnitude(field: &ImageField, alpha: f64, h: f64) -> Result<ImageField> {
    frac_grad_magnitude_with(field, alpha, h, FracOutput::RealPart)
}

pub fn frac_grad_magnitude_with(field: &ImageField, alpha: f64, h: f64, output: FracOutput) -> Result<ImageField> {
    let (dx, dy) = frac_gradient(field, alpha, h, output)?;
    dx.zip_map(&dy, f64::hypot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_has_flat_spectrum() {
        let mut d = ImageField::zeros(4, 3).unwrap();
        d.set(0, 0, 1.0);
        for z in dft2(&d).coeffs() {
            assert_eq!(*z, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn constant_concentrates_at_dc() {
        let s = dft2(&ImageField::filled(4, 4, 2.5).unwrap());
        assert!((s.at(0, 0) - Complex64::new(40.0, 0.0)).norm() < 1e-12);
        for (k, z) in s.coeffs().iter().enumerate().skip(1) {
            assert!(z.norm() < 1e-12, "coefficient {k} = {z}");
        }
    }

    #[test]
    fn symbol_special_values() {
        assert_eq!(frac_symbol(0.9, 0.0, 1.0), Complex64::new(0.0, 0.0));
        for k in 0..16 {
            let w = frequency(k, 16);
            let expected = Complex64::new(0.0, 2.0 * (w / 2.0).sin());
            assert!((frac_symbol(1.0, w, 1.0) - expected).norm() < 1e-14);
        }
        let expected = Complex64::from_polar(2f64.powf(0.9), 0.45 * PI);
        assert!((frac_symbol(0.9, PI, 1.0) - expected).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(frac_multiplier(0.0, Axis::X, 4, 4, 1.0).is_err());
        assert!(frac_multiplier(-0.5, Axis::X, 4, 4, 1.0).is_err());
        let f = ImageField::filled(4, 4, 1.0).unwrap();
        assert!(frac_diff(&f, 2.0, Axis::X, 1.0).is_err());
    }

    #[test]
    fn x_only_variation_has_no_y_component() {
        let f = ImageField::from_fn(8, 8, |i, _| (i * i) as f64).unwrap();
        let (dx, dy) = frac_gradient(&f, 0.7, 1.0, FracOutput::RealPart).unwrap();
        assert!(dy.max_abs() < 1e-12);
        let mag = frac_grad_magnitude(&f, 0.7, 1.0).unwrap();
        for (m, d) in mag.data().iter().zip(dx.data()) {
            assert!((m - d.abs()).abs() < 1e-12);
        }
    }
}

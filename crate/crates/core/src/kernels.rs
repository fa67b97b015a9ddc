//! Blur kernels and periodic (circular) convolution through the DFT.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::ImageField;
use crate::spectral::{dft2, ensure_dims, idft2, Spectrum};

/// Small convolution stencil. Tap `(a, b)` sits at `taps[b * width + a]`
/// and acts at spatial offset `(a - origin.0, b - origin.1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    taps: Vec<f64>,
    origin: (usize, usize),
    normalized: bool,
}

impl Kernel {
    pub fn new(width: usize, height: usize, taps: Vec<f64>, origin: (usize, usize)) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyField);
        }
        if taps.len() != width * height {
            return Err(invalid("taps", "length does not match stencil size"));
        }
        if origin.0 >= width || origin.1 >= height {
            return Err(invalid("origin", "must lie inside the stencil"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(invalid("taps", "must be finite"));
        }
        let normalized = (taps.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        Ok(Self {
            width,
            height,
            taps,
            origin,
            normalized,
        })
    }

    /// Centered stencil scaled so its taps sum to one.
    fn centered_normalized(width: usize, height: usize, mut taps: Vec<f64>) -> Result<Self> {
        let total: f64 = taps.iter().sum();
        if total <= 0.0 {
            return Err(invalid("taps", "kernel has no mass"));
        }
        for t in &mut taps {
            *t /= total;
        }
        Self::new(width, height, taps, (width / 2, height / 2))
    }

    pub fn delta() -> Self {
        Self::new(1, 1, vec![1.0], (0, 0)).expect("valid identity kernel")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tap(&self, a: usize, b: usize) -> f64 {
        self.taps[b * self.width + a]
    }

    /// Iterates `(dx, dy, weight)` over all taps, offsets relative to the origin.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let (ox, oy) = (self.origin.0 as isize, self.origin.1 as isize);
        (0..self.height)
            .flat_map(move |b| (0..self.width).map(move |a| (a as isize - ox, b as isize - oy, self.tap(a, b))))
    }
}

/// `n x n` box filter with every tap equal to `1/n²`.
pub fn average_kernel(n: usize) -> Result<Kernel> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid(
            "n",
            format!("average kernel size must be odd and positive, got {n}"),
        ));
    }
    Kernel::centered_normalized(n, n, vec![1.0; n * n])
}

/// Uniform disk: a pixel is included iff its center lies within `radius`
/// of the kernel center.
pub fn disk_kernel(radius: f64) -> Result<Kernel> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    let r = radius.ceil() as isize;
    let side = (2 * r + 1) as usize;
    let r2 = radius * radius;
    let mut taps = Vec::with_capacity(side * side);
    for dy in -r..=r {
        for dx in -r..=r {
            taps.push(if ((dx * dx + dy * dy) as f64) <= r2 { 1.0 } else { 0.0 });
        }
    }
    Kernel::centered_normalized(side, side, taps)
}

/// Linear motion blur of the given length (pixels) and angle (radians,
/// counterclockwise from +x with image rows growing downwards).
///
/// The segment is sampled at `round(length)` points spread evenly over
/// `[-(L-1)/2, (L-1)/2]`; each sample deposits unit mass on its four
/// neighbouring pixels with bilinear weights, and the result is normalized.
pub fn motion_kernel(length: f64, angle: f64) -> Result<Kernel> {
    if !(length >= 1.0 && length.is_finite()) {
        return Err(invalid("length", format!("must be at least 1, got {length}")));
    }
    if !angle.is_finite() {
        return Err(invalid("angle", "must be finite"));
    }
    let samples = length.round().max(1.0) as usize;
    let half = (length - 1.0) / 2.0;
    let (dir_x, dir_y) = (angle.cos(), -angle.sin());
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let t = if samples == 1 {
                0.0
            } else {
                -half + 2.0 * half * k as f64 / (samples - 1) as f64
            };
            (t * dir_x, t * dir_y)
        })
        .collect();

    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let rx = points
        .iter()
        .map(|p| snap(p.0).abs().ceil() as isize)
        .max()
        .unwrap_or(0);
    let ry = points
        .iter()
        .map(|p| snap(p.1).abs().ceil() as isize)
        .max()
        .unwrap_or(0);
    let (w, h) = ((2 * rx + 1) as usize, (2 * ry + 1) as usize);
    let mut taps = vec![0.0; w * h];
    for &(x, y) in &points {
        let (x, y) = (snap(x), snap(y));
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        for (ox, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (oy, wy) in [(0, 1.0 - fy), (1, fy)] {
                let weight = wx * wy;
                if weight == 0.0 {
                    continue;
                }
                let a = (x0 as isize + ox + rx) as usize;
                let b = (y0 as isize + oy + ry) as usize;
                taps[b * w + a] += weight;
            }
        }
    }
    Kernel::centered_normalized(w, h, taps)
}

/// Kernel description used in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Delta,
    Average { n: usize },
    Disk { radius: f64 },
    Motion { length: f64, angle: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match *self {
            KernelSpec::Delta => Ok(Kernel::delta()),
            KernelSpec::Average { n } => average_kernel(n),
            KernelSpec::Disk { radius } => disk_kernel(radius),
            KernelSpec::Motion { length, angle } => motion_kernel(length, angle),
        }
    }
}

/// DFT of a kernel zero-padded to image size, with the origin tap at index
/// `(0, 0)` and the other taps wrapped periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectrum {
    spectrum: Spectrum,
    conj_spectrum: Spectrum,
}

impl KernelSpectrum {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn conj_spectrum(&self) -> &Spectrum {
        &self.conj_spectrum
    }

    pub fn dims(&self) -> (usize, usize) {
        self.spectrum.dims()
    }

    /// `|K̂|²` per frequency.
    pub fn power(&self) -> Vec<f64> {
        self.spectrum.coeffs().iter().map(|z| z.norm_sqr()).collect()
    }
}

pub fn kernel_spectrum(kernel: &Kernel, width: usize, height: usize) -> Result<KernelSpectrum> {
    if kernel.width > width || kernel.height > height {
        return Err(Error::KernelTooLarge {
            kernel: kernel.dims(),
            image: (width, height),
        });
    }
    let mut padded = ImageField::zeros(width, height)?;
    for (dx, dy, weight) in kernel.offsets() {
        let i = dx.rem_euclid(width as isize) as usize;
        let j = dy.rem_euclid(height as isize) as usize;
        padded.set(i, j, padded.at(i, j) + weight);
    }
    let spectrum = dft2(&padded);
    let conj: Vec<Complex64> = spectrum.coeffs().iter().map(|z| z.conj()).collect();
    let conj_spectrum = Spectrum::from_vec(width, height, conj)?;
    Ok(KernelSpectrum {
        spectrum,
        conj_spectrum,
    })
}

fn apply(field: &ImageField, spectrum: &Spectrum) -> Result<ImageField> {
    ensure_dims(spectrum, field)?;
    let product = dft2(field).multiplied(spectrum.coeffs())?;
    Ok(idft2(&product).real_part())
}

/// Circular convolution `K * u`.
pub fn convolve(field: &ImageField, ks: &KernelSpectrum) -> Result<ImageField> {
    apply(field, &ks.spectrum)
}

/// Adjoint convolution `K' * u`, i.e. correlation with the kernel.
pub fn adjoint_convolve(field: &ImageField, ks: &KernelSpectrum) -> Result<ImageField> {
    apply(field, &ks.conj_spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_kernels() {
        let k = average_kernel(5).unwrap();
        assert_eq!(k.taps().len(), 25);
        assert!(k.taps().iter().all(|&t| (t - 0.04).abs() < 1e-15));
        assert_eq!(average_kernel(1).unwrap(), Kernel::delta());
        let k3 = average_kernel(3).unwrap();
        assert!((k3.taps().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(average_kernel(4).is_err());
        assert!(average_kernel(0).is_err());
    }

    #[test]
    fn disk_small_radius_is_delta() {
        let k = disk_kernel(0.5).unwrap();
        assert_eq!(k.dims(), (3, 3));
        assert_eq!(k.tap(1, 1), 1.0);
        assert_eq!(k.taps().iter().filter(|&&t| t > 0.0).count(), 1);
        assert!(disk_kernel(0.0).is_err());
        assert!(disk_kernel(-1.0).is_err());
    }

    #[test]
    fn motion_unit_length_is_delta() {
        for angle in [0.0, 0.3, 1.2, 3.0] {
            let k = motion_kernel(1.0, angle).unwrap();
            assert_eq!(k, Kernel::delta());
        }
        assert!(motion_kernel(0.5, 0.0).is_err());
    }

    #[test]
    fn motion_horizontal_five() {
        let k = motion_kernel(5.0, 0.0).unwrap();
        assert_eq!(k.dims(), (5, 1));
        for &t in k.taps() {
            assert!((t - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_spectrum_is_ones() {
        let ks = kernel_spectrum(&Kernel::delta(), 6, 5).unwrap();
        for z in ks.spectrum().coeffs() {
            assert_eq!(*z, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn kernel_larger_than_image_rejected() {
        let k = average_kernel(5).unwrap();
        assert!(matches!(kernel_spectrum(&k, 4, 8), Err(Error::KernelTooLarge { .. })));
    }

    #[test]
    fn spec_roundtrip_through_json_names() {
        let spec: KernelSpec = serde_json::from_str(r#"{"type":"disk","radius":3.0}"#).unwrap();
        assert_eq!(spec, KernelSpec::Disk { radius: 3.0 });
        assert!(serde_json::from_str::<KernelSpec>(r#"{"type":"disk","radius":3.0,"x":1}"#).is_err());
    }
}

//! PSNR and SSIM.
//!
//! SSIM uses an 11x11 Gaussian window (standard deviation 1.5) applied with
//! periodic wrap, `c1 = (0.01·255)²`, `c2 = (0.03·255)²`, and averages the
//! map over every pixel.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::ImageField;

pub const PEAK: f64 = 255.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = (0.01 * PEAK) * (0.01 * PEAK);
pub const SSIM_C2: f64 = (0.03 * PEAK) * (0.03 * PEAK);

/// `10 log10(Σ 255² / Σ (u - f)²)`; `+∞` for identical images.
pub fn psnr(u: &ImageField, f: &ImageField) -> Result<f64> {
    u.ensure_same_dims(f)?;
    let sse: f64 = u.data().iter().zip(f.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (u.len() as f64 * PEAK * PEAK / sse).log10())
}

/// Normalized 1-D Gaussian taps of the SSIM window.
pub fn ssim_window_1d() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut w = [0.0; SSIM_WINDOW];
    for (k, t) in w.iter_mut().enumerate() {
        let d = (k as isize - r) as f64;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|t| *t /= total);
    w
}

/// Separable periodic Gaussian filtering.
fn local_mean(field: &ImageField, taps: &[f64; SSIM_WINDOW]) -> ImageField {
    let r = (SSIM_WINDOW / 2) as isize;
    let (w, h) = field.dims();
    let mut rows = field.clone();
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * field.get(i as isize + k as isize - r, j as isize);
            }
            rows.set(i, j, acc);
        }
    }
    let mut out = rows.clone();
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * rows.get(i as isize, j as isize + k as isize - r);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Mean structural similarity between `u` and `f`.
pub fn ssim(u: &ImageField, f: &ImageField) -> Result<f64> {
    u.ensure_same_dims(f)?;
    if u.width() < SSIM_WINDOW || u.height() < SSIM_WINDOW {
        return Err(Error::WindowTooLarge {
            window: SSIM_WINDOW,
            image: u.dims(),
        });
    }
    let taps = ssim_window_1d();
    let mu_u = local_mean(u, &taps);
    let mu_f = local_mean(f, &taps);
    let uu = local_mean(&u.map(|x| x * x), &taps);
    let ff = local_mean(&f.map(|x| x * x), &taps);
    let uf = local_mean(&u.zip_map(f, |a, b| a * b)?, &taps);

    let mut total = 0.0;
    for k in 0..u.len() {
        let (mu, mf) = (mu_u.data()[k], mu_f.data()[k]);
        let var_u = uu.data()[k] - mu * mu;
        let var_f = ff.data()[k] - mf * mf;
        let cov = uf.data()[k] - mu * mf;
        let num = (2.0 * mu * mf + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (mu * mu + mf * mf + SSIM_C1) * (var_u + var_f + SSIM_C2);
        total += num / den;
    }
    Ok(total / u.len() as f64)
}

/// PSNR and SSIM of a pair of images. An infinite PSNR serializes as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    #[serde(serialize_with = "serialize_psnr")]
    pub psnr: f64,
    pub ssim: f64,
}

fn serialize_psnr<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_infinite() && *value > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*value)
    }
}

pub fn quality_report(u: &ImageField, f: &ImageField) -> Result<QualityReport> {
    Ok(QualityReport {
        psnr: psnr(u, f)?,
        ssim: ssim(u, f)?,
    })
}

//! Deterministic synthetic test images.

use std::f64::consts::PI;

use crate::error::Result;
use crate::grid::ImageField;

/// Textured test scene: diagonal stripes over the whole frame, a patch of
/// fine horizontal bars, and three Gaussian blobs. Values lie in `[5, 250]`.
pub fn texture(size: usize) -> Result<ImageField> {
    let s = size as f64 / 64.0;
    let blob = |i: f64, j: f64, ci: f64, cj: f64, r: f64| {
        let (di, dj) = (i - ci * s, j - cj * s);
        (-(di * di + dj * dj) / (2.0 * (r * s) * (r * s))).exp()
    };
    ImageField::from_fn(size, size, |i, j| {
        let (x, y) = (i as f64, j as f64);
        let mut value = 110.0 + 45.0 * (2.0 * PI * (x + y) / 9.0).sin();
        if (36.0 * s..60.0 * s).contains(&x) && (6.0 * s..26.0 * s).contains(&y) {
            value += if (2.0 * PI * y / 5.0).sin() >= 0.0 { 35.0 } else { -35.0 };
        }
        value += 80.0 * blob(x, y, 20.0, 18.0, 6.0);
        value -= 60.0 * blob(x, y, 44.0, 42.0, 8.0);
        value += 50.0 * blob(x, y, 16.0, 48.0, 5.0);
        value.clamp(5.0, 250.0)
    })
}

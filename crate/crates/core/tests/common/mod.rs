#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdrestore_core::ImageField;

pub fn random_field(width: usize, height: usize, seed: u64, lo: f64, hi: f64) -> ImageField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageField::from_fn(width, height, |_, _| rng.random_range(lo..hi)).unwrap()
}

/// Direct O(N²) forward DFT, independent of the FFT path.
pub fn naive_dft(field: &ImageField) -> Vec<Complex64> {
    let (w, h) = field.dims();
    let mut out = vec![Complex64::default(); w * h];
    for q in 0..h {
        for p in 0..w {
            let mut acc = Complex64::default();
            for j in 0..h {
                for i in 0..w {
                    let phase = -2.0 * PI * ((p * i) as f64 / w as f64 + (q * j) as f64 / h as f64);
                    acc += field.at(i, j) * Complex64::from_polar(1.0, phase);
                }
            }
            out[q * w + p] = acc;
        }
    }
    out
}

/// Direct inverse DFT of `coeffs` where each coefficient is weighted by
/// `symbol(p, q)`; returns the complex spatial values.
pub fn naive_synthesis(
    w: usize,
    h: usize,
    coeffs: &[Complex64],
    symbol: impl Fn(usize, usize) -> Complex64,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); w * h];
    for j in 0..h {
        for i in 0..w {
            let mut acc = Complex64::default();
            for q in 0..h {
                for p in 0..w {
                    let phase = 2.0 * PI * ((p * i) as f64 / w as f64 + (q * j) as f64 / h as f64);
                    acc += coeffs[q * w + p] * symbol(p, q) * Complex64::from_polar(1.0, phase);
                }
            }
            out[j * w + i] = acc / (w * h) as f64;
        }
    }
    out
}

pub fn max_abs_diff(a: &ImageField, b: &ImageField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Real cosine DFT mode `cos(2π(p i / W + q j / H))`.
pub fn cos_mode(w: usize, h: usize, p: usize, q: usize) -> ImageField {
    ImageField::from_fn(w, h, |i, j| {
        (2.0 * PI * ((p * i) as f64 / w as f64 + (q * j) as f64 / h as f64)).cos()
    })
    .unwrap()
}

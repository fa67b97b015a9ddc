mod common;

use std::f64::consts::PI;

use common::{max_abs_diff, random_field};
use num_complex::Complex64;
use rdrestore_core::kernels::{
    adjoint_convolve, average_kernel, convolve, disk_kernel, kernel_spectrum, motion_kernel, Kernel,
};
use rdrestore_core::ImageField;

fn blur_kernels() -> Vec<(&'static str, Kernel)> {
    vec![
        ("motion", motion_kernel(20.0, PI / 3.0).unwrap()),
        ("disk", disk_kernel(3.0).unwrap()),
        ("average", average_kernel(5).unwrap()),
    ]
}

/// Spatial circular convolution `Σ k(d) u(x - d)`.
fn naive_convolve(u: &ImageField, k: &Kernel) -> ImageField {
    ImageField::from_fn(u.width(), u.height(), |i, j| {
        k.offsets()
            .map(|(dx, dy, w)| w * u.get(i as isize - dx, j as isize - dy))
            .sum()
    })
    .unwrap()
}

#[test]
fn disk_radius_three_support() {
    let mut count = 0;
    for dy in -10i32..=10 {
        for dx in -10i32..=10 {
            if dx * dx + dy * dy <= 9 {
                count += 1;
            }
        }
    }
    assert_eq!(count, 29);
    let k = disk_kernel(3.0).unwrap();
    assert_eq!(k.dims(), (7, 7));
    let support: Vec<_> = k.offsets().filter(|t| t.2 > 0.0).collect();
    assert_eq!(support.len(), count);
    for (dx, dy, w) in support {
        assert!(dx * dx + dy * dy <= 9);
        assert!((w - 1.0 / count as f64).abs() < 1e-15);
    }
}

#[test]
fn kernels_are_normalized_and_nonnegative() {
    for radius in [0.5, 1.0, 2.3, 3.0, 7.5] {
        let k = disk_kernel(radius).unwrap();
        assert!((k.taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k.is_normalized());
    }
    for (_, k) in blur_kernels() {
        assert!((k.taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k.taps().iter().all(|&t| t >= 0.0));
    }
}

#[test]
fn oblique_motion_kernel_fits_its_stencil() {
    let k = motion_kernel(20.0, PI / 3.0).unwrap();
    assert!(k.width() <= 21 && k.height() <= 21);
    assert_eq!(k.origin(), (k.width() / 2, k.height() / 2));
    // The segment runs up and to the right: mass in the (+x, -y) quadrant.
    let upper_right: f64 = k.offsets().filter(|t| t.0 > 0 && t.1 < 0).map(|t| t.2).sum();
    let upper_left: f64 = k.offsets().filter(|t| t.0 < 0 && t.1 < 0).map(|t| t.2).sum();
    assert!(upper_right > 0.4 && upper_left == 0.0);
}

#[test]
fn spectrum_matches_direct_symbol_sum() {
    let k = average_kernel(3).unwrap();
    let ks = kernel_spectrum(&k, 8, 8).unwrap();
    for q in 0..8 {
        for p in 0..8 {
            let (w1, w2) = (2.0 * PI * p as f64 / 8.0, 2.0 * PI * q as f64 / 8.0);
            let direct: Complex64 = k
                .offsets()
                .map(|(dx, dy, w)| w * Complex64::from_polar(1.0, -(w1 * dx as f64 + w2 * dy as f64)))
                .sum();
            assert!((ks.spectrum().at(p, q) - direct).norm() < 1e-12);
            assert_eq!(ks.conj_spectrum().at(p, q), ks.spectrum().at(p, q).conj());
        }
    }
}

#[test]
fn normalized_kernels_have_unit_dc_gain() {
    for (name, k) in blur_kernels() {
        let ks = kernel_spectrum(&k, 64, 64).unwrap();
        assert!(
            (ks.spectrum().at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            "{name}"
        );
        let c = ImageField::filled(64, 64, 93.0).unwrap();
        let out = convolve(&c, &ks).unwrap();
        assert!(out.data().iter().all(|&x| (x - 93.0).abs() <= 1e-12 * 93.0), "{name}");
    }
}

#[test]
fn spectral_convolution_matches_spatial_loop() {
    let u = random_field(8, 8, 10, 0.0, 255.0);
    let k = average_kernel(3).unwrap();
    let ks = kernel_spectrum(&k, 8, 8).unwrap();
    assert!(max_abs_diff(&convolve(&u, &ks).unwrap(), &naive_convolve(&u, &k)) <= 1e-10);

    let u = random_field(32, 24, 11, 0.0, 255.0);
    for (name, k) in blur_kernels() {
        let ks = kernel_spectrum(&k, 32, 24).unwrap();
        assert!(
            max_abs_diff(&convolve(&u, &ks).unwrap(), &naive_convolve(&u, &k)) <= 1e-10,
            "{name}"
        );
    }
}

#[test]
fn delta_kernel_is_identity() {
    let u = random_field(9, 7, 12, 0.0, 255.0);
    let ks = kernel_spectrum(&Kernel::delta(), 9, 7).unwrap();
    assert!(max_abs_diff(&convolve(&u, &ks).unwrap(), &u) < 1e-12);
    assert!(max_abs_diff(&adjoint_convolve(&u, &ks).unwrap(), &u) < 1e-12);
}

#[test]
fn adjoint_identity_holds() {
    let u = random_field(16, 16, 13, -100.0, 100.0);
    let w = random_field(16, 16, 14, -100.0, 100.0);
    for k in [
        average_kernel(5).unwrap(),
        disk_kernel(3.0).unwrap(),
        motion_kernel(9.0, 0.7).unwrap(),
    ] {
        let ks = kernel_spectrum(&k, 16, 16).unwrap();
        let lhs = convolve(&u, &ks).unwrap().dot(&w).unwrap();
        let rhs = u.dot(&adjoint_convolve(&w, &ks).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
    }
}

#[test]
fn symmetric_kernels_are_self_adjoint() {
    let u = random_field(16, 16, 15, 0.0, 255.0);
    for k in [average_kernel(5).unwrap(), disk_kernel(3.0).unwrap()] {
        let ks = kernel_spectrum(&k, 16, 16).unwrap();
        assert!(max_abs_diff(&convolve(&u, &ks).unwrap(), &adjoint_convolve(&u, &ks).unwrap()) < 1e-10);
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let ks = kernel_spectrum(&average_kernel(3).unwrap(), 8, 8).unwrap();
    let u = ImageField::zeros(8, 9).unwrap();
    assert!(convolve(&u, &ks).is_err());
}

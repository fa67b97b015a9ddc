mod common;

use proptest::prelude::*;
use rdrestore_core::grid::{backward_diff, field_stats, forward_diff, second_diff};
use rdrestore_core::{Axis, ImageField};

type FieldOp<'a> = Box<dyn Fn(&ImageField) -> ImageField + 'a>;

fn field_strategy() -> impl Strategy<Value = ImageField> {
    (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
        prop::collection::vec(-300.0f64..300.0, w * h).prop_map(move |data| ImageField::from_vec(w, h, data).unwrap())
    })
}

fn axis_strategy() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y)]
}

proptest! {
    #[test]
    fn full_period_shift_is_identity(f in field_strategy(), kx in -2isize..3, ky in -2isize..3) {
        let (w, h) = (f.width() as isize, f.height() as isize);
        prop_assert_eq!(f.shifted(kx * w, ky * h), f);
    }

    #[test]
    fn differences_commute_with_shifts(f in field_strategy(), axis in axis_strategy(), dx in -5isize..5, dy in -5isize..5) {
        let h = 0.75;
        prop_assert_eq!(forward_diff(&f.shifted(dx, dy), axis, h).unwrap(), forward_diff(&f, axis, h).unwrap().shifted(dx, dy));
        prop_assert_eq!(backward_diff(&f.shifted(dx, dy), axis, h).unwrap(), backward_diff(&f, axis, h).unwrap().shifted(dx, dy));
        prop_assert_eq!(second_diff(&f.shifted(dx, dy), axis).unwrap(), second_diff(&f, axis).unwrap().shifted(dx, dy));
    }

    #[test]
    fn differences_telescope(f in field_strategy(), axis in axis_strategy()) {
        let scale = f.data().iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let fd = forward_diff(&f, axis, 1.0).unwrap();
        prop_assert!(fd.sum().abs() <= 1e-12 * scale);
        prop_assert!(backward_diff(&f, axis, 1.0).unwrap().sum().abs() <= 1e-12 * scale);
        prop_assert!(backward_diff(&fd, axis, 1.0).unwrap().sum().abs() <= 1e-12 * 4.0 * scale);
    }

    #[test]
    fn differences_are_linear(
        (u, w) in (1usize..7, 1usize..7).prop_flat_map(|(a, b)| {
            let v = prop::collection::vec(-100.0f64..100.0, a * b);
            (v.clone(), v).prop_map(move |(x, y)| (ImageField::from_vec(a, b, x).unwrap(), ImageField::from_vec(a, b, y).unwrap()))
        }),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        axis in axis_strategy(),
    ) {
        let combo = u.zip_map(&w, |x, y| a * x + b * y).unwrap();
        let ops: [FieldOp<'_>; 3] = [
            Box::new(|f| forward_diff(f, axis, 0.5).unwrap()),
            Box::new(|f| backward_diff(f, axis, 0.5).unwrap()),
            Box::new(|f| second_diff(f, axis).unwrap()),
        ];
        for op in &ops {
            let lhs = op(&combo);
            let rhs = op(&u).zip_map(&op(&w), |x, y| a * x + b * y).unwrap();
            for (l, r) in lhs.data().iter().zip(rhs.data()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs().max(2400.0)));
            }
        }
    }
}

#[test]
fn sum_of_fourier_mode_difference_vanishes() {
    let mode = common::cos_mode(16, 8, 3, 0);
    let d = forward_diff(&mode, Axis::X, 1.0).unwrap();
    assert!(d.sum().abs() < 1e-12);
}

#[test]
fn stats_match_naive_reduction() {
    let f = common::random_field(13, 9, 42, -50.0, 300.0);
    let s = field_stats(&f).unwrap();
    let (mut lo, mut hi, mut total, mut ssq) = (f64::MAX, f64::MIN, 0.0, 0.0);
    for j in 0..f.height() {
        for i in 0..f.width() {
            let x = f.get(i as isize, j as isize);
            lo = lo.min(x);
            hi = hi.max(x);
            total += x;
            ssq += x * x;
        }
    }
    assert_eq!(s.min, lo);
    assert_eq!(s.max, hi);
    assert!((s.mean - total / f.len() as f64).abs() < 1e-12);
    assert!((s.sum_of_squares - ssq).abs() <= 1e-12 * ssq);
}

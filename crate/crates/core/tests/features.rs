use std::f64::consts::PI;

use hccr_core::features::{
    decompose_gradient, gabor_responses, gradient_components, sobel, stack_input, FeatureConfig, GaborBankSpec,
    InputMode, CHAINCODE,
};
use hccr_core::GrayImage;
use proptest::prelude::*;

const SIZE: usize = 48;

/// Plane with the most squared response, ignoring a `margin`-pixel border.
fn dominant_plane(planes: &[f64], count: usize, margin: usize) -> usize {
    let energy = |k: usize| -> f64 {
        let plane = &planes[k * SIZE * SIZE..(k + 1) * SIZE * SIZE];
        let mut e = 0.0;
        for y in margin..SIZE - margin {
            for x in margin..SIZE - margin {
                e += plane[y * SIZE + x].powi(2);
            }
        }
        e
    };
    (0..count).max_by(|&a, &b| energy(a).total_cmp(&energy(b))).unwrap()
}

/// Antialiased bright line through the centre. `angle` is measured with
/// `y` pointing down, as in the kernel's coordinates.
fn bar_down(angle: f64, width: f64) -> GrayImage {
    let c = (SIZE - 1) as f64 / 2.0;
    let (s, co) = angle.sin_cos();
    GrayImage::from_fn(SIZE, SIZE, |y, x| {
        let d = (-(x as f64 - c) * s + (y as f64 - c) * co).abs();
        (width / 2.0 + 0.5 - d).clamp(0.0, 1.0) as f32
    })
}

/// Antialiased step whose gradient points along `angle` with `y` up.
fn step_up(angle: f64) -> GrayImage {
    let c = (SIZE - 1) as f64 / 2.0;
    let (s, co) = angle.sin_cos();
    GrayImage::from_fn(SIZE, SIZE, |y, x| {
        let d = (x as f64 - c) * co + (c - y as f64) * s;
        (0.5 + d).clamp(0.0, 1.0) as f32
    })
}

/// The same line described with `y` up.
fn bar_up(angle: f64, width: f64) -> GrayImage {
    bar_down(-angle, width)
}

#[test]
fn gabor_energy_tracks_bar_orientation() {
    let spec = GaborBankSpec::default();
    for (k, theta) in spec.thetas().into_iter().enumerate() {
        // The carrier runs along theta, so the matching stroke is perpendicular to it.
        let img = bar_down(theta + PI / 2.0, spec.wavelength / 2.0);
        let raw = gabor_responses(&img, &spec).unwrap();
        assert_eq!(dominant_plane(raw.data(), 8, spec.kernel_size / 2), k, "orientation {}", k);
    }
}

#[test]
fn rotating_a_step_edge_by_45_degrees_shifts_the_dominant_plane() {
    for offset in [0.0, 10f64.to_radians()] {
        let mut previous = None;
        for k in 0..8 {
            let img = step_up(k as f64 * PI / 4.0 + offset);
            let dom = dominant_plane(gradient_components(&img).data(), 8, 1);
            assert_eq!(dom, k);
            if let Some(p) = previous {
                assert_eq!(dom, (p + 1) % 8);
            }
            previous = Some(dom);
        }
    }
}

#[test]
fn rotating_a_bar_by_45_degrees_shifts_the_dominant_plane_mod_4() {
    for k in 0..8 {
        let a = bar_up(k as f64 * PI / 4.0, 4.0);
        let b = bar_up((k + 1) as f64 * PI / 4.0, 4.0);
        let da = dominant_plane(gradient_components(&a).data(), 8, 1);
        let db = dominant_plane(gradient_components(&b).data(), 8, 1);
        assert_eq!(db % 4, (da + 1) % 4, "bar {}", k);
    }
}

fn image(max: usize) -> impl Strategy<Value = GrayImage> {
    (3..max, 3..max).prop_flat_map(|(h, w)| {
        prop::collection::vec(0.0f32..=1.0, h * w).prop_map(move |d| GrayImage::new(h, w, d).unwrap())
    })
}

proptest! {
    #[test]
    fn decomposition_reconstructs_sobel_gradient(img in image(14)) {
        let (gx, gy) = sobel(&img);
        let planes = gradient_components(&img);
        let n = gx.len();
        prop_assert!(planes.data().iter().all(|&v| v >= 0.0));
        for p in 0..n {
            let (mut rx, mut ry) = (0.0, 0.0);
            for (i, (dx, dy)) in CHAINCODE.iter().enumerate() {
                let v = planes.data()[i * n + p];
                rx += v * dx;
                ry += v * dy;
            }
            prop_assert!((rx - gx[p]).abs() < 1e-5 && (ry - gy[p]).abs() < 1e-5);
        }
    }

    #[test]
    fn decomposition_of_any_vector_is_nonnegative_and_exact(gx in -10.0f64..10.0, gy in -10.0f64..10.0) {
        prop_assume!(gx != 0.0 || gy != 0.0);
        let (i, a, b) = decompose_gradient(gx, gy).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
        let (d0, d1) = (CHAINCODE[i], CHAINCODE[(i + 1) % 8]);
        prop_assert!((a * d0.0 + b * d1.0 - gx).abs() < 1e-9);
        prop_assert!((a * d0.1 + b * d1.1 - gy).abs() < 1e-9);
    }

    #[test]
    fn every_mode_stays_in_unit_range(img in image(26), m in 0usize..5) {
        prop_assume!(img.height() >= 11 && img.width() >= 11);
        let mode = InputMode::ALL[m];
        let cfg = FeatureConfig::for_resolution(img.height().min(img.width()));
        let stack = stack_input(&img, mode, &cfg).unwrap();
        prop_assert_eq!(stack.planes.shape(), &[mode.channels(), img.height(), img.width()][..]);
        prop_assert!(stack.planes.data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }
}

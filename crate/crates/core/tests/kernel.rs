use approx::assert_relative_eq;
use nalgebra::{Rotation3, Unit, Vector3};
use proptest::prelude::*;

use surface_measure::kernel::{
    kernel_absolute, kernel_signed, radial_projection_jacobian, unit_ball_volume, KernelError,
};
use surface_measure::verify::{finite_difference_jacobian, FD_STEP};
use surface_measure::{KernelInput, Point};

fn unit(dim: usize) -> impl Strategy<Value = Point> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter_map("nonzero", move |c| {
        let p = Point::new(c[0], c[1], if dim == 3 { c[2] } else { 0.0 });
        (p.norm() > 0.1).then(|| p.normalize())
    })
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::array::uniform3(-2.0..2.0f64).prop_map(move |c| Point::new(c[0], c[1], if dim == 3 { c[2] } else { 0.0 }))
}

fn input() -> impl Strategy<Value = KernelInput> {
    prop_oneof![Just(2usize), Just(3usize)].prop_flat_map(|dim| {
        (point(dim), unit(dim), point(dim), unit(dim))
            .prop_filter("separated", |(x, _, y, _)| (x - y).norm() > 1e-3)
            .prop_map(move |(x, nx, y, ny)| KernelInput::new(x, nx, y, ny, dim))
    })
}

#[test]
fn circle_pair() {
    let x = Point::new(1.0, 0.0, 0.0);
    let y = Point::new(0.0, 1.0, 0.0);
    let input = KernelInput::new(x, x, y, y, 2);
    assert_relative_eq!(kernel_signed(&input).unwrap(), 2f64.sqrt() / 4.0, max_relative = 1e-15);
    assert_relative_eq!(
        kernel_absolute(&input).unwrap(),
        2f64.sqrt() / 4.0,
        max_relative = 1e-15
    );
}

#[test]
fn orthogonal_offset_vanishes() {
    let input = KernelInput::new(
        Point::new(3.0, 0.0, 1.0),
        Point::new(0.0, 0.0, 1.0),
        Point::new(0.0, 0.0, 1.0),
        Point::new(0.0, 1.0, 0.0),
        3,
    );
    assert_eq!(kernel_absolute(&input).unwrap(), 0.0);
}

#[test]
fn jacobian_examples() {
    let j = radial_projection_jacobian(
        &Point::zeros(),
        &Point::new(0.0, 0.0, 2.0),
        &Point::new(0.0, 0.0, 1.0),
        3,
    )
    .unwrap();
    assert_eq!(j, 0.25);
    assert!(matches!(
        radial_projection_jacobian(&Point::zeros(), &Point::zeros(), &Point::new(0.0, 0.0, 1.0), 3),
        Err(KernelError::Singular(_))
    ));
}

#[test]
fn ball_volumes_match_gamma_form() {
    // π^{k/2} / Γ(k/2 + 1) with Γ evaluated by hand for half-integers.
    let gamma_half = |twice: u32| -> f64 {
        // Γ(twice / 2)
        let mut g = if twice.is_multiple_of(2) {
            1.0
        } else {
            std::f64::consts::PI.sqrt()
        };
        let mut t = if twice.is_multiple_of(2) { 2 } else { 1 };
        while t < twice {
            g *= t as f64 / 2.0;
            t += 2;
        }
        g
    };
    for k in 1..=9u32 {
        let expected = std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k + 2);
        assert_relative_eq!(unit_ball_volume(k), expected, max_relative = 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn symmetric(input in input()) {
        prop_assert_eq!(kernel_signed(&input).unwrap(), kernel_signed(&input.swapped()).unwrap());
    }

    #[test]
    fn normal_parity(input in input()) {
        let k = kernel_signed(&input).unwrap();
        let both = KernelInput { nu_x: -input.nu_x, nu_y: -input.nu_y, ..input };
        let first = KernelInput { nu_x: -input.nu_x, ..input };
        let second = KernelInput { nu_y: -input.nu_y, ..input };
        prop_assert_eq!(kernel_signed(&both).unwrap(), k);
        prop_assert_eq!(kernel_signed(&first).unwrap(), -k);
        prop_assert_eq!(kernel_absolute(&first).unwrap(), k.abs());
        prop_assert_eq!(kernel_absolute(&second).unwrap(), k.abs());
        prop_assert!(kernel_absolute(&input).unwrap() >= k.abs());
    }

    #[test]
    fn homogeneous(input in input(), lambda in 0.01..100.0f64, c in prop::array::uniform3(-3.0..3.0f64)) {
        let center = Point::new(c[0], c[1], if input.dimension == 3 { c[2] } else { 0.0 });
        let scaled = KernelInput {
            x: center + (input.x - center) * lambda,
            y: center + (input.y - center) * lambda,
            ..input
        };
        let k = kernel_signed(&input).unwrap();
        let expected = k * lambda.powi(-(input.dimension as i32 - 1));
        let got = kernel_signed(&scaled).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.abs() + 1e-300, "{} vs {}", got, expected);
    }

    #[test]
    fn rigid_motion_invariant(
        input in input(),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in 0.0..6.3f64,
        t in prop::array::uniform3(-5.0..5.0f64),
    ) {
        let axis = if input.dimension == 2 || Vector3::from(axis).norm() < 0.1 {
            Vector3::z_axis()
        } else {
            Unit::new_normalize(Vector3::from(axis))
        };
        let r = Rotation3::from_axis_angle(&axis, angle);
        let t = Point::new(t[0], t[1], if input.dimension == 3 { t[2] } else { 0.0 });
        let moved = KernelInput::new(r * input.x + t, r * input.nu_x, r * input.y + t, r * input.nu_y, input.dimension);
        let (a, b) = (kernel_signed(&input).unwrap(), kernel_signed(&moved).unwrap());
        let scale = a.abs().max(1e-12 * (kernel_absolute(&input).unwrap() + 1.0));
        prop_assert!((a - b).abs() <= 1e-10 * scale + 1e-14, "{} vs {}", a, b);
    }

    #[test]
    fn absolute_factors_through_jacobian(input in input()) {
        let d = input.y - input.x;
        let j = radial_projection_jacobian(&input.x, &input.y, &input.nu_y, input.dimension).unwrap();
        let product = j * d.dot(&input.nu_x).abs() / d.norm();
        let k = kernel_absolute(&input).unwrap();
        prop_assert!((k - product).abs() <= 1e-13 * k.max(1e-300), "{} vs {}", k, product);
    }

    #[test]
    fn jacobian_matches_finite_differences(input in input()) {
        let d = input.x - input.y;
        prop_assume!(d.norm() > 0.25 && (d.normalize().dot(&input.nu_y)).abs() > 0.05);
        let j = radial_projection_jacobian(&input.x, &input.y, &input.nu_y, input.dimension).unwrap();
        let fd = finite_difference_jacobian(&input.x, &input.y, &input.nu_y, input.dimension, FD_STEP);
        prop_assert!((j - fd).abs() <= 1e-6 * j, "{} vs {}", j, fd);
    }
}

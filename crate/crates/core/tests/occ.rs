use std::f64::consts::PI;

use nalgebra::Rotation3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use surface_measure::occ::{
    direction_sphere_integral, line_intersections, occ_check, occ_sign_sum, random_direction, Degeneracy, OccError,
};
use surface_measure::{generate_shape, hemisphere_patch, Point, ShapeKind, ShapeSpec, SurfaceMesh};

fn shape(kind: ShapeKind, resolution: u32) -> SurfaceMesh {
    generate_shape(&ShapeSpec::new(kind, resolution)).unwrap()
}

fn icosphere(level: u32) -> SurfaceMesh {
    shape(ShapeKind::Icosphere { radius: 1.0 }, level)
}

fn signs(mesh: &SurfaceMesh, base: Point, dir: Point) -> Vec<i8> {
    line_intersections(mesh, &base, &dir)
        .unwrap()
        .iter()
        .map(|h| h.sign)
        .collect()
}

#[test]
fn circle_diameter() {
    // Half-segment rotation puts segment midpoints on the x axis.
    let n = 512;
    let r = *Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), PI / n as f64).matrix();
    let circle = generate_shape(&ShapeSpec::new(ShapeKind::Circle { radius: 1.0 }, n).with_rotation(r)).unwrap();
    let hits = line_intersections(&circle, &Point::zeros(), &Point::x()).unwrap();
    assert_eq!(hits.len(), 2);
    let apothem = (PI / n as f64).cos();
    assert!((hits[0].parameter + apothem).abs() < 1e-12);
    assert!((hits[1].parameter - apothem).abs() < 1e-12);
    assert_eq!((hits[0].sign, hits[1].sign), (-1, 1));
    assert!(hits[0].parameter < hits[1].parameter);
}

#[test]
fn cube_axis_lines() {
    // The exact axis meets a face diagonal; any offset inside the face is clean.
    let cube = shape(ShapeKind::Cube { side: 2.0 }, 1);
    assert!(matches!(
        line_intersections(&cube, &Point::zeros(), &Point::z()),
        Err(OccError::Degenerate {
            kind: Degeneracy::NearBoundary,
            ..
        })
    ));
    for base in [Point::new(0.1, 0.05, 0.0), Point::new(-0.7, 0.2, 5.0)] {
        assert_eq!(signs(&cube, base, Point::z()), vec![-1, 1]);
    }
}

#[test]
fn tangent_line_is_degenerate() {
    let circle = shape(ShapeKind::Circle { radius: 1.0 }, 64);
    let top = circle.vertices()[16];
    assert!((top - Point::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    let result = line_intersections(&circle, &Point::new(0.0, 1.0, 0.0), &Point::x());
    assert!(matches!(result, Err(OccError::Degenerate { .. })), "{result:?}");
    // A line lying along a segment.
    let square = shape(ShapeKind::Square { side: 2.0 }, 4);
    let result = line_intersections(&square, &Point::new(0.0, -1.0, 0.0), &Point::x());
    assert!(matches!(result, Err(OccError::Degenerate { .. })), "{result:?}");
}

#[test]
fn convex_lines_sum_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mesh in [
        icosphere(3),
        shape(
            ShapeKind::Ellipse {
                semi_x: 2.0,
                semi_y: 1.0,
            },
            200,
        ),
    ] {
        let mut tested = 0;
        for _ in 0..200 {
            let dir = random_direction(&mut rng, mesh.dimension());
            let base = random_direction(&mut rng, mesh.dimension()) * 0.5;
            if let Ok(hits) = line_intersections(&mesh, &base, &dir) {
                assert_eq!(hits.len(), 2);
                assert_eq!(occ_sign_sum(&mesh, &base, &dir).unwrap(), 0);
                tested += 1;
            }
        }
        assert!(tested > 190);
    }
}

/// On the star with radii 0.25/1.0 the chord y = 0.3 crosses three lobes;
/// parameters from `tests/oracles/brute_force.py`.
#[test]
fn star_chord_through_three_lobes() {
    let star = shape(
        ShapeKind::StarPolygon {
            spikes: 5,
            inner: 0.25,
            outer: 1.0,
        },
        10,
    );
    let hits = line_intersections(&star, &Point::new(0.0, 0.3, 0.0), &Point::x()).unwrap();
    let expected = [
        -0.9344056432096068,
        -0.8831427779753299,
        -0.12894135627780817,
        0.12894135627780826,
        0.8831427779753322,
        0.9344056432096076,
    ];
    assert_eq!(hits.len(), 6);
    for (h, t) in hits.iter().zip(expected) {
        assert!((h.parameter - t).abs() < 1e-12, "{} vs {t}", h.parameter);
    }
    let s: Vec<i8> = hits.iter().map(|h| h.sign).collect();
    assert_eq!(s, vec![-1, 1, -1, 1, -1, 1]);
    assert_eq!(occ_sign_sum(&star, &Point::new(0.0, 0.3, 0.0), &Point::x()).unwrap(), 0);
    // The same chord on the 400-segment star used elsewhere.
    let fine = shape(
        ShapeKind::StarPolygon {
            spikes: 5,
            inner: 0.25,
            outer: 1.0,
        },
        400,
    );
    assert_eq!(
        signs(&fine, Point::new(0.0, 0.3, 0.0), Point::x()),
        vec![-1, 1, -1, 1, -1, 1]
    );
}

#[test]
fn hemisphere_cap_line_is_unbalanced() {
    let patch = hemisphere_patch(1.0, 3).unwrap();
    let dir = Point::new(0.01, 0.02, 1.0).normalize();
    let sum = occ_sign_sum(&patch, &Point::new(0.013, -0.021, 0.0), &dir).unwrap();
    assert_eq!(sum.abs(), 1);
}

#[test]
fn closed_meshes_pass_the_check() {
    let star = shape(
        ShapeKind::StarPolygon {
            spikes: 5,
            inner: 0.5,
            outer: 1.0,
        },
        400,
    );
    for (mesh, seed) in [
        (icosphere(4), 7),
        (star, 7),
        (shape(ShapeKind::Torus { major: 1.0, minor: 0.3 }, 32), 1),
    ] {
        let r = occ_check(&mesh, 1000, seed).unwrap();
        assert_eq!(r.lines_tested, 1000);
        assert_eq!(r.seed, seed);
        assert_eq!(r.max_abs_sign_sum, 0);
        assert_eq!(r.alternation_violations, 0);
        assert_eq!(r.parity_violations, 0);
        assert!(r.is_clean());
    }
}

#[test]
fn flipped_element_has_a_violating_line() {
    let mesh = icosphere(2);
    let k = 17;
    let flipped = mesh.with_element_flipped(k);
    // Through the flipped element's centroid, slightly off its normal.
    let base = mesh.centroids()[k];
    let dir = (mesh.normals()[k] + Point::new(0.013, -0.007, 0.011)).normalize();
    assert_eq!(occ_sign_sum(&mesh, &base, &dir).unwrap(), 0);
    let sum = occ_sign_sum(&flipped, &base, &dir).unwrap();
    assert_eq!(sum.abs(), 2);
    let s = signs(&flipped, base, dir);
    assert_eq!(s.len(), 2);
    assert_eq!(s[0], s[1]);

    let r = occ_check(&flipped, 1000, 7).unwrap();
    assert!(r.max_abs_sign_sum >= 2);
    assert!(r.alternation_violations >= 1);
}

#[test]
fn open_surface_violations_are_frequent() {
    let r = occ_check(&hemisphere_patch(1.0, 3).unwrap(), 1000, 5).unwrap();
    assert!(r.max_abs_sign_sum >= 1);
    assert!(r.parity_violations > 100, "{r:?}");
}

#[test]
fn direction_negation_flips_every_sign() {
    let mesh = shape(ShapeKind::Torus { major: 1.0, minor: 0.3 }, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tested = 0;
    for _ in 0..300 {
        let dir = random_direction(&mut rng, 3);
        let base = random_direction(&mut rng, 3) * 0.9;
        let (Ok(fwd), Ok(back)) = (
            line_intersections(&mesh, &base, &dir),
            line_intersections(&mesh, &base, &(-dir)),
        ) else {
            continue;
        };
        assert_eq!(fwd.len(), back.len());
        for (a, b) in fwd.iter().zip(back.iter().rev()) {
            assert_eq!(a.element_index, b.element_index);
            assert_eq!(a.sign, -b.sign);
        }
        assert_eq!(occ_sign_sum(&mesh, &base, &(-dir)).unwrap(), 0);
        tested += 1;
    }
    assert!(tested > 250);
}

#[test]
fn check_is_reproducible() {
    let mesh = icosphere(3).with_element_flipped(2);
    let a = occ_check(&mesh, 500, 42).unwrap();
    let b = occ_check(&mesh, 500, 42).unwrap();
    assert_eq!(a, b);
    let pooled = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| occ_check(&mesh, 500, 42).unwrap());
    assert_eq!(a, pooled);
}

#[test]
fn sphere_integral_examples() {
    let e3 = direction_sphere_integral(3, 1_000_000, 1).unwrap();
    assert!((e3 - PI).abs() < 0.005 * PI, "{e3}");
    let e2 = direction_sphere_integral(2, 1_000_000, 1).unwrap();
    assert!((e2 - 2.0).abs() < 0.01, "{e2}");
    assert_eq!(
        direction_sphere_integral(3, 1000, 9).unwrap(),
        direction_sphere_integral(3, 1000, 9).unwrap()
    );
}

/// The estimator's spread shrinks like 1/√N.
#[test]
fn sphere_integral_error_shrinks() {
    let spread = |n: usize| {
        let est: Vec<f64> = (0..40).map(|s| direction_sphere_integral(3, n, s).unwrap()).collect();
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64).sqrt()
    };
    let ratio = spread(1000) / spread(16000);
    assert!((2.5..6.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn bad_arguments() {
    let mesh = icosphere(1);
    assert!(matches!(occ_check(&mesh, 0, 1), Err(OccError::InvalidArgument(_))));
    assert!(direction_sphere_integral(3, 0, 1).is_err());
    assert!(direction_sphere_integral(4, 10, 1).is_err());
    assert!(matches!(
        line_intersections(&mesh, &Point::zeros(), &Point::new(0.0, 0.0, 2.0)),
        Err(OccError::NonUnitDirection(_))
    ));
}

//! Finite-difference check of the radial-projection Jacobian.
//!
//! The oracle differentiates the normalized-direction map `y ↦ (y − x)/‖y − x‖`
//! numerically along an orthonormal basis of the tangent plane at `y` and takes
//! the Gram determinant of the resulting columns. It shares no code with the
//! closed form in [`crate::kernel`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::kernel::{radial_projection_jacobian, KernelError};
use crate::occ::random_direction;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Pass threshold for the relative error.
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;

fn tangent_basis(normal: &Point, dimension: usize) -> Vec<Point> {
    if dimension == 2 {
        return vec![Point::new(-normal.y, normal.x, 0.0)];
    }
    let helper = if normal.x.abs() < 0.9 { Point::x() } else { Point::y() };
    let t1 = (helper - normal * normal.dot(&helper)).normalize();
    let t2 = normal.cross(&t1);
    vec![t1, t2]
}

/// `√det(DᵀD)` where the columns of `D` are central differences of the
/// radial projection about `x`, taken at `y` along the tangent basis of `ν_y`.
pub fn finite_difference_jacobian(x: &Point, y: &Point, nu_y: &Point, dimension: usize, step: f64) -> f64 {
    let project = |p: Point| {
        let d = p - x;
        d / d.norm()
    };
    let columns: Vec<Point> = tangent_basis(nu_y, dimension)
        .iter()
        .map(|t| (project(y + t * step) - project(y - t * step)) / (2.0 * step))
        .collect();
    match columns.as_slice() {
        [a] => a.norm(),
        [a, b] => {
            let gram = a.dot(a) * b.dot(b) - a.dot(b).powi(2);
            gram.max(0.0).sqrt()
        }
        _ => unreachable!("tangent basis has one or two vectors"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianCheck {
    pub samples_per_dimension: usize,
    pub seed: u64,
    pub max_relative_error_2d: f64,
    pub max_relative_error_3d: f64,
}

impl JacobianCheck {
    pub fn max_relative_error(&self) -> f64 {
        self.max_relative_error_2d.max(self.max_relative_error_3d)
    }

    pub fn passed(&self) -> bool {
        self.max_relative_error() < JACOBIAN_TOLERANCE
    }
}

/// Draws a configuration with `x, y` in `[−1, 1]ⁿ`, `‖x − y‖ ≥ 1/4`, and
/// `ν_y` at least 0.05 away from tangency to the chord. Exactly grazing
/// chords give a zero Jacobian, where a relative comparison is meaningless.
pub fn random_configuration<R: Rng + ?Sized>(rng: &mut R, dimension: usize) -> (Point, Point, Point) {
    loop {
        let mut x = Point::zeros();
        let mut y = Point::zeros();
        for k in 0..dimension {
            x[k] = rng.random_range(-1.0..1.0);
            y[k] = rng.random_range(-1.0..1.0);
        }
        let nu = random_direction(rng, dimension);
        let d = x - y;
        let r = d.norm();
        if r >= 0.25 && d.dot(&nu).abs() >= 0.05 * r {
            return (x, y, nu);
        }
    }
}

/// Compares the closed-form Jacobian with the finite-difference oracle on
/// `samples` random configurations in each of the plane and space.
pub fn jacobian_check(samples: usize, seed: u64) -> Result<JacobianCheck, KernelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 2];
    for (slot, dimension) in [2usize, 3].into_iter().enumerate() {
        for _ in 0..samples {
            let (x, y, nu) = random_configuration(&mut rng, dimension);
            let exact = radial_projection_jacobian(&x, &y, &nu, dimension)?;
            let numeric = finite_difference_jacobian(&x, &y, &nu, dimension, FD_STEP);
            worst[slot] = worst[slot].max((numeric - exact).abs() / exact);
        }
    }
    Ok(JacobianCheck {
        samples_per_dimension: samples,
        seed,
        max_relative_error_2d: worst[0],
        max_relative_error_3d: worst[1],
    })
}

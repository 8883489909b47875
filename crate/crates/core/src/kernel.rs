//! Pointwise kernel evaluations.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::Point;

/// Separations below this fraction of the larger point norm count as
/// coincident.
pub const MIN_SEPARATION: f64 = 1e-14;

/// Normals must have unit length to this absolute tolerance.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("unsupported ambient dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("normal has length {0}, expected 1")]
    NonUnitNormal(f64),
    #[error("singular evaluation: points are {0:e} apart")]
    Singular(f64),
}

/// Two surface points with their unit normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInput {
    pub x: Point,
    pub nu_x: Point,
    pub y: Point,
    pub nu_y: Point,
    pub dimension: usize,
}

impl KernelInput {
    pub fn new(x: Point, nu_x: Point, y: Point, nu_y: Point, dimension: usize) -> Self {
        Self {
            x,
            nu_x,
            y,
            nu_y,
            dimension,
        }
    }

    /// The same pair with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.y, self.nu_y, self.x, self.nu_x, self.dimension)
    }

    fn validate(&self) -> Result<(), KernelError> {
        check_dimension(self.dimension)?;
        check_unit(&self.nu_x)?;
        check_unit(&self.nu_y)?;
        check_separation(&self.x, &self.y)
    }
}

fn check_dimension(dimension: usize) -> Result<(), KernelError> {
    if dimension == 2 || dimension == 3 {
        Ok(())
    } else {
        Err(KernelError::UnsupportedDimension(dimension))
    }
}

fn check_unit(v: &Point) -> Result<(), KernelError> {
    let norm = v.norm();
    if (norm - 1.0).abs() <= UNIT_TOLERANCE {
        Ok(())
    } else {
        Err(KernelError::NonUnitNormal(norm))
    }
}

fn check_separation(x: &Point, y: &Point) -> Result<(), KernelError> {
    let d = (x - y).norm();
    if d == 0.0 || d < MIN_SEPARATION * x.norm().max(y.norm()) {
        Err(KernelError::Singular(d))
    } else {
        Ok(())
    }
}

/// `⟨x − y, ν_y⟩ ⟨y − x, ν_x⟩ / ‖x − y‖ⁿ⁺¹` with no argument checks.
///
/// Exactly symmetric under `(x, ν_x) ↔ (y, ν_y)`: both factors swap and the
/// squared distance is unchanged bit for bit.
#[inline]
pub(crate) fn signed_unchecked(x: &Point, nu_x: &Point, y: &Point, nu_y: &Point, dimension: usize) -> f64 {
    let d = x - y;
    let toward_y = d.dot(nu_y);
    let toward_x = -d.dot(nu_x);
    let r2 = d.norm_squared();
    let denom = if dimension == 2 { r2 * r2.sqrt() } else { r2 * r2 };
    toward_y * toward_x / denom
}

/// Signed kernel of the surface-measure identity.
pub fn kernel_signed(input: &KernelInput) -> Result<f64, KernelError> {
    input.validate()?;
    Ok(signed_unchecked(
        &input.x,
        &input.nu_x,
        &input.y,
        &input.nu_y,
        input.dimension,
    ))
}

/// Absolute value of [`kernel_signed`].
pub fn kernel_absolute(input: &KernelInput) -> Result<f64, KernelError> {
    kernel_signed(input).map(f64::abs)
}

/// Jacobian of the radial projection `y ↦ (y − x)/‖y − x‖` restricted to the
/// tangent plane at `y`: `|⟨x − y, ν_y⟩| / ‖x − y‖ⁿ`.
pub fn radial_projection_jacobian(x: &Point, y: &Point, nu_y: &Point, dimension: usize) -> Result<f64, KernelError> {
    check_dimension(dimension)?;
    check_unit(nu_y)?;
    check_separation(x, y)?;
    let d = x - y;
    let r = d.norm();
    Ok(d.dot(nu_y).abs() / r.powi(dimension as i32))
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: u32) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        // V_k = V_{k-2} · 2π / k, which is π^{k/2} / Γ(k/2 + 1) unrolled.
        _ => unit_ball_volume(k - 2) * 2.0 * PI / k as f64,
    }
}

//! Singular boundary-kernel identity for surface measure.
//!
//! For a closed, consistently oriented hypersurface `Σ ⊂ Rⁿ` (n = 2 or 3)
//! with unit normal field `ν`, the kernel
//!
//! ```text
//! K(x, y) = ⟨x − y, ν(y)⟩ ⟨y − x, ν(x)⟩ / ‖x − y‖ⁿ⁺¹
//! ```
//!
//! integrates over `Σ` to the volume `α_{n−1}` of the unit ball in `Rⁿ⁻¹`
//! at almost every `x`, so the normalized double integral recovers the
//! surface measure of `Σ`. Replacing `K` by `|K|` gives an energy that
//! exceeds the surface measure unless the enclosed body is convex.
//!
//! The crate discretizes these integrals on polylines and triangle meshes
//! ([`energy`]), checks the sign-cancellation condition along lines that the
//! identity depends on ([`occ`]), and ships a small CLI ([`cli`]).

pub mod cli;
pub mod energy;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod occ;
pub mod sum;
pub mod verify;

pub use energy::{EnergyError, EnergyReport, QuadratureConfig};
pub use geometry::shapes::{generate_shape, hemisphere_patch, ShapeKind, ShapeSpec};
pub use geometry::{GeometryError, OrientationReport, Point, SurfaceMesh};
pub use kernel::{KernelError, KernelInput};
pub use occ::{LineHit, OccError, OccReport};

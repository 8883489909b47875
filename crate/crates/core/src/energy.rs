//! Discretized identity, surface-measure energy and convexity defect.
//!
//! Every element contributes one evaluation point, its centroid, with the
//! element normal. The inner integral over element `j` uses the centroid of
//! `j` unless the pair is close (centroid distance below
//! `near_field_ratio · (diam_i + diam_j)`), in which case `j` is split into
//! `2^r` sub-segments or `4^r` sub-triangles first. The self pair is skipped:
//! on a flat element `⟨x − y, ν(y)⟩` vanishes identically.
//!
//! Rows of the double sum are evaluated in parallel; each row and the final
//! combination are reduced with [`pairwise_sum`] in element order, so results
//! are identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, SurfaceMesh};
use crate::kernel::{signed_unchecked, unit_ball_volume, MIN_SEPARATION};
use crate::sum::pairwise_sum;

pub const MAX_REFINEMENT_LEVEL: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("mesh has no elements")]
    EmptyMesh,
    #[error("element index {index} out of range for {count} elements")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("elements {0} and {1} have coincident quadrature points")]
    Singular(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Pairs with centroid distance below `ratio · (diam_i + diam_j)` are
    /// refined.
    pub near_field_ratio: f64,
    /// Near elements are split into `2^level` segments or `4^level`
    /// triangles.
    pub refinement_level: u32,
    /// Drop pairs that share a vertex.
    pub exclude_adjacent: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl QuadratureConfig {
    pub const DEFAULT: Self = Self {
        near_field_ratio: 2.0,
        refinement_level: 2,
        exclude_adjacent: false,
    };

    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.near_field_ratio >= 0.0 && self.near_field_ratio.is_finite()) {
            return Err(EnergyError::InvalidConfig(format!(
                "near-field ratio must be a nonnegative number, got {}",
                self.near_field_ratio
            )));
        }
        if self.refinement_level > MAX_REFINEMENT_LEVEL {
            return Err(EnergyError::InvalidConfig(format!(
                "refinement level {} exceeds {MAX_REFINEMENT_LEVEL}",
                self.refinement_level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub dimension: usize,
    pub element_count: usize,
    pub total_measure: f64,
    /// Discrete inner integral at each element centroid; the target is
    /// `α_{n−1}`.
    pub pointwise_values: Vec<f64>,
    pub pointwise_max_abs_error: f64,
    /// `(1/α_{n−1}) Σ_i a_i I_i`; equals the total measure for surfaces that
    /// satisfy the sign-cancellation condition.
    pub signed_energy: f64,
    /// Same double sum with `|K|`.
    pub absolute_energy: f64,
    /// `absolute_energy − total_measure`, unclamped.
    pub convexity_defect: f64,
}

/// Sub-element quadrature points as barycentric weights, with equal weights
/// `1 / len()`.
#[derive(Debug, Clone)]
struct SubRule {
    barycentric: Vec<[f64; 3]>,
}

impl SubRule {
    fn new(dimension: usize, level: u32) -> Self {
        let barycentric = if dimension == 2 {
            let parts = 1usize << level;
            (0..parts)
                .map(|k| {
                    let s = (k as f64 + 0.5) / parts as f64;
                    [1.0 - s, s, 0.0]
                })
                .collect()
        } else {
            let mut tris = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
            for _ in 0..level {
                let mut next = Vec::with_capacity(tris.len() * 4);
                for [a, b, c] in tris {
                    let mid =
                        |p: [f64; 3], q: [f64; 3]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
                    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                    next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
                }
                tris = next;
            }
            tris.into_iter()
                .map(|[a, b, c]| {
                    let third = 1.0 / 3.0;
                    [
                        (a[0] + b[0] + c[0]) * third,
                        (a[1] + b[1] + c[1]) * third,
                        (a[2] + b[2] + c[2]) * third,
                    ]
                })
                .collect()
        };
        Self { barycentric }
    }
}

/// Row of the double sum for one target element.
#[derive(Debug, Clone, Copy)]
struct Row {
    signed: f64,
    absolute: f64,
    min_kernel: f64,
}

struct Evaluator<'a> {
    mesh: &'a SurfaceMesh,
    config: QuadratureConfig,
    rule: SubRule,
}

impl<'a> Evaluator<'a> {
    fn new(mesh: &'a SurfaceMesh, config: &QuadratureConfig) -> Result<Self, EnergyError> {
        config.validate()?;
        if mesh.is_empty() {
            return Err(EnergyError::EmptyMesh);
        }
        Ok(Self {
            mesh,
            config: *config,
            rule: SubRule::new(mesh.dimension(), config.refinement_level),
        })
    }

    fn shares_vertex(&self, i: usize, j: usize) -> bool {
        let a = self.mesh.element(i);
        self.mesh.element(j).iter().any(|v| a.contains(v))
    }

    fn row(&self, i: usize) -> Result<Row, EnergyError> {
        let mesh = self.mesh;
        let n = mesh.dimension();
        let centroids = mesh.centroids();
        let normals = mesh.normals();
        let measures = mesh.measures();
        let diameters = mesh.diameters();
        let x = centroids[i];
        let nu_x = normals[i];
        let guard = MIN_SEPARATION * mesh.scale();

        let m = mesh.element_count();
        let mut signed = Vec::with_capacity(m);
        let mut absolute = Vec::with_capacity(m);
        let mut min_kernel = f64::INFINITY;
        let mut sub_signed = Vec::with_capacity(self.rule.barycentric.len());
        let mut sub_absolute = Vec::with_capacity(self.rule.barycentric.len());
        for j in 0..m {
            if j == i || (self.config.exclude_adjacent && self.shares_vertex(i, j)) {
                continue;
            }
            let nu_y = normals[j];
            let dist = (x - centroids[j]).norm();
            if dist >= self.config.near_field_ratio * (diameters[i] + diameters[j]) {
                if dist <= guard {
                    return Err(EnergyError::Singular(i, j));
                }
                let k = signed_unchecked(&x, &nu_x, &centroids[j], &nu_y, n);
                min_kernel = min_kernel.min(k);
                signed.push(k * measures[j]);
                absolute.push(k.abs() * measures[j]);
                continue;
            }
            let elem = mesh.element(j);
            let mut corners = [Point::zeros(); 3];
            for (c, &v) in corners.iter_mut().zip(elem) {
                *c = mesh.vertices()[v];
            }
            let weight = measures[j] / self.rule.barycentric.len() as f64;
            sub_signed.clear();
            sub_absolute.clear();
            for b in &self.rule.barycentric {
                let mut y = Point::zeros();
                for (c, w) in corners.iter().zip(b) {
                    y += c * *w;
                }
                if (x - y).norm() <= guard {
                    return Err(EnergyError::Singular(i, j));
                }
                let k = signed_unchecked(&x, &nu_x, &y, &nu_y, n);
                min_kernel = min_kernel.min(k);
                sub_signed.push(k * weight);
                sub_absolute.push(k.abs() * weight);
            }
            signed.push(pairwise_sum(&sub_signed));
            absolute.push(pairwise_sum(&sub_absolute));
        }
        Ok(Row {
            signed: pairwise_sum(&signed),
            absolute: pairwise_sum(&absolute),
            min_kernel,
        })
    }

    fn rows(&self) -> Result<Vec<Row>, EnergyError> {
        (0..self.mesh.element_count())
            .into_par_iter()
            .map(|i| self.row(i))
            .collect()
    }

    fn alpha(&self) -> f64 {
        unit_ball_volume(self.mesh.dimension() as u32 - 1)
    }
}

/// Discrete value of `∫ K(x_i, y) dy` at the centroid of element `i`.
pub fn pointwise_identity(
    mesh: &SurfaceMesh,
    element_index: usize,
    config: &QuadratureConfig,
) -> Result<f64, EnergyError> {
    let eval = Evaluator::new(mesh, config)?;
    if element_index >= mesh.element_count() {
        return Err(EnergyError::IndexOutOfRange {
            index: element_index,
            count: mesh.element_count(),
        });
    }
    Ok(eval.row(element_index)?.signed)
}

pub fn pointwise_all(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<Vec<f64>, EnergyError> {
    Ok(Evaluator::new(mesh, config)?.rows()?.iter().map(|r| r.signed).collect())
}

fn weighted_total(mesh: &SurfaceMesh, rows: &[Row], pick: impl Fn(&Row) -> f64) -> f64 {
    let terms: Vec<f64> = rows.iter().zip(mesh.measures()).map(|(r, a)| pick(r) * a).collect();
    pairwise_sum(&terms)
}

pub fn signed_energy(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<f64, EnergyError> {
    let eval = Evaluator::new(mesh, config)?;
    let rows = eval.rows()?;
    Ok(weighted_total(mesh, &rows, |r| r.signed) / eval.alpha())
}

pub fn absolute_energy(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<f64, EnergyError> {
    let eval = Evaluator::new(mesh, config)?;
    let rows = eval.rows()?;
    Ok(weighted_total(mesh, &rows, |r| r.absolute) / eval.alpha())
}

pub fn convexity_defect(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<f64, EnergyError> {
    Ok(absolute_energy(mesh, config)? - mesh.total_measure())
}

/// Smallest kernel value over every evaluated quadrature pair. Nonnegative
/// (up to roundoff) for convex bodies with outward normals.
pub fn min_pair_kernel(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<f64, EnergyError> {
    let rows = Evaluator::new(mesh, config)?.rows()?;
    Ok(rows.iter().map(|r| r.min_kernel).fold(f64::INFINITY, f64::min))
}

/// All energy quantities from a single pass over the element pairs.
pub fn energy_report(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<EnergyReport, EnergyError> {
    let eval = Evaluator::new(mesh, config)?;
    let rows = eval.rows()?;
    let alpha = eval.alpha();
    let total_measure = mesh.total_measure();
    let pointwise_values: Vec<f64> = rows.iter().map(|r| r.signed).collect();
    let pointwise_max_abs_error = pointwise_values.iter().map(|v| (v - alpha).abs()).fold(0.0, f64::max);
    let signed_energy = weighted_total(mesh, &rows, |r| r.signed) / alpha;
    let absolute_energy = weighted_total(mesh, &rows, |r| r.absolute) / alpha;
    Ok(EnergyReport {
        dimension: mesh.dimension(),
        element_count: mesh.element_count(),
        total_measure,
        pointwise_values,
        pointwise_max_abs_error,
        signed_energy,
        absolute_energy,
        convexity_defect: absolute_energy - total_measure,
    })
}

//! Line–surface intersection and the orientation cancellation condition.
//!
//! Along a generic line, the signs `sgn ⟨ω, ν⟩` of the crossings with a
//! closed, consistently oriented surface alternate, so they sum to zero.
//! [`occ_check`] samples random lines and counts every way this can fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, SurfaceMesh};

/// Relative tolerance for near-boundary, grazing and coincident hits.
pub const DEGENERACY_EPS: f64 = 1e-9;

/// Redraw budget per sampled line.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// The line passes within tolerance of an element boundary.
    NearBoundary,
    /// The line is (nearly) parallel to the element and touches it.
    Grazing,
    /// Two hits fall at the same line parameter.
    CoincidentHits,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OccError {
    #[error("degenerate line: {kind:?} at element {element_index}")]
    Degenerate { element_index: usize, kind: Degeneracy },
    #[error("direction has length {0}, expected 1")]
    NonUnitDirection(f64),
    #[error("{exhausted} of {lines} lines exhausted the redraw budget")]
    Pathological { exhausted: usize, lines: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineHit {
    /// Crossing point is `base + parameter · direction`.
    pub parameter: f64,
    pub element_index: usize,
    /// `sgn ⟨direction, ν⟩`.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccReport {
    pub lines_tested: usize,
    pub lines_degenerate_redrawn: usize,
    pub max_abs_sign_sum: i64,
    /// Adjacent crossings along a line with the same nonzero sign.
    pub alternation_violations: usize,
    /// Lines crossing the surface an odd number of times.
    pub parity_violations: usize,
    pub seed: u64,
}

impl OccReport {
    pub fn is_clean(&self) -> bool {
        self.max_abs_sign_sum == 0 && self.alternation_violations == 0 && self.parity_violations == 0
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `w`.
fn orthonormal_complement(w: &Point) -> (Point, Point) {
    let helper = if w.x.abs() <= w.y.abs() && w.x.abs() <= w.z.abs() {
        Point::x()
    } else if w.y.abs() <= w.z.abs() {
        Point::y()
    } else {
        Point::z()
    };
    let u = w.cross(&helper).normalize();
    let v = w.cross(&u);
    (u, v)
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn segment_distance_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - s * ab[0], ap[1] - s * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Crossing of the full line with a single element, `Ok(None)` for a clean
/// miss.
fn intersect_element(
    mesh: &SurfaceMesh,
    e: usize,
    base: &Point,
    direction: &Point,
    frame: (Point, Point),
    tol: f64,
) -> Result<Option<LineHit>, OccError> {
    let degenerate = |kind| OccError::Degenerate { element_index: e, kind };
    let normal = mesh.normals()[e];
    let cos = direction.dot(&normal);
    let elem = mesh.element(e);
    let v = mesh.vertices();

    if mesh.dimension() == 2 {
        let p = v[elem[0]] - base;
        let q = v[elem[1]] - base;
        // signed distances of the endpoints from the line
        let dp = direction.x * p.y - direction.y * p.x;
        let dq = direction.x * q.y - direction.y * q.x;
        if cos.abs() < DEGENERACY_EPS {
            if dp.abs().min(dq.abs()) <= tol || dp * dq < 0.0 {
                return Err(degenerate(Degeneracy::Grazing));
            }
            return Ok(None);
        }
        if dp.abs() <= tol || dq.abs() <= tol {
            return Err(degenerate(Degeneracy::NearBoundary));
        }
        if dp * dq > 0.0 {
            return Ok(None);
        }
        let s = dp / (dp - dq);
        let point = p + (q - p) * s;
        return Ok(Some(LineHit {
            parameter: point.dot(direction),
            element_index: e,
            sign: sign_of(cos),
        }));
    }

    // Project the triangle onto the plane orthogonal to the line; the line
    // hits the triangle iff the origin lies inside the projection.
    let (u, w) = frame;
    let proj = |i: usize| {
        let d = v[elem[i]] - base;
        [d.dot(&u), d.dot(&w)]
    };
    let pts = [proj(0), proj(1), proj(2)];
    if cos.abs() < DEGENERACY_EPS {
        let origin = [0.0, 0.0];
        let touches = (0..3).any(|k| segment_distance_2d(origin, pts[k], pts[(k + 1) % 3]) <= tol);
        if touches {
            return Err(degenerate(Degeneracy::Grazing));
        }
        return Ok(None);
    }
    // The frame satisfies u × w = direction, so the projected winding agrees
    // with sgn ⟨direction, ν⟩.
    let orient = sign_of(cos) as f64;
    let mut min_dist = f64::INFINITY;
    for k in 0..3 {
        let a = pts[(k + 1) % 3];
        let b = pts[(k + 2) % 3];
        let edge = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        // signed distance of the origin from edge a→b, positive inside
        let dist = orient * cross2(a, b) / edge;
        min_dist = min_dist.min(dist);
    }
    if min_dist < -tol {
        return Ok(None);
    }
    if min_dist <= tol {
        return Err(degenerate(Degeneracy::NearBoundary));
    }
    let parameter = (v[elem[0]] - base).dot(&normal) / cos;
    Ok(Some(LineHit {
        parameter,
        element_index: e,
        sign: sign_of(cos),
    }))
}

/// All crossings of the line `base + t·direction`, `t ∈ R`, sorted by `t`.
///
/// Any crossing within `DEGENERACY_EPS · scale` of an element boundary, any
/// grazing contact and any pair of coincident crossings makes the whole line
/// degenerate; callers are expected to draw another line.
pub fn line_intersections(mesh: &SurfaceMesh, base: &Point, direction: &Point) -> Result<Vec<LineHit>, OccError> {
    let len = direction.norm();
    if (len - 1.0).abs() > 1e-12 {
        return Err(OccError::NonUnitDirection(len));
    }
    let tol = DEGENERACY_EPS * mesh.scale();
    let frame = orthonormal_complement(direction);
    let mut hits = Vec::new();
    for e in 0..mesh.element_count() {
        if let Some(hit) = intersect_element(mesh, e, base, direction, frame, tol)? {
            hits.push(hit);
        }
    }
    hits.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    if let Some(pair) = hits.windows(2).find(|w| w[1].parameter - w[0].parameter <= tol) {
        return Err(OccError::Degenerate {
            element_index: pair[1].element_index,
            kind: Degeneracy::CoincidentHits,
        });
    }
    Ok(hits)
}

/// `Σ sgn ⟨ω, ν⟩` over the crossings of one line.
pub fn occ_sign_sum(mesh: &SurfaceMesh, base: &Point, direction: &Point) -> Result<i64, OccError> {
    Ok(line_intersections(mesh, base, direction)?
        .iter()
        .map(|h| h.sign as i64)
        .sum())
}

/// Uniform direction on the unit sphere `S^{n−1}`.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, dimension: usize) -> Point {
    if dimension == 2 {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        return Point::new(t.cos(), t.sin(), 0.0);
    }
    loop {
        let g = Point::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

fn bounding_box(mesh: &SurfaceMesh) -> (Point, Point) {
    let first = mesh.vertices()[0];
    mesh.vertices()
        .iter()
        .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v)))
}

#[derive(Debug, Clone, Copy, Default)]
struct LineOutcome {
    accepted: bool,
    redraws: usize,
    abs_sum: i64,
    alternation: usize,
    odd: bool,
}

fn sample_line(mesh: &SurfaceMesh, seed: u64, index: usize, bounds: (Point, Point)) -> LineOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = mesh.dimension();
    let mut outcome = LineOutcome::default();
    for attempt in 0..MAX_REDRAWS {
        // Even lines pass through a random element centroid (that element's
        // own crossing at t = 0 is counted); odd lines are random chords of
        // the bounding box.
        let base = if index.is_multiple_of(2) {
            mesh.centroids()[rng.random_range(0..mesh.element_count())]
        } else {
            let (lo, hi) = bounds;
            let mut p = Point::zeros();
            for k in 0..n {
                p[k] = if hi[k] > lo[k] {
                    rng.random_range(lo[k]..hi[k])
                } else {
                    lo[k]
                };
            }
            p
        };
        let direction = random_direction(&mut rng, n);
        match line_intersections(mesh, &base, &direction) {
            Ok(hits) => {
                outcome.accepted = true;
                outcome.redraws = attempt;
                outcome.abs_sum = hits.iter().map(|h| h.sign as i64).sum::<i64>().abs();
                outcome.alternation = hits
                    .windows(2)
                    .filter(|w| w[0].sign != 0 && w[0].sign == w[1].sign)
                    .count();
                outcome.odd = hits.len() % 2 == 1;
                return outcome;
            }
            Err(_) => continue,
        }
    }
    outcome.redraws = MAX_REDRAWS;
    outcome
}

/// Samples `num_lines` random lines and tallies sign-sum, alternation and
/// parity failures. Line `k` draws from stream `k` of a ChaCha generator
/// seeded with `seed`, so the report does not depend on scheduling.
pub fn occ_check(mesh: &SurfaceMesh, num_lines: usize, seed: u64) -> Result<OccReport, OccError> {
    if num_lines == 0 {
        return Err(OccError::InvalidArgument("at least one line is required".into()));
    }
    if mesh.is_empty() {
        return Err(OccError::InvalidArgument("mesh has no elements".into()));
    }
    let bounds = bounding_box(mesh);
    let outcomes: Vec<LineOutcome> = (0..num_lines)
        .into_par_iter()
        .map(|k| sample_line(mesh, seed, k, bounds))
        .collect();
    let exhausted = outcomes.iter().filter(|o| !o.accepted).count();
    if exhausted * 10 > num_lines {
        return Err(OccError::Pathological {
            exhausted,
            lines: num_lines,
        });
    }
    let accepted = outcomes.iter().filter(|o| o.accepted);
    Ok(OccReport {
        lines_tested: num_lines - exhausted,
        lines_degenerate_redrawn: outcomes.iter().map(|o| o.redraws).sum(),
        max_abs_sign_sum: accepted.clone().map(|o| o.abs_sum).max().unwrap_or(0),
        alternation_violations: accepted.clone().map(|o| o.alternation).sum(),
        parity_violations: accepted.filter(|o| o.odd).count(),
        seed,
    })
}

/// Monte-Carlo estimate of `(1/2) ∫_{S^{n−1}} |⟨ω, ν⟩| dω` for a fixed unit
/// `ν`, which equals `α_{n−1}` (2 in the plane, π in space).
pub fn direction_sphere_integral(dimension: usize, num_samples: usize, seed: u64) -> Result<f64, OccError> {
    if dimension != 2 && dimension != 3 {
        return Err(OccError::InvalidArgument(format!(
            "dimension {dimension} is not 2 or 3"
        )));
    }
    if num_samples == 0 {
        return Err(OccError::InvalidArgument("at least one sample is required".into()));
    }
    let sphere_area = if dimension == 2 {
        std::f64::consts::TAU
    } else {
        4.0 * std::f64::consts::PI
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..num_samples)
        .map(|_| random_direction(&mut rng, dimension)[dimension - 1].abs())
        .collect();
    let mean = crate::sum::pairwise_sum(&values) / num_samples as f64;
    Ok(0.5 * sphere_area * mean)
}

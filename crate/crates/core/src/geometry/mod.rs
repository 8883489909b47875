//! Discretized hypersurfaces: closed polylines in the plane and triangle
//! meshes in space.
//!
//! Points are stored as [`Point`] (three components) in both dimensions; for
//! `dimension == 2` the third component is always zero.

pub mod shapes;

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::sum::pairwise_sum;

pub type Point = Vector3<f64>;

/// Elements smaller than this fraction of the bounding-box diagonal (squared
/// for triangles) are rejected as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported ambient dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("vertex {vertex} has {found} coordinates, expected {expected}")]
    CoordinateCount {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("element {element} has {found} vertices, expected {expected}")]
    ElementArity {
        element: usize,
        expected: usize,
        found: usize,
    },
    #[error("element {element} references vertex {index}, but only {vertex_count} vertices exist")]
    IndexOutOfRange {
        element: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("element {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("element {element} is degenerate (measure {measure:e})")]
    DegenerateElement { element: usize, measure: f64 },
    #[error("cannot combine meshes of dimension {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("unknown shape kind `{0}`")]
    UnknownKind(String),
}

/// Immutable discretized `(n−1)`-surface with per-element normal, measure and
/// centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    dimension: usize,
    vertices: Vec<Point>,
    // Segments use the first two slots only.
    elements: Vec<[usize; 3]>,
    normals: Vec<Point>,
    measures: Vec<f64>,
    centroids: Vec<Point>,
    diameters: Vec<f64>,
    scale: f64,
}

/// Topological and volumetric orientation summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationReport {
    /// Every facet (segment endpoint, triangle edge) is shared by exactly two
    /// elements.
    pub closed: bool,
    /// No facet is traversed twice in the same direction.
    pub consistent: bool,
    /// `∮ ⟨x, ν⟩ / n`; positive for outward orientation.
    pub signed_volume: f64,
}

/// Builds a mesh from raw coordinate rows and element index rows.
///
/// Normals follow the winding: `(dy, −dx)/‖·‖` for a directed segment (so a
/// counterclockwise curve gets outward normals), and the normalized cross
/// product of the edge vectors for a triangle.
pub fn build_surface(
    dimension: usize,
    vertices: &[Vec<f64>],
    elements: &[Vec<usize>],
) -> Result<SurfaceMesh, GeometryError> {
    check_dimension(dimension)?;
    let points = vertices
        .iter()
        .enumerate()
        .map(|(v, coords)| {
            if coords.len() != dimension {
                return Err(GeometryError::CoordinateCount {
                    vertex: v,
                    expected: dimension,
                    found: coords.len(),
                });
            }
            let mut p = Point::zeros();
            for (k, c) in coords.iter().enumerate() {
                p[k] = *c;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let elems = elements
        .iter()
        .enumerate()
        .map(|(e, idx)| {
            if idx.len() != dimension {
                return Err(GeometryError::ElementArity {
                    element: e,
                    expected: dimension,
                    found: idx.len(),
                });
            }
            let mut out = [0; 3];
            out[..dimension].copy_from_slice(idx);
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    SurfaceMesh::build(dimension, points, elems)
}

fn check_dimension(dimension: usize) -> Result<(), GeometryError> {
    if dimension == 2 || dimension == 3 {
        Ok(())
    } else {
        Err(GeometryError::UnsupportedDimension(dimension))
    }
}

fn bounding_diagonal(vertices: &[Point]) -> f64 {
    let Some(first) = vertices.first() else {
        return 0.0;
    };
    let (lo, hi) = vertices
        .iter()
        .fold((*first, *first), |(lo, hi), v| (lo.inf(v), hi.sup(v)));
    (hi - lo).norm()
}

impl SurfaceMesh {
    /// Planar polyline mesh from directed segments.
    pub fn from_segments(vertices: &[[f64; 2]], segments: &[[usize; 2]]) -> Result<Self, GeometryError> {
        let points = vertices.iter().map(|v| Point::new(v[0], v[1], 0.0)).collect();
        let elems = segments.iter().map(|s| [s[0], s[1], 0]).collect();
        Self::build(2, points, elems)
    }

    /// Planar polyline mesh from closed vertex cycles; loop `[a, b, c]`
    /// yields segments `a→b`, `b→c`, `c→a`.
    pub fn from_loops(vertices: &[[f64; 2]], loops: &[Vec<usize>]) -> Result<Self, GeometryError> {
        let mut segments = Vec::new();
        for lp in loops {
            for k in 0..lp.len() {
                segments.push([lp[k], lp[(k + 1) % lp.len()]]);
            }
        }
        Self::from_segments(vertices, &segments)
    }

    pub fn from_triangles(vertices: &[[f64; 3]], triangles: &[[usize; 3]]) -> Result<Self, GeometryError> {
        let points = vertices.iter().map(|v| Point::new(v[0], v[1], v[2])).collect();
        Self::build(3, points, triangles.to_vec())
    }

    pub(crate) fn build(
        dimension: usize,
        vertices: Vec<Point>,
        elements: Vec<[usize; 3]>,
    ) -> Result<Self, GeometryError> {
        check_dimension(dimension)?;
        for (v, p) in vertices.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(GeometryError::NonFiniteVertex(v));
            }
        }
        let scale = bounding_diagonal(&vertices);
        let m = elements.len();
        let mut normals = Vec::with_capacity(m);
        let mut measures = Vec::with_capacity(m);
        let mut centroids = Vec::with_capacity(m);
        let mut diameters = Vec::with_capacity(m);
        for (e, elem) in elements.iter().enumerate() {
            let idx = &elem[..dimension];
            for &i in idx {
                if i >= vertices.len() {
                    return Err(GeometryError::IndexOutOfRange {
                        element: e,
                        index: i,
                        vertex_count: vertices.len(),
                    });
                }
            }
            if (1..idx.len()).any(|k| idx[..k].contains(&idx[k])) {
                return Err(GeometryError::RepeatedVertex(e));
            }
            let (normal, measure) = if dimension == 2 {
                let d = vertices[idx[1]] - vertices[idx[0]];
                let len = d.norm();
                if len <= DEGENERACY_TOLERANCE * scale {
                    return Err(GeometryError::DegenerateElement {
                        element: e,
                        measure: len,
                    });
                }
                (Point::new(d.y / len, -d.x / len, 0.0), len)
            } else {
                let a = vertices[idx[0]];
                let cross = (vertices[idx[1]] - a).cross(&(vertices[idx[2]] - a));
                let twice = cross.norm();
                let area = 0.5 * twice;
                if area <= DEGENERACY_TOLERANCE * scale * scale {
                    return Err(GeometryError::DegenerateElement {
                        element: e,
                        measure: area,
                    });
                }
                (cross / twice, area)
            };
            let centroid = idx.iter().map(|&i| vertices[i]).sum::<Point>() / idx.len() as f64;
            let mut diameter: f64 = 0.0;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    diameter = diameter.max((vertices[idx[a]] - vertices[idx[b]]).norm());
                }
            }
            normals.push(normal);
            measures.push(measure);
            centroids.push(centroid);
            diameters.push(diameter);
        }
        Ok(Self {
            dimension,
            vertices,
            elements,
            normals,
            measures,
            centroids,
            diameters,
            scale,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Vertex indices of element `i` in winding order.
    pub fn element(&self, i: usize) -> &[usize] {
        &self.elements[i][..self.dimension]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.elements.iter().map(move |e| &e[..self.dimension])
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    /// Largest vertex-to-vertex distance of each element.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    /// Bounding-box diagonal; the length scale for all relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sum of element measures (length for curves, area for surfaces).
    pub fn total_measure(&self) -> f64 {
        pairwise_sum(&self.measures)
    }

    /// Mean of the vertex positions.
    pub fn vertex_centroid(&self) -> Point {
        if self.vertices.is_empty() {
            return Point::zeros();
        }
        self.vertices.iter().sum::<Point>() / self.vertices.len() as f64
    }

    /// Negates every normal and reverses every winding. Measures and
    /// centroids are carried over untouched, so flipping twice returns a
    /// bit-identical mesh.
    pub fn flip_orientation(&self) -> Self {
        let mut out = self.clone();
        for e in 0..out.elements.len() {
            out.reverse_element(e);
        }
        out
    }

    /// Copy of the mesh with element `i` reversed.
    pub fn with_element_flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.reverse_element(i);
        out
    }

    fn reverse_element(&mut self, e: usize) {
        let elem = &mut self.elements[e];
        if self.dimension == 2 {
            elem.swap(0, 1);
        } else {
            elem.swap(1, 2);
        }
        self.normals[e] = -self.normals[e];
    }

    /// Applies `x ↦ linear·x + translation` to every vertex and rebuilds.
    ///
    /// For `dimension == 2` only the upper-left 2×2 block and the first two
    /// translation components are used.
    pub fn transformed(&self, linear: &Matrix3<f64>, translation: &Point) -> Result<Self, GeometryError> {
        let mut lin = *linear;
        let mut shift = *translation;
        if self.dimension == 2 {
            for k in 0..3 {
                lin[(2, k)] = 0.0;
                lin[(k, 2)] = 0.0;
            }
            lin[(2, 2)] = 1.0;
            shift.z = 0.0;
        }
        let vertices = self.vertices.iter().map(|v| lin * v + shift).collect();
        Self::build(self.dimension, vertices, self.elements.clone())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        self.transformed(&(Matrix3::identity() * factor), &Point::zeros())
    }

    /// Disjoint union; vertex indices of later meshes are shifted.
    pub fn merge(meshes: &[SurfaceMesh]) -> Result<Self, GeometryError> {
        let Some(first) = meshes.first() else {
            return Err(GeometryError::InvalidShape("nothing to merge".into()));
        };
        let dimension = first.dimension;
        let mut vertices = Vec::new();
        let mut elements = Vec::new();
        for mesh in meshes {
            if mesh.dimension != dimension {
                return Err(GeometryError::DimensionMismatch(dimension, mesh.dimension));
            }
            let offset = vertices.len();
            vertices.extend_from_slice(&mesh.vertices);
            for e in &mesh.elements {
                let mut shifted = *e;
                for v in shifted.iter_mut().take(dimension) {
                    *v += offset;
                }
                elements.push(shifted);
            }
        }
        Self::build(dimension, vertices, elements)
    }

    /// Divergence-theorem volume `Σ ⟨c_i, ν_i⟩ a_i / n`. Exact per element,
    /// since `⟨x, ν⟩` is constant on a flat element.
    pub fn signed_volume(&self) -> f64 {
        let terms: Vec<f64> = (0..self.element_count())
            .map(|i| self.centroids[i].dot(&self.normals[i]) * self.measures[i])
            .collect();
        pairwise_sum(&terms) / self.dimension as f64
    }

    pub fn check_orientation(&self) -> OrientationReport {
        // facet -> (forward incidences, backward incidences)
        let mut facets: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        let mut record = |a: usize, b: usize| {
            let key = (a.min(b), a.max(b));
            let entry = facets.entry(key).or_default();
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        };
        for elem in self.elements() {
            if self.dimension == 2 {
                // A segment leaves its tail and enters its head; encode the
                // endpoint as a facet with a direction bit.
                record(elem[0], usize::MAX);
                record(usize::MAX, elem[1]);
            } else {
                record(elem[0], elem[1]);
                record(elem[1], elem[2]);
                record(elem[2], elem[0]);
            }
        }
        let closed = facets.values().all(|&(f, b)| f + b == 2);
        let consistent = facets.values().all(|&(f, b)| f <= 1 && b <= 1);
        OrientationReport {
            closed,
            consistent,
            signed_volume: self.signed_volume(),
        }
    }
}

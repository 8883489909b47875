//! Parametric test shapes. Every generator returns a closed, consistently
//! oriented mesh with outward normals.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::Matrix3;

use super::{GeometryError, Point, SurfaceMesh};

/// Largest accepted icosphere subdivision level (20·4⁸ ≈ 1.3M triangles).
pub const MAX_ICOSPHERE_LEVEL: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Circle { radius: f64 },
    Ellipse { semi_x: f64, semi_y: f64 },
    RegularPolygon { radius: f64, sides: u32 },
    StarPolygon { spikes: u32, inner: f64, outer: f64 },
    Square { side: f64 },
    Icosphere { radius: f64 },
    Cube { side: f64 },
    Box { size: [f64; 3] },
    Torus { major: f64, minor: f64 },
}

/// A shape together with its resolution and placement.
///
/// `resolution` means:
/// - circle, ellipse: number of segments;
/// - regular and star polygons, square: total number of segments, a multiple
///   of the corner count (each straight side is split evenly);
/// - icosphere: subdivision level (`20·4^level` triangles);
/// - cube, box: subdivisions per face edge (`12·k²` triangles);
/// - torus: segments around the major circle (half as many, at least 3,
///   around the tube).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub resolution: u32,
    pub center: Point,
    /// Proper rotation applied before translation; identity when `None`.
    /// Planar shapes use the upper-left 2×2 block.
    pub rotation: Option<Matrix3<f64>>,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, resolution: u32) -> Self {
        Self {
            kind,
            resolution,
            center: Point::zeros(),
            rotation: None,
        }
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    pub fn with_rotation(mut self, rotation: Matrix3<f64>) -> Self {
        self.rotation = Some(rotation);
        self
    }
}

impl ShapeKind {
    pub fn dimension(&self) -> usize {
        match self {
            ShapeKind::Circle { .. }
            | ShapeKind::Ellipse { .. }
            | ShapeKind::RegularPolygon { .. }
            | ShapeKind::StarPolygon { .. }
            | ShapeKind::Square { .. } => 2,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Circle { .. } => "circle",
            ShapeKind::Ellipse { .. } => "ellipse",
            ShapeKind::RegularPolygon { .. } => "regular-polygon",
            ShapeKind::StarPolygon { .. } => "star-polygon",
            ShapeKind::Square { .. } => "square",
            ShapeKind::Icosphere { .. } => "icosphere",
            ShapeKind::Cube { .. } => "cube",
            ShapeKind::Box { .. } => "box",
            ShapeKind::Torus { .. } => "torus",
        }
    }

    /// Parses a kind name and `key=value` parameters, filling in defaults for
    /// missing keys. Unrecognized keys are rejected.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, GeometryError> {
        let allowed: &[(&str, f64)] = match name {
            "circle" => &[("radius", 1.0)],
            "ellipse" => &[("a", 1.0), ("b", 0.5)],
            "regular-polygon" => &[("radius", 1.0), ("sides", 6.0)],
            "star-polygon" => &[("spikes", 5.0), ("inner", 0.5), ("outer", 1.0)],
            "square" => &[("side", 2.0)],
            "icosphere" => &[("radius", 1.0)],
            "cube" => &[("side", 2.0)],
            "box" => &[("x", 1.0), ("y", 2.0), ("z", 3.0)],
            "torus" => &[("major", 1.0), ("minor", 0.25)],
            other => return Err(GeometryError::UnknownKind(other.to_string())),
        };
        for key in params.keys() {
            if !allowed.iter().any(|(k, _)| k == key) {
                return Err(GeometryError::InvalidShape(format!(
                    "parameter `{key}` does not apply to {name}"
                )));
            }
        }
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .unwrap_or_else(|| allowed.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).unwrap())
        };
        let count = |key: &str| -> Result<u32, GeometryError> {
            let v = get(key);
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                return Err(GeometryError::InvalidShape(format!("`{key}` must be a whole number")));
            }
            Ok(v as u32)
        };
        Ok(match name {
            "circle" => ShapeKind::Circle { radius: get("radius") },
            "ellipse" => ShapeKind::Ellipse {
                semi_x: get("a"),
                semi_y: get("b"),
            },
            "regular-polygon" => ShapeKind::RegularPolygon {
                radius: get("radius"),
                sides: count("sides")?,
            },
            "star-polygon" => ShapeKind::StarPolygon {
                spikes: count("spikes")?,
                inner: get("inner"),
                outer: get("outer"),
            },
            "square" => ShapeKind::Square { side: get("side") },
            "icosphere" => ShapeKind::Icosphere { radius: get("radius") },
            "cube" => ShapeKind::Cube { side: get("side") },
            "box" => ShapeKind::Box {
                size: [get("x"), get("y"), get("z")],
            },
            _ => ShapeKind::Torus {
                major: get("major"),
                minor: get("minor"),
            },
        })
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let positive = |what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GeometryError::InvalidShape(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            ShapeKind::Circle { radius } | ShapeKind::Icosphere { radius } => positive("radius", radius),
            ShapeKind::Ellipse { semi_x, semi_y } => {
                positive("semi-axis", semi_x)?;
                positive("semi-axis", semi_y)
            }
            ShapeKind::RegularPolygon { radius, sides } => {
                if sides < 3 {
                    return Err(GeometryError::InvalidShape("a polygon needs at least 3 sides".into()));
                }
                positive("radius", radius)
            }
            ShapeKind::StarPolygon { spikes, inner, outer } => {
                if spikes < 3 {
                    return Err(GeometryError::InvalidShape("a star needs at least 3 spikes".into()));
                }
                positive("inner radius", inner)?;
                positive("outer radius", outer)?;
                if inner >= outer {
                    return Err(GeometryError::InvalidShape(
                        "star inner radius must be below the outer radius".into(),
                    ));
                }
                Ok(())
            }
            ShapeKind::Square { side } | ShapeKind::Cube { side } => positive("side", side),
            ShapeKind::Box { size } => size.iter().try_for_each(|&s| positive("side", s)),
            ShapeKind::Torus { major, minor } => {
                positive("major radius", major)?;
                positive("minor radius", minor)?;
                if minor >= major {
                    return Err(GeometryError::InvalidShape(
                        "torus minor radius must be below the major radius".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

pub fn generate_shape(spec: &ShapeSpec) -> Result<SurfaceMesh, GeometryError> {
    spec.kind.validate()?;
    let n = spec.resolution as usize;
    let mesh = match spec.kind {
        ShapeKind::Circle { radius } => ellipse(radius, radius, n)?,
        ShapeKind::Ellipse { semi_x, semi_y } => ellipse(semi_x, semi_y, n)?,
        ShapeKind::RegularPolygon { radius, sides } => {
            let corners: Vec<[f64; 2]> = (0..sides)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / sides as f64;
                    [radius * t.cos(), radius * t.sin()]
                })
                .collect();
            subdivided_polygon(&corners, n)?
        }
        ShapeKind::StarPolygon { spikes, inner, outer } => {
            let count = 2 * spikes;
            let corners: Vec<[f64; 2]> = (0..count)
                .map(|k| {
                    let t = PI / 2.0 + 2.0 * PI * k as f64 / count as f64;
                    let r = if k % 2 == 0 { outer } else { inner };
                    [r * t.cos(), r * t.sin()]
                })
                .collect();
            subdivided_polygon(&corners, n)?
        }
        ShapeKind::Square { side } => {
            let h = side / 2.0;
            subdivided_polygon(&[[-h, -h], [h, -h], [h, h], [-h, h]], n)?
        }
        ShapeKind::Icosphere { radius } => icosphere(radius, spec.resolution)?,
        ShapeKind::Cube { side } => cuboid([side; 3], n)?,
        ShapeKind::Box { size } => cuboid(size, n)?,
        ShapeKind::Torus { major, minor } => torus(major, minor, n)?,
    };
    place(mesh, spec)
}

fn place(mesh: SurfaceMesh, spec: &ShapeSpec) -> Result<SurfaceMesh, GeometryError> {
    if spec.rotation.is_none() && spec.center == Point::zeros() {
        return Ok(mesh);
    }
    let rotation = spec.rotation.unwrap_or_else(Matrix3::identity);
    let block = if mesh.dimension() == 2 {
        let mut r = Matrix3::identity();
        r.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&rotation.fixed_view::<2, 2>(0, 0));
        r
    } else {
        rotation
    };
    if (block.transpose() * block - Matrix3::identity()).amax() > 1e-9 || block.determinant() <= 0.0 {
        return Err(GeometryError::InvalidShape(
            "rotation must be a proper orthogonal matrix".into(),
        ));
    }
    mesh.transformed(&block, &spec.center)
}

fn ellipse(a: f64, b: f64, segments: usize) -> Result<SurfaceMesh, GeometryError> {
    if segments < 3 {
        return Err(GeometryError::InvalidShape(
            "a closed curve needs at least 3 segments".into(),
        ));
    }
    let vertices: Vec<[f64; 2]> = (0..segments)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / segments as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect();
    SurfaceMesh::from_loops(&vertices, &[(0..segments).collect()])
}

/// Counterclockwise polygon through `corners`, each side split into
/// `segments / corners.len()` equal pieces.
fn subdivided_polygon(corners: &[[f64; 2]], segments: usize) -> Result<SurfaceMesh, GeometryError> {
    let sides = corners.len();
    if segments < sides || !segments.is_multiple_of(sides) {
        return Err(GeometryError::InvalidShape(format!(
            "resolution {segments} must be a positive multiple of the {sides} sides"
        )));
    }
    let per_side = segments / sides;
    let mut vertices = Vec::with_capacity(segments);
    for k in 0..sides {
        let a = corners[k];
        let b = corners[(k + 1) % sides];
        for m in 0..per_side {
            let s = m as f64 / per_side as f64;
            vertices.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    SurfaceMesh::from_loops(&vertices, &[(0..segments).collect()])
}

fn icosphere(radius: f64, level: u32) -> Result<SurfaceMesh, GeometryError> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(GeometryError::InvalidShape(format!(
            "icosphere level {level} exceeds {MAX_ICOSPHERE_LEVEL}"
        )));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for face in &mut faces {
        let [a, b, c] = face.map(|i| vertices[i]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            face.swap(1, 2);
        }
    }
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize| {
                *midpoints.entry((i.min(j), i.max(j))).or_insert_with(|| {
                    vertices.push(((vertices[i] + vertices[j]) / 2.0).normalize());
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b);
            let bc = mid(b, c);
            let ca = mid(c, a);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    SurfaceMesh::build(3, vertices, faces)
}

fn cuboid(size: [f64; 3], k: usize) -> Result<SurfaceMesh, GeometryError> {
    if k == 0 {
        return Err(GeometryError::InvalidShape("cube resolution must be at least 1".into()));
    }
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut lattice = |p: [usize; 3]| {
        *index.entry(p).or_insert_with(|| {
            let coord = |axis: usize| (p[axis] as f64 / k as f64 - 0.5) * size[axis];
            vertices.push(Point::new(coord(0), coord(1), coord(2)));
            vertices.len() - 1
        })
    };
    // (fixed axis, fixed value, u axis, v axis) with u × v pointing outward.
    let faces = [
        (0, 0, 2, 1),
        (0, k, 1, 2),
        (1, 0, 0, 2),
        (1, k, 2, 0),
        (2, 0, 1, 0),
        (2, k, 0, 1),
    ];
    let mut triangles = Vec::with_capacity(12 * k * k);
    for &(axis, value, u, v) in &faces {
        let at = |i: usize, j: usize| {
            let mut p = [0; 3];
            p[axis] = value;
            p[u] = i;
            p[v] = j;
            p
        };
        for i in 0..k {
            for j in 0..k {
                let a = lattice(at(i, j));
                let b = lattice(at(i + 1, j));
                let c = lattice(at(i + 1, j + 1));
                let d = lattice(at(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    SurfaceMesh::build(3, vertices, triangles)
}

fn torus(major: f64, minor: f64, around: usize) -> Result<SurfaceMesh, GeometryError> {
    if around < 3 {
        return Err(GeometryError::InvalidShape(
            "torus resolution must be at least 3".into(),
        ));
    }
    let tube = (around / 2).max(3);
    let mut vertices = Vec::with_capacity(around * tube);
    for i in 0..around {
        let u = 2.0 * PI * i as f64 / around as f64;
        for j in 0..tube {
            let v = 2.0 * PI * j as f64 / tube as f64;
            let ring = major + minor * v.cos();
            vertices.push(Point::new(ring * u.cos(), ring * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % around) * tube + (j % tube);
    let mut triangles = Vec::with_capacity(2 * around * tube);
    for i in 0..around {
        for j in 0..tube {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SurfaceMesh::build(3, vertices, triangles)
}

/// Upper half (`z > 0` by centroid) of an icosphere: an open surface that
/// violates the sign-cancellation condition, used as a negative control.
pub fn hemisphere_patch(radius: f64, level: u32) -> Result<SurfaceMesh, GeometryError> {
    let sphere = generate_shape(&ShapeSpec::new(ShapeKind::Icosphere { radius }, level))?;
    let kept: Vec<usize> = (0..sphere.element_count())
        .filter(|&e| sphere.centroids()[e].z > 0.0)
        .collect();
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(kept.len());
    for e in kept {
        let mut tri = [0; 3];
        for (slot, &v) in sphere.element(e).iter().enumerate() {
            tri[slot] = *remap.entry(v).or_insert_with(|| {
                vertices.push(sphere.vertices()[v]);
                vertices.len() - 1
            });
        }
        triangles.push(tri);
    }
    SurfaceMesh::build(3, vertices, triangles)
}

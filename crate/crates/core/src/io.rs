//! Mesh and report files.
//!
//! - OFF (ASCII) for triangle meshes: `OFF`, then `V F E`, `V` vertex lines,
//!   `F` face lines `3 i j k`. Comment lines start with `#`.
//! - Curve JSON for plane polylines:
//!   `{"dimension": 2, "vertices": [[x, y], ...], "loops": [[i, ...], ...]}`.
//! - Reports as one JSON object, or CSV with a header row.
//!
//! Normals are never stored; they are recomputed from the winding on load.
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyReport;
use crate::geometry::{GeometryError, Point, SurfaceMesh};
use crate::occ::OccReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face {face} (line {line}) has {count} vertices; only triangles are supported")]
    NonTriangleFace { face: usize, line: usize, count: usize },
    #[error("face {face} (line {line}) references vertex {index}, but only {vertex_count} vertices exist")]
    FaceIndexOutOfRange {
        face: usize,
        line: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("invalid curve file: {0}")]
    Curve(String),
    #[error("expected a mesh of dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

fn file_error(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.display().to_string(),
        source,
    }
}

/// Meaningful lines of an OFF file with their 1-based line numbers.
fn off_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_field<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, IoError> {
    token.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("cannot parse {what} from `{token}`"),
    })
}

pub fn parse_off(text: &str) -> Result<SurfaceMesh, IoError> {
    let mut lines = off_lines(text);
    let (header_line, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(IoError::Parse {
            line: header_line,
            message: format!("expected `OFF` header, found `{header}`"),
        });
    }
    // Counts may follow the keyword on the same line.
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (line, text) = lines.next().ok_or(IoError::Parse {
            line: header_line + 1,
            message: "missing counts line".into(),
        })?;
        (line, text.split_whitespace().collect())
    } else {
        (header_line, rest)
    };
    if counts.len() < 2 {
        return Err(IoError::Parse {
            line: count_line,
            message: "counts line needs vertex and face counts".into(),
        });
    }
    let vertex_count: usize = parse_field(counts[0], count_line, "vertex count")?;
    let face_count: usize = parse_field(counts[1], count_line, "face count")?;

    let mut vertices = Vec::with_capacity(vertex_count);
    for v in 0..vertex_count {
        let (line, text) = lines.next().ok_or(IoError::Parse {
            line: count_line,
            message: format!("expected {vertex_count} vertices, found {v}"),
        })?;
        let coords: Vec<&str> = text.split_whitespace().collect();
        if coords.len() < 3 {
            return Err(IoError::Parse {
                line,
                message: format!("vertex {v} needs 3 coordinates"),
            });
        }
        vertices.push(Point::new(
            parse_field(coords[0], line, "coordinate")?,
            parse_field(coords[1], line, "coordinate")?,
            parse_field(coords[2], line, "coordinate")?,
        ));
    }
    let mut faces = Vec::with_capacity(face_count);
    for f in 0..face_count {
        let (line, text) = lines.next().ok_or(IoError::Parse {
            line: count_line,
            message: format!("expected {face_count} faces, found {f}"),
        })?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let count: usize = parse_field(tokens[0], line, "face size")?;
        if count != 3 {
            return Err(IoError::NonTriangleFace { face: f, line, count });
        }
        if tokens.len() < 4 {
            return Err(IoError::Parse {
                line,
                message: format!("face {f} lists fewer than 3 indices"),
            });
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            let index: usize = parse_field(tokens[k + 1], line, "vertex index")?;
            if index >= vertex_count {
                return Err(IoError::FaceIndexOutOfRange {
                    face: f,
                    line,
                    index,
                    vertex_count,
                });
            }
            tri[k] = index;
        }
        faces.push(tri);
    }
    Ok(SurfaceMesh::build(3, vertices, faces)?)
}

pub fn load_off(path: impl AsRef<Path>) -> Result<SurfaceMesh, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(file_error(path))?;
    parse_off(&text)
}

pub fn format_off(mesh: &SurfaceMesh) -> Result<String, IoError> {
    if mesh.dimension() != 3 {
        return Err(IoError::DimensionMismatch {
            expected: 3,
            found: mesh.dimension(),
        });
    }
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.vertices().len(), mesh.element_count()));
    for v in mesh.vertices() {
        out.push_str(&format!("{:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    for e in mesh.elements() {
        out.push_str(&format!("3 {} {} {}\n", e[0], e[1], e[2]));
    }
    Ok(out)
}

pub fn save_off(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let text = format_off(mesh)?;
    fs::write(path, text).map_err(file_error(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub dimension: usize,
    pub vertices: Vec<[f64; 2]>,
    pub loops: Vec<Vec<usize>>,
}

impl CurveFile {
    pub fn to_mesh(&self) -> Result<SurfaceMesh, IoError> {
        if self.dimension != 2 {
            return Err(IoError::DimensionMismatch {
                expected: 2,
                found: self.dimension,
            });
        }
        for (l, lp) in self.loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(IoError::Curve(format!(
                    "loop {l} has {} vertices, at least 3 required",
                    lp.len()
                )));
            }
            if let Some(&bad) = lp.iter().find(|&&i| i >= self.vertices.len()) {
                return Err(IoError::Curve(format!(
                    "loop {l} references vertex {bad}, but only {} vertices exist",
                    self.vertices.len()
                )));
            }
        }
        Ok(SurfaceMesh::from_loops(&self.vertices, &self.loops)?)
    }

    /// Splits the segments into closed cycles. Each cycle continues with the
    /// next element when it chains, so meshes built from loops keep their
    /// element order; otherwise the lowest-numbered unused segment leaving the
    /// current head is taken.
    pub fn from_mesh(mesh: &SurfaceMesh) -> Result<Self, IoError> {
        if mesh.dimension() != 2 {
            return Err(IoError::DimensionMismatch {
                expected: 2,
                found: mesh.dimension(),
            });
        }
        let segments: Vec<&[usize]> = mesh.elements().collect();
        let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, seg) in segments.iter().enumerate() {
            outgoing.entry(seg[0]).or_default().push(k);
        }
        let mut used = vec![false; segments.len()];
        let mut loops = Vec::new();
        for start in 0..segments.len() {
            if used[start] {
                continue;
            }
            let origin = segments[start][0];
            let mut lp = vec![origin];
            let mut k = start;
            loop {
                used[k] = true;
                let head = segments[k][1];
                if head == origin {
                    break;
                }
                lp.push(head);
                let next = if k + 1 < segments.len() && !used[k + 1] && segments[k + 1][0] == head {
                    Some(k + 1)
                } else {
                    outgoing.get(&head).and_then(|c| c.iter().copied().find(|&c| !used[c]))
                };
                k = next.ok_or_else(|| {
                    IoError::Curve(format!(
                        "segments starting at element {start} do not form a closed loop"
                    ))
                })?;
            }
            if lp.len() < 3 {
                return Err(IoError::Curve(format!(
                    "loop at element {start} has fewer than 3 vertices"
                )));
            }
            loops.push(lp);
        }
        Ok(Self {
            dimension: 2,
            vertices: mesh.vertices().iter().map(|v| [v.x, v.y]).collect(),
            loops,
        })
    }
}

pub fn load_curve(path: impl AsRef<Path>) -> Result<SurfaceMesh, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(file_error(path))?;
    let file: CurveFile = serde_json::from_str(&text)?;
    file.to_mesh()
}

pub fn save_curve(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = CurveFile::from_mesh(mesh)?;
    let handle = fs::File::create(path).map_err(file_error(path))?;
    let mut writer = BufWriter::new(handle);
    serde_json::to_writer(&mut writer, &file)?;
    writer.write_all(b"\n").map_err(file_error(path))?;
    writer.flush().map_err(file_error(path))
}

/// Loads an OFF or curve JSON file, choosing by extension and falling back to
/// the first bytes of the file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh, IoError> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("off") => load_off(path),
        Some(ext) if ext.eq_ignore_ascii_case("json") => load_curve(path),
        _ => {
            let text = fs::read_to_string(path).map_err(file_error(path))?;
            if text.trim_start().starts_with('{') {
                let file: CurveFile = serde_json::from_str(&text)?;
                file.to_mesh()
            } else {
                parse_off(&text)
            }
        }
    }
}

/// Writes curve JSON for planar meshes and OFF otherwise.
pub fn save_mesh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<(), IoError> {
    if mesh.dimension() == 2 {
        save_curve(mesh, path)
    } else {
        save_off(mesh, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Energy(&'a EnergyReport),
    Occ(&'a OccReport),
}

impl<'a> From<&'a EnergyReport> for Report<'a> {
    fn from(r: &'a EnergyReport) -> Self {
        Report::Energy(r)
    }
}

impl<'a> From<&'a OccReport> for Report<'a> {
    fn from(r: &'a OccReport) -> Self {
        Report::Occ(r)
    }
}

/// Serializes a report. CSV for an energy report lists `(index, value)`
/// pointwise rows; for an OCC report it is a single row of all fields.
pub fn write_report_to<W: Write>(report: Report<'_>, format: ReportFormat, mut out: W) -> Result<(), IoError> {
    match (format, report) {
        (ReportFormat::Json, Report::Energy(r)) => serde_json::to_writer_pretty(&mut out, r)?,
        (ReportFormat::Json, Report::Occ(r)) => serde_json::to_writer_pretty(&mut out, r)?,
        (ReportFormat::Csv, Report::Energy(r)) => {
            let mut csv = csv::Writer::from_writer(&mut out);
            csv.write_record(["index", "value"])?;
            for (i, v) in r.pointwise_values.iter().enumerate() {
                csv.serialize((i, v))?;
            }
            csv.flush().map_err(csv::Error::from)?;
            return Ok(());
        }
        (ReportFormat::Csv, Report::Occ(r)) => {
            let mut csv = csv::Writer::from_writer(&mut out);
            csv.serialize(r)?;
            csv.flush().map_err(csv::Error::from)?;
            return Ok(());
        }
    }
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_report<'a>(
    report: impl Into<Report<'a>>,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let handle = fs::File::create(path).map_err(file_error(path))?;
    let mut writer = BufWriter::new(handle);
    write_report_to(report.into(), format, &mut writer)?;
    writer.flush().map_err(file_error(path))
}

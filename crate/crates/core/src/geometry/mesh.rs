//! Triangle meshes and OBJ / PLY loading.

use crate::material::MaterialTable;
use glam::DVec3;
use std::path::Path;
use thiserror::Error;

/// Faces with less area than this are dropped at load time so downstream
/// normals stay well-defined.
pub const DEGENERATE_AREA_M2: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: parse error at byte {offset}: {message}")]
    BinaryParse {
        path: String,
        offset: usize,
        message: String,
    },
    #[error("{path}:{line}: face vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange {
        path: String,
        line: usize,
        index: i64,
        count: usize,
    },
    #[error("{path}:{line}: unknown material `{name}`")]
    UnknownMaterial {
        path: String,
        line: usize,
        name: String,
    },
    #[error("unknown material `{0}`")]
    UnknownMaterialName(String),
    #[error("unsupported mesh format `{path}` (expected .obj or .ply)")]
    UnsupportedFormat { path: String },
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh sequence is empty")]
    EmptySequence,
    #[error("mesh frame {frame} has {got} vertices, expected {expected}")]
    TopologyMismatch {
        frame: usize,
        got: usize,
        expected: usize,
    },
    #[error("frame index {frame} out of range ({count} mesh frames)")]
    FrameOutOfRange { frame: usize, count: usize },
}

/// An indexed triangle mesh with optional per-face material names.
#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<DVec3>,
    pub faces: Vec<[u32; 3]>,
    /// Per-face material name; `None` falls back to the consumer's default.
    pub face_materials: Vec<Option<String>>,
    /// Count of zero-area faces removed at load/build time.
    pub degenerate_faces_dropped: usize,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<DVec3>, faces: Vec<[u32; 3]>) -> Self {
        let n = faces.len();
        Self {
            vertices,
            faces,
            face_materials: vec![None; n],
            degenerate_faces_dropped: 0,
        }
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn face_area(&self, face: &[u32; 3]) -> f64 {
        let a = self.vertices[face[0] as usize];
        let b = self.vertices[face[1] as usize];
        let c = self.vertices[face[2] as usize];
        0.5 * (b - a).cross(c - a).length()
    }

    /// Remove faces with area below [`DEGENERATE_AREA_M2`], counting them.
    pub fn drop_degenerate_faces(&mut self) {
        let mut kept_faces = Vec::with_capacity(self.faces.len());
        let mut kept_materials = Vec::with_capacity(self.faces.len());
        let mut dropped = 0usize;
        for (face, mat) in self.faces.iter().zip(self.face_materials.iter()) {
            if self.face_area(face) < DEGENERATE_AREA_M2 {
                dropped += 1;
            } else {
                kept_faces.push(*face);
                kept_materials.push(mat.clone());
            }
        }
        self.faces = kept_faces;
        self.face_materials = kept_materials;
        self.degenerate_faces_dropped += dropped;
    }

    /// Validate every named face material against a table.
    pub fn validate_materials(&self, table: &MaterialTable) -> Result<(), MeshError> {
        for name in self.face_materials.iter().flatten() {
            if table.get(name).is_none() {
                return Err(MeshError::UnknownMaterialName(name.clone()));
            }
        }
        Ok(())
    }

    /// Apply a rigid transform (rotation then translation) to all vertices.
    pub fn transformed(&self, rotation: glam::DQuat, translation: DVec3) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = rotation * *v + translation;
        }
        out
    }

    /// Append another mesh, offsetting its face indices.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        self.face_materials.extend(other.face_materials.iter().cloned());
        self.degenerate_faces_dropped += other.degenerate_faces_dropped;
    }
}

/// Load an OBJ or PLY mesh (by extension), validate face indices and material
/// names, and drop degenerate faces.
pub fn load_mesh(path: &Path, table: &MaterialTable) -> Result<TriangleMesh, MeshError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let mut mesh = match ext.as_str() {
        "obj" => parse_obj(path)?,
        "ply" => parse_ply(path)?,
        _ => {
            return Err(MeshError::UnsupportedFormat {
                path: path.display().to_string(),
            })
        }
    };
    mesh.validate_materials(table)?;
    mesh.drop_degenerate_faces();
    Ok(mesh)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, MeshError> {
    std::fs::read(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// OBJ
// ---------------------------------------------------------------------------

fn parse_obj(path: &Path) -> Result<TriangleMesh, MeshError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let path_str = path.display().to_string();
    let mut mesh = TriangleMesh::default();
    let mut current_material: Option<String> = None;

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for coord in &mut coords {
                    let tok = tokens.next().ok_or_else(|| MeshError::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        message: "vertex needs 3 coordinates".into(),
                    })?;
                    *coord = tok.parse().map_err(|_| MeshError::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        message: format!("bad coordinate `{tok}`"),
                    })?;
                }
                mesh.vertices.push(DVec3::from_array(coords));
            }
            Some("f") => {
                let mut indices = Vec::with_capacity(4);
                for tok in tokens {
                    // Forms: v, v/vt, v//vn, v/vt/vn; only the vertex index is used.
                    let v_tok = tok.split('/').next().unwrap_or(tok);
                    let raw_idx: i64 = v_tok.parse().map_err(|_| MeshError::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        message: format!("bad face index `{tok}`"),
                    })?;
                    let count = mesh.vertices.len();
                    let resolved = if raw_idx > 0 {
                        raw_idx - 1
                    } else if raw_idx < 0 {
                        count as i64 + raw_idx
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved >= count as i64 {
                        return Err(MeshError::IndexOutOfRange {
                            path: path_str.clone(),
                            line: line_no,
                            index: raw_idx,
                            count,
                        });
                    }
                    indices.push(resolved as u32);
                }
                if indices.len() < 3 {
                    return Err(MeshError::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        message: "face needs at least 3 vertices".into(),
                    });
                }
                for k in 1..indices.len() - 1 {
                    mesh.faces.push([indices[0], indices[k], indices[k + 1]]);
                    mesh.face_materials.push(current_material.clone());
                }
            }
            Some("usemtl") => {
                let name = tokens.next().ok_or_else(|| MeshError::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    message: "usemtl needs a name".into(),
                })?;
                current_material = Some(name.to_string());
            }
            // Normals, texcoords, groups, smoothing, mtllib: not needed here.
            Some(_) => {}
            None => {}
        }
    }
    Ok(mesh)
}

// ---------------------------------------------------------------------------
// PLY (ASCII and binary little-endian)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyType {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum PlyProperty {
    Scalar { ty: PlyType, name: String },
    List { count_ty: PlyType, item_ty: PlyType, name: String },
}

#[derive(Debug, Clone)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

struct BinaryCursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: String,
}

impl<'a> BinaryCursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MeshError> {
        if self.offset + n > self.bytes.len() {
            return Err(MeshError::BinaryParse {
                path: self.path.clone(),
                offset: self.offset,
                message: format!("unexpected end of file (needed {n} bytes)"),
            });
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn read_value(&mut self, ty: PlyType) -> Result<f64, MeshError> {
        let bytes = self.take(ty.size())?;
        Ok(match ty {
            PlyType::I8 => bytes[0] as i8 as f64,
            PlyType::U8 => bytes[0] as f64,
            PlyType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyType::I32 => i32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            PlyType::U32 => u32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            PlyType::F32 => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            PlyType::F64 => f64::from_le_bytes(bytes.try_into().unwrap()),
        })
    }
}

fn parse_ply(path: &Path) -> Result<TriangleMesh, MeshError> {
    let bytes = read_bytes(path)?;
    let path_str = path.display().to_string();
    let parse_err = |line: usize, message: String| MeshError::Parse {
        path: path_str.clone(),
        line,
        message,
    };

    // Header is always ASCII lines terminated by '\n'.
    let mut lines: Vec<(usize, String)> = Vec::new();
    let header_end = {
        let mut start = 0usize;
        let mut line_no = 0usize;
        loop {
            let end = bytes[start..]
                .iter()
                .position(|&b| b == b'\n')
                .map(|p| start + p)
                .ok_or_else(|| parse_err(line_no + 1, "missing end_header".into()))?;
            line_no += 1;
            let line = String::from_utf8_lossy(&bytes[start..end]).trim().to_string();
            let is_end = line == "end_header";
            lines.push((line_no, line));
            start = end + 1;
            if is_end {
                break start;
            }
        }
    };

    let mut format = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    for (line_no, line) in &lines {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("ply") | Some("comment") | Some("obj_info") | Some("end_header") | None => {}
            Some("format") => {
                format = match tokens.next() {
                    Some("ascii") => Some(PlyFormat::Ascii),
                    Some("binary_little_endian") => Some(PlyFormat::BinaryLittleEndian),
                    Some(other) => {
                        return Err(parse_err(*line_no, format!("unsupported format `{other}`")))
                    }
                    None => return Err(parse_err(*line_no, "format needs a type".into())),
                };
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| parse_err(*line_no, "element needs a name".into()))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(*line_no, "element needs a count".into()))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(*line_no, "property before element".into()))?;
                let first = tokens
                    .next()
                    .ok_or_else(|| parse_err(*line_no, "property needs a type".into()))?;
                if first == "list" {
                    let count_ty = tokens
                        .next()
                        .and_then(PlyType::parse)
                        .ok_or_else(|| parse_err(*line_no, "bad list count type".into()))?;
                    let item_ty = tokens
                        .next()
                        .and_then(PlyType::parse)
                        .ok_or_else(|| parse_err(*line_no, "bad list item type".into()))?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err(*line_no, "list property needs a name".into()))?;
                    element.properties.push(PlyProperty::List {
                        count_ty,
                        item_ty,
                        name: name.to_string(),
                    });
                } else {
                    let ty = PlyType::parse(first)
                        .ok_or_else(|| parse_err(*line_no, format!("bad property type `{first}`")))?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err(*line_no, "property needs a name".into()))?;
                    element.properties.push(PlyProperty::Scalar {
                        ty,
                        name: name.to_string(),
                    });
                }
            }
            Some(other) => {
                return Err(parse_err(*line_no, format!("unknown header keyword `{other}`")))
            }
        }
    }
    let format = format.ok_or_else(|| parse_err(1, "missing format line".into()))?;

    let mut mesh = TriangleMesh::default();
    let header_lines = lines.len();

    match format {
        PlyFormat::Ascii => {
            let body = String::from_utf8_lossy(&bytes[header_end..]).to_string();
            let mut body_lines = body
                .lines()
                .enumerate()
                .map(|(i, l)| (header_lines + i + 1, l.trim().to_string()))
                .filter(|(_, l)| !l.is_empty());
            for element in &elements {
                for _ in 0..element.count {
                    let (line_no, line) = body_lines
                        .next()
                        .ok_or_else(|| parse_err(header_lines, "unexpected end of file".into()))?;
                    let mut tokens = line.split_whitespace();
                    let mut next_value = |what: &str| -> Result<f64, MeshError> {
                        tokens
                            .next()
                            .and_then(|t| t.parse::<f64>().ok())
                            .ok_or_else(|| parse_err(line_no, format!("bad {what}")))
                    };
                    ingest_ply_element(element, &mut mesh, |prop| match prop {
                        PlyProperty::Scalar { name, .. } => {
                            Ok(PlyValue::Scalar(next_value(name)?))
                        }
                        PlyProperty::List { name, .. } => {
                            let count = next_value("list count")? as usize;
                            let mut items = Vec::with_capacity(count);
                            for _ in 0..count {
                                items.push(next_value(name)?);
                            }
                            Ok(PlyValue::List(items))
                        }
                    })
                    .map_err(|m| parse_err(line_no, m))?;
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let mut cursor = BinaryCursor {
                bytes: &bytes,
                offset: header_end,
                path: path_str.clone(),
            };
            for element in &elements {
                for _ in 0..element.count {
                    let offset = cursor.offset;
                    ingest_ply_element(element, &mut mesh, |prop| match prop {
                        PlyProperty::Scalar { ty, .. } => {
                            Ok(PlyValue::Scalar(cursor.read_value(*ty)?))
                        }
                        PlyProperty::List { count_ty, item_ty, .. } => {
                            let count = cursor.read_value(*count_ty)? as usize;
                            let mut items = Vec::with_capacity(count);
                            for _ in 0..count {
                                items.push(cursor.read_value(*item_ty)?);
                            }
                            Ok(PlyValue::List(items))
                        }
                    })
                    .map_err(|m| MeshError::BinaryParse {
                        path: path_str.clone(),
                        offset,
                        message: m,
                    })?;
                }
            }
        }
    }

    // Validate face indices now that all vertices are known.
    let count = mesh.vertices.len();
    for face in &mesh.faces {
        for &idx in face {
            if idx as usize >= count {
                return Err(MeshError::IndexOutOfRange {
                    path: path_str,
                    line: 0,
                    index: idx as i64,
                    count,
                });
            }
        }
    }
    Ok(mesh)
}

enum PlyValue {
    Scalar(f64),
    List(Vec<f64>),
}

/// Pull one element instance through `read` and store vertices/faces.
/// Returns an error message (mapped to a positioned error by the caller).
fn ingest_ply_element<F>(
    element: &PlyElement,
    mesh: &mut TriangleMesh,
    mut read: F,
) -> Result<(), String>
where
    F: FnMut(&PlyProperty) -> Result<PlyValue, MeshError>,
{
    let mut xyz = [f64::NAN; 3];
    let mut face_indices: Option<Vec<f64>> = None;
    for prop in &element.properties {
        let value = read(prop).map_err(|e| e.to_string())?;
        match (prop, value) {
            (PlyProperty::Scalar { name, .. }, PlyValue::Scalar(v)) => {
                if element.name == "vertex" {
                    match name.as_str() {
                        "x" => xyz[0] = v,
                        "y" => xyz[1] = v,
                        "z" => xyz[2] = v,
                        _ => {}
                    }
                }
            }
            (PlyProperty::List { name, .. }, PlyValue::List(items)) => {
                if element.name == "face" && (name == "vertex_indices" || name == "vertex_index") {
                    face_indices = Some(items);
                }
            }
            _ => unreachable!("property kind matches value kind"),
        }
    }
    if element.name == "vertex" {
        if xyz.iter().any(|v| v.is_nan()) {
            return Err("vertex element missing x/y/z properties".into());
        }
        mesh.vertices.push(DVec3::from_array(xyz));
    } else if element.name == "face" {
        let indices = face_indices.ok_or("face element missing vertex index list")?;
        if indices.len() < 3 {
            return Err("face needs at least 3 vertices".into());
        }
        let as_u32: Vec<u32> = indices.iter().map(|&v| v as u32).collect();
        for k in 1..as_u32.len() - 1 {
            mesh.faces.push([as_u32[0], as_u32[k], as_u32[k + 1]]);
            mesh.face_materials.push(None);
        }
    }
    Ok(())
}

//! Synthetic scene construction from a JSON spec of posed primitives and
//! mesh files.
//!
//! Poses are expressed in the radar frame (radar at the origin, boresight +y,
//! up +z): a rotation given as XYZ Euler angles in degrees, applied as
//! `Rz * Ry * Rx`, followed by a translation in meters.

use crate::geometry::mesh::{load_mesh, MeshError, TriangleMesh};
use crate::material::MaterialTable;
use glam::{DQuat, DVec3, EulerRot};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("duplicate object name `{0}`")]
    DuplicateName(String),
    #[error("object `{name}`: malformed pose ({reason})")]
    MalformedPose { name: String, reason: String },
    #[error("object `{name}`: unknown material `{material}`")]
    UnknownMaterial { name: String, material: String },
    #[error("object `{name}`: {source}")]
    Mesh {
        name: String,
        #[source]
        source: MeshError,
    },
    #[error("object `{name}`: primitive dimension must be positive")]
    BadDimension { name: String },
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse scene spec: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Deserialize)]
pub struct SceneSpec {
    pub objects: Vec<SceneObject>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SceneObject {
    pub name: String,
    #[serde(flatten)]
    pub shape: ShapeSpec,
    #[serde(default)]
    pub pose: PoseSpec,
    pub material: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Built-in primitive.
    Primitive(PrimitiveSpec),
    /// Path to an OBJ/PLY file, relative to the scene spec.
    Mesh(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    /// Flat plate in the local x-z plane, normal -y (facing the radar when
    /// placed down-range with an identity rotation).
    Rect {
        width: f64,
        height: f64,
        #[serde(default = "default_divisions")]
        divisions: usize,
    },
    /// Axis-aligned box centered at the local origin, outward normals.
    Box {
        size: [f64; 3],
        #[serde(default = "default_divisions")]
        divisions: usize,
    },
    /// Dihedral corner reflector: two plates meeting at 90 degrees along a
    /// vertical fold at the local origin, opening toward -y.
    Corner {
        width: f64,
        height: f64,
        #[serde(default = "default_divisions")]
        divisions: usize,
    },
}

fn default_divisions() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub rotation_deg: [f64; 3],
}

impl Default for PoseSpec {
    fn default() -> Self {
        Self {
            translation: [0.0; 3],
            rotation_deg: [0.0; 3],
        }
    }
}

impl PoseSpec {
    fn rotation(&self) -> DQuat {
        DQuat::from_euler(
            EulerRot::ZYX,
            self.rotation_deg[2].to_radians(),
            self.rotation_deg[1].to_radians(),
            self.rotation_deg[0].to_radians(),
        )
    }
}

impl SceneSpec {
    pub fn from_json_str(text: &str) -> Result<Self, SceneError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// Build the merged scene mesh with per-face material labels. Mesh paths are
/// resolved relative to `base_dir`.
pub fn build_primitive_scene(
    spec: &SceneSpec,
    table: &MaterialTable,
    base_dir: &Path,
) -> Result<TriangleMesh, SceneError> {
    let mut seen = BTreeSet::new();
    let mut scene = TriangleMesh::default();
    for object in &spec.objects {
        if !seen.insert(object.name.clone()) {
            return Err(SceneError::DuplicateName(object.name.clone()));
        }
        if table.get(&object.material).is_none() {
            return Err(SceneError::UnknownMaterial {
                name: object.name.clone(),
                material: object.material.clone(),
            });
        }
        let pose_values = object
            .pose
            .translation
            .iter()
            .chain(object.pose.rotation_deg.iter());
        if pose_values.clone().any(|v| !v.is_finite()) {
            return Err(SceneError::MalformedPose {
                name: object.name.clone(),
                reason: "non-finite component".into(),
            });
        }

        let mut local = match &object.shape {
            ShapeSpec::Primitive(primitive) => {
                build_primitive(primitive).ok_or_else(|| SceneError::BadDimension {
                    name: object.name.clone(),
                })?
            }
            ShapeSpec::Mesh(mesh) => {
                let path = base_dir.join(mesh);
                load_mesh(&path, table).map_err(|source| SceneError::Mesh {
                    name: object.name.clone(),
                    source,
                })?
            }
        };
        // The object's material fills faces that carry no name of their own.
        for slot in &mut local.face_materials {
            if slot.is_none() {
                *slot = Some(object.material.clone());
            }
        }
        let posed = local.transformed(object.pose.rotation(), DVec3::from_array(object.pose.translation));
        scene.merge(&posed);
    }
    scene.drop_degenerate_faces();
    Ok(scene)
}

fn build_primitive(primitive: &PrimitiveSpec) -> Option<TriangleMesh> {
    match *primitive {
        PrimitiveSpec::Rect { width, height, divisions } => {
            if width <= 0.0 || height <= 0.0 || divisions == 0 {
                return None;
            }
            Some(rect_mesh(width, height, divisions))
        }
        PrimitiveSpec::Box { size, divisions } => {
            if size.iter().any(|&s| s <= 0.0) || divisions == 0 {
                return None;
            }
            Some(box_mesh(DVec3::from_array(size), divisions))
        }
        PrimitiveSpec::Corner { width, height, divisions } => {
            if width <= 0.0 || height <= 0.0 || divisions == 0 {
                return None;
            }
            Some(corner_mesh(width, height, divisions))
        }
    }
}

/// Grid-tessellated plate spanning `u` x `v` around the origin, with
/// `normal = u_dir x v_dir` by winding.
fn grid_plate(
    origin: DVec3,
    u_dir: DVec3,
    v_dir: DVec3,
    u_len: f64,
    v_len: f64,
    divisions: usize,
) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    let n = divisions as u32;
    for j in 0..=n {
        for i in 0..=n {
            let u = (i as f64 / n as f64 - 0.5) * u_len;
            let v = (j as f64 / n as f64 - 0.5) * v_len;
            mesh.vertices.push(origin + u_dir * u + v_dir * v);
        }
    }
    let stride = n + 1;
    for j in 0..n {
        for i in 0..n {
            let a = j * stride + i;
            let b = a + 1;
            let c = a + stride + 1;
            let d = a + stride;
            mesh.faces.push([a, b, c]);
            mesh.faces.push([a, c, d]);
            mesh.face_materials.push(None);
            mesh.face_materials.push(None);
        }
    }
    mesh
}

fn rect_mesh(width: f64, height: f64, divisions: usize) -> TriangleMesh {
    // x across, z up; x cross z = -y so the plate faces the radar.
    grid_plate(DVec3::ZERO, DVec3::X, DVec3::Z, width, height, divisions)
}

fn box_mesh(size: DVec3, divisions: usize) -> TriangleMesh {
    let h = size / 2.0;
    let mut mesh = TriangleMesh::default();
    let faces = [
        // (origin offset, u_dir, v_dir, u_len, v_len) with u x v outward.
        (DVec3::new(0.0, -h.y, 0.0), DVec3::X, DVec3::Z, size.x, size.z), // -y
        (DVec3::new(0.0, h.y, 0.0), DVec3::Z, DVec3::X, size.z, size.x),  // +y
        (DVec3::new(-h.x, 0.0, 0.0), DVec3::Z, DVec3::Y, size.z, size.y), // -x
        (DVec3::new(h.x, 0.0, 0.0), DVec3::Y, DVec3::Z, size.y, size.z),  // +x
        (DVec3::new(0.0, 0.0, -h.z), DVec3::Y, DVec3::X, size.y, size.x), // -z
        (DVec3::new(0.0, 0.0, h.z), DVec3::X, DVec3::Y, size.x, size.y),  // +z
    ];
    for (origin, u, v, ul, vl) in faces {
        mesh.merge(&grid_plate(origin, u, v, ul, vl, divisions));
    }
    mesh
}

fn corner_mesh(width: f64, height: f64, divisions: usize) -> TriangleMesh {
    // Fold along the local z-axis; plates extend toward -y at +-45 degrees so
    // the reflector opens toward the radar. Plate normals face inward (toward
    // the incoming ray) and are mutually orthogonal.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d1 = DVec3::new(-s, -s, 0.0);
    let d2 = DVec3::new(s, -s, 0.0);
    let mut mesh = TriangleMesh::default();
    // Winding picked so the normals u x v come out as z x d1 = (s,-s,0) and
    // d2 x z = (-s,-s,0): orthogonal, both with a -y component toward the radar.
    let plate1 = grid_plate(d1 * (width / 2.0), DVec3::Z, d1, height, width, divisions);
    let plate2 = grid_plate(d2 * (width / 2.0), d2, DVec3::Z, width, height, divisions);
    mesh.merge(&plate1);
    mesh.merge(&plate2);
    mesh
}

/// UV-tessellated ellipsoid with the given semi-axes, outward normals.
/// `stacks >= 2` latitude bands, `slices >= 3` longitude steps. Useful both
/// as a test body and as a synthetic "human" for scripted motion scenes.
pub fn uv_ellipsoid(semi_axes: DVec3, stacks: usize, slices: usize) -> TriangleMesh {
    use std::f64::consts::PI;
    let mut mesh = TriangleMesh::default();
    mesh.vertices.push(DVec3::new(0.0, 0.0, semi_axes.z)); // north pole
    for j in 1..stacks {
        let theta = PI * j as f64 / stacks as f64;
        for i in 0..slices {
            let phi = 2.0 * PI * i as f64 / slices as f64;
            mesh.vertices.push(DVec3::new(
                semi_axes.x * theta.sin() * phi.cos(),
                semi_axes.y * theta.sin() * phi.sin(),
                semi_axes.z * theta.cos(),
            ));
        }
    }
    mesh.vertices.push(DVec3::new(0.0, 0.0, -semi_axes.z)); // south pole
    let ring = |j: usize, i: usize| -> u32 { (1 + (j - 1) * slices + (i % slices)) as u32 };
    let south = (mesh.vertices.len() - 1) as u32;
    for i in 0..slices {
        mesh.faces.push([0, ring(1, i), ring(1, i + 1)]);
    }
    for j in 1..stacks - 1 {
        for i in 0..slices {
            let (a, b, c, d) = (ring(j, i), ring(j + 1, i), ring(j + 1, i + 1), ring(j, i + 1));
            mesh.faces.push([a, b, c]);
            mesh.faces.push([a, c, d]);
        }
    }
    for i in 0..slices {
        mesh.faces.push([south, ring(stacks - 1, i + 1), ring(stacks - 1, i)]);
    }
    mesh.face_materials = vec![None; mesh.faces.len()];
    mesh
}

/// Write a mesh as OBJ (v/f records plus `usemtl` groups for labeled faces).
pub fn write_obj<W: Write>(writer: &mut W, mesh: &TriangleMesh) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(writer, "v {} {} {}", v.x, v.y, v.z)?;
    }
    let mut current: Option<&str> = None;
    for (face, material) in mesh.faces.iter().zip(&mesh.face_materials) {
        let material = material.as_deref();
        if material != current {
            if let Some(name) = material {
                writeln!(writer, "usemtl {name}")?;
            }
            current = material;
        }
        writeln!(writer, "f {} {} {}", face[0] + 1, face[1] + 1, face[2] + 1)?;
    }
    Ok(())
}

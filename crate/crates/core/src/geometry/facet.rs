//! Per-facet reflection attributes.

use crate::geometry::mesh::{MeshError, TriangleMesh, DEGENERATE_AREA_M2};
use crate::material::{Material, MaterialTable};
use glam::DVec3;

/// One visible triangle facet treated as a point reflector: the triangle
/// centroid carries the face's area, outward normal and material.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPoint {
    pub centroid: DVec3,
    pub unit_normal: DVec3,
    pub area_m2: f64,
    pub material: Material,
    pub source_face_id: usize,
}

/// One [`ReflectionPoint`] per face: centroid is the vertex mean, the normal
/// comes from the face winding, area is half the cross-product norm. Faces
/// whose named material is missing from the table are an error; unnamed faces
/// use `default`.
pub fn facet_attributes(
    mesh: &TriangleMesh,
    table: &MaterialTable,
    default: &Material,
) -> Result<Vec<ReflectionPoint>, MeshError> {
    facet_attributes_with_vertices(mesh, &mesh.vertices, table, default)
}

/// Same as [`facet_attributes`] but evaluated on replacement vertex positions
/// (shared topology), as produced by chirp-level interpolation. Faces driven
/// degenerate by the animation are skipped.
pub fn facet_attributes_with_vertices(
    mesh: &TriangleMesh,
    vertices: &[DVec3],
    table: &MaterialTable,
    default: &Material,
) -> Result<Vec<ReflectionPoint>, MeshError> {
    let mut points = Vec::with_capacity(mesh.faces.len());
    for (face_id, face) in mesh.faces.iter().enumerate() {
        let a = vertices[face[0] as usize];
        let b = vertices[face[1] as usize];
        let c = vertices[face[2] as usize];
        let cross = (b - a).cross(c - a);
        let cross_len = cross.length();
        let area = 0.5 * cross_len;
        if area < DEGENERATE_AREA_M2 {
            continue;
        }
        let material = match &mesh.face_materials[face_id] {
            Some(name) => table
                .get(name)
                .ok_or_else(|| MeshError::UnknownMaterialName(name.clone()))?
                .clone(),
            None => default.clone(),
        };
        points.push(ReflectionPoint {
            centroid: (a + b + c) / 3.0,
            unit_normal: cross / cross_len,
            area_m2: area,
            material,
            source_face_id: face_id,
        });
    }
    Ok(points)
}

/// Radius of a triangle's incircle: area over semiperimeter.
pub fn incircle_radius(a: DVec3, b: DVec3, c: DVec3) -> f64 {
    let area = 0.5 * (b - a).cross(c - a).length();
    let s = 0.5 * ((b - a).length() + (c - b).length() + (a - c).length());
    if s <= 0.0 {
        0.0
    } else {
        area / s
    }
}

/// Incircle radii aligned with [`facet_attributes`] output (degenerate faces
/// skipped identically).
pub fn incircle_radii(mesh: &TriangleMesh) -> Vec<f64> {
    incircle_radii_with_vertices(mesh, &mesh.vertices)
}

pub fn incircle_radii_with_vertices(mesh: &TriangleMesh, vertices: &[DVec3]) -> Vec<f64> {
    let mut radii = Vec::with_capacity(mesh.faces.len());
    for face in &mesh.faces {
        let a = vertices[face[0] as usize];
        let b = vertices[face[1] as usize];
        let c = vertices[face[2] as usize];
        let area = 0.5 * (b - a).cross(c - a).length();
        if area < DEGENERATE_AREA_M2 {
            continue;
        }
        radii.push(incircle_radius(a, b, c));
    }
    radii
}

//! Triangle-mesh ingestion, per-facet reflection attributes, visibility
//! culling, chirp-level interpolation, and synthetic scene construction.

mod facet;
mod hpr;
mod hull;
mod mesh;
mod scene;
mod sequence;

pub use facet::{
    facet_attributes, facet_attributes_with_vertices, incircle_radii,
    incircle_radii_with_vertices, incircle_radius, ReflectionPoint,
};
pub use hpr::hpr_visible;
pub use hull::convex_hull_indices;
pub use mesh::{load_mesh, MeshError, TriangleMesh};
pub use scene::{
    build_primitive_scene, uv_ellipsoid, write_obj, PoseSpec, PrimitiveSpec, SceneError,
    SceneObject, SceneSpec, ShapeSpec,
};
pub use sequence::{interpolate_to_chirps, MeshSequence};

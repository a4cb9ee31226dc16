//! Animated mesh sequences and chirp-level interpolation.

use crate::geometry::mesh::{load_mesh, MeshError, TriangleMesh};
use crate::material::MaterialTable;
use crate::radar::RadarConfig;
use glam::DVec3;
use serde::Deserialize;
use std::path::Path;

/// Ordered mesh frames sharing one topology, sampled at a fixed frame rate.
#[derive(Debug, Clone)]
pub struct MeshSequence {
    /// Face list and materials shared by every frame.
    pub topology: TriangleMesh,
    /// Per-frame vertex positions.
    pub frames: Vec<Vec<DVec3>>,
    pub frame_rate_hz: f64,
    /// Per-frame timestamps, seconds; strictly increasing.
    pub timestamps: Vec<f64>,
    /// Default material name for faces without their own label.
    pub material: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceManifest {
    frame_rate_hz: f64,
    #[serde(default)]
    material: Option<String>,
    frames: Vec<String>,
}

impl MeshSequence {
    pub fn new(
        topology: TriangleMesh,
        frames: Vec<Vec<DVec3>>,
        frame_rate_hz: f64,
    ) -> Result<Self, MeshError> {
        if frames.is_empty() {
            return Err(MeshError::EmptySequence);
        }
        let expected = topology.num_vertices();
        for (i, frame) in frames.iter().enumerate() {
            if frame.len() != expected {
                return Err(MeshError::TopologyMismatch {
                    frame: i,
                    got: frame.len(),
                    expected,
                });
            }
        }
        let timestamps = (0..frames.len())
            .map(|i| i as f64 / frame_rate_hz)
            .collect();
        Ok(Self {
            topology,
            frames,
            frame_rate_hz,
            timestamps,
            material: None,
        })
    }

    /// A static mesh translated at constant velocity, one frame per step.
    /// Handy for scripted-motion tests and demo data.
    pub fn from_translation(
        mesh: TriangleMesh,
        velocity_mps: DVec3,
        num_frames: usize,
        frame_rate_hz: f64,
    ) -> Result<Self, MeshError> {
        let frames = (0..num_frames.max(1))
            .map(|i| {
                let offset = velocity_mps * (i as f64 / frame_rate_hz);
                mesh.vertices.iter().map(|v| *v + offset).collect()
            })
            .collect();
        Self::new(mesh, frames, frame_rate_hz)
    }

    /// Load from a manifest JSON: `{"frame_rate_hz": .., "material": ..,
    /// "frames": ["f0.obj", ...]}` with frame paths relative to the manifest.
    pub fn from_manifest(path: &Path, table: &MaterialTable) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let manifest: SequenceManifest =
            serde_json::from_str(&text).map_err(|e| MeshError::Parse {
                path: path.display().to_string(),
                line: 0,
                message: e.to_string(),
            })?;
        if manifest.frames.is_empty() {
            return Err(MeshError::EmptySequence);
        }
        if let Some(name) = &manifest.material {
            if table.get(name).is_none() {
                return Err(MeshError::UnknownMaterialName(name.clone()));
            }
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut topology: Option<TriangleMesh> = None;
        let mut frames = Vec::with_capacity(manifest.frames.len());
        for (i, rel) in manifest.frames.iter().enumerate() {
            let mesh = load_mesh(&base.join(rel), table)?;
            match &topology {
                None => {
                    frames.push(mesh.vertices.clone());
                    topology = Some(mesh);
                }
                Some(t) => {
                    if mesh.num_vertices() != t.num_vertices() {
                        return Err(MeshError::TopologyMismatch {
                            frame: i,
                            got: mesh.num_vertices(),
                            expected: t.num_vertices(),
                        });
                    }
                    frames.push(mesh.vertices);
                }
            }
        }
        let mut seq = Self::new(topology.unwrap(), frames, manifest.frame_rate_hz)?;
        seq.material = manifest.material;
        Ok(seq)
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn duration_s(&self) -> f64 {
        *self.timestamps.last().unwrap_or(&0.0)
    }

    /// Vertex positions at time `t`, linearly interpolated between the
    /// bracketing frames and held constant beyond either end.
    pub fn vertices_at(&self, t: f64) -> Vec<DVec3> {
        let ts = &self.timestamps;
        if t <= ts[0] || self.frames.len() == 1 {
            return self.frames[0].clone();
        }
        if t >= *ts.last().unwrap() {
            return self.frames.last().unwrap().clone();
        }
        let hi = ts.partition_point(|&stamp| stamp <= t).min(ts.len() - 1);
        let lo = hi - 1;
        let alpha = (t - ts[lo]) / (ts[hi] - ts[lo]);
        self.frames[lo]
            .iter()
            .zip(&self.frames[hi])
            .map(|(a, b)| *a + (*b - *a) * alpha)
            .collect()
    }
}

/// Per-chirp vertex arrays for radar frame `frame_index`: chirp `k` is
/// sampled at `frame_index / frame_rate + k * (T_c + idle)`, linearly
/// interpolated between bracketing mesh frames (held at the ends).
pub fn interpolate_to_chirps(
    seq: &MeshSequence,
    config: &RadarConfig,
    frame_index: usize,
) -> Result<Vec<Vec<DVec3>>, MeshError> {
    if seq.frames.is_empty() {
        return Err(MeshError::EmptySequence);
    }
    let frame_start = frame_index as f64 / config.frame_rate_hz;
    let chirp_period = config.chirp_period_s();
    Ok((0..config.chirps_per_frame)
        .map(|k| seq.vertices_at(frame_start + k as f64 * chirp_period))
        .collect())
}

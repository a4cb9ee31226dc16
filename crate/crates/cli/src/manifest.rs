//! Run manifest: what to synthesize and with which knobs.

use crate::error::CliError;
use mmsim_core::geometry::{build_primitive_scene, MeshSequence, SceneSpec, TriangleMesh};
use mmsim_core::material::MaterialTable;
use mmsim_core::radar::RadarConfig;
use mmsim_core::synthesizer::SynthesisOptions;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub radar_config: String,
    #[serde(default)]
    pub materials: Option<String>,
    #[serde(default)]
    pub scene: Option<String>,
    #[serde(default)]
    pub human_sequence: Option<String>,
    pub output_dir: String,
    #[serde(default)]
    pub frames: Option<usize>,
    #[serde(default)]
    pub stages: StagesFile,
    #[serde(default)]
    pub knobs: KnobsFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagesFile {
    #[serde(default = "yes")]
    pub human: bool,
    #[serde(default = "yes")]
    pub env: bool,
    #[serde(default = "yes")]
    pub multipath: bool,
}

fn yes() -> bool {
    true
}

impl Default for StagesFile {
    fn default() -> Self {
        Self {
            human: true,
            env: true,
            multipath: true,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnobsFile {
    #[serde(default)]
    pub hpr_gamma: Option<f64>,
    #[serde(default)]
    pub specular_spread_deg: Option<f64>,
    #[serde(default)]
    pub polarization_mix_deg: Option<f64>,
    #[serde(default)]
    pub cone_half_angle_deg: Option<f64>,
    #[serde(default)]
    pub hpr_per_frame: Option<bool>,
}

/// Flag-level knob overrides; precedence is flag > manifest > default.
#[derive(Debug, Default, Clone, Copy)]
pub struct KnobOverrides {
    pub hpr_gamma: Option<f64>,
    pub specular_spread_deg: Option<f64>,
    pub polarization_mix_deg: Option<f64>,
    pub cone_half_angle_deg: Option<f64>,
    pub hpr_per_frame: Option<bool>,
}

/// Fully resolved inputs for a synthesis run.
pub struct RunManifest {
    pub config: RadarConfig,
    pub materials: MaterialTable,
    pub scene_mesh: Option<TriangleMesh>,
    pub human_sequence: Option<MeshSequence>,
    pub output_dir: PathBuf,
    pub frames: usize,
    pub options: SynthesisOptions,
}

impl RunManifest {
    /// Load the manifest and everything it references. Paths are resolved
    /// relative to the manifest file.
    pub fn load(path: &Path, overrides: &KnobOverrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("failed to read `{}`: {e}", path.display())))?;
        let file: ManifestFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));

        if !file.stages.human && !file.stages.env && !file.stages.multipath {
            return Err(CliError::config("at least one stage must be enabled"));
        }

        let config_path = base.join(&file.radar_config);
        let mut config = RadarConfig::from_json_file(&config_path)?;

        let materials = match &file.materials {
            Some(rel) => MaterialTable::from_json_file(&base.join(rel))?,
            None => MaterialTable::with_defaults(),
        };

        let scene_mesh = match &file.scene {
            Some(rel) => {
                let scene_path = base.join(rel);
                let spec = SceneSpec::from_json_file(&scene_path)?;
                let scene_base = scene_path.parent().unwrap_or_else(|| Path::new("."));
                Some(build_primitive_scene(&spec, &materials, scene_base)?)
            }
            None => None,
        };

        let human_sequence = match &file.human_sequence {
            Some(rel) => Some(MeshSequence::from_manifest(&base.join(rel), &materials)?),
            None => None,
        };

        // Knob resolution: flag > manifest > default.
        let knobs = &file.knobs;
        let pick = |flag: Option<f64>, manifest: Option<f64>, default: f64| {
            flag.or(manifest).unwrap_or(default)
        };
        if let Some(eta_deg) = overrides.specular_spread_deg.or(knobs.specular_spread_deg) {
            config.specular_spread_rad = eta_deg.to_radians();
        }
        config.validate()?;
        let defaults = SynthesisOptions::default();
        let options = SynthesisOptions {
            human: file.stages.human,
            env: file.stages.env,
            multipath: file.stages.multipath,
            hpr_gamma: pick(overrides.hpr_gamma, knobs.hpr_gamma, defaults.hpr_gamma),
            hpr_per_frame: overrides
                .hpr_per_frame
                .or(knobs.hpr_per_frame)
                .unwrap_or(defaults.hpr_per_frame),
            polarization_mix_rad: pick(
                overrides.polarization_mix_deg,
                knobs.polarization_mix_deg,
                defaults.polarization_mix_rad.to_degrees(),
            )
            .to_radians(),
            cone_half_angle_rad: pick(
                overrides.cone_half_angle_deg,
                knobs.cone_half_angle_deg,
                defaults.cone_half_angle_rad.to_degrees(),
            )
            .to_radians(),
        };

        // Default frame count: cover the human sequence, else one frame.
        let frames = file.frames.unwrap_or_else(|| match &human_sequence {
            Some(seq) => {
                let covered = (seq.duration_s() * config.frame_rate_hz).floor() as usize;
                covered.max(1)
            }
            None => 1,
        });
        if frames == 0 {
            return Err(CliError::config("frames must be at least 1"));
        }

        Ok(Self {
            config,
            materials,
            scene_mesh,
            human_sequence,
            output_dir: base.join(&file.output_dir),
            frames,
            options,
        })
    }
}

//! Error-to-exit-code mapping: 2 = configuration/input error, 3 = I/O error,
//! 4 = numeric failure.

use mmsim_core::cube::CubeError;
use mmsim_core::dsp::DspError;
use mmsim_core::geometry::{MeshError, SceneError};
use mmsim_core::material::MaterialError;
use mmsim_core::metrics::MetricsError;
use mmsim_core::mmgn::MmgnError;
use mmsim_core::radar::ConfigError;
use mmsim_core::synthesizer::SynthError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Io = 3,
    Numeric = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl fmt::Display) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.to_string(),
        }
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self {
            kind: ExitKind::Io,
            message: message.to_string(),
        }
    }

    pub fn numeric(message: impl fmt::Display) -> Self {
        Self {
            kind: ExitKind::Numeric,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        match e {
            MaterialError::Io { .. } => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io { .. } => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::Io { .. } => Self::io(e),
            SceneError::Mesh {
                source: MeshError::Io { .. },
                ..
            } => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<MmgnError> for CliError {
    fn from(e: MmgnError) -> Self {
        Self::io(e)
    }
}

impl From<DspError> for CliError {
    fn from(e: DspError) -> Self {
        match e {
            DspError::Io(_) | DspError::Png(_) => Self::io(e),
            _ => Self::config(e),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        Self::config(e)
    }
}

impl From<CubeError> for CliError {
    fn from(e: CubeError) -> Self {
        Self::numeric(e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Config(inner) => inner.into(),
            SynthError::Mesh(inner) => inner.into(),
            SynthError::Reflectance(inner) => Self::numeric(inner),
            SynthError::Cube(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::config(e)
    }
}

//! Physics-based synthesis of raw FMCW mmWave radar IF signals from animated
//! triangle meshes, plus the standard signature processing chain and
//! similarity scoring used to evaluate synthesized signal sets.
//!
//! The pipeline is organized as:
//!
//! - [`radar`] / [`material`]: radar configuration, derived sensing metrics,
//!   material electromagnetic properties.
//! - [`geometry`]: mesh ingestion (OBJ/PLY), per-facet reflection attributes,
//!   hidden-point-removal visibility culling, chirp-level mesh interpolation,
//!   and primitive scene construction.
//! - [`reflectance`]: scalar reflection/attenuation coefficients (phase,
//!   orientation, Fresnel, antenna gains) and assembled amplitudes.
//! - [`synthesizer`]: per-chirp IF-signal assembly over the TDM-MIMO virtual
//!   array for human and environment returns.
//! - [`multipath`]: two-bounce reflection-path discovery and synthesis.
//! - [`dsp`]: Range/Doppler/Angle FFTs, static clutter removal, micro-Doppler
//!   spectrograms.
//! - [`metrics`]: MS-SSIM and MAE/SD similarity scoring between heatmaps.
//! - [`mmgn`]: the binary signal-cube file format shared with external tools.

pub mod cube;
pub mod dsp;
pub mod geometry;
pub mod material;
pub mod metrics;
pub mod mmgn;
pub mod multipath;
pub mod radar;
pub mod reflectance;
pub mod synthesizer;

pub use cube::FrameCube;
pub use material::{Material, MaterialTable};
pub use radar::{derive_radar_metrics, virtual_array, DerivedMetrics, RadarConfig, SPEED_OF_LIGHT};

//! Radar configuration and derived sensing metrics.
//!
//! The coordinate frame is fixed throughout the crate: the radar sits at the
//! origin, boresight along +y, up along +z, and antenna element positions are
//! given in wavelengths in that frame.

use glam::DVec3;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

/// Speed of light in vacuum (m/s), exact by SI definition.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}` must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("config field `{field}` must be nonzero")]
    ZeroCount { field: &'static str },
    #[error("sampled dwell {dwell_s:.3e} s exceeds ramp time {ramp_s:.3e} s")]
    DwellExceedsRamp { dwell_s: f64, ramp_s: f64 },
    #[error("antenna layout has {got} entries, expected num_tx + num_rx = {expected}")]
    LayoutMismatch { got: usize, expected: usize },
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse radar config: {0}")]
    Json(#[from] serde_json::Error),
}

/// Chirp, frame, antenna and gain parameters of the simulated radar.
///
/// Angles are stored in radians; the JSON file representation uses degrees
/// and is converted on load.
#[derive(Debug, Clone)]
pub struct RadarConfig {
    pub start_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub ramp_time_s: f64,
    pub idle_time_s: f64,
    pub chirps_per_frame: usize,
    pub samples_per_chirp: usize,
    pub sample_rate_hz: f64,
    pub frame_rate_hz: f64,
    /// Transmit power, linear scale.
    pub tx_power: f64,
    /// TX antenna gain, linear scale.
    pub tx_gain: f64,
    /// RX antenna gain, linear scale.
    pub rx_gain: f64,
    pub num_tx: usize,
    pub num_rx: usize,
    /// TX element positions followed by RX element positions, in wavelengths.
    pub antenna_layout: Vec<DVec3>,
    /// Std-dev of the Gaussian azimuth gain pattern (rad).
    pub gain_sigma_azimuth_rad: f64,
    /// Std-dev of the Gaussian elevation gain pattern (rad).
    pub gain_sigma_elevation_rad: f64,
    /// Angular spread of the quasi-specular reflection lobe (rad).
    pub specular_spread_rad: f64,
}

/// Quantities derived from a [`RadarConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMetrics {
    pub slope_hz_per_s: f64,
    pub wavelength_m: f64,
    pub range_resolution_m: f64,
    pub max_range_m: f64,
    pub max_speed_mps: f64,
    pub speed_resolution_mps: f64,
    pub if_bin_hz: f64,
}

impl RadarConfig {
    /// Preset matching a 60 GHz evaluation-kit style radar: 4 GHz bandwidth,
    /// 28 us ramp / 7 us idle, 255 chirps of 256 samples at 10 Msps, 15 fps,
    /// 3 TX x 4 RX. The two outer TX and the four half-wavelength RX form an
    /// 8-element azimuth ULA; the middle TX is raised half a wavelength for
    /// elevation sensing.
    pub fn default_60ghz() -> Self {
        Self {
            start_frequency_hz: 60e9,
            bandwidth_hz: 4e9,
            ramp_time_s: 28e-6,
            idle_time_s: 7e-6,
            chirps_per_frame: 255,
            samples_per_chirp: 256,
            sample_rate_hz: 10e6,
            frame_rate_hz: 15.0,
            tx_power: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            num_tx: 3,
            num_rx: 4,
            antenna_layout: vec![
                // TX
                DVec3::new(0.0, 0.0, 0.0),
                DVec3::new(1.0, 0.0, 0.5),
                DVec3::new(2.0, 0.0, 0.0),
                // RX
                DVec3::new(0.0, 0.0, 0.0),
                DVec3::new(0.5, 0.0, 0.0),
                DVec3::new(1.0, 0.0, 0.0),
                DVec3::new(1.5, 0.0, 0.0),
            ],
            gain_sigma_azimuth_rad: 35f64.to_radians(),
            gain_sigma_elevation_rad: 35f64.to_radians(),
            specular_spread_rad: 0.3,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positives: [(&'static str, f64); 10] = [
            ("start_frequency_hz", self.start_frequency_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("ramp_time_s", self.ramp_time_s),
            ("idle_time_s", self.idle_time_s),
            ("sample_rate_hz", self.sample_rate_hz),
            ("frame_rate_hz", self.frame_rate_hz),
            ("tx_power", self.tx_power),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("specular_spread_rad", self.specular_spread_rad),
        ];
        for (field, value) in positives {
            if !value.is_finite() || value <= 0.0 {
                return Err(ConfigError::NonPositive { field, value });
            }
        }
        for (field, value) in [
            ("gain_sigma_azimuth_rad", self.gain_sigma_azimuth_rad),
            ("gain_sigma_elevation_rad", self.gain_sigma_elevation_rad),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ConfigError::NonPositive { field, value });
            }
        }
        for (field, value) in [
            ("chirps_per_frame", self.chirps_per_frame),
            ("samples_per_chirp", self.samples_per_chirp),
            ("num_tx", self.num_tx),
            ("num_rx", self.num_rx),
        ] {
            if value == 0 {
                return Err(ConfigError::ZeroCount { field });
            }
        }
        let dwell = self.samples_per_chirp as f64 / self.sample_rate_hz;
        if dwell > self.ramp_time_s {
            return Err(ConfigError::DwellExceedsRamp {
                dwell_s: dwell,
                ramp_s: self.ramp_time_s,
            });
        }
        if self.antenna_layout.len() != self.num_tx + self.num_rx {
            return Err(ConfigError::LayoutMismatch {
                got: self.antenna_layout.len(),
                expected: self.num_tx + self.num_rx,
            });
        }
        Ok(())
    }

    /// Chirp repetition period: ramp plus idle.
    pub fn chirp_period_s(&self) -> f64 {
        self.ramp_time_s + self.idle_time_s
    }

    pub fn num_virtual(&self) -> usize {
        self.num_tx * self.num_rx
    }

    /// TX element position in wavelengths.
    pub fn tx_position(&self, tx: usize) -> DVec3 {
        self.antenna_layout[tx]
    }

    /// RX element position in wavelengths.
    pub fn rx_position(&self, rx: usize) -> DVec3 {
        self.antenna_layout[self.num_tx + rx]
    }

    /// Fast-time sample instants within one chirp, seconds from chirp start.
    pub fn sample_time_grid(&self) -> Vec<f64> {
        let dt = 1.0 / self.sample_rate_hz;
        (0..self.samples_per_chirp).map(|j| j as f64 * dt).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let file: RadarConfigFile = serde_json::from_str(text)?;
        let config = file.into_config();
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// On-disk JSON representation. Angles are degrees here and are converted to
/// radians when building the in-memory [`RadarConfig`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadarConfigFile {
    start_frequency_hz: f64,
    bandwidth_hz: f64,
    ramp_time_s: f64,
    idle_time_s: f64,
    chirps_per_frame: usize,
    samples_per_chirp: usize,
    sample_rate_hz: f64,
    frame_rate_hz: f64,
    #[serde(default = "default_unity")]
    tx_power: f64,
    #[serde(default = "default_unity")]
    tx_gain: f64,
    #[serde(default = "default_unity")]
    rx_gain: f64,
    num_tx: usize,
    num_rx: usize,
    antenna_layout_wavelengths: Vec<[f64; 3]>,
    #[serde(default = "default_gain_sigma_deg")]
    gain_sigma_azimuth_deg: f64,
    #[serde(default = "default_gain_sigma_deg")]
    gain_sigma_elevation_deg: f64,
    #[serde(default = "default_specular_spread_deg")]
    specular_spread_deg: f64,
}

fn default_unity() -> f64 {
    1.0
}

fn default_gain_sigma_deg() -> f64 {
    35.0
}

fn default_specular_spread_deg() -> f64 {
    0.3f64.to_degrees()
}

impl RadarConfigFile {
    fn into_config(self) -> RadarConfig {
        RadarConfig {
            start_frequency_hz: self.start_frequency_hz,
            bandwidth_hz: self.bandwidth_hz,
            ramp_time_s: self.ramp_time_s,
            idle_time_s: self.idle_time_s,
            chirps_per_frame: self.chirps_per_frame,
            samples_per_chirp: self.samples_per_chirp,
            sample_rate_hz: self.sample_rate_hz,
            frame_rate_hz: self.frame_rate_hz,
            tx_power: self.tx_power,
            tx_gain: self.tx_gain,
            rx_gain: self.rx_gain,
            num_tx: self.num_tx,
            num_rx: self.num_rx,
            antenna_layout: self
                .antenna_layout_wavelengths
                .iter()
                .map(|p| DVec3::from_array(*p))
                .collect(),
            gain_sigma_azimuth_rad: self.gain_sigma_azimuth_deg.to_radians(),
            gain_sigma_elevation_rad: self.gain_sigma_elevation_deg.to_radians(),
            specular_spread_rad: self.specular_spread_deg.to_radians(),
        }
    }
}

/// Compute slope, wavelength and the range/speed resolutions implied by a
/// radar configuration.
///
/// Range resolution uses the bandwidth actually swept during the sampled
/// dwell (`slope * samples/f_s`), and the samples are complex so the full FFT
/// length maps to range without Nyquist halving. Maximum speed accounts for
/// the TDM-extended chirp period `num_tx * (T_c + idle)`; speed resolution
/// divides the resulting span across all chirps of the frame.
pub fn derive_radar_metrics(config: &RadarConfig) -> Result<DerivedMetrics, ConfigError> {
    config.validate()?;
    let slope = config.bandwidth_hz / config.ramp_time_s;
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
    let sampled_bandwidth = slope * (config.samples_per_chirp as f64 / config.sample_rate_hz);
    let range_resolution = SPEED_OF_LIGHT / (2.0 * sampled_bandwidth);
    let max_range = config.samples_per_chirp as f64 * range_resolution;
    let max_speed = wavelength / (4.0 * config.num_tx as f64 * config.chirp_period_s());
    let speed_resolution = 2.0 * max_speed / config.chirps_per_frame as f64;
    Ok(DerivedMetrics {
        slope_hz_per_s: slope,
        wavelength_m: wavelength,
        range_resolution_m: range_resolution,
        max_range_m: max_range,
        max_speed_mps: max_speed,
        speed_resolution_mps: speed_resolution,
        if_bin_hz: config.sample_rate_hz / config.samples_per_chirp as f64,
    })
}

/// Positions of the TDM-MIMO virtual antennas, in wavelengths.
///
/// Virtual element `v` is the vector sum of TX `v / num_rx` and RX
/// `v % num_rx`; the ordering is TX-major and fixed.
pub fn virtual_array(config: &RadarConfig) -> Result<Vec<DVec3>, ConfigError> {
    if config.antenna_layout.len() != config.num_tx + config.num_rx {
        return Err(ConfigError::LayoutMismatch {
            got: config.antenna_layout.len(),
            expected: config.num_tx + config.num_rx,
        });
    }
    let mut virtuals = Vec::with_capacity(config.num_virtual());
    for tx in 0..config.num_tx {
        for rx in 0..config.num_rx {
            virtuals.push(config.tx_position(tx) + config.rx_position(rx));
        }
    }
    Ok(virtuals)
}

//! Scalar reflection and attenuation coefficients: chirp phase, quasi-specular
//! orientation lobe, Fresnel material coefficients, Gaussian antenna gains,
//! and the assembled point amplitudes for human and environment returns.

use crate::material::{complex_permittivity, Material};
use crate::radar::{derive_radar_metrics, RadarConfig, SPEED_OF_LIGHT};
use glam::DVec3;
use num_complex::Complex64;
use thiserror::Error;

/// Minimum reflector distance; the far-field point model is meaningless
/// closer than this.
pub const MIN_DISTANCE_M: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ReflectanceError {
    #[error("degenerate Fresnel denominator (|den| = {magnitude:.3e}) at beta = {beta_rad} rad")]
    DegenerateFresnel { magnitude: f64, beta_rad: f64 },
    #[error("reflector at {distance_m} m is inside the near-field limit of {MIN_DISTANCE_M} m")]
    NearField { distance_m: f64 },
}

/// Geometry of one reflection path as seen from the (monostatic) radar.
#[derive(Debug, Clone, Copy)]
pub struct PathGeometry {
    /// Unit vector from the radar toward the facet.
    pub incident_dir: DVec3,
    /// Unit vector from the facet toward the receiver.
    pub exit_dir: DVec3,
    /// Facet outward unit normal.
    pub surface_normal: DVec3,
    pub one_way_distance_m: f64,
    /// Azimuth of the facet from boresight (+y), positive toward +x.
    pub azimuth_rad: f64,
    /// Elevation of the facet from the horizontal plane, positive up.
    pub elevation_rad: f64,
    /// Grazing angle between the incident ray and the surface plane,
    /// pi/2 at normal incidence.
    pub grazing_angle_rad: f64,
}

impl PathGeometry {
    /// Geometry for a co-located TX/RX at `radar` seeing a facet at `point`
    /// with outward normal `normal`.
    pub fn monostatic(radar: DVec3, point: DVec3, normal: DVec3) -> Self {
        let offset = point - radar;
        let distance = offset.length();
        let incident = if distance > 0.0 { offset / distance } else { DVec3::Y };
        let grazing = incident.dot(normal).abs().clamp(0.0, 1.0).asin();
        Self {
            incident_dir: incident,
            exit_dir: -incident,
            surface_normal: normal,
            one_way_distance_m: distance,
            azimuth_rad: offset.x.atan2(offset.y),
            elevation_rad: offset.z.atan2((offset.x * offset.x + offset.y * offset.y).sqrt()),
            grazing_angle_rad: grazing,
        }
    }
}

/// IF phase in cycles for a reflector with round-trip delay `tau` at fast
/// time `t` within the chirp:
/// `f0*tau - (B*tau^2 / (2*T_c))*t + (B*tau / T_c)*t`.
///
/// The caller forms `exp(j*2*pi*phase)`; use [`phase_fraction`] to reduce
/// the argument before exponentiating.
pub fn phase_cycles(tau_s: f64, t_s: f64, config: &RadarConfig) -> f64 {
    let slope_term = config.bandwidth_hz * tau_s / config.ramp_time_s;
    config.start_frequency_hz * tau_s + slope_term * t_s - 0.5 * slope_term * tau_s * t_s
}

/// Phase advance in cycles per `dt` of fast time, constant across the chirp.
pub fn phase_step_cycles(tau_s: f64, dt_s: f64, config: &RadarConfig) -> f64 {
    let slope_term = config.bandwidth_hz * tau_s / config.ramp_time_s;
    (slope_term - 0.5 * slope_term * tau_s) * dt_s
}

/// Fractional part of a phase in cycles, in [0, 1). Reducing before the
/// complex exponential keeps precision at 60 GHz where the integer part of
/// `f0*tau` reaches thousands of cycles.
pub fn phase_fraction(cycles: f64) -> f64 {
    cycles - cycles.floor()
}

/// Unit phasor `exp(j*2*pi*cycles)`.
pub fn phasor(cycles: f64) -> Complex64 {
    let (sin, cos) = (std::f64::consts::TAU * phase_fraction(cycles)).sin_cos();
    Complex64::new(cos, sin)
}

/// Quasi-specular orientation coefficient in (0, 1]: the facet reflects the
/// incident ray into the mirror direction `d_s`; energy toward the exit
/// direction falls off as a Gaussian in the angle `alpha` between them with
/// spread `eta`.
pub fn orientation_coeff(g: &PathGeometry, eta: f64) -> f64 {
    let d_i = g.incident_dir;
    let mirror = d_i - g.surface_normal * (2.0 * d_i.dot(g.surface_normal));
    let alpha = g.exit_dir.dot(mirror).clamp(-1.0, 1.0).acos();
    (-alpha * alpha / (2.0 * eta * eta)).exp()
}

/// Fresnel reflection coefficients `(gamma_v, gamma_h)` for vertical and
/// horizontal polarization at grazing angle `beta` (pi/2 = normal incidence),
/// using the complex permittivity of `material` at `wavelength`.
///
/// An exact vacuum (`eps' = 1`, `sigma = 0`) has no interface and returns
/// exactly zero for both coefficients.
pub fn fresnel_coeffs(
    material: &Material,
    wavelength_m: f64,
    beta_rad: f64,
) -> Result<(Complex64, Complex64), ReflectanceError> {
    if material.relative_permittivity == 1.0 && material.conductivity_s_per_m == 0.0 {
        return Ok((Complex64::ZERO, Complex64::ZERO));
    }
    let eps = complex_permittivity(material, wavelength_m);
    let sin_b = beta_rad.sin();
    let cos_b = beta_rad.cos();
    let root = (eps - cos_b * cos_b).sqrt();
    let den_v = eps * sin_b + root;
    let den_h = sin_b + root;
    let min_den = den_v.norm().min(den_h.norm());
    if min_den < 1e-30 {
        return Err(ReflectanceError::DegenerateFresnel {
            magnitude: min_den,
            beta_rad,
        });
    }
    let gamma_v = (eps * sin_b - root) / den_v;
    let gamma_h = (Complex64::new(sin_b, 0.0) - root) / den_h;
    Ok((gamma_v, gamma_h))
}

/// Scalar material coefficient `|gamma_v*cos(psi) + gamma_h*sin(psi)|`: the
/// polarization mixing angle `psi` projects the two Fresnel components onto
/// the (linearly polarized) antenna axis. `psi = 0` is pure vertical.
pub fn material_coeff(gamma_v: Complex64, gamma_h: Complex64, psi_rad: f64) -> f64 {
    (gamma_v * psi_rad.cos() + gamma_h * psi_rad.sin()).norm()
}

/// Gaussian antenna gain `exp(-phi^2 / (2*sigma^2))`, applied once for
/// azimuth and once for elevation.
pub fn antenna_gain(phi_rad: f64, sigma_rad: f64) -> f64 {
    (-phi_rad * phi_rad / (2.0 * sigma_rad * sigma_rad)).exp()
}

/// Attenuated amplitude of a human-body facet:
/// `G_tx * G_rx * lambda * sqrt(P) * A_a * A_o * A_m / ((4*pi)^1.5 * D^2)`.
pub fn amplitude_human(
    g: &PathGeometry,
    area_m2: f64,
    orientation: f64,
    material: f64,
    config: &RadarConfig,
) -> Result<f64, ReflectanceError> {
    let d = g.one_way_distance_m;
    if d < MIN_DISTANCE_M {
        return Err(ReflectanceError::NearField { distance_m: d });
    }
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(config.tx_gain * config.rx_gain * wavelength * config.tx_power.sqrt()
        * area_m2
        * orientation
        * material
        / (four_pi.powf(1.5) * d * d))
}

/// Environment-facet amplitude: [`amplitude_human`] further scaled by the
/// azimuth and elevation antenna gains at the facet's direction.
pub fn amplitude_env(
    g: &PathGeometry,
    area_m2: f64,
    orientation: f64,
    material: f64,
    config: &RadarConfig,
) -> Result<f64, ReflectanceError> {
    let base = amplitude_human(g, area_m2, orientation, material, config)?;
    Ok(base
        * antenna_gain(g.azimuth_rad, config.gain_sigma_azimuth_rad)
        * antenna_gain(g.elevation_rad, config.gain_sigma_elevation_rad))
}

/// Round-trip delay of a monostatic path.
pub fn round_trip_delay(one_way_distance_m: f64) -> f64 {
    2.0 * one_way_distance_m / SPEED_OF_LIGHT
}

/// Convenience: everything needed about a config for amplitude work.
pub fn wavelength_of(config: &RadarConfig) -> f64 {
    derive_radar_metrics(config)
        .map(|m| m.wavelength_m)
        .unwrap_or(SPEED_OF_LIGHT / config.start_frequency_hz)
}

//! Two-bounce multipath discovery and synthesis.
//!
//! For every visible facet, the radar's incident ray is reflected into the
//! facet's mirror direction; if that ray pierces the inscribed sphere of
//! another facet, the pair supports a dominant `Tx -> Surface#1 ->
//! Surface#2 -> Rx` path and is recorded in the HRPP table. Table entries
//! carry the product of both surfaces' coefficients and the full path length,
//! so synthesis needs no access to the original scene.

use crate::geometry::ReflectionPoint;
use crate::radar::{RadarConfig, SPEED_OF_LIGHT};
use crate::reflectance::{
    antenna_gain, fresnel_coeffs, material_coeff, orientation_coeff, PathGeometry,
    ReflectanceError,
};
use glam::DVec3;
use rayon::prelude::*;

/// Knobs for path discovery.
#[derive(Debug, Clone, Copy)]
pub struct MultipathParams {
    /// Second-surface candidates are limited to a cone of this half-angle
    /// around the mirror direction. A fidelity/time tradeoff: wider cones
    /// admit more glancing pairs at quadratic cost in facet count.
    pub cone_half_angle_rad: f64,
    /// Polarization mixing angle for the material coefficients.
    pub polarization_mix_rad: f64,
}

impl Default for MultipathParams {
    fn default() -> Self {
        Self {
            cone_half_angle_rad: 15f64.to_radians(),
            polarization_mix_rad: 0.0,
        }
    }
}

/// One recorded two-bounce path between a facet pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HrppEntry {
    /// Index of the first surface in the point list the table was built from.
    pub first: usize,
    /// Index of the second surface.
    pub second: usize,
    /// Full Tx -> s1 -> s2 -> Rx path length, meters.
    pub total_path_length_m: f64,
    /// Product of the antenna gains at the departure (toward s1) and arrival
    /// (from s2) directions.
    pub combined_gain: f64,
    /// Product of the two facet areas, m^4.
    pub combined_area: f64,
    /// Product of the two orientation coefficients.
    pub combined_orientation: f64,
    /// Product of the two material coefficients.
    pub combined_material: f64,
    /// The reflection point on s1.
    pub first_bounce: DVec3,
    /// The intersection with s2's inscribed sphere.
    pub second_bounce: DVec3,
}

#[derive(Debug, Clone, Default)]
pub struct HrppTable {
    pub entries: Vec<HrppEntry>,
}

impl HrppTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Debug dump as JSON (ids, path lengths, coefficients, bounce points).
    pub fn to_json(&self) -> String {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "first": e.first,
                    "second": e.second,
                    "total_path_length_m": e.total_path_length_m,
                    "combined_gain": e.combined_gain,
                    "combined_area": e.combined_area,
                    "combined_orientation": e.combined_orientation,
                    "combined_material": e.combined_material,
                    "first_bounce": [e.first_bounce.x, e.first_bounce.y, e.first_bounce.z],
                    "second_bounce": [e.second_bounce.x, e.second_bounce.y, e.second_bounce.z],
                })
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "entries": entries })).unwrap()
    }
}

/// Smallest positive `k` with `(origin + k*dir - center)^2 = radius^2`,
/// solved by the quadratic formula; `None` when the ray misses the sphere.
pub fn ray_hits_insphere(origin: DVec3, dir: DVec3, center: DVec3, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let b = 2.0 * dir.dot(oc);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let k1 = (-b - sqrt_disc) / 2.0;
    let k2 = (-b + sqrt_disc) / 2.0;
    if k1 > 0.0 {
        Some(k1)
    } else if k2 > 0.0 {
        Some(k2)
    } else {
        None
    }
}

fn mirror_direction(incident: DVec3, normal: DVec3) -> DVec3 {
    incident - normal * (2.0 * incident.dot(normal))
}

/// Everything about a first surface that the inner candidate loop reuses:
/// the mirror ray plus s1's own coefficient product. The orientation factor
/// of s1 along its own mirror ray is exactly 1, so the combined orientation
/// reduces to s2's.
struct SourceContext {
    o1: DVec3,
    d_s: DVec3,
    distance: f64,
    area: f64,
    material_coeff: f64,
    gain: f64,
}

impl SourceContext {
    fn build(
        s1: &ReflectionPoint,
        radar: DVec3,
        config: &RadarConfig,
        params: &MultipathParams,
        wavelength: f64,
    ) -> Result<Option<Self>, ReflectanceError> {
        let o1 = s1.centroid;
        let to_s1 = o1 - radar;
        let d1 = to_s1.length();
        if d1 <= 0.0 {
            return Ok(None);
        }
        let incident = to_s1 / d1;
        let grazing = incident.dot(s1.unit_normal).abs().clamp(0.0, 1.0).asin();
        let (gv1, gh1) = fresnel_coeffs(&s1.material, wavelength, grazing)?;
        let azimuth = to_s1.x.atan2(to_s1.y);
        let elevation = to_s1
            .z
            .atan2((to_s1.x * to_s1.x + to_s1.y * to_s1.y).sqrt());
        Ok(Some(Self {
            o1,
            d_s: mirror_direction(incident, s1.unit_normal),
            distance: d1,
            area: s1.area_m2,
            material_coeff: material_coeff(gv1, gh1, params.polarization_mix_rad),
            gain: antenna_gain(azimuth, config.gain_sigma_azimuth_rad)
                * antenna_gain(elevation, config.gain_sigma_elevation_rad),
        }))
    }
}

/// Candidate test against one target's insphere: cone prune, then the
/// perpendicular-distance form of the ray-sphere quadratic (algebraically the
/// smallest positive root of `(o1 + k*d_s - o2)^2 = l^2` for targets ahead of
/// the source). Returns `k` on a hit.
#[inline]
fn candidate_hit(ctx: &SourceContext, o2: DVec3, radius: f64, cos2_cone: f64) -> Option<f64> {
    let v = o2 - ctx.o1;
    let proj = ctx.d_s.dot(v);
    if proj <= 0.0 {
        return None;
    }
    let vv = v.length_squared();
    if vv <= radius * radius {
        return None; // overlapping facets, not a propagation hop
    }
    if proj * proj < cos2_cone * vv {
        return None;
    }
    let closest_sq = vv - proj * proj;
    let r2 = radius * radius;
    if closest_sq > r2 {
        return None;
    }
    Some(proj - (r2 - closest_sq).sqrt())
}

#[allow(clippy::too_many_arguments)]
fn build_entry(
    ctx: &SourceContext,
    i: usize,
    s2: &ReflectionPoint,
    j: usize,
    k: f64,
    radar: DVec3,
    config: &RadarConfig,
    params: &MultipathParams,
    wavelength: f64,
) -> Result<HrppEntry, ReflectanceError> {
    let q = ctx.o1 + ctx.d_s * k;
    let exit = radar - q;
    let exit_len = exit.length();
    let exit_dir = exit / exit_len;
    // Surface 2: incident along the mirror ray, exit back toward the radar.
    let g2 = PathGeometry {
        incident_dir: ctx.d_s,
        exit_dir,
        surface_normal: s2.unit_normal,
        one_way_distance_m: exit_len,
        azimuth_rad: q.x.atan2(q.y),
        elevation_rad: q.z.atan2((q.x * q.x + q.y * q.y).sqrt()),
        grazing_angle_rad: ctx.d_s.dot(s2.unit_normal).abs().clamp(0.0, 1.0).asin(),
    };
    let (gv2, gh2) = fresnel_coeffs(&s2.material, wavelength, g2.grazing_angle_rad)?;
    let gain2 = antenna_gain(g2.azimuth_rad, config.gain_sigma_azimuth_rad)
        * antenna_gain(g2.elevation_rad, config.gain_sigma_elevation_rad);
    Ok(HrppEntry {
        first: i,
        second: j,
        total_path_length_m: ctx.distance + k + exit_len,
        combined_gain: ctx.gain * gain2,
        combined_area: ctx.area * s2.area_m2,
        combined_orientation: orientation_coeff(&g2, config.specular_spread_rad),
        combined_material: ctx.material_coeff
            * material_coeff(gv2, gh2, params.polarization_mix_rad),
        first_bounce: ctx.o1,
        second_bounce: q,
    })
}

/// Scan facet pairs and record the supported two-bounce paths. With
/// `moved = Some(flags)` only pairs touching a moved facet are scanned (the
/// update path); `None` scans everything (the build path).
fn scan_pairs(
    points: &[ReflectionPoint],
    insphere_radii: &[f64],
    moved: Option<&[bool]>,
    radar: DVec3,
    config: &RadarConfig,
    params: &MultipathParams,
) -> Result<Vec<HrppEntry>, ReflectanceError> {
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
    let cos_cone = params.cone_half_angle_rad.cos();
    let cos2_cone = if cos_cone > 0.0 { cos_cone * cos_cone } else { 0.0 };
    if let Some(flags) = moved {
        if !flags.iter().any(|&f| f) {
            return Ok(Vec::new());
        }
    }
    // Structure-of-arrays target data keeps the candidate loop in cache.
    let tx: Vec<f64> = points.iter().map(|p| p.centroid.x).collect();
    let ty: Vec<f64> = points.iter().map(|p| p.centroid.y).collect();
    let tz: Vec<f64> = points.iter().map(|p| p.centroid.z).collect();

    let per_source: Result<Vec<Vec<HrppEntry>>, ReflectanceError> = points
        .par_iter()
        .enumerate()
        .map(|(i, s1)| {
            let i_moved = moved.map(|m| m[i]).unwrap_or(true);
            let Some(ctx) = SourceContext::build(s1, radar, config, params, wavelength)? else {
                return Ok(Vec::new());
            };
            let mut local = Vec::new();
            for j in 0..points.len() {
                if j == i {
                    continue;
                }
                if let Some(flags) = moved {
                    if !i_moved && !flags[j] {
                        continue;
                    }
                }
                let o2 = DVec3::new(tx[j], ty[j], tz[j]);
                if let Some(k) = candidate_hit(&ctx, o2, insphere_radii[j], cos2_cone) {
                    local.push(build_entry(
                        &ctx, i, &points[j], j, k, radar, config, params, wavelength,
                    )?);
                }
            }
            Ok(local)
        })
        .collect();
    Ok(per_source?.into_iter().flatten().collect())
}

/// Build the HRPP table over a visible facet set. `insphere_radii` holds each
/// facet's incircle radius, aligned with `points`. Entries come out sorted by
/// `(first, second)`, deterministically.
pub fn build_hrpp(
    points: &[ReflectionPoint],
    insphere_radii: &[f64],
    radar: DVec3,
    config: &RadarConfig,
    params: &MultipathParams,
) -> Result<HrppTable, ReflectanceError> {
    assert_eq!(points.len(), insphere_radii.len());
    Ok(HrppTable {
        entries: scan_pairs(points, insphere_radii, None, radar, config, params)?,
    })
}

/// Refresh a table after some facets moved: entries touching a moved facet
/// are recomputed, static-static entries are carried over untouched. The
/// result is identical to a full rebuild over the updated points.
pub fn update_hrpp(
    table: &HrppTable,
    points: &[ReflectionPoint],
    insphere_radii: &[f64],
    moved: &[bool],
    radar: DVec3,
    config: &RadarConfig,
    params: &MultipathParams,
) -> Result<HrppTable, ReflectanceError> {
    assert_eq!(points.len(), insphere_radii.len());
    assert_eq!(points.len(), moved.len());
    let mut entries: Vec<HrppEntry> = table
        .entries
        .iter()
        .filter(|e| !moved[e.first] && !moved[e.second])
        .cloned()
        .collect();
    entries.extend(scan_pairs(
        points,
        insphere_radii,
        Some(moved),
        radar,
        config,
        params,
    )?);
    entries.sort_by_key(|e| (e.first, e.second));
    Ok(HrppTable { entries })
}

fn entry_amplitude(entry: &HrppEntry, config: &RadarConfig, wavelength: f64) -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    config.tx_gain
        * config.rx_gain
        * entry.combined_gain
        * wavelength
        * config.tx_power.sqrt()
        * entry.combined_area
        * entry.combined_orientation
        * entry.combined_material
        / (four_pi.powf(1.5) * entry.total_path_length_m * entry.total_path_length_m)
}

/// Accumulate the multipath signal for the virtual pairs of one TX into
/// `out` (`num_rx` rows). Delays use the exact element -> bounce -> bounce ->
/// element path; `tau = path / c` since the recorded path already spans
/// Tx -> ... -> Rx.
pub(crate) fn accumulate_multipath_for_tx(
    table: &HrppTable,
    grid: &[f64],
    config: &RadarConfig,
    wavelength: f64,
    tx: usize,
    out: &mut [Vec<num_complex::Complex64>],
) {
    let tx_pos = config.tx_position(tx) * wavelength;
    let uniform_dt = crate::synthesizer::grid_uniform_step(grid);
    for entry in &table.entries {
        let amp = entry_amplitude(entry, config, wavelength);
        let leg1 = (entry.first_bounce - tx_pos).length()
            + (entry.second_bounce - entry.first_bounce).length();
        for (rx, row) in out.iter_mut().enumerate() {
            let rx_pos = config.rx_position(rx) * wavelength;
            let path = leg1 + (entry.second_bounce - rx_pos).length();
            let tau = path / SPEED_OF_LIGHT;
            crate::synthesizer::accumulate_tone_with(row, amp, tau, grid, uniform_dt, config);
        }
    }
}

/// Synthesize the multipath IF signal for every virtual antenna:
/// `[virtual][sample]`, entries summed in table order.
pub fn synthesize_multipath(
    table: &HrppTable,
    grid: &[f64],
    config: &RadarConfig,
) -> Vec<Vec<num_complex::Complex64>> {
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
    let mut out =
        vec![vec![num_complex::Complex64::ZERO; grid.len()]; config.num_virtual()];
    for tx in 0..config.num_tx {
        let start = tx * config.num_rx;
        accumulate_multipath_for_tx(
            table,
            grid,
            config,
            wavelength,
            tx,
            &mut out[start..start + config.num_rx],
        );
    }
    out
}

//! Per-chirp IF-signal assembly over the TDM-MIMO virtual array.
//!
//! Each visible facet contributes `A * exp(j*2*pi*theta(t))` per virtual
//! pair; amplitudes follow the human or environment model from
//! [`crate::reflectance`], delays use the exact TX-element -> facet ->
//! RX-element path. The TDM schedule fires TX `k mod num_tx` on chirp `k`;
//! virtual channels of inactive transmitters hold zeros for that chirp.

use crate::cube::{CubeError, FrameCube};
use crate::geometry::{
    facet_attributes_with_vertices, hpr_visible, incircle_radii_with_vertices,
    interpolate_to_chirps, MeshError, MeshSequence, ReflectionPoint, TriangleMesh,
};
use crate::material::{Material, MaterialTable};
use crate::multipath::{
    accumulate_multipath_for_tx, build_hrpp, update_hrpp, HrppTable, MultipathParams,
};
use crate::radar::{derive_radar_metrics, ConfigError, DerivedMetrics, RadarConfig, SPEED_OF_LIGHT};
use crate::reflectance::{
    amplitude_env, amplitude_human, fresnel_coeffs, material_coeff, orientation_coeff,
    phase_cycles, phase_step_cycles, phasor, PathGeometry, ReflectanceError,
};
use glam::DVec3;
use num_complex::{Complex32, Complex64};
use rayon::prelude::*;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Reflectance(#[from] ReflectanceError),
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// Which amplitude model a point set uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalMode {
    /// Quasi-specular body reflector (no antenna-pattern weighting).
    Human,
    /// Furniture/structure reflector with Gaussian azimuth/elevation gains.
    Environment,
}

/// Pipeline knobs; defaults match the documented model choices.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    pub human: bool,
    pub env: bool,
    pub multipath: bool,
    /// HPR flipping exponent (radius = 10^gamma * max distance).
    pub hpr_gamma: f64,
    /// Fast mode: run HPR once per frame instead of per chirp.
    pub hpr_per_frame: bool,
    /// Polarization mixing angle for material coefficients.
    pub polarization_mix_rad: f64,
    /// Multipath candidate cone half-angle.
    pub cone_half_angle_rad: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            human: true,
            env: true,
            multipath: true,
            hpr_gamma: 2.0,
            hpr_per_frame: false,
            polarization_mix_rad: 0.0,
            cone_half_angle_rad: 15f64.to_radians(),
        }
    }
}

impl SynthesisOptions {
    pub fn multipath_params(&self) -> MultipathParams {
        MultipathParams {
            cone_half_angle_rad: self.cone_half_angle_rad,
            polarization_mix_rad: self.polarization_mix_rad,
        }
    }
}

/// Cumulative CPU time spent per stage while synthesizing (summed across
/// parallel chirp tasks, so stage times can exceed the wall clock).
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub human: Duration,
    pub env: Duration,
    pub multipath: Duration,
    pub wall: Duration,
}

/// Spacing of a uniform fast-time grid, or `None` for irregular grids.
pub(crate) fn grid_uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let dt = grid[1] - grid[0];
    grid.windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300))
        .then_some(dt)
}

/// Accumulate `amp * exp(j*2*pi*theta(tau, t))` over the fast-time grid into
/// `row`. On a uniform grid the per-sample phase advance is constant, so the
/// loop is a single complex rotation per sample; `uniform_dt` carries the
/// spacing when the caller has already checked it.
pub(crate) fn accumulate_tone_with(
    row: &mut [Complex64],
    amp: f64,
    tau: f64,
    grid: &[f64],
    uniform_dt: Option<f64>,
    config: &RadarConfig,
) {
    if row.is_empty() {
        return;
    }
    if let Some(dt) = uniform_dt {
        let mut p = phasor(phase_cycles(tau, grid[0], config)) * amp;
        let w = phasor(phase_step_cycles(tau, dt, config));
        for sample in row.iter_mut() {
            *sample += p;
            p *= w;
        }
    } else {
        for (sample, &t) in row.iter_mut().zip(grid) {
            *sample += phasor(phase_cycles(tau, t, config)) * amp;
        }
    }
}

/// Per-point amplitude shared by both stages: orientation lobe, Fresnel
/// material coefficient at the grazing angle, then the mode's formula.
fn point_amplitude(
    point: &ReflectionPoint,
    geometry: &PathGeometry,
    config: &RadarConfig,
    wavelength: f64,
    mode: SignalMode,
    psi: f64,
) -> Result<f64, ReflectanceError> {
    let orientation = orientation_coeff(geometry, config.specular_spread_rad);
    let (gv, gh) = fresnel_coeffs(&point.material, wavelength, geometry.grazing_angle_rad)?;
    let material = material_coeff(gv, gh, psi);
    match mode {
        SignalMode::Human => amplitude_human(geometry, point.area_m2, orientation, material, config),
        SignalMode::Environment => {
            amplitude_env(geometry, point.area_m2, orientation, material, config)
        }
    }
}

/// Accumulate the point set's IF signal for one TX's virtual pairs into
/// `out` (`num_rx` rows). Points are summed in slice order.
fn accumulate_points_for_tx(
    points: &[ReflectionPoint],
    grid: &[f64],
    config: &RadarConfig,
    mode: SignalMode,
    psi: f64,
    tx: usize,
    out: &mut [Vec<Complex64>],
) -> Result<(), ReflectanceError> {
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
    let tx_pos = config.tx_position(tx) * wavelength;
    let rx_pos: Vec<DVec3> = (0..config.num_rx)
        .map(|rx| config.rx_position(rx) * wavelength)
        .collect();
    let uniform_dt = grid_uniform_step(grid);
    for point in points {
        let geometry = PathGeometry::monostatic(DVec3::ZERO, point.centroid, point.unit_normal);
        let amp = point_amplitude(point, &geometry, config, wavelength, mode, psi)?;
        let from_tx = (point.centroid - tx_pos).length();
        for (row, rx) in out.iter_mut().zip(&rx_pos) {
            let tau = (from_tx + (point.centroid - *rx).length()) / SPEED_OF_LIGHT;
            accumulate_tone_with(row, amp, tau, grid, uniform_dt, config);
        }
    }
    Ok(())
}

/// IF signal of a visibility-filtered point set for every virtual antenna:
/// `[virtual][sample]` with the summation order fixed by the slice order
/// (ascending face id as produced by facet extraction). An empty point set
/// yields the all-zero signal.
pub fn synthesize_points(
    points: &[ReflectionPoint],
    chirp_time_grid: &[f64],
    config: &RadarConfig,
    mode: SignalMode,
    psi: f64,
) -> Result<Vec<Vec<Complex64>>, SynthError> {
    let mut out = vec![vec![Complex64::ZERO; chirp_time_grid.len()]; config.num_virtual()];
    for tx in 0..config.num_tx {
        let start = tx * config.num_rx;
        accumulate_points_for_tx(
            points,
            chirp_time_grid,
            config,
            mode,
            psi,
            tx,
            &mut out[start..start + config.num_rx],
        )?;
    }
    Ok(out)
}

/// Static per-scene state: environment reflection points (HPR-filtered once,
/// furniture does not move), their cached per-TX signals, and the
/// static-static multipath table with its cached per-TX signals.
pub struct SceneState {
    pub config: RadarConfig,
    pub metrics: DerivedMetrics,
    pub options: SynthesisOptions,
    pub material_table: MaterialTable,
    pub env_points: Vec<ReflectionPoint>,
    pub env_radii: Vec<f64>,
    pub static_table: HrppTable,
    env_signal_per_tx: Vec<Vec<Vec<Complex64>>>,
    mp_static_per_tx: Vec<Vec<Vec<Complex64>>>,
    env_prepare_time: Duration,
    multipath_prepare_time: Duration,
}

impl SceneState {
    /// Cull, cache and pre-synthesize everything static. `env_mesh` may be
    /// absent for human-only scenes.
    pub fn prepare(
        config: RadarConfig,
        options: SynthesisOptions,
        env_mesh: Option<&TriangleMesh>,
        table: &MaterialTable,
    ) -> Result<Self, SynthError> {
        let metrics = derive_radar_metrics(&config)?;
        let grid = config.sample_time_grid();
        let default_material = Material::human();

        let env_start = Instant::now();
        let (env_points, env_radii) = match env_mesh {
            Some(mesh) if options.env || options.multipath => {
                let points = facet_attributes_with_vertices(
                    mesh,
                    &mesh.vertices,
                    table,
                    &default_material,
                )?;
                let radii = incircle_radii_with_vertices(mesh, &mesh.vertices);
                let centroids: Vec<DVec3> = points.iter().map(|p| p.centroid).collect();
                let visible = hpr_visible(&centroids, DVec3::ZERO, options.hpr_gamma);
                let points: Vec<ReflectionPoint> =
                    visible.iter().map(|&i| points[i].clone()).collect();
                let radii: Vec<f64> = visible.iter().map(|&i| radii[i]).collect();
                (points, radii)
            }
            _ => (Vec::new(), Vec::new()),
        };

        let env_signal_per_tx = if options.env {
            let mut per_tx = Vec::with_capacity(config.num_tx);
            for tx in 0..config.num_tx {
                let mut rows = vec![vec![Complex64::ZERO; grid.len()]; config.num_rx];
                accumulate_points_for_tx(
                    &env_points,
                    &grid,
                    &config,
                    SignalMode::Environment,
                    options.polarization_mix_rad,
                    tx,
                    &mut rows,
                )?;
                per_tx.push(rows);
            }
            per_tx
        } else {
            vec![vec![vec![Complex64::ZERO; grid.len()]; config.num_rx]; config.num_tx]
        };
        let env_prepare_time = env_start.elapsed();

        let mp_start = Instant::now();
        let (static_table, mp_static_per_tx) = if options.multipath {
            let table = build_hrpp(
                &env_points,
                &env_radii,
                DVec3::ZERO,
                &config,
                &options.multipath_params(),
            )?;
            let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;
            let mut per_tx = Vec::with_capacity(config.num_tx);
            for tx in 0..config.num_tx {
                let mut rows = vec![vec![Complex64::ZERO; grid.len()]; config.num_rx];
                accumulate_multipath_for_tx(&table, &grid, &config, wavelength, tx, &mut rows);
                per_tx.push(rows);
            }
            (table, per_tx)
        } else {
            (
                HrppTable::default(),
                vec![vec![vec![Complex64::ZERO; grid.len()]; config.num_rx]; config.num_tx],
            )
        };
        let multipath_prepare_time = mp_start.elapsed();

        Ok(Self {
            config,
            metrics,
            options,
            material_table: table.clone(),
            env_points,
            env_radii,
            static_table,
            env_signal_per_tx,
            mp_static_per_tx,
            env_prepare_time,
            multipath_prepare_time,
        })
    }
}

fn rows_to_f32(rows: &[Vec<Complex64>]) -> Vec<Vec<Complex32>> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|c| Complex32::new(c.re as f32, c.im as f32))
                .collect()
        })
        .collect()
}

/// Synthesize one radar frame. See [`synthesize_frame_timed`].
pub fn synthesize_frame(
    scene: &SceneState,
    human: Option<&MeshSequence>,
    frame_index: usize,
) -> Result<FrameCube, SynthError> {
    synthesize_frame_timed(scene, human, frame_index).map(|(cube, _)| cube)
}

/// Synthesize one radar frame with per-stage timings.
///
/// Per chirp `k`: the active TX is `k mod num_tx`; human reflection points
/// are re-derived from chirp-level interpolation plus HPR; the frame sample
/// is the sample-wise `f32` sum of the three stage signals, so a full run
/// equals the sum of the stage-gated runs bit for bit.
pub fn synthesize_frame_timed(
    scene: &SceneState,
    human: Option<&MeshSequence>,
    frame_index: usize,
) -> Result<(FrameCube, StageTimings), SynthError> {
    let wall_start = Instant::now();
    let config = &scene.config;
    let options = &scene.options;
    let grid = config.sample_time_grid();
    let num_rx = config.num_rx;
    let wavelength = SPEED_OF_LIGHT / config.start_frequency_hz;

    // The body's facets matter to the human stage and to the dynamic
    // multipath pairs, so they are tracked whenever either stage is on.
    let use_human = human.is_some() && (options.human || options.multipath);
    let per_chirp_vertices = match human {
        Some(seq) if use_human => Some(interpolate_to_chirps(seq, config, frame_index)?),
        _ => None,
    };
    let human_material: Material = human
        .and_then(|seq| seq.material.as_ref())
        .and_then(|name| scene.material_table.get(name).cloned())
        .unwrap_or_else(Material::human);

    // Per-frame fast mode: one visibility pass on the first chirp's facets,
    // reused for chirps whose facet list has the same length (animation can
    // drop degenerate faces mid-frame, which invalidates cached indices).
    let frame_visibility: Option<(Vec<usize>, usize)> = if use_human && options.hpr_per_frame {
        let seq = human.unwrap();
        let verts = &per_chirp_vertices.as_ref().unwrap()[0];
        let points = facet_attributes_with_vertices(
            &seq.topology,
            verts,
            &scene.material_table,
            &human_material,
        )?;
        let centroids: Vec<DVec3> = points.iter().map(|p| p.centroid).collect();
        let visible = hpr_visible(&centroids, DVec3::ZERO, options.hpr_gamma);
        Some((visible, points.len()))
    } else {
        None
    };

    struct ChirpOutput {
        human: Vec<Vec<Complex32>>,
        env: Vec<Vec<Complex32>>,
        multipath: Vec<Vec<Complex32>>,
        human_nanos: u64,
        multipath_nanos: u64,
    }

    let chirp_results: Result<Vec<ChirpOutput>, SynthError> = (0..config.chirps_per_frame)
        .into_par_iter()
        .map(|k| {
            let tx = k % config.num_tx;

            // Facet prep shared by the human and multipath stages:
            // interpolate, extract attributes, cull.
            let prep_start = Instant::now();
            let mut human_points: Vec<ReflectionPoint> = Vec::new();
            let mut human_radii: Vec<f64> = Vec::new();
            if use_human {
                let seq = human.unwrap();
                let verts = &per_chirp_vertices.as_ref().unwrap()[k];
                let all_points = facet_attributes_with_vertices(
                    &seq.topology,
                    verts,
                    &scene.material_table,
                    &human_material,
                )?;
                let all_radii = incircle_radii_with_vertices(&seq.topology, verts);
                let visible: Vec<usize> = match &frame_visibility {
                    Some((cached, source_len)) if *source_len == all_points.len() => {
                        cached.clone()
                    }
                    _ => {
                        let centroids: Vec<DVec3> =
                            all_points.iter().map(|p| p.centroid).collect();
                        hpr_visible(&centroids, DVec3::ZERO, options.hpr_gamma)
                    }
                };
                human_points = visible.iter().map(|&i| all_points[i].clone()).collect();
                human_radii = visible.iter().map(|&i| all_radii[i]).collect();
            }
            let prep_nanos = prep_start.elapsed().as_nanos() as u64;

            // Human stage: direct body return.
            let human_start = Instant::now();
            let mut human_rows = vec![vec![Complex64::ZERO; grid.len()]; num_rx];
            if options.human && !human_points.is_empty() {
                accumulate_points_for_tx(
                    &human_points,
                    &grid,
                    config,
                    SignalMode::Human,
                    options.polarization_mix_rad,
                    tx,
                    &mut human_rows,
                )?;
            }
            let human_nanos = human_start.elapsed().as_nanos() as u64
                + if options.human { prep_nanos } else { 0 };

            // Environment stage: cached static signal for this TX slot.
            let env_rows = &scene.env_signal_per_tx[tx];

            // Multipath stage: cached static-static part plus per-chirp
            // human-involved pairs.
            let mp_start = Instant::now();
            let mut mp_rows = scene.mp_static_per_tx[tx].clone();
            if options.multipath && !human_points.is_empty() {
                let mut points = scene.env_points.clone();
                let mut radii = scene.env_radii.clone();
                let base = points.len();
                points.extend(human_points.iter().cloned());
                radii.extend(human_radii.iter().copied());
                let moved: Vec<bool> = (0..points.len()).map(|i| i >= base).collect();
                let full_table = update_hrpp(
                    &scene.static_table,
                    &points,
                    &radii,
                    &moved,
                    DVec3::ZERO,
                    config,
                    &options.multipath_params(),
                )?;
                let dynamic = HrppTable {
                    entries: full_table
                        .entries
                        .into_iter()
                        .filter(|e| e.first >= base || e.second >= base)
                        .collect(),
                };
                accumulate_multipath_for_tx(
                    &dynamic,
                    &grid,
                    config,
                    wavelength,
                    tx,
                    &mut mp_rows,
                );
            }
            let multipath_nanos = mp_start.elapsed().as_nanos() as u64
                + if options.human { 0 } else { prep_nanos };

            Ok(ChirpOutput {
                human: rows_to_f32(&human_rows),
                env: rows_to_f32(env_rows),
                multipath: rows_to_f32(&mp_rows),
                human_nanos,
                multipath_nanos,
            })
        })
        .collect();
    let chirp_results = chirp_results?;

    let mut cube = FrameCube::for_config(config);
    cube.frame_index = frame_index;
    cube.timestamp_s = frame_index as f64 / config.frame_rate_hz;
    let mut human_nanos = 0u64;
    let mut multipath_nanos = 0u64;
    for (k, out) in chirp_results.iter().enumerate() {
        human_nanos += out.human_nanos;
        multipath_nanos += out.multipath_nanos;
        let tx = k % config.num_tx;
        for rx in 0..num_rx {
            let virtual_idx = tx * num_rx + rx;
            let row = cube.row_mut(k, virtual_idx);
            for (s, sample) in row.iter_mut().enumerate() {
                *sample = out.human[rx][s] + out.env[rx][s] + out.multipath[rx][s];
            }
        }
    }
    cube.validate_finite()?;

    let timings = StageTimings {
        human: Duration::from_nanos(human_nanos),
        env: scene.env_prepare_time,
        multipath: Duration::from_nanos(multipath_nanos) + scene.multipath_prepare_time,
        wall: wall_start.elapsed(),
    };
    Ok((cube, timings))
}

//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers. Run with `cargo test -p mmsim-cli --test acceptance
//! -- --nocapture` to see the lines for passing criteria too.

use glam::DVec3;
use mmsim_core::dsp::{
    angle_fft, doppler_fft, fft_forward, micro_doppler, range_fft, shifted_center,
    static_clutter_removal, Axis, Heatmap, MicroDopplerParams, Window,
};
use mmsim_core::geometry::{
    build_primitive_scene, facet_attributes, facet_attributes_with_vertices, hpr_visible,
    incircle_radii, interpolate_to_chirps, uv_ellipsoid, MeshSequence, ReflectionPoint,
    SceneSpec, TriangleMesh,
};
use mmsim_core::material::{complex_permittivity, Material, MaterialTable};
use mmsim_core::metrics::ms_ssim;
use mmsim_core::multipath::{build_hrpp, HrppTable, MultipathParams};
use mmsim_core::radar::{derive_radar_metrics, RadarConfig};
use mmsim_core::reflectance::fresnel_coeffs;
use mmsim_core::synthesizer::{
    synthesize_frame, synthesize_frame_timed, synthesize_points, SceneState, SignalMode,
    SynthesisOptions,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

fn monostatic_config() -> RadarConfig {
    let mut c = RadarConfig::default_60ghz();
    c.num_tx = 1;
    c.num_rx = 1;
    c.antenna_layout = vec![DVec3::ZERO, DVec3::ZERO];
    c
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mmsim-acceptance-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn assert_budget(tag: &str, elapsed: Duration, budget_s: f64) {
    assert!(
        elapsed.as_secs_f64() < budget_s,
        "{tag} took {:.2} s, budget {budget_s} s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// C1: derived metrics reproduce the published figures
// ---------------------------------------------------------------------------

#[test]
fn c01_derived_metrics_match_published_values() {
    let config = RadarConfig::default_60ghz();
    let start = Instant::now();
    let m = derive_radar_metrics(&config).unwrap();
    let elapsed = start.elapsed();
    let check = |name: &str, got: f64, want: f64| {
        let rel = (got - want).abs() / want;
        assert!(rel < 0.005, "{name}: {got} vs {want} (rel {rel:.4})");
    };
    check("range resolution", m.range_resolution_m, 0.041);
    check("max range", m.max_range_m, 10.49);
    check("max speed", m.max_speed_mps, 11.9);
    check("speed resolution", m.speed_resolution_mps, 0.093);
    assert_budget("derive_radar_metrics", elapsed, 1e-3);
    println!(
        "[C1] PASS: res {:.4} m, max range {:.2} m, max speed {:.2} m/s, speed res {:.4} m/s in {:.1} us",
        m.range_resolution_m,
        m.max_range_m,
        m.max_speed_mps,
        m.speed_resolution_mps,
        elapsed.as_secs_f64() * 1e6
    );
}

// ---------------------------------------------------------------------------
// C2: point-target localization
// ---------------------------------------------------------------------------

#[test]
fn c02_point_target_range_bin() {
    let start = Instant::now();
    let c = monostatic_config();
    let metrics = derive_radar_metrics(&c).unwrap();
    let point = ReflectionPoint {
        centroid: DVec3::new(0.0, 2.05, 0.0),
        unit_normal: DVec3::NEG_Y,
        area_m2: 1e-2,
        material: Material::human(),
        source_face_id: 0,
    };
    let signal = synthesize_points(
        std::slice::from_ref(&point),
        &c.sample_time_grid(),
        &c,
        SignalMode::Human,
        0.0,
    )
    .unwrap();
    let spectrum = fft_forward(&signal[0]);
    let peak = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .unwrap()
        .0 as i64;
    let predicted = (2.05 / metrics.range_resolution_m).round() as i64;
    assert_eq!(predicted, 50);
    assert!((peak - predicted).abs() <= 1, "peak {peak} vs {predicted}");
    assert_budget("C2", start.elapsed(), 5.0);
    println!("[C2] PASS: range-FFT argmax bin {peak} (predicted {predicted})");
}

// ---------------------------------------------------------------------------
// C3: Doppler correctness over scripted velocities
// ---------------------------------------------------------------------------

#[test]
fn c03_scripted_velocities_hit_predicted_doppler_bins() {
    let start = Instant::now();
    let config = RadarConfig::default_60ghz();
    let metrics = derive_radar_metrics(&config).unwrap();
    let table = MaterialTable::with_defaults();
    let slow_len = config.chirps_per_frame / config.num_tx;
    let res_eff = metrics.wavelength_m
        / (2.0 * slow_len as f64 * config.num_tx as f64 * config.chirp_period_s());
    let options = SynthesisOptions {
        env: false,
        multipath: false,
        ..SynthesisOptions::default()
    };
    let scene = SceneState::prepare(config.clone(), options, None, &table).unwrap();
    let spec = SceneSpec::from_json_str(
        r#"{"objects":[{"name":"body","primitive":{"type":"rect","width":0.4,"height":0.4},
            "pose":{"translation":[0,2.5,0]},"material":"human"}]}"#,
    )
    .unwrap();
    let plate = build_primitive_scene(&spec, &table, Path::new(".")).unwrap();
    let mut results = Vec::new();
    for &velocity in &[-2.0, -1.0, 0.5, 1.0, 3.0] {
        let seq = MeshSequence::from_translation(
            plate.clone(),
            DVec3::new(0.0, velocity, 0.0),
            3,
            config.frame_rate_hz,
        )
        .unwrap();
        let cube = synthesize_frame(&scene, Some(&seq), 0).unwrap();
        let rd = doppler_fft(&range_fft(&cube, Window::Rect), &config, true).unwrap();
        let (row, _) = rd.argmax();
        let predicted = shifted_center(slow_len) as i64 + (velocity / res_eff).round() as i64;
        assert!(
            (row as i64 - predicted).abs() <= 1,
            "v={velocity}: row {row}, predicted {predicted}"
        );
        results.push((velocity, row as i64, predicted));
    }
    assert_budget("C3", start.elapsed(), 30.0);
    println!("[C3] PASS: (v, bin, predicted) = {results:?}");
}

// ---------------------------------------------------------------------------
// C4: angle correctness
// ---------------------------------------------------------------------------

#[test]
fn c04_angle_peaks_match_sin_space_predictions() {
    let start = Instant::now();
    let config = RadarConfig::default_60ghz();
    let grid = config.sample_time_grid();
    let padded = 64usize;
    let mut results = Vec::new();
    for &theta_deg in &[-40.0f64, -20.0, 0.0, 20.0, 40.0] {
        let theta = theta_deg.to_radians();
        let pos = DVec3::new(3.0 * theta.sin(), 3.0 * theta.cos(), 0.0);
        let point = ReflectionPoint {
            centroid: pos,
            unit_normal: -pos.normalize(),
            area_m2: 1e-2,
            material: Material::human(),
            source_face_id: 0,
        };
        let rows =
            synthesize_points(std::slice::from_ref(&point), &grid, &config, SignalMode::Human, 0.0)
                .unwrap();
        // Assemble a TDM frame: chirp k carries TX (k mod 3)'s virtual rows.
        let mut cube = mmsim_core::FrameCube::for_config(&config);
        for k in 0..config.chirps_per_frame {
            let tx = k % config.num_tx;
            for rx in 0..config.num_rx {
                let v = tx * config.num_rx + rx;
                let dst = cube.row_mut(k, v);
                for (s, value) in rows[v].iter().enumerate() {
                    dst[s] = num_complex::Complex32::new(value.re as f32, value.im as f32);
                }
            }
        }
        let ra = angle_fft(&range_fft(&cube, Window::Rect), &config, padded).unwrap();
        let (_, col) = ra.argmax();
        // Predicted column: nearest sin-space grid point to sin(theta).
        let predicted = ra
            .axis1
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1.to_radians().sin() - theta.sin()).abs();
                let db = (b.1.to_radians().sin() - theta.sin()).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
            .0;
        assert!(
            (col as i64 - predicted as i64).abs() <= 1,
            "theta {theta_deg}: col {col}, predicted {predicted}"
        );
        results.push((theta_deg, col, predicted));
    }
    assert_budget("C4", start.elapsed(), 30.0);
    println!("[C4] PASS: (deg, col, predicted) = {results:?}");
}

// ---------------------------------------------------------------------------
// C5: multipath ghost and HRPP path length
// ---------------------------------------------------------------------------

#[test]
fn c05_corner_multipath_ghost() {
    let start = Instant::now();
    let config = monostatic_config();
    let metrics = derive_radar_metrics(&config).unwrap();
    let table = MaterialTable::with_defaults();
    // Two perpendicular 1 m plates, radar 3 m away on the bisector.
    let spec = SceneSpec::from_json_str(
        r#"{"objects":[{"name":"corner","primitive":{"type":"corner","width":1.0,"height":1.0},
            "pose":{"translation":[0,3,0]},"material":"plywood"}]}"#,
    )
    .unwrap();
    let mesh = build_primitive_scene(&spec, &table, Path::new(".")).unwrap();
    let points = facet_attributes(&mesh, &table, &Material::human()).unwrap();
    let radii = incircle_radii(&mesh);
    let hrpp = build_hrpp(&points, &radii, DVec3::ZERO, &config, &MultipathParams::default())
        .unwrap();
    assert!(!hrpp.is_empty(), "no multipath pairs recorded");

    // Image-method oracle: unfold each recorded path across the first
    // plate's plane and re-derive the insphere hit from scratch.
    for e in &hrpp.entries {
        let s1 = &points[e.first];
        let s2 = &points[e.second];
        let n = s1.unit_normal;
        let mirrored_radar = DVec3::ZERO - n * (2.0 * n.dot(DVec3::ZERO - s1.centroid));
        let dir = (s1.centroid - mirrored_radar).normalize();
        let w = s2.centroid - mirrored_radar;
        let proj = w.dot(dir);
        let h2 = w.length_squared() - proj * proj;
        let l = radii[e.second];
        assert!(h2 <= l * l, "oracle: ray misses insphere");
        let k = proj - (l * l - h2).sqrt();
        let q = mirrored_radar + dir * k;
        let oracle = k + q.length();
        assert!(
            (e.total_path_length_m - oracle).abs() < 0.01,
            "pair ({}, {}): {} vs oracle {}",
            e.first,
            e.second,
            e.total_path_length_m,
            oracle
        );
    }

    // Ghost peak: synthesize the strongest recorded pair and locate the
    // range-FFT peak at half the recorded path length.
    let wavelength = metrics.wavelength_m;
    let strongest = hrpp
        .entries
        .iter()
        .max_by(|a, b| {
            let amp = |e: &mmsim_core::multipath::HrppEntry| {
                e.combined_gain * e.combined_area * e.combined_orientation * e.combined_material
                    / (e.total_path_length_m * e.total_path_length_m)
            };
            amp(a).partial_cmp(&amp(b)).unwrap()
        })
        .unwrap()
        .clone();
    let d_pair = strongest.total_path_length_m;
    let single = HrppTable {
        entries: vec![strongest],
    };
    let signal = mmsim_core::multipath::synthesize_multipath(
        &single,
        &config.sample_time_grid(),
        &config,
    );
    let spectrum = fft_forward(&signal[0]);
    let peak = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .unwrap()
        .0 as i64;
    let predicted = (d_pair / 2.0 / metrics.range_resolution_m).round() as i64;
    assert!(
        (peak - predicted).abs() <= 1,
        "ghost at bin {peak}, predicted {predicted} (D_pair {d_pair:.3})"
    );
    let _ = wavelength;
    assert_budget("C5", start.elapsed(), 30.0);
    println!(
        "[C5] PASS: {} pairs, D_pair {:.3} m, ghost bin {peak} (predicted {predicted})",
        hrpp.len(),
        d_pair
    );
}

// ---------------------------------------------------------------------------
// C6: radar-equation distance law
// ---------------------------------------------------------------------------

#[test]
fn c06_peak_ratio_follows_inverse_square() {
    let start = Instant::now();
    let c = monostatic_config();
    let metrics = derive_radar_metrics(&c).unwrap();
    let grid = c.sample_time_grid();
    let peak_at = |distance: f64| -> f64 {
        let point = ReflectionPoint {
            centroid: DVec3::new(0.0, distance, 0.0),
            unit_normal: DVec3::NEG_Y,
            area_m2: 1e-2,
            material: Material::human(),
            source_face_id: 0,
        };
        let signal =
            synthesize_points(std::slice::from_ref(&point), &grid, &c, SignalMode::Human, 0.0)
                .unwrap();
        fft_forward(&signal[0])
            .iter()
            .map(|v| v.norm())
            .fold(f64::MIN, f64::max)
    };
    // Bin-centered distances so scalloping cancels exactly.
    let d1 = 50.0 * metrics.range_resolution_m;
    let d2 = 100.0 * metrics.range_resolution_m;
    let ratio = peak_at(d1) / peak_at(d2);
    assert!((ratio - 4.0).abs() / 4.0 < 0.01, "ratio {ratio}");
    assert_budget("C6", start.elapsed(), 10.0);
    println!("[C6] PASS: |peak(D)| / |peak(2D)| = {ratio:.5}");
}

// ---------------------------------------------------------------------------
// C7: Fresnel oracle
// ---------------------------------------------------------------------------

/// Independent Fresnel route: complex square root in polar form, scalar
/// real/imaginary arithmetic.
fn fresnel_oracle(eps_re: f64, eps_im: f64, beta: f64) -> ((f64, f64), (f64, f64)) {
    let sin_b = beta.sin();
    let cos2 = beta.cos() * beta.cos();
    let (wr, wi) = (eps_re - cos2, eps_im);
    let r = (wr * wr + wi * wi).sqrt();
    let theta = wi.atan2(wr);
    let (sr, si) = (r.sqrt() * (theta / 2.0).cos(), r.sqrt() * (theta / 2.0).sin());
    let div = |nr: f64, ni: f64, dr: f64, di: f64| {
        let d2 = dr * dr + di * di;
        ((nr * dr + ni * di) / d2, (ni * dr - nr * di) / d2)
    };
    let gv = div(
        eps_re * sin_b - sr,
        eps_im * sin_b - si,
        eps_re * sin_b + sr,
        eps_im * sin_b + si,
    );
    let gh = div(sin_b - sr, -si, sin_b + sr, si);
    (gv, gh)
}

#[test]
fn c07_fresnel_against_high_precision_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lambda = 5e-3;
    for case in 0..10_000 {
        let eps: f64 = rng.random_range(1.0001..80.0);
        let sigma = if rng.random_bool(0.2) {
            0.0
        } else {
            10f64.powf(rng.random_range(-12.0..6.0))
        };
        let beta: f64 = rng.random_range(1e-3..std::f64::consts::FRAC_PI_2);
        let material = Material::new("m", eps, sigma).unwrap();
        let (gv, gh) = fresnel_coeffs(&material, lambda, beta).unwrap();
        let eps_c = complex_permittivity(&material, lambda);
        let ((ovr, ovi), (ohr, ohi)) = fresnel_oracle(eps_c.re, eps_c.im, beta);
        let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-9);
        assert!(rel(gv.re, ovr) < 1e-9, "case {case}: gv.re");
        assert!(rel(gv.im, ovi) < 1e-9, "case {case}: gv.im");
        assert!(rel(gh.re, ohr) < 1e-9, "case {case}: gh.re");
        assert!(rel(gh.im, ohi) < 1e-9, "case {case}: gh.im");
    }
    // Vacuum: exactly zero.
    let vacuum = Material::new("vacuum", 1.0, 0.0).unwrap();
    for beta in [0.2, 0.9, std::f64::consts::FRAC_PI_2] {
        let (gv, gh) = fresnel_coeffs(&vacuum, lambda, beta).unwrap();
        assert_eq!(gv.norm(), 0.0);
        assert_eq!(gh.norm(), 0.0);
    }
    // Conductor limit away from grazing incidence.
    let conductor = Material::new("conductor", 10.0, 1e8).unwrap();
    for beta_deg in [30.0, 45.0, 60.0, 75.0, 90.0f64] {
        let (gv, gh) = fresnel_coeffs(&conductor, lambda, beta_deg.to_radians()).unwrap();
        assert!((gv.norm() - 1.0).abs() < 1e-3, "beta {beta_deg}: |gv| {}", gv.norm());
        assert!((gh.norm() - 1.0).abs() < 1e-3, "beta {beta_deg}: |gh| {}", gh.norm());
    }
    assert_budget("C7", start.elapsed(), 10.0);
    println!("[C7] PASS: 10000 random triples within 1e-9; vacuum exact; conductor within 1e-3");
}

// ---------------------------------------------------------------------------
// C8: HPR vs ray casting
// ---------------------------------------------------------------------------

fn ray_triangle(origin: DVec3, dir: DVec3, a: DVec3, b: DVec3, c: DVec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-12 {
        return None;
    }
    let inv = 1.0 / det;
    let t_vec = origin - a;
    let u = t_vec.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = t_vec.cross(e1);
    let v = dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > 0.0).then_some(t)
}

fn centroids_of(mesh: &TriangleMesh) -> Vec<DVec3> {
    mesh.faces
        .iter()
        .map(|f| {
            (mesh.vertices[f[0] as usize]
                + mesh.vertices[f[1] as usize]
                + mesh.vertices[f[2] as usize])
                / 3.0
        })
        .collect()
}

fn raycast_flags(mesh: &TriangleMesh, viewpoint: DVec3) -> Vec<bool> {
    let centroids = centroids_of(mesh);
    centroids
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let dir = target - viewpoint;
            for (j, f) in mesh.faces.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(t) = ray_triangle(
                    viewpoint,
                    dir,
                    mesh.vertices[f[0] as usize],
                    mesh.vertices[f[1] as usize],
                    mesh.vertices[f[2] as usize],
                ) {
                    if t < 1.0 - 1e-9 {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}

#[test]
fn c08_hpr_matches_raycast_occlusion() {
    let start = Instant::now();
    // Sphere sub-case: zero back-facing points visible.
    let sphere = uv_ellipsoid(DVec3::splat(1.0), 21, 25);
    assert_eq!(sphere.num_faces(), 1000);
    let viewpoint = DVec3::new(0.0, 0.0, 5.0);
    let centroids = centroids_of(&sphere);
    let visible = hpr_visible(&centroids, viewpoint, 2.0);
    for &i in &visible {
        assert!(centroids[i].z >= -0.2, "back-facing point {i} visible");
    }

    // 20 random convex scenes.
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst: f64 = 1.0;
    for scene_idx in 0..20 {
        let semi = DVec3::new(
            rng.random_range(0.3..1.2),
            rng.random_range(0.3..1.2),
            rng.random_range(0.3..1.2),
        );
        let stacks = rng.random_range(24..32);
        let slices = rng.random_range(36..48);
        let mut mesh = uv_ellipsoid(semi, stacks, slices);
        let rotation = glam::DQuat::from_euler(
            glam::EulerRot::ZYX,
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let center = DVec3::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(2.0..5.0),
            rng.random_range(-0.8..0.8),
        );
        mesh = mesh.transformed(rotation, center);
        let centroids = centroids_of(&mesh);
        let hpr = hpr_visible(&centroids, DVec3::ZERO, 2.0);
        let mut flags = vec![false; centroids.len()];
        for &i in &hpr {
            flags[i] = true;
        }
        let oracle = raycast_flags(&mesh, DVec3::ZERO);
        let agree = flags.iter().zip(&oracle).filter(|(a, b)| a == b).count();
        let agreement = agree as f64 / flags.len() as f64;
        worst = worst.min(agreement);
        assert!(
            agreement >= 0.95,
            "scene {scene_idx}: agreement {agreement:.3}"
        );
    }
    assert_budget("C8", start.elapsed(), 60.0);
    println!("[C8] PASS: 20 scenes, worst agreement {worst:.3}; sphere back side clean");
}

// ---------------------------------------------------------------------------
// C9: static clutter removal
// ---------------------------------------------------------------------------

#[test]
fn c09_scr_cancels_static_and_keeps_movers() {
    let start = Instant::now();
    let config = RadarConfig::default_60ghz();
    let table = MaterialTable::with_defaults();
    let static_spec = SceneSpec::from_json_str(
        r#"{"objects":[{"name":"wall","primitive":{"type":"rect","width":1.5,"height":1.0,"divisions":2},
            "pose":{"translation":[0.4,3.0,0]},"material":"concrete"}]}"#,
    )
    .unwrap();
    let static_mesh = build_primitive_scene(&static_spec, &table, Path::new(".")).unwrap();
    let options = SynthesisOptions {
        human: true,
        env: true,
        multipath: false,
        ..SynthesisOptions::default()
    };
    let scene = SceneState::prepare(config.clone(), options, Some(&static_mesh), &table).unwrap();

    // Static-only: residual energy at or below -40 dB of the input.
    let static_cube = synthesize_frame(&scene, None, 0).unwrap();
    let profiles = range_fft(&static_cube, Window::Rect);
    let cleaned = static_clutter_removal(&profiles, config.num_tx);
    let energy = |p: &mmsim_core::dsp::RangeProfiles| -> f64 {
        let mut acc = 0.0;
        for k in 0..config.chirps_per_frame {
            for v in 0..config.num_virtual() {
                acc += p.row(k, v).iter().map(|s| s.norm_sqr()).sum::<f64>();
            }
        }
        acc
    };
    let ratio_db = 10.0 * (energy(&cleaned) / energy(&profiles)).log10();
    assert!(ratio_db <= -40.0, "residual {ratio_db:.1} dB");

    // Mover co-present with clutter: RD peak within 3 dB of the no-SCR run.
    let mover_spec = SceneSpec::from_json_str(
        r#"{"objects":[{"name":"body","primitive":{"type":"rect","width":0.4,"height":0.4},
            "pose":{"translation":[0,2.2,0]},"material":"human"}]}"#,
    )
    .unwrap();
    let mover = build_primitive_scene(&mover_spec, &table, Path::new(".")).unwrap();
    let seq = MeshSequence::from_translation(
        mover,
        DVec3::new(0.0, 1.0, 0.0),
        3,
        config.frame_rate_hz,
    )
    .unwrap();
    let cube = synthesize_frame(&scene, Some(&seq), 0).unwrap();
    let profiles = range_fft(&cube, Window::Rect);
    let rd_raw = doppler_fft(&profiles, &config, true).unwrap();
    let rd_scr =
        doppler_fft(&static_clutter_removal(&profiles, config.num_tx), &config, true).unwrap();
    // Locate the mover: exclude the zero-Doppler row where clutter sits.
    let center = shifted_center(config.chirps_per_frame / config.num_tx);
    let mut mover_peak = (0usize, 0usize, f64::MIN);
    for r in 0..rd_raw.rows {
        if (r as i64 - center as i64).abs() <= 1 {
            continue;
        }
        for c in 0..rd_raw.cols {
            if rd_raw.at(r, c) > mover_peak.2 {
                mover_peak = (r, c, rd_raw.at(r, c));
            }
        }
    }
    let db = 20.0 * (rd_scr.at(mover_peak.0, mover_peak.1) / mover_peak.2).log10();
    assert!(db.abs() <= 3.0, "mover peak changed {db:.2} dB");
    assert_budget("C9", start.elapsed(), 10.0);
    println!("[C9] PASS: static residual {ratio_db:.1} dB, mover peak delta {db:.2} dB");
}

// ---------------------------------------------------------------------------
// C10: MS-SSIM identity / reference / symmetry
// ---------------------------------------------------------------------------

fn field_heatmap(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Heatmap {
    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.2..3.0),
                rng.random_range(0.2..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.3..1.0),
            )
        })
        .collect();
    let mut values = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (fr, fc, phase, amp) in &modes {
                acc += amp
                    * (std::f64::consts::TAU
                        * (fr * r as f64 / rows as f64 + fc * c as f64 / cols as f64)
                        + phase)
                        .cos();
            }
            values[r * cols + c] = acc;
        }
    }
    Heatmap::new(
        values,
        Axis {
            label: "r".into(),
            values: (0..rows).map(|i| i as f64).collect(),
        },
        Axis {
            label: "c".into(),
            values: (0..cols).map(|i| i as f64).collect(),
        },
    )
}

/// Direct windowed reference implementation of five-scale SSIM.
fn reference_ms_ssim(a: &Heatmap, b: &Heatmap) -> f64 {
    fn norm(h: &Heatmap) -> Vec<f64> {
        let max = h.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = h.values.iter().cloned().fold(f64::MAX, f64::min);
        let span = if max > min { max - min } else { 1.0 };
        h.values.iter().map(|v| (v - min) / span).collect()
    }
    let mut ka = norm(a);
    let mut kb = norm(b);
    let (mut rows, mut cols) = (a.rows, a.cols);
    let mut kernel = [[0.0f64; 11]; 11];
    let mut sum = 0.0;
    for (r, row) in kernel.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let (x, y) = (r as f64 - 5.0, c as f64 - 5.0);
            *cell = (-(x * x + y * y) / (2.0 * 1.5 * 1.5)).exp();
            sum += *cell;
        }
    }
    for row in &mut kernel {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let stat = |xa: &[f64], xb: &[f64], rows: usize, cols: usize| -> (f64, f64) {
        let c1 = 0.01f64.powi(2);
        let c2 = 0.03f64.powi(2);
        let (mut ssim_acc, mut cs_acc, mut count) = (0.0, 0.0, 0.0);
        for r0 in 0..rows + 1 - 11 {
            for c0 in 0..cols + 1 - 11 {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for r in 0..11 {
                    for c in 0..11 {
                        let w = kernel[r][c];
                        let va = xa[(r0 + r) * cols + (c0 + c)];
                        let vb = xb[(r0 + r) * cols + (c0 + c)];
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                }
                let lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
                let cs = (2.0 * (sab - ma * mb) + c2)
                    / ((saa - ma * ma) + (sbb - mb * mb) + c2);
                ssim_acc += lum * cs;
                cs_acc += cs;
                count += 1.0;
            }
        }
        (ssim_acc / count, cs_acc / count)
    };
    let weights = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
    let mut score = 1.0;
    for (scale, weight) in weights.iter().enumerate() {
        let (ssim, cs) = stat(&ka, &kb, rows, cols);
        if scale == 4 {
            score *= ssim.max(0.0).powf(*weight);
        } else {
            score *= cs.max(0.0).powf(*weight);
            let (nr, nc) = (rows / 2, cols / 2);
            let mut da = vec![0.0; nr * nc];
            let mut db = vec![0.0; nr * nc];
            for r in 0..nr {
                for c in 0..nc {
                    da[r * nc + c] = 0.25
                        * (ka[2 * r * cols + 2 * c]
                            + ka[2 * r * cols + 2 * c + 1]
                            + ka[(2 * r + 1) * cols + 2 * c]
                            + ka[(2 * r + 1) * cols + 2 * c + 1]);
                    db[r * nc + c] = 0.25
                        * (kb[2 * r * cols + 2 * c]
                            + kb[2 * r * cols + 2 * c + 1]
                            + kb[(2 * r + 1) * cols + 2 * c]
                            + kb[(2 * r + 1) * cols + 2 * c + 1]);
                }
            }
            ka = da;
            kb = db;
            rows = nr;
            cols = nc;
        }
    }
    score
}

#[test]
fn c10_ms_ssim_identity_reference_symmetry() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = field_heatmap(&mut rng, 176, 176);
    let identity = ms_ssim(&x, &x).unwrap();
    assert!((identity - 1.0).abs() <= 1e-6, "identity {identity}");

    let mut max_diff: f64 = 0.0;
    for case in 0..10 {
        let a = field_heatmap(&mut rng, 176, 176);
        let b = if case % 3 == 0 {
            let noisy = a
                .values
                .iter()
                .map(|v| v + rng.random_range(-0.05..0.05))
                .collect();
            Heatmap::new(noisy, a.axis0.clone(), a.axis1.clone())
        } else {
            field_heatmap(&mut rng, 176, 176)
        };
        let fast = ms_ssim(&a, &b).unwrap();
        let reference = reference_ms_ssim(&a, &b);
        max_diff = max_diff.max((fast - reference).abs());
        assert!(
            (fast - reference).abs() <= 1e-3,
            "case {case}: {fast} vs {reference}"
        );
        let swapped = ms_ssim(&b, &a).unwrap();
        assert!((fast - swapped).abs() <= 1e-9, "symmetry {fast} vs {swapped}");
    }
    assert_budget("C10", start.elapsed(), 10.0);
    println!("[C10] PASS: identity {identity:.8}, max reference diff {max_diff:.2e}");
}

// ---------------------------------------------------------------------------
// C11: byte-identical synthesis across reruns and worker counts
// ---------------------------------------------------------------------------

fn run_mmsim(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_mmsim"))
        .args(args)
        .output()
        .expect("failed to spawn mmsim")
}

fn write_demo_manifest(dir: &Path) -> PathBuf {
    let radar = include_str!("../../../demo/radar.json");
    std::fs::write(dir.join("radar.json"), radar).unwrap();
    let scene = r#"{
  "objects": [
    {"name": "wall", "primitive": {"type": "rect", "width": 2.0, "height": 1.2, "divisions": 3},
     "pose": {"translation": [0.4, 3.2, 0]}, "material": "plywood"},
    {"name": "corner", "primitive": {"type": "corner", "width": 0.6, "height": 0.6},
     "pose": {"translation": [-0.9, 2.6, 0]}, "material": "concrete"}
  ]
}"#;
    std::fs::write(dir.join("scene.json"), scene).unwrap();
    // Scripted walk via the CLI generator.
    let walk_dir = dir.join("walk");
    let out = run_mmsim(&[
        "scene",
        "--walk-out",
        walk_dir.to_str().unwrap(),
        "--walk-frames",
        "2",
        "--walk-fps",
        "15",
        "--walk-speed",
        "1.0",
        "--walk-start",
        "0,2,0",
        "--walk-stacks",
        "8",
        "--walk-slices",
        "12",
    ]);
    assert!(out.status.success(), "walk generation failed: {out:?}");
    let manifest = r#"{
  "radar_config": "radar.json",
  "scene": "scene.json",
  "human_sequence": "walk/manifest.json",
  "output_dir": "out",
  "frames": 1,
  "stages": {"human": true, "env": true, "multipath": true}
}"#;
    let path = dir.join("run.json");
    std::fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn c11_synthesis_is_deterministic_across_workers() {
    let start = Instant::now();
    let dir = temp_dir("c11");
    let manifest = write_demo_manifest(&dir);
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for workers in ["1", "4", "8"] {
        for rerun in 0..2 {
            let out_file = dir.join(format!("signal-{workers}-{rerun}.mmgn"));
            let out = run_mmsim(&[
                "synth",
                "--manifest",
                manifest.to_str().unwrap(),
                "--workers",
                workers,
                "--out",
                out_file.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "synth failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(std::fs::read(&out_file).unwrap());
        }
    }
    for (i, bytes) in outputs.iter().enumerate().skip(1) {
        assert_eq!(
            bytes.len(),
            outputs[0].len(),
            "run {i} size differs"
        );
        assert!(bytes == &outputs[0], "run {i} bytes differ");
    }
    assert_budget("C11", start.elapsed(), 60.0);
    println!(
        "[C11] PASS: 6 runs x {} bytes byte-identical (workers 1/4/8, two runs each)",
        outputs[0].len()
    );
}

// ---------------------------------------------------------------------------
// C12: single-frame throughput
// ---------------------------------------------------------------------------

#[test]
fn c12_single_frame_within_six_seconds() {
    let config = RadarConfig::default_60ghz();
    let table = MaterialTable::with_defaults();
    let scene_spec = SceneSpec::from_json_str(
        r#"{"objects":[
            {"name":"back_wall","primitive":{"type":"rect","width":3.0,"height":2.0,"divisions":10},
             "pose":{"translation":[0,4.0,0.2]},"material":"concrete"},
            {"name":"board","primitive":{"type":"rect","width":1.2,"height":0.9,"divisions":6},
             "pose":{"translation":[1.0,3.2,0.3],"rotation_deg":[0,0,-15]},"material":"glass"},
            {"name":"desk","primitive":{"type":"box","size":[1.2,0.6,0.7],"divisions":4},
             "pose":{"translation":[-1.1,2.6,-0.55]},"material":"plywood"},
            {"name":"corner","primitive":{"type":"corner","width":0.6,"height":0.6,"divisions":3},
             "pose":{"translation":[0.3,3.0,-0.2]},"material":"ceramic"}]}"#,
    )
    .unwrap();
    let env_mesh = build_primitive_scene(&scene_spec, &table, Path::new(".")).unwrap();

    // Body with a realistic facet budget: 2784 faces, ~half visible.
    let body = uv_ellipsoid(DVec3::new(0.22, 0.14, 0.80), 29, 48)
        .transformed(glam::DQuat::IDENTITY, DVec3::new(0.2, 2.0, 0.0));
    let seq = MeshSequence::from_translation(
        body,
        DVec3::new(0.0, 1.2, 0.0),
        2,
        config.frame_rate_hz,
    )
    .unwrap();

    // Count the visible human facets the frame will process.
    let verts = interpolate_to_chirps(&seq, &config, 0).unwrap();
    let points =
        facet_attributes_with_vertices(&seq.topology, &verts[0], &table, &Material::human())
            .unwrap();
    let centroids: Vec<DVec3> = points.iter().map(|p| p.centroid).collect();
    let visible_human = hpr_visible(&centroids, DVec3::ZERO, 2.0).len();
    assert!(
        visible_human <= 2500,
        "visible human facets {visible_human} exceed the stated budget"
    );
    assert!(visible_human >= 800, "scene too light to be meaningful: {visible_human}");

    // Scene preparation (static env + static multipath) is part of the cost.
    let start = Instant::now();
    let scene = SceneState::prepare(config.clone(), SynthesisOptions::default(), Some(&env_mesh), &table)
        .unwrap();
    let (cube, timings) = synthesize_frame_timed(&scene, Some(&seq), 0).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(cube.dims().0, 255);
    assert_eq!(cube.dims().1, 12);
    assert!(cube.total_energy() > 0.0);
    println!(
        "[C12] load: {} visible human facets, {} env facets, {} static pairs",
        visible_human,
        scene.env_points.len(),
        scene.static_table.len()
    );
    println!(
        "[C12] stage timings: human {:.2} s | env {:.2} s | multipath {:.2} s (cpu) | wall {:.2} s",
        timings.human.as_secs_f64(),
        timings.env.as_secs_f64(),
        timings.multipath.as_secs_f64(),
        elapsed.as_secs_f64()
    );
    assert!(
        elapsed.as_secs_f64() <= 6.0,
        "frame took {:.2} s (budget 6 s)",
        elapsed.as_secs_f64()
    );
    println!("[C12] PASS: one 255-chirp frame in {:.2} s", elapsed.as_secs_f64());
}

// ---------------------------------------------------------------------------
// C13: end-to-end micro-Doppler signature of a scripted walk
// ---------------------------------------------------------------------------

#[test]
fn c13_micro_doppler_tracks_scripted_walk() {
    let start = Instant::now();
    // Gapless frames so windows spanning frame boundaries stay coherent.
    let mut config = RadarConfig::default_60ghz();
    config.frame_rate_hz = 1.0 / (config.chirps_per_frame as f64 * config.chirp_period_s());
    let metrics = derive_radar_metrics(&config).unwrap();
    let table = MaterialTable::with_defaults();
    let velocity = 1.0;
    let body = uv_ellipsoid(DVec3::new(0.2, 0.13, 0.7), 8, 12)
        .transformed(glam::DQuat::IDENTITY, DVec3::new(0.0, 2.0, 0.0));
    let radar_frames = 8usize;
    let seq = MeshSequence::from_translation(
        body,
        DVec3::new(0.0, velocity, 0.0),
        radar_frames + 1,
        config.frame_rate_hz,
    )
    .unwrap();
    let options = SynthesisOptions {
        env: false,
        multipath: false,
        ..SynthesisOptions::default()
    };
    let scene = SceneState::prepare(config.clone(), options, None, &table).unwrap();
    let cubes: Vec<_> = (0..radar_frames)
        .map(|f| synthesize_frame(&scene, Some(&seq), f).unwrap())
        .collect();
    let md = micro_doppler(&cubes, &config, &MicroDopplerParams::default()).unwrap();

    let window = 256usize;
    let slow_step = config.num_tx as f64 * config.chirp_period_s();
    let res = metrics.wavelength_m / (2.0 * window as f64 * slow_step);
    let predicted = shifted_center(window) as i64 + (velocity / res).round() as i64;
    let mut hits = 0usize;
    for w in 0..md.cols {
        let mut best = (0usize, f64::MIN);
        for d in 0..md.rows {
            if md.at(d, w) > best.1 {
                best = (d, md.at(d, w));
            }
        }
        if (best.0 as i64 - predicted).abs() <= 1 {
            hits += 1;
        }
    }
    let fraction = hits as f64 / md.cols as f64;
    assert!(
        fraction >= 0.9,
        "only {hits}/{} windows on the predicted line (bin {predicted})",
        md.cols
    );
    assert_budget("C13", start.elapsed(), 120.0);
    println!(
        "[C13] PASS: {hits}/{} windows within 1 bin of predicted {predicted}",
        md.cols
    );
}

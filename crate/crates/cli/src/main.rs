//! Batch CLI for mmWave radar signal synthesis, signature processing and
//! similarity comparison. All outputs are plain files (MMGN, CSV, PNG, JSON);
//! every command is deterministic for fixed inputs and flags.

mod error;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use glam::DVec3;
use manifest::{KnobOverrides, RunManifest};
use mmsim_core::dsp::{
    angle_fft, doppler_fft, micro_doppler, range_fft, static_clutter_removal, Axis, Heatmap,
    MdAggregate, MicroDopplerParams, RangeProfiles, Window,
};
use mmsim_core::geometry::{
    build_primitive_scene, uv_ellipsoid, write_obj, MeshSequence, SceneSpec,
};
use mmsim_core::material::MaterialTable;
use mmsim_core::metrics::{mae, ms_ssim};
use mmsim_core::mmgn::{read_mmgn, write_mmgn, MmgnHeader};
use mmsim_core::radar::{derive_radar_metrics, RadarConfig};
use mmsim_core::synthesizer::{synthesize_frame_timed, SceneState, StageTimings};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mmsim", version, about = "FMCW mmWave radar signal simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sensing metrics derived from a radar config.
    Info(InfoArgs),
    /// Build a scene mesh from a JSON spec, or emit a scripted walk sequence.
    Scene(SceneArgs),
    /// Synthesize IF signal frames per a run manifest and write an MMGN file.
    Synth(SynthArgs),
    /// Process an MMGN file into signature heatmaps (CSV + PNG).
    Process(ProcessArgs),
    /// Compare matching heatmap CSVs across two directories.
    Compare(CompareArgs),
}

#[derive(Args)]
struct InfoArgs {
    /// Radar config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Emit machine-readable JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SceneArgs {
    /// Scene spec JSON to build into a mesh.
    #[arg(long, requires = "out")]
    spec: Option<PathBuf>,
    /// Material table JSON (defaults built in).
    #[arg(long)]
    materials: Option<PathBuf>,
    /// Output OBJ path for --spec.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a scripted constant-velocity walk sequence into this directory.
    #[arg(long, conflicts_with = "spec")]
    walk_out: Option<PathBuf>,
    /// Number of mesh frames for --walk-out.
    #[arg(long, default_value_t = 16)]
    walk_frames: usize,
    /// Mesh frame rate (fps) for --walk-out.
    #[arg(long, default_value_t = 15.0)]
    walk_fps: f64,
    /// Radial walk speed in m/s (positive = away from the radar).
    #[arg(long, default_value_t = 1.0)]
    walk_speed: f64,
    /// Start position "x,y,z" in meters.
    #[arg(long, default_value = "0,2,0")]
    walk_start: String,
    /// Body ellipsoid semi-axes "rx,ry,rz" in meters.
    #[arg(long, default_value = "0.22,0.14,0.80")]
    walk_size: String,
    /// Body tessellation: latitude bands.
    #[arg(long, default_value_t = 29)]
    walk_stacks: usize,
    /// Body tessellation: longitude steps.
    #[arg(long, default_value_t = 48)]
    walk_slices: usize,
}

#[derive(Args)]
struct SynthArgs {
    /// Run manifest JSON.
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override: HPR flipping exponent gamma.
    #[arg(long)]
    hpr_gamma: Option<f64>,
    /// Override: quasi-specular spread eta, degrees.
    #[arg(long)]
    eta_deg: Option<f64>,
    /// Override: polarization mixing angle psi, degrees.
    #[arg(long)]
    psi_deg: Option<f64>,
    /// Override: multipath candidate cone half-angle, degrees.
    #[arg(long)]
    cone_deg: Option<f64>,
    /// Override: run HPR once per frame instead of per chirp.
    #[arg(long)]
    hpr_per_frame: bool,
    /// Override: number of radar frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Output MMGN path (default: <output_dir>/signal.mmgn).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump the static multipath pair table as JSON for debugging.
    #[arg(long)]
    dump_hrpp: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Signature {
    Rfft,
    Rd,
    Ra,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    Rect,
    Hann,
}

#[derive(Args)]
struct ProcessArgs {
    /// Input MMGN signal file.
    #[arg(long)]
    signal: PathBuf,
    /// Radar config JSON (needed for the TDM schedule and antenna layout).
    #[arg(long)]
    config: PathBuf,
    /// Which signature to emit.
    #[arg(long, value_enum)]
    signature: Signature,
    /// Apply static clutter removal before rd/ra.
    #[arg(long)]
    scr: bool,
    /// Fast-time window for the range FFT.
    #[arg(long, value_enum, default_value_t = WindowArg::Rect)]
    window: WindowArg,
    /// Normalize the heatmap maximum to 1.
    #[arg(long)]
    normalize: bool,
    /// Frame index for rfft/rd/ra.
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Output directory for CSV/PNG.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Angle FFT padding (bins).
    #[arg(long, default_value_t = 64)]
    angle_bins: usize,
    /// Micro-Doppler STFT window (slow-time samples).
    #[arg(long, default_value_t = 256)]
    md_window: usize,
    /// Micro-Doppler STFT hop.
    #[arg(long, default_value_t = 64)]
    md_hop: usize,
    /// Micro-Doppler: sum spectra over all range bins instead of picking the
    /// max-variance bin.
    #[arg(long)]
    md_sum_bins: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// First directory of heatmap CSVs.
    #[arg(long)]
    dir_a: PathBuf,
    /// Second directory of heatmap CSVs.
    #[arg(long)]
    dir_b: PathBuf,
    /// Write the JSON report here (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Info(args) => cmd_info(args),
        Command::Scene(args) => cmd_scene(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Process(args) => cmd_process(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.kind as u8)
        }
    }
}

fn cmd_info(args: InfoArgs) -> Result<ExitCode, CliError> {
    let config = RadarConfig::from_json_file(&args.config)?;
    let m = derive_radar_metrics(&config)?;
    if args.json {
        let json = serde_json::json!({
            "slope_hz_per_s": m.slope_hz_per_s,
            "wavelength_m": m.wavelength_m,
            "range_resolution_m": m.range_resolution_m,
            "max_range_m": m.max_range_m,
            "max_speed_mps": m.max_speed_mps,
            "speed_resolution_mps": m.speed_resolution_mps,
            "if_bin_hz": m.if_bin_hz,
            "num_virtual": config.num_virtual(),
        });
        println!("{}", serde_json::to_string_pretty(&json).unwrap());
    } else {
        println!("slope:            {:.6e} Hz/s", m.slope_hz_per_s);
        println!("wavelength:       {:.6} mm", m.wavelength_m * 1e3);
        println!("range resolution: {:.4} m", m.range_resolution_m);
        println!("max range:        {:.2} m", m.max_range_m);
        println!("max speed:        {:.2} m/s", m.max_speed_mps);
        println!("speed resolution: {:.4} m/s", m.speed_resolution_mps);
        println!("IF bin:           {:.1} Hz", m.if_bin_hz);
        println!("virtual antennas: {}", config.num_virtual());
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_vec3(text: &str) -> Result<DVec3, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("bad vector `{text}`: {e}")))?;
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "bad vector `{text}`: expected 3 comma-separated numbers"
        )));
    }
    Ok(DVec3::new(parts[0], parts[1], parts[2]))
}

fn cmd_scene(args: SceneArgs) -> Result<ExitCode, CliError> {
    let materials = match &args.materials {
        Some(path) => MaterialTable::from_json_file(path)?,
        None => MaterialTable::with_defaults(),
    };
    if let Some(walk_dir) = &args.walk_out {
        let start = parse_vec3(&args.walk_start)?;
        let size = parse_vec3(&args.walk_size)?;
        if args.walk_frames == 0 || args.walk_fps <= 0.0 {
            return Err(CliError::config("walk needs frames >= 1 and fps > 0"));
        }
        let body = uv_ellipsoid(size, args.walk_stacks, args.walk_slices)
            .transformed(glam::DQuat::IDENTITY, start);
        let seq = MeshSequence::from_translation(
            body,
            DVec3::new(0.0, args.walk_speed, 0.0),
            args.walk_frames,
            args.walk_fps,
        )?;
        let frames_dir = walk_dir.join("frames");
        std::fs::create_dir_all(&frames_dir)?;
        let mut frame_files = Vec::new();
        for (i, verts) in seq.frames.iter().enumerate() {
            let mut mesh = seq.topology.clone();
            mesh.vertices = verts.clone();
            let rel = format!("frames/f{i:04}.obj");
            let mut out = Vec::new();
            write_obj(&mut out, &mesh)?;
            std::fs::write(walk_dir.join(&rel), out)?;
            frame_files.push(rel);
        }
        let manifest = serde_json::json!({
            "frame_rate_hz": args.walk_fps,
            "material": "human",
            "frames": frame_files,
        });
        std::fs::write(
            walk_dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).unwrap(),
        )?;
        println!(
            "wrote {} walk frames ({} faces each) to {}",
            seq.num_frames(),
            seq.topology.num_faces(),
            walk_dir.display()
        );
        return Ok(ExitCode::SUCCESS);
    }

    let (Some(spec_path), Some(out_path)) = (&args.spec, &args.out) else {
        return Err(CliError::config(
            "scene needs either --spec with --out, or --walk-out",
        ));
    };
    let spec = SceneSpec::from_json_file(spec_path)?;
    let base = spec_path.parent().unwrap_or_else(|| Path::new("."));
    let mesh = build_primitive_scene(&spec, &materials, base)?;
    let mut out = Vec::new();
    write_obj(&mut out, &mesh)?;
    std::fs::write(out_path, out)?;
    println!(
        "wrote {} ({} vertices, {} faces, {} degenerate dropped)",
        out_path.display(),
        mesh.num_vertices(),
        mesh.num_faces(),
        mesh.degenerate_faces_dropped
    );
    Ok(ExitCode::SUCCESS)
}

fn format_timings(t: &StageTimings) -> String {
    format!(
        "human {:.3} s | env {:.3} s | multipath {:.3} s (cpu) | wall {:.3} s",
        t.human.as_secs_f64(),
        t.env.as_secs_f64(),
        t.multipath.as_secs_f64(),
        t.wall.as_secs_f64()
    )
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, CliError> {
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let overrides = KnobOverrides {
        hpr_gamma: args.hpr_gamma,
        specular_spread_deg: args.eta_deg,
        polarization_mix_deg: args.psi_deg,
        cone_half_angle_deg: args.cone_deg,
        hpr_per_frame: if args.hpr_per_frame { Some(true) } else { None },
    };
    let mut run = RunManifest::load(&args.manifest, &overrides)?;
    if let Some(frames) = args.frames {
        if frames == 0 {
            return Err(CliError::config("frames must be at least 1"));
        }
        run.frames = frames;
    }

    let scene = SceneState::prepare(
        run.config.clone(),
        run.options,
        run.scene_mesh.as_ref(),
        &run.materials,
    )?;
    println!(
        "scene: {} environment facets visible, {} static multipath pairs",
        scene.env_points.len(),
        scene.static_table.len()
    );
    if let Some(path) = &args.dump_hrpp {
        std::fs::write(path, scene.static_table.to_json())?;
        println!("wrote multipath table dump to {}", path.display());
    }

    let mut cubes = Vec::with_capacity(run.frames);
    let mut total = StageTimings::default();
    for frame in 0..run.frames {
        let (cube, timings) =
            synthesize_frame_timed(&scene, run.human_sequence.as_ref(), frame)?;
        cube.validate_finite()?;
        println!("frame {frame}: {}", format_timings(&timings));
        total.human += timings.human;
        total.env = timings.env; // prepare time, counted once
        total.multipath += timings.multipath;
        total.wall += timings.wall;
        cubes.push(cube);
    }
    println!("total: {}", format_timings(&total));

    std::fs::create_dir_all(&run.output_dir)?;
    let out_path = args
        .out
        .unwrap_or_else(|| run.output_dir.join("signal.mmgn"));
    let header = MmgnHeader::from_config(&run.config, cubes.len());
    write_mmgn(&out_path, &header, &cubes)?;
    let bytes = mmsim_core::mmgn::HEADER_SIZE as u64 + header.payload_bytes();
    println!(
        "wrote {} ({} frames, {} bytes)",
        out_path.display(),
        cubes.len(),
        bytes
    );
    Ok(ExitCode::SUCCESS)
}

fn check_header_matches(
    header: &MmgnHeader,
    config: &RadarConfig,
) -> Result<(), CliError> {
    let dims_ok = header.n_chirps as usize == config.chirps_per_frame
        && header.n_virtual as usize == config.num_virtual()
        && header.n_samples as usize == config.samples_per_chirp;
    if !dims_ok {
        return Err(CliError::config(format!(
            "signal dims {}x{}x{} do not match config {}x{}x{}",
            header.n_chirps,
            header.n_virtual,
            header.n_samples,
            config.chirps_per_frame,
            config.num_virtual(),
            config.samples_per_chirp
        )));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    if !(close(header.start_frequency_hz, config.start_frequency_hz)
        && close(header.bandwidth_hz, config.bandwidth_hz)
        && close(header.ramp_time_s, config.ramp_time_s)
        && close(header.sample_rate_hz, config.sample_rate_hz))
    {
        eprintln!("warning: signal header radar parameters differ from --config");
    }
    Ok(())
}

fn rfft_heatmap(profiles: &RangeProfiles, config: &RadarConfig) -> Result<Heatmap, CliError> {
    let metrics = derive_radar_metrics(config)?;
    let mut values = vec![0.0f64; profiles.num_chirps * profiles.num_bins];
    for k in 0..profiles.num_chirps {
        for v in 0..profiles.num_virtual {
            for (bin, sample) in profiles.row(k, v).iter().enumerate() {
                values[k * profiles.num_bins + bin] += sample.norm();
            }
        }
    }
    Ok(Heatmap::new(
        values,
        Axis {
            label: "chirp_time_s".into(),
            values: (0..profiles.num_chirps)
                .map(|k| k as f64 * config.chirp_period_s())
                .collect(),
        },
        Axis {
            label: "range_m".into(),
            values: (0..profiles.num_bins)
                .map(|b| b as f64 * metrics.range_resolution_m)
                .collect(),
        },
    ))
}

fn cmd_process(args: ProcessArgs) -> Result<ExitCode, CliError> {
    let config = RadarConfig::from_json_file(&args.config)?;
    let (header, cubes) = read_mmgn(&args.signal)?;
    check_header_matches(&header, &config)?;
    if cubes.is_empty() {
        return Err(CliError::config("signal file contains no frames"));
    }
    let window = match args.window {
        WindowArg::Rect => Window::Rect,
        WindowArg::Hann => Window::Hann,
    };
    let frame = args.frame;
    if frame >= cubes.len() && args.signature != Signature::Md {
        return Err(CliError::config(format!(
            "frame {frame} out of range ({} frames)",
            cubes.len()
        )));
    }

    let mut heatmap = match args.signature {
        Signature::Rfft => {
            let profiles = maybe_scr(range_fft(&cubes[frame], window), args.scr, &config);
            rfft_heatmap(&profiles, &config)?
        }
        Signature::Rd => {
            let profiles = maybe_scr(range_fft(&cubes[frame], window), args.scr, &config);
            doppler_fft(&profiles, &config, true)?
        }
        Signature::Ra => {
            let profiles = maybe_scr(range_fft(&cubes[frame], window), args.scr, &config);
            angle_fft(&profiles, &config, args.angle_bins)?
        }
        Signature::Md => {
            let params = MicroDopplerParams {
                stft_window: args.md_window,
                hop: args.md_hop,
                aggregate: if args.md_sum_bins {
                    MdAggregate::SumBins
                } else {
                    MdAggregate::VarianceMax
                },
            };
            micro_doppler(&cubes, &config, &params)?
        }
    };
    if args.normalize {
        heatmap.normalize();
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let stem = match args.signature {
        Signature::Rfft => "rfft",
        Signature::Rd => "rd",
        Signature::Ra => "ra",
        Signature::Md => "md",
    };
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let png_path = args.out_dir.join(format!("{stem}.png"));
    heatmap.write_csv(&csv_path)?;
    heatmap.write_png(&png_path)?;
    println!(
        "wrote {} and {} ({}x{})",
        csv_path.display(),
        png_path.display(),
        heatmap.rows,
        heatmap.cols
    );
    Ok(ExitCode::SUCCESS)
}

fn maybe_scr(profiles: RangeProfiles, scr: bool, config: &RadarConfig) -> RangeProfiles {
    if scr {
        static_clutter_removal(&profiles, config.num_tx)
    } else {
        profiles
    }
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode, CliError> {
    let list = |dir: &Path| -> Result<Vec<String>, CliError> {
        let mut names = Vec::new();
        for entry in std::fs::read_dir(dir)
            .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
        {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().to_string();
            if name.ends_with(".csv") {
                names.push(name);
            }
        }
        names.sort();
        Ok(names)
    };
    let names_a = list(&args.dir_a)?;
    let names_b = list(&args.dir_b)?;
    let common: Vec<&String> = names_a.iter().filter(|n| names_b.contains(n)).collect();
    if common.is_empty() {
        return Err(CliError::config("no matching .csv filenames across the two directories"));
    }

    let mut pair_entries = Vec::new();
    let mut ms_scores = Vec::new();
    let mut mae_scores = Vec::new();
    let mut had_errors = false;
    for name in common {
        let a = Heatmap::read_csv(&args.dir_a.join(name))?;
        let b = Heatmap::read_csv(&args.dir_b.join(name))?;
        let a_norm = a.min_max_normalized();
        let b_norm = b.min_max_normalized();
        match (ms_ssim(&a_norm, &b_norm), mae(&a_norm, &b_norm)) {
            (Ok(ms), Ok(mae_value)) => {
                ms_scores.push(ms);
                mae_scores.push(mae_value);
                pair_entries.push(serde_json::json!({
                    "name": name,
                    "ms_ssim": ms,
                    "mae": mae_value,
                }));
            }
            (ms_result, mae_result) => {
                had_errors = true;
                let message = ms_result
                    .err()
                    .map(|e| e.to_string())
                    .or_else(|| mae_result.err().map(|e| e.to_string()))
                    .unwrap_or_else(|| "unknown error".into());
                pair_entries.push(serde_json::json!({
                    "name": name,
                    "error": message,
                }));
            }
        }
    }

    let mean_sd = |values: &[f64]| -> (f64, f64) {
        if values.is_empty() {
            return (f64::NAN, f64::NAN);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (ms_mean, ms_sd) = mean_sd(&ms_scores);
    let (mae_mean, mae_sd) = mean_sd(&mae_scores);
    let report = serde_json::json!({
        "pairs": pair_entries,
        "pair_count": ms_scores.len(),
        "ms_ssim_mean": ms_mean,
        "ms_ssim_sd": ms_sd,
        "mae_mean": mae_mean,
        "mae_sd": mae_sd,
    });
    let text = serde_json::to_string_pretty(&report).unwrap();
    match &args.out {
        Some(path) => std::fs::write(path, &text)?,
        None => println!("{text}"),
    }
    if had_errors {
        return Err(CliError::config("one or more pairs failed to compare (see report)"));
    }
    Ok(ExitCode::SUCCESS)
}

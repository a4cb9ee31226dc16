//! Signature processing: Range/Doppler/Angle FFTs, static clutter removal,
//! and micro-Doppler spectrograms, producing axis-annotated heatmaps.

use crate::cube::FrameCube;
use crate::radar::{derive_radar_metrics, virtual_array, RadarConfig};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("chirp count {chirps} is not divisible by num_tx {num_tx}")]
    ChirpsNotDivisible { chirps: usize, num_tx: usize },
    #[error("virtual array has no uniform azimuth ULA subset: {reason}")]
    NonUniformAzimuthArray { reason: String },
    #[error("slow-time sequence of {got} samples is shorter than one STFT window ({window})")]
    SequenceTooShort { got: usize, window: usize },
    #[error("input cubes disagree in dimensions: {0:?} vs {1:?}")]
    DimsMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("empty input")]
    EmptyInput,
    #[error("heatmap parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error("png encode error: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fast-time window applied before the range FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rect,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => symmetric_hann(n),
        }
    }
}

/// Symmetric Hann window (exactly mirror-symmetric, which keeps time-reversal
/// tests bit-clean).
fn symmetric_hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Forward FFT of one row.
pub fn fft_forward(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// In-place fftshift: DC lands at index `n/2`.
pub fn fftshift<T: Clone>(input: &[T]) -> Vec<T> {
    let n = input.len();
    let offset = n.div_ceil(2);
    (0..n).map(|i| input[(i + offset) % n].clone()).collect()
}

/// Index of the zero-frequency bin after [`fftshift`].
pub fn shifted_center(n: usize) -> usize {
    n / 2
}

/// Complex range profiles, indexed `[chirp][virtual][range_bin]`.
#[derive(Debug, Clone)]
pub struct RangeProfiles {
    data: Vec<Complex64>,
    pub num_chirps: usize,
    pub num_virtual: usize,
    pub num_bins: usize,
}

impl RangeProfiles {
    pub fn zeroed(num_chirps: usize, num_virtual: usize, num_bins: usize) -> Self {
        Self {
            data: vec![Complex64::ZERO; num_chirps * num_virtual * num_bins],
            num_chirps,
            num_virtual,
            num_bins,
        }
    }

    #[inline]
    fn offset(&self, chirp: usize, virtual_idx: usize) -> usize {
        (chirp * self.num_virtual + virtual_idx) * self.num_bins
    }

    pub fn row(&self, chirp: usize, virtual_idx: usize) -> &[Complex64] {
        let start = self.offset(chirp, virtual_idx);
        &self.data[start..start + self.num_bins]
    }

    pub fn row_mut(&mut self, chirp: usize, virtual_idx: usize) -> &mut [Complex64] {
        let start = self.offset(chirp, virtual_idx);
        &mut self.data[start..start + self.num_bins]
    }
}

/// Range FFT along the sample dimension, no zero padding: bin `b` maps to
/// range `b * range_resolution`.
pub fn range_fft(cube: &FrameCube, window: Window) -> RangeProfiles {
    let (chirps, virtuals, samples) = cube.dims();
    let mut profiles = RangeProfiles::zeroed(chirps, virtuals, samples);
    let coeffs = window.coefficients(samples);
    let fft = FftPlanner::new().plan_fft_forward(samples);
    let mut buf = vec![Complex64::ZERO; samples];
    for k in 0..chirps {
        for v in 0..virtuals {
            let row = cube.row(k, v);
            for ((slot, sample), w) in buf.iter_mut().zip(row).zip(&coeffs) {
                *slot = Complex64::new(sample.re as f64 * w, sample.im as f64 * w);
            }
            fft.process(&mut buf);
            profiles.row_mut(k, v).copy_from_slice(&buf);
        }
    }
    profiles
}

/// A real-valued signature with labeled, physically scaled axes.
/// `values` is row-major: `rows = axis0.values.len()`,
/// `cols = axis1.values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub axis0: Axis,
    pub axis1: Axis,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn new(values: Vec<f64>, axis0: Axis, axis1: Axis) -> Self {
        let rows = axis0.values.len();
        let cols = axis1.values.len();
        assert_eq!(values.len(), rows * cols, "axis lengths must match dims");
        Self {
            values,
            rows,
            cols,
            axis0,
            axis1,
            normalized: false,
        }
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_val = f64::NEG_INFINITY;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.at(r, c);
                if v > best_val {
                    best_val = v;
                    best = (r, c);
                }
            }
        }
        best
    }

    pub fn total_energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Scale so the maximum becomes 1.0 (argmax preserved). No-op on an
    /// all-zero map.
    pub fn normalize(&mut self) {
        let max = self.max();
        if max > 0.0 && max.is_finite() {
            for v in &mut self.values {
                *v /= max;
            }
        }
        self.normalized = true;
    }

    /// Min-max normalization to [0, 1] (used by similarity scoring).
    pub fn min_max_normalized(&self) -> Heatmap {
        let max = self.max();
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let span = max - min;
        let mut out = self.clone();
        for v in &mut out.values {
            *v = if span > 0.0 { (*v - min) / span } else { 0.0 };
        }
        out.normalized = true;
        out
    }

    /// CSV, row-major. The header cell is `axis0_label\axis1_label` followed
    /// by the axis1 scale; each data line starts with its axis0 value.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\\{}", self.axis0.label, self.axis1.label));
        for v in &self.axis1.values {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
        for r in 0..self.rows {
            out.push_str(&format!("{:e}", self.axis0.values[r]));
            for c in 0..self.cols {
                out.push_str(&format!(",{:e}", self.at(r, c)));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DspError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn from_csv_str(text: &str) -> Result<Heatmap, DspError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(DspError::EmptyInput)?;
        let mut cells = header.split(',');
        let labels = cells.next().unwrap_or_default();
        let (label0, label1) = labels.split_once('\\').ok_or(DspError::CsvParse {
            line: 1,
            message: "header must be `axis0\\axis1`".into(),
        })?;
        let axis1_values: Vec<f64> = cells
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DspError::CsvParse {
                line: 1,
                message: e.to_string(),
            })?;
        let mut axis0_values = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut cells = line.split(',');
            let head = cells.next().unwrap_or_default();
            axis0_values.push(head.trim().parse::<f64>().map_err(|e| DspError::CsvParse {
                line: idx + 1,
                message: e.to_string(),
            })?);
            let mut count = 0usize;
            for c in cells {
                values.push(c.trim().parse::<f64>().map_err(|e| DspError::CsvParse {
                    line: idx + 1,
                    message: e.to_string(),
                })?);
                count += 1;
            }
            if count != axis1_values.len() {
                return Err(DspError::CsvParse {
                    line: idx + 1,
                    message: format!("expected {} cells, got {count}", axis1_values.len()),
                });
            }
        }
        Ok(Heatmap::new(
            values,
            Axis {
                label: label0.to_string(),
                values: axis0_values,
            },
            Axis {
                label: label1.to_string(),
                values: axis1_values,
            },
        ))
    }

    pub fn read_csv(path: &Path) -> Result<Heatmap, DspError> {
        Heatmap::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// 8-bit grayscale PNG, min mapped to black and max to white, row 0 at
    /// the top.
    pub fn write_png(&self, path: &Path) -> Result<(), DspError> {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.max();
        let span = if max > min { max - min } else { 1.0 };
        let pixels: Vec<u8> = self
            .values
            .iter()
            .map(|v| (((v - min) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        let file = std::fs::File::create(path)?;
        let mut encoder = png::Encoder::new(
            std::io::BufWriter::new(file),
            self.cols as u32,
            self.rows as u32,
        );
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| DspError::Png(e.to_string()))?;
        writer
            .write_image_data(&pixels)
            .map_err(|e| DspError::Png(e.to_string()))?;
        Ok(())
    }
}

/// Doppler FFT over slow time. With `per_tx` (the default for TDM frames)
/// each TX's chirp subsequence is transformed separately over that TX's
/// virtual channels and the magnitudes are accumulated; the slow-time step is
/// then `num_tx * (T_c + idle)`. Output rows span velocity (fftshifted, zero
/// velocity at the center row, positive = receding), columns span range.
pub fn doppler_fft(
    profiles: &RangeProfiles,
    config: &RadarConfig,
    per_tx: bool,
) -> Result<Heatmap, DspError> {
    let metrics = derive_radar_metrics(config).map_err(|_| DspError::EmptyInput)?;
    let num_tx = if per_tx { config.num_tx } else { 1 };
    if !profiles.num_chirps.is_multiple_of(num_tx) {
        return Err(DspError::ChirpsNotDivisible {
            chirps: profiles.num_chirps,
            num_tx,
        });
    }
    let slow_len = profiles.num_chirps / num_tx;
    let num_rx = profiles.num_virtual / num_tx.max(1);
    let mut out = vec![0.0f64; slow_len * profiles.num_bins];
    let fft = FftPlanner::new().plan_fft_forward(slow_len);
    let mut slow = vec![Complex64::ZERO; slow_len];
    for tx in 0..num_tx {
        let virtuals: Vec<usize> = if per_tx {
            (tx * num_rx..(tx + 1) * num_rx).collect()
        } else {
            (0..profiles.num_virtual).collect()
        };
        for &v in &virtuals {
            for bin in 0..profiles.num_bins {
                for (i, slot) in slow.iter_mut().enumerate() {
                    let chirp = tx + i * num_tx;
                    *slot = profiles.row(chirp, v)[bin];
                }
                fft.process(&mut slow);
                let shifted = fftshift(&slow);
                for (d, value) in shifted.iter().enumerate() {
                    out[d * profiles.num_bins + bin] += value.norm();
                }
            }
        }
    }
    let slow_step = num_tx as f64 * config.chirp_period_s();
    let center = shifted_center(slow_len) as f64;
    let velocity_axis: Vec<f64> = (0..slow_len)
        .map(|d| (d as f64 - center) / (slow_len as f64 * slow_step) * metrics.wavelength_m / 2.0)
        .collect();
    let range_axis: Vec<f64> = (0..profiles.num_bins)
        .map(|b| b as f64 * metrics.range_resolution_m)
        .collect();
    Ok(Heatmap::new(
        out,
        Axis {
            label: "velocity_mps".into(),
            values: velocity_axis,
        },
        Axis {
            label: "range_m".into(),
            values: range_axis,
        },
    ))
}

/// The azimuth ULA subset of the virtual array: indices sorted by x together
/// with the element spacing in wavelengths.
fn azimuth_ula(config: &RadarConfig) -> Result<(Vec<usize>, f64), DspError> {
    let virtuals = virtual_array(config).map_err(|e| DspError::NonUniformAzimuthArray {
        reason: e.to_string(),
    })?;
    // Group by quantized (y, z); take the most populated row.
    let mut groups: std::collections::BTreeMap<(i64, i64), Vec<usize>> = Default::default();
    for (i, p) in virtuals.iter().enumerate() {
        let key = ((p.y * 1e6).round() as i64, (p.z * 1e6).round() as i64);
        groups.entry(key).or_default().push(i);
    }
    let row = groups
        .values()
        .max_by_key(|v| v.len())
        .ok_or(DspError::EmptyInput)?
        .clone();
    if row.len() < 2 {
        return Err(DspError::NonUniformAzimuthArray {
            reason: "fewer than 2 co-planar elements".into(),
        });
    }
    let mut sorted = row;
    sorted.sort_by(|&a, &b| virtuals[a].x.partial_cmp(&virtuals[b].x).unwrap());
    let spacing = virtuals[sorted[1]].x - virtuals[sorted[0]].x;
    if spacing <= 0.0 {
        return Err(DspError::NonUniformAzimuthArray {
            reason: "coincident elements".into(),
        });
    }
    for pair in sorted.windows(2) {
        let d = virtuals[pair[1]].x - virtuals[pair[0]].x;
        if ((d - spacing) / spacing).abs() > 1e-6 {
            return Err(DspError::NonUniformAzimuthArray {
                reason: format!("spacing {d} != {spacing}"),
            });
        }
    }
    Ok((sorted, spacing))
}

/// Angle FFT across the azimuth ULA, zero-padded to `padded_bins`. Range
/// profiles are coherently averaged over each TX slot's chirps first. Output
/// rows span range, columns span azimuth (degrees, ascending; uniform in
/// sin space).
pub fn angle_fft(
    profiles: &RangeProfiles,
    config: &RadarConfig,
    padded_bins: usize,
) -> Result<Heatmap, DspError> {
    let metrics = derive_radar_metrics(config).map_err(|_| DspError::EmptyInput)?;
    let (ula, spacing) = azimuth_ula(config)?;
    if !profiles.num_chirps.is_multiple_of(config.num_tx) {
        return Err(DspError::ChirpsNotDivisible {
            chirps: profiles.num_chirps,
            num_tx: config.num_tx,
        });
    }
    let num_rx = profiles.num_virtual / config.num_tx;
    let slow_len = profiles.num_chirps / config.num_tx;

    // Coherent mean over each TX slot for every virtual channel.
    let mut mean = vec![Complex64::ZERO; profiles.num_virtual * profiles.num_bins];
    for v in 0..profiles.num_virtual {
        let tx = v / num_rx;
        for i in 0..slow_len {
            let chirp = tx + i * config.num_tx;
            let row = profiles.row(chirp, v);
            for (bin, value) in row.iter().enumerate() {
                mean[v * profiles.num_bins + bin] += *value;
            }
        }
    }
    for value in &mut mean {
        *value /= slow_len as f64;
    }

    let m = padded_bins.max(ula.len());
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut out = vec![0.0f64; profiles.num_bins * m];
    let mut buf = vec![Complex64::ZERO; m];
    for bin in 0..profiles.num_bins {
        buf.iter_mut().for_each(|s| *s = Complex64::ZERO);
        for (n, &v) in ula.iter().enumerate() {
            buf[n] = mean[v * profiles.num_bins + bin];
        }
        fft.process(&mut buf);
        let shifted = fftshift(&buf);
        // Column flip so the azimuth axis ascends: the element phase ramp is
        // exp(-j*2*pi*x*sin(az)), which puts positive azimuth at negative
        // shifted frequencies.
        for (s, value) in shifted.iter().enumerate() {
            let col = m - 1 - s;
            out[bin * m + col] = value.norm();
        }
    }

    let center = shifted_center(m) as f64;
    let angle_axis: Vec<f64> = (0..m)
        .map(|col| {
            let s = (m - 1 - col) as f64;
            let sin_theta = (-(s - center) / (m as f64 * spacing)).clamp(-1.0, 1.0);
            sin_theta.asin().to_degrees()
        })
        .collect();
    let range_axis: Vec<f64> = (0..profiles.num_bins)
        .map(|b| b as f64 * metrics.range_resolution_m)
        .collect();
    Ok(Heatmap::new(
        out,
        Axis {
            label: "range_m".into(),
            values: range_axis,
        },
        Axis {
            label: "azimuth_deg".into(),
            values: angle_axis,
        },
    ))
}

/// Static clutter removal: per (range bin, virtual antenna, TX slot),
/// subtract the mean over slow time. Purely static returns cancel exactly;
/// a mover's nonzero-Doppler content passes with its amplitude intact.
pub fn static_clutter_removal(profiles: &RangeProfiles, num_tx: usize) -> RangeProfiles {
    let mut out = profiles.clone();
    let num_tx = num_tx.max(1);
    for v in 0..profiles.num_virtual {
        for slot in 0..num_tx {
            let chirps: Vec<usize> = (slot..profiles.num_chirps).step_by(num_tx).collect();
            if chirps.is_empty() {
                continue;
            }
            for bin in 0..profiles.num_bins {
                let mut mean = Complex64::ZERO;
                for &k in &chirps {
                    mean += profiles.row(k, v)[bin];
                }
                mean /= chirps.len() as f64;
                for &k in &chirps {
                    out.row_mut(k, v)[bin] -= mean;
                }
            }
        }
    }
    out
}

/// How the micro-Doppler slow-time series picks its range bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MdAggregate {
    /// Per window, use the range bin with maximum slow-time variance.
    #[default]
    VarianceMax,
    /// Sum spectra over all range bins.
    SumBins,
}

#[derive(Debug, Clone, Copy)]
pub struct MicroDopplerParams {
    /// STFT window length in slow-time samples (per-TX chirps).
    pub stft_window: usize,
    pub hop: usize,
    pub aggregate: MdAggregate,
}

impl Default for MicroDopplerParams {
    fn default() -> Self {
        Self {
            stft_window: 256,
            hop: 64,
            aggregate: MdAggregate::VarianceMax,
        }
    }
}

/// Micro-Doppler spectrogram over a frame sequence.
///
/// Per frame: range FFT, static clutter removal, then the first TX slot's
/// chirps are taken as the slow-time series (RX channels summed coherently).
/// Frames are concatenated back to back, Hann-windowed STFTs are taken every
/// `hop` samples, and magnitudes are reported in dB. Rows span velocity,
/// columns span window time.
pub fn micro_doppler(
    cubes: &[FrameCube],
    config: &RadarConfig,
    params: &MicroDopplerParams,
) -> Result<Heatmap, DspError> {
    if cubes.is_empty() {
        return Err(DspError::EmptyInput);
    }
    let metrics = derive_radar_metrics(config).map_err(|_| DspError::EmptyInput)?;
    let dims = cubes[0].dims();
    for cube in cubes {
        if cube.dims() != dims {
            return Err(DspError::DimsMismatch(dims, cube.dims()));
        }
    }
    let (chirps, virtuals, bins) = dims;
    if !chirps.is_multiple_of(config.num_tx) {
        return Err(DspError::ChirpsNotDivisible {
            chirps,
            num_tx: config.num_tx,
        });
    }
    let num_rx = virtuals / config.num_tx;
    let per_frame = chirps / config.num_tx;

    // Slow-time series per range bin: slot-0 chirps, RX summed coherently.
    let total = per_frame * cubes.len();
    let mut series = vec![Complex64::ZERO; total * bins];
    for (f, cube) in cubes.iter().enumerate() {
        let profiles = static_clutter_removal(&range_fft(cube, Window::Rect), config.num_tx);
        for i in 0..per_frame {
            let chirp = i * config.num_tx;
            let n = f * per_frame + i;
            for rx in 0..num_rx {
                let row = profiles.row(chirp, rx);
                for bin in 0..bins {
                    series[n * bins + bin] += row[bin];
                }
            }
        }
    }

    let window = params.stft_window;
    if total < window {
        return Err(DspError::SequenceTooShort {
            got: total,
            window,
        });
    }
    let hop = params.hop.max(1);
    let num_windows = (total - window) / hop + 1;
    let hann = symmetric_hann(window);
    let fft = FftPlanner::new().plan_fft_forward(window);
    let mut out = vec![0.0f64; window * num_windows];
    let mut buf = vec![Complex64::ZERO; window];
    for w in 0..num_windows {
        let start = w * hop;
        let mut spectrum = vec![0.0f64; window];
        match params.aggregate {
            MdAggregate::VarianceMax => {
                // Pick the range bin with the highest slow-time variance
                // within this window.
                let mut best_bin = 0;
                let mut best_var = f64::NEG_INFINITY;
                for bin in 0..bins {
                    let mut mean = Complex64::ZERO;
                    for n in start..start + window {
                        mean += series[n * bins + bin];
                    }
                    mean /= window as f64;
                    let mut var = 0.0;
                    for n in start..start + window {
                        var += (series[n * bins + bin] - mean).norm_sqr();
                    }
                    if var > best_var {
                        best_var = var;
                        best_bin = bin;
                    }
                }
                for (i, slot) in buf.iter_mut().enumerate() {
                    *slot = series[(start + i) * bins + best_bin] * hann[i];
                }
                fft.process(&mut buf);
                for (d, value) in fftshift(&buf).iter().enumerate() {
                    spectrum[d] = value.norm();
                }
            }
            MdAggregate::SumBins => {
                for bin in 0..bins {
                    for (i, slot) in buf.iter_mut().enumerate() {
                        *slot = series[(start + i) * bins + bin] * hann[i];
                    }
                    fft.process(&mut buf);
                    for (d, value) in fftshift(&buf).iter().enumerate() {
                        spectrum[d] += value.norm();
                    }
                }
            }
        }
        for (d, mag) in spectrum.iter().enumerate() {
            out[d * num_windows + w] = 20.0 * (mag + 1e-20).log10();
        }
    }

    let slow_step = config.num_tx as f64 * config.chirp_period_s();
    let center = shifted_center(window) as f64;
    let velocity_axis: Vec<f64> = (0..window)
        .map(|d| (d as f64 - center) / (window as f64 * slow_step) * metrics.wavelength_m / 2.0)
        .collect();
    let time_axis: Vec<f64> = (0..num_windows)
        .map(|w| (w * hop + window / 2) as f64 * slow_step)
        .collect();
    Ok(Heatmap::new(
        out,
        Axis {
            label: "velocity_mps".into(),
            values: velocity_axis,
        },
        Axis {
            label: "time_s".into(),
            values: time_axis,
        },
    ))
}

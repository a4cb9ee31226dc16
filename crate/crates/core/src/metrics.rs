//! Similarity scoring between heatmaps: multi-scale SSIM and MAE/SD.

use crate::dsp::Heatmap;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("heatmap dims {0}x{1} vs {2}x{3} do not match")]
    DimMismatch(usize, usize, usize, usize),
    #[error("empty pair list")]
    Empty,
    #[error("heatmap too small for SSIM (needs at least 11x11, got {0}x{1})")]
    TooSmall(usize, usize),
}

/// Standard five-scale MS-SSIM exponents.
pub const MS_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

/// Per-pair scores with aggregate mean and population standard deviation.
#[derive(Debug, Clone, Serialize)]
pub struct SimilarityReport {
    pub ms_ssim: Vec<f64>,
    pub mae: Vec<f64>,
    pub ms_ssim_mean: f64,
    pub ms_ssim_sd: f64,
    pub mae_mean: f64,
    pub mae_sd: f64,
    pub pair_count: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Plane {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Plane {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut kernel = [0.0; WINDOW];
    let half = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, k) in kernel.iter_mut().enumerate() {
        let x = i as f64 - half;
        *k = (-x * x / (2.0 * SIGMA * SIGMA)).exp();
        sum += *k;
    }
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

/// Separable Gaussian filter, valid region only (output shrinks by
/// WINDOW - 1 in each dimension).
fn filter_valid(plane: &Plane, kernel: &[f64; WINDOW]) -> Plane {
    let out_cols = plane.cols - WINDOW + 1;
    // Horizontal pass.
    let mut horiz = vec![0.0; plane.rows * out_cols];
    for r in 0..plane.rows {
        for c in 0..out_cols {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += plane.at(r, c + k) * w;
            }
            horiz[r * out_cols + c] = acc;
        }
    }
    // Vertical pass.
    let out_rows = plane.rows - WINDOW + 1;
    let mut data = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        for c in 0..out_cols {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += horiz[(r + k) * out_cols + c] * w;
            }
            data[r * out_cols + c] = acc;
        }
    }
    Plane {
        data,
        rows: out_rows,
        cols: out_cols,
    }
}

fn product(a: &Plane, b: &Plane) -> Plane {
    Plane {
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
        rows: a.rows,
        cols: a.cols,
    }
}

/// Mean SSIM and mean contrast-structure term over the valid window region,
/// for data in [0, 1].
fn ssim_cs(a: &Plane, b: &Plane, kernel: &[f64; WINDOW]) -> (f64, f64) {
    let c1 = (K1 * 1.0f64).powi(2);
    let c2 = (K2 * 1.0f64).powi(2);
    let mu_a = filter_valid(a, kernel);
    let mu_b = filter_valid(b, kernel);
    let aa = filter_valid(&product(a, a), kernel);
    let bb = filter_valid(&product(b, b), kernel);
    let ab = filter_valid(&product(a, b), kernel);
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    let n = mu_a.data.len() as f64;
    for i in 0..mu_a.data.len() {
        let (ma, mb) = (mu_a.data[i], mu_b.data[i]);
        let var_a = aa.data[i] - ma * ma;
        let var_b = bb.data[i] - mb * mb;
        let cov = ab.data[i] - ma * mb;
        let luminance = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        let cs = (2.0 * cov + c2) / (var_a + var_b + c2);
        ssim_sum += luminance * cs;
        cs_sum += cs;
    }
    (ssim_sum / n, cs_sum / n)
}

/// Non-overlapping 2x2 block mean; odd trailing row/column dropped.
fn downsample(plane: &Plane) -> Plane {
    let rows = plane.rows / 2;
    let cols = plane.cols / 2;
    let mut data = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            data[r * cols + c] = 0.25
                * (plane.at(2 * r, 2 * c)
                    + plane.at(2 * r, 2 * c + 1)
                    + plane.at(2 * r + 1, 2 * c)
                    + plane.at(2 * r + 1, 2 * c + 1));
        }
    }
    Plane { data, rows, cols }
}

fn to_plane(h: &Heatmap) -> Plane {
    let normalized = h.min_max_normalized();
    Plane {
        data: normalized.values,
        rows: h.rows,
        cols: h.cols,
    }
}

/// Number of usable scales: downsampling must keep the smallest side at
/// least one SSIM window wide.
fn usable_scales(rows: usize, cols: usize) -> usize {
    let mut scales = 0;
    let (mut r, mut c) = (rows, cols);
    while scales < 5 && r >= WINDOW && c >= WINDOW {
        scales += 1;
        r /= 2;
        c /= 2;
    }
    scales
}

/// Multi-scale SSIM between two equally sized heatmaps, in [0, 1].
///
/// Both inputs are min-max normalized first, so the score is invariant to a
/// joint affine rescaling. Five scales with the standard exponents when the
/// maps are at least 176x176; smaller maps drop scales until the smallest
/// side stays at least 11 pixels after downsampling (the retained exponents
/// are renormalized to sum to 1). Negative contrast-structure terms are
/// clamped at zero, keeping the result in [0, 1] for anti-correlated inputs.
pub fn ms_ssim(a: &Heatmap, b: &Heatmap) -> Result<f64, MetricsError> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(MetricsError::DimMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    let scales = usable_scales(a.rows, a.cols);
    if scales == 0 {
        return Err(MetricsError::TooSmall(a.rows, a.cols));
    }
    let kernel = gaussian_kernel();
    let weight_sum: f64 = MS_WEIGHTS[..scales].iter().sum();
    let mut plane_a = to_plane(a);
    let mut plane_b = to_plane(b);
    let mut score = 1.0;
    for (scale, ms_weight) in MS_WEIGHTS.iter().enumerate().take(scales) {
        let (ssim, cs) = ssim_cs(&plane_a, &plane_b, &kernel);
        let weight = ms_weight / weight_sum;
        if scale + 1 == scales {
            score *= ssim.max(0.0).powf(weight);
        } else {
            score *= cs.max(0.0).powf(weight);
            plane_a = downsample(&plane_a);
            plane_b = downsample(&plane_b);
        }
    }
    Ok(score.clamp(0.0, 1.0))
}

/// Mean absolute error between two equally sized heatmaps (values used as
/// given; callers normalize to [0, 1] first when comparing signatures).
pub fn mae(a: &Heatmap, b: &Heatmap) -> Result<f64, MetricsError> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(MetricsError::DimMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    let n = a.values.len() as f64;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / n)
}

/// Score a set of heatmap pairs: per-pair MS-SSIM and MAE plus aggregate
/// mean and population SD of each.
pub fn mae_sd(pairs: &[(&Heatmap, &Heatmap)]) -> Result<SimilarityReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut ms_scores = Vec::with_capacity(pairs.len());
    let mut mae_scores = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        ms_scores.push(ms_ssim(a, b)?);
        mae_scores.push(mae(a, b)?);
    }
    let (ms_mean, ms_sd) = mean_sd(&ms_scores);
    let (mae_mean, mae_sd) = mean_sd(&mae_scores);
    Ok(SimilarityReport {
        ms_ssim: ms_scores,
        mae: mae_scores,
        ms_ssim_mean: ms_mean,
        ms_ssim_sd: ms_sd,
        mae_mean,
        mae_sd,
        pair_count: pairs.len(),
    })
}

//! The complex IF-sample container produced by synthesis and consumed by DSP.

use crate::radar::RadarConfig;
use num_complex::Complex32;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("data length {got} does not match dims {chirps}x{virtuals}x{samples}")]
    LengthMismatch {
        got: usize,
        chirps: usize,
        virtuals: usize,
        samples: usize,
    },
    #[error("non-finite sample at chirp {chirp}, virtual {virtual_idx}, sample {sample}")]
    NonFinite {
        chirp: usize,
        virtual_idx: usize,
        sample: usize,
    },
}

/// Complex IF samples for one radar frame, indexed `[chirp][virtual][sample]`.
///
/// Samples are stored as `Complex32`, matching the on-disk signal format
/// bit-for-bit; synthesis accumulates in `f64` and converts once per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCube {
    data: Vec<Complex32>,
    num_chirps: usize,
    num_virtual: usize,
    num_samples: usize,
    pub frame_index: usize,
    pub timestamp_s: f64,
}

impl FrameCube {
    pub fn zeroed(num_chirps: usize, num_virtual: usize, num_samples: usize) -> Self {
        Self {
            data: vec![Complex32::new(0.0, 0.0); num_chirps * num_virtual * num_samples],
            num_chirps,
            num_virtual,
            num_samples,
            frame_index: 0,
            timestamp_s: 0.0,
        }
    }

    pub fn for_config(config: &RadarConfig) -> Self {
        Self::zeroed(
            config.chirps_per_frame,
            config.num_virtual(),
            config.samples_per_chirp,
        )
    }

    pub fn from_data(
        data: Vec<Complex32>,
        num_chirps: usize,
        num_virtual: usize,
        num_samples: usize,
    ) -> Result<Self, CubeError> {
        if data.len() != num_chirps * num_virtual * num_samples {
            return Err(CubeError::LengthMismatch {
                got: data.len(),
                chirps: num_chirps,
                virtuals: num_virtual,
                samples: num_samples,
            });
        }
        Ok(Self {
            data,
            num_chirps,
            num_virtual,
            num_samples,
            frame_index: 0,
            timestamp_s: 0.0,
        })
    }

    /// (chirps, virtual antennas, samples)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.num_chirps, self.num_virtual, self.num_samples)
    }

    pub fn matches_config(&self, config: &RadarConfig) -> bool {
        self.dims()
            == (
                config.chirps_per_frame,
                config.num_virtual(),
                config.samples_per_chirp,
            )
    }

    #[inline]
    fn offset(&self, chirp: usize, virtual_idx: usize, sample: usize) -> usize {
        (chirp * self.num_virtual + virtual_idx) * self.num_samples + sample
    }

    #[inline]
    pub fn get(&self, chirp: usize, virtual_idx: usize, sample: usize) -> Complex32 {
        self.data[self.offset(chirp, virtual_idx, sample)]
    }

    #[inline]
    pub fn set(&mut self, chirp: usize, virtual_idx: usize, sample: usize, value: Complex32) {
        let i = self.offset(chirp, virtual_idx, sample);
        self.data[i] = value;
    }

    /// One chirp's samples for one virtual antenna.
    pub fn row(&self, chirp: usize, virtual_idx: usize) -> &[Complex32] {
        let start = self.offset(chirp, virtual_idx, 0);
        &self.data[start..start + self.num_samples]
    }

    pub fn row_mut(&mut self, chirp: usize, virtual_idx: usize) -> &mut [Complex32] {
        let start = self.offset(chirp, virtual_idx, 0);
        &mut self.data[start..start + self.num_samples]
    }

    /// Flat sample storage in `[chirp][virtual][sample]` order.
    pub fn samples(&self) -> &[Complex32] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [Complex32] {
        &mut self.data
    }

    pub fn total_energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr() as f64).sum()
    }

    pub fn validate_finite(&self) -> Result<(), CubeError> {
        for (i, c) in self.data.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                let sample = i % self.num_samples;
                let rest = i / self.num_samples;
                return Err(CubeError::NonFinite {
                    chirp: rest / self.num_virtual,
                    virtual_idx: rest % self.num_virtual,
                    sample,
                });
            }
        }
        Ok(())
    }

    /// Sample-wise sum; dims must match. Metadata is taken from `self`.
    pub fn add(&self, other: &FrameCube) -> Result<FrameCube, CubeError> {
        if self.dims() != other.dims() {
            return Err(CubeError::LengthMismatch {
                got: other.data.len(),
                chirps: self.num_chirps,
                virtuals: self.num_virtual,
                samples: self.num_samples,
            });
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(out)
    }

    /// Bit-exact equality of the sample payload (ignores frame metadata).
    pub fn data_eq(&self, other: &FrameCube) -> bool {
        self.dims() == other.dims()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

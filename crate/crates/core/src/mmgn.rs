//! MMGN binary signal-cube files.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field        |
//! |--------|------|--------------|
//! | 0      | 4    | magic "MMGN" |
//! | 4      | 2    | version u16 = 1 |
//! | 6      | 4    | n_frames u32 |
//! | 10     | 4    | n_chirps u32 |
//! | 14     | 2    | n_virtual u16 |
//! | 16     | 4    | n_samples u32 |
//! | 20     | 8    | f0 f64 (Hz) |
//! | 28     | 8    | bandwidth f64 (Hz) |
//! | 36     | 8    | ramp time f64 (s) |
//! | 44     | 8    | idle time f64 (s) |
//! | 52     | 8    | sample rate f64 (Hz) |
//! | 60     | ...  | frames, each sample as (f32 re, f32 im), index order frame -> chirp -> virtual -> sample |

use crate::cube::FrameCube;
use crate::radar::RadarConfig;
use num_complex::Complex32;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"MMGN";
pub const VERSION: u16 = 1;
/// Fixed header size in bytes.
pub const HEADER_SIZE: usize = 60;

#[derive(Debug, Error)]
pub enum MmgnError {
    #[error("bad magic {0:02x?}, not an MMGN file")]
    BadMagic([u8; 4]),
    #[error("unsupported MMGN version {got} (expected {VERSION})")]
    Version { got: u16 },
    #[error("truncated MMGN file at byte {offset} (needed {needed} more bytes)")]
    Truncated { offset: u64, needed: usize },
    #[error("cube {index} dims {got:?} do not match header dims {expected:?}")]
    DimsMismatch {
        index: usize,
        got: (usize, usize, usize),
        expected: (usize, usize, usize),
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Radar parameters carried in the file header.
#[derive(Debug, Clone, PartialEq)]
pub struct MmgnHeader {
    pub n_frames: u32,
    pub n_chirps: u32,
    pub n_virtual: u16,
    pub n_samples: u32,
    pub start_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub ramp_time_s: f64,
    pub idle_time_s: f64,
    pub sample_rate_hz: f64,
}

impl MmgnHeader {
    pub fn from_config(config: &RadarConfig, n_frames: usize) -> Self {
        Self {
            n_frames: n_frames as u32,
            n_chirps: config.chirps_per_frame as u32,
            n_virtual: config.num_virtual() as u16,
            n_samples: config.samples_per_chirp as u32,
            start_frequency_hz: config.start_frequency_hz,
            bandwidth_hz: config.bandwidth_hz,
            ramp_time_s: config.ramp_time_s,
            idle_time_s: config.idle_time_s,
            sample_rate_hz: config.sample_rate_hz,
        }
    }

    pub fn cube_dims(&self) -> (usize, usize, usize) {
        (
            self.n_chirps as usize,
            self.n_virtual as usize,
            self.n_samples as usize,
        )
    }

    pub fn payload_bytes(&self) -> u64 {
        self.n_frames as u64
            * self.n_chirps as u64
            * self.n_virtual as u64
            * self.n_samples as u64
            * 8
    }
}

pub fn write_mmgn_to<W: Write>(
    writer: &mut W,
    header: &MmgnHeader,
    cubes: &[FrameCube],
) -> Result<(), MmgnError> {
    debug_assert_eq!(header.n_frames as usize, cubes.len());
    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&header.n_frames.to_le_bytes())?;
    writer.write_all(&header.n_chirps.to_le_bytes())?;
    writer.write_all(&header.n_virtual.to_le_bytes())?;
    writer.write_all(&header.n_samples.to_le_bytes())?;
    for value in [
        header.start_frequency_hz,
        header.bandwidth_hz,
        header.ramp_time_s,
        header.idle_time_s,
        header.sample_rate_hz,
    ] {
        writer.write_all(&value.to_le_bytes())?;
    }
    let expected = header.cube_dims();
    let mut buffer = Vec::with_capacity(1 << 16);
    for (index, cube) in cubes.iter().enumerate() {
        if cube.dims() != expected {
            return Err(MmgnError::DimsMismatch {
                index,
                got: cube.dims(),
                expected,
            });
        }
        buffer.clear();
        for sample in cube.samples() {
            buffer.extend_from_slice(&sample.re.to_le_bytes());
            buffer.extend_from_slice(&sample.im.to_le_bytes());
        }
        writer.write_all(&buffer)?;
    }
    Ok(())
}

pub fn write_mmgn(
    path: &Path,
    header: &MmgnHeader,
    cubes: &[FrameCube],
) -> Result<(), MmgnError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    write_mmgn_to(&mut writer, header, cubes)?;
    writer.flush()?;
    Ok(())
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn read_exact_at(&mut self, buf: &mut [u8]) -> Result<(), MmgnError> {
        let mut filled = 0usize;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(MmgnError::Truncated {
                        offset: self.offset + filled as u64,
                        needed: buf.len() - filled,
                    })
                }
                Ok(n) => filled += n,
                Err(ref e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(MmgnError::Io(e)),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }
}

pub fn read_mmgn_from<R: Read>(reader: R) -> Result<(MmgnHeader, Vec<FrameCube>), MmgnError> {
    let mut reader = CountingReader { inner: reader, offset: 0 };
    let mut magic = [0u8; 4];
    reader.read_exact_at(&mut magic)?;
    if magic != MAGIC {
        return Err(MmgnError::BadMagic(magic));
    }
    let mut u16buf = [0u8; 2];
    let mut u32buf = [0u8; 4];
    let mut f64buf = [0u8; 8];

    reader.read_exact_at(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != VERSION {
        return Err(MmgnError::Version { got: version });
    }
    reader.read_exact_at(&mut u32buf)?;
    let n_frames = u32::from_le_bytes(u32buf);
    reader.read_exact_at(&mut u32buf)?;
    let n_chirps = u32::from_le_bytes(u32buf);
    reader.read_exact_at(&mut u16buf)?;
    let n_virtual = u16::from_le_bytes(u16buf);
    reader.read_exact_at(&mut u32buf)?;
    let n_samples = u32::from_le_bytes(u32buf);
    let mut floats = [0f64; 5];
    for value in &mut floats {
        reader.read_exact_at(&mut f64buf)?;
        *value = f64::from_le_bytes(f64buf);
    }
    let header = MmgnHeader {
        n_frames,
        n_chirps,
        n_virtual,
        n_samples,
        start_frequency_hz: floats[0],
        bandwidth_hz: floats[1],
        ramp_time_s: floats[2],
        idle_time_s: floats[3],
        sample_rate_hz: floats[4],
    };

    let samples_per_frame = n_chirps as usize * n_virtual as usize * n_samples as usize;
    let mut cubes = Vec::with_capacity(n_frames as usize);
    let mut raw = vec![0u8; samples_per_frame * 8];
    // The file does not carry the frame rate; reconstructed timestamps use
    // the chirp-train span, i.e. active time concatenated back to back.
    let frame_span = n_chirps as f64 * (header.ramp_time_s + header.idle_time_s);
    for frame_index in 0..n_frames as usize {
        reader.read_exact_at(&mut raw)?;
        let mut data = Vec::with_capacity(samples_per_frame);
        for chunk in raw.chunks_exact(8) {
            let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
            let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
            data.push(Complex32::new(re, im));
        }
        let mut cube = FrameCube::from_data(
            data,
            n_chirps as usize,
            n_virtual as usize,
            n_samples as usize,
        )
        .expect("sized buffer matches dims");
        cube.frame_index = frame_index;
        cube.timestamp_s = frame_index as f64 * frame_span;
        cubes.push(cube);
    }
    Ok((header, cubes))
}

pub fn read_mmgn(path: &Path) -> Result<(MmgnHeader, Vec<FrameCube>), MmgnError> {
    let file = std::fs::File::open(path)?;
    read_mmgn_from(std::io::BufReader::new(file))
}

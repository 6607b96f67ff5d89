//! Latent tensors, semantic vectors, and the flat binary latent container.
//!
//! The on-disk container is `ELAT` + dtype byte (1 = f64 little-endian) +
//! three little-endian `u32` fields (channels, height, width) followed by the
//! row-major payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const LATENT_MAGIC: &[u8; 4] = b"ELAT";
const DTYPE_F64: u8 = 1;

/// A `C x H x W` float tensor; entries are unbounded but must be finite.
///
/// Layout is row-major with channels outermost: index `(c * height + y) * width + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl LatentTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "data length {} does not match {channels}x{height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("latent contains non-finite values".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// (channels, height, width)
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn check_same_shape(&self, other: &LatentTensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Elementwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.channels,
            self.height,
            self.width,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Elementwise combination with another tensor of identical shape.
    pub fn zip_map(&self, other: &LatentTensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::new(
            self.channels,
            self.height,
            self.width,
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

/// A pooled semantic feature vector; finite entries, dimension at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVector {
    data: Vec<f64>,
}

impl SemanticVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Shape("semantic vector must have dim >= 1".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "semantic vector contains non-finite values".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Writes a latent tensor to the binary container format.
pub fn write_latent(t: &LatentTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(17 + t.data.len() * 8);
    buf.extend_from_slice(LATENT_MAGIC);
    buf.push(DTYPE_F64);
    buf.extend_from_slice(&(t.channels as u32).to_le_bytes());
    buf.extend_from_slice(&(t.height as u32).to_le_bytes());
    buf.extend_from_slice(&(t.width as u32).to_le_bytes());
    for v in &t.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a latent tensor from the binary container format.
pub fn read_latent(path: impl AsRef<Path>) -> Result<LatentTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 17 || &bytes[0..4] != LATENT_MAGIC {
        return Err(Error::Format(format!(
            "{}: not a latent container (bad magic or truncated header)",
            path.display()
        )));
    }
    if bytes[4] != DTYPE_F64 {
        return Err(Error::Format(format!(
            "{}: unsupported dtype code {}",
            path.display(),
            bytes[4]
        )));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let (c, h, w) = (u32_at(5), u32_at(9), u32_at(13));
    let expected = 17 + c * h * w * 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{}: payload length {} does not match header {c}x{h}x{w}",
            path.display(),
            bytes.len() - 17
        )));
    }
    let data = bytes[17..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    LatentTensor::new(c, h, w, data)
}

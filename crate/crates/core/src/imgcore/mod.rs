//! Image representation, patch extraction/aggregation, noise injection,
//! quality metrics and file I/O shared by the rest of the crate.

mod io;
mod metrics;
mod noise;
pub(crate) mod patches;

pub use io::{read_image, read_pgm, read_raw, write_image, write_pgm, write_png, write_raw};
pub use metrics::{mse, psnr, ssim, DenoiseReport, SSIM_WINDOW};
pub use noise::{add_gaussian_noise, NoiseSpec, NOISE_GENERATOR};
pub use patches::{aggregate_patches, extract_patches, PatchMatrix};

use crate::error::{Error, Result};

/// Default PSNR peak for 8-bit data.
pub const DEFAULT_PEAK: f64 = 255.0;

/// A single-channel image stored row-major as `f64` intensities.
///
/// Values are not clamped; clamping only happens when writing 8-bit files.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
    peak: f64,
}

impl Image {
    /// Builds an image from row-major data. Fails on a length mismatch or a
    /// non-finite sample.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(crate::error::shape_mismatch(
                format!("{} samples ({width}x{height})", width * height),
                format!("{} samples", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            peak: DEFAULT_PEAK,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0 && value.is_finite());
        Self {
            width,
            height,
            data: vec![value; width * height],
            peak: DEFAULT_PEAK,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0);
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
            peak: DEFAULT_PEAK,
        }
    }

    /// Internal constructor for buffers produced by this crate's own kernels.
    pub(crate) fn from_raw_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
            peak: DEFAULT_PEAK,
        }
    }

    pub fn with_peak(mut self, peak: f64) -> Self {
        assert!(peak > 0.0 && peak.is_finite());
        self.peak = peak;
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn peak(&self) -> f64 {
        self.peak
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
            peak: self.peak,
        }
    }

    /// Combines two equally sized images sample by sample.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            peak: self.peak,
        })
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `max|a - b| / max(max|a|, tiny)`.
    pub fn relative_max_diff(&self, other: &Image) -> Result<f64> {
        let d = self.max_abs_diff(other)?;
        let scale = self.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(d / scale.max(f64::MIN_POSITIVE))
    }

    pub fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(crate::error::shape_mismatch(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }

    /// Copy of the rectangle `[row0, row0+h) x [col0, col0+w)`.
    pub fn crop(&self, row0: usize, col0: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || row0 + h > self.height || col0 + w > self.width {
            return Err(Error::Dimension(format!(
                "crop {w}x{h} at ({row0},{col0}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for r in row0..row0 + h {
            data.extend_from_slice(&self.row(r)[col0..col0 + w]);
        }
        Ok(Self {
            width: w,
            height: h,
            data,
            peak: self.peak,
        })
    }

    /// Rounds and clamps every sample to the 8-bit range.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

use nalgebra::DMatrix;

use super::Image;
use crate::error::{shape_mismatch, Error, Result};
use crate::par::{self, Exec};

/// Fully overlapping (stride 1) `p x p` patches, mean-removed and stored as
/// the columns of an `n x N` matrix with `n = p^2`.
///
/// Each patch is vectorized column-major: entry `c * p + r` holds the pixel at
/// row offset `r` and column offset `c`.
#[derive(Debug, Clone)]
pub struct PatchMatrix {
    pub(crate) side: usize,
    pub(crate) columns: DMatrix<f64>,
    pub(crate) means: Vec<f64>,
    pub(crate) origins: Vec<(usize, usize)>,
    pub(crate) image_dims: (usize, usize),
}

impl PatchMatrix {
    /// Patch side `p`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Patch dimension `n = p^2`.
    pub fn dim(&self) -> usize {
        self.side * self.side
    }

    /// Number of patches `N`.
    pub fn count(&self) -> usize {
        self.origins.len()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Top-left `(row, col)` of every patch, in column order.
    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    /// `(width, height)` of the source image.
    pub fn image_dims(&self) -> (usize, usize) {
        self.image_dims
    }

    /// Builds a patch matrix directly from mean-removed columns; used by tests
    /// and by the transform-learning oracles.
    pub fn from_columns(columns: DMatrix<f64>) -> Self {
        let n = columns.nrows();
        let side = (n as f64).sqrt().round() as usize;
        let count = columns.ncols();
        Self {
            side,
            columns,
            means: vec![0.0; count],
            origins: (0..count).map(|i| (0, i)).collect(),
            image_dims: (0, 0),
        }
    }
}

const EXTRACT_CHUNK: usize = 2048;

/// Extracts all `(width-p+1) x (height-p+1)` overlapping patches, origins in
/// row-major order.
pub fn extract_patches(img: &Image, p: usize) -> Result<PatchMatrix> {
    extract_patches_with(img, p, Exec::Parallel)
}

pub(crate) fn extract_patches_with(img: &Image, p: usize, exec: Exec) -> Result<PatchMatrix> {
    let (w, h) = img.dims();
    if p == 0 || p > w || p > h {
        return Err(Error::Dimension(format!(
            "patch side {p} does not fit a {w}x{h} image"
        )));
    }
    let cols_per_row = w - p + 1;
    let count = cols_per_row * (h - p + 1);
    let n = p * p;
    let origins: Vec<(usize, usize)> = (0..count)
        .map(|i| (i / cols_per_row, i % cols_per_row))
        .collect();

    let mut data = vec![0.0; n * count];
    let mut means = vec![0.0; count];
    let src = img.data();
    par::for_each_chunk_mut(&mut data, n * EXTRACT_CHUNK, exec, |ci, block| {
        for (j, col) in block.chunks_mut(n).enumerate() {
            let (r0, c0) = origins[ci * EXTRACT_CHUNK + j];
            for c in 0..p {
                for r in 0..p {
                    col[c * p + r] = src[(r0 + r) * w + c0 + c];
                }
            }
        }
    });
    par::for_each_chunk_mut(&mut means, EXTRACT_CHUNK, exec, |ci, block| {
        for (j, m) in block.iter_mut().enumerate() {
            let i = ci * EXTRACT_CHUNK + j;
            *m = data[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64;
        }
    });
    par::for_each_chunk_mut(&mut data, n * EXTRACT_CHUNK, exec, |ci, block| {
        for (j, col) in block.chunks_mut(n).enumerate() {
            let mean = means[ci * EXTRACT_CHUNK + j];
            col.iter_mut().for_each(|v| *v -= mean);
        }
    });

    Ok(PatchMatrix {
        side: p,
        columns: DMatrix::from_vec(n, count, data),
        means,
        origins,
        image_dims: (w, h),
    })
}

/// Adds each patch mean back to the corresponding column of `denoised` and
/// averages the overlapping contributions at every pixel.
///
/// Accumulation runs in patch order on a single thread so the result does not
/// depend on the thread count.
pub fn aggregate_patches(
    pm: &PatchMatrix,
    denoised: &DMatrix<f64>,
    width: usize,
    height: usize,
) -> Result<Image> {
    if denoised.shape() != pm.columns.shape() {
        return Err(shape_mismatch(
            format!("{}x{}", pm.columns.nrows(), pm.columns.ncols()),
            format!("{}x{}", denoised.nrows(), denoised.ncols()),
        ));
    }
    if (width, height) != pm.image_dims {
        return Err(shape_mismatch(
            format!("{}x{}", pm.image_dims.0, pm.image_dims.1),
            format!("{width}x{height}"),
        ));
    }
    let p = pm.side;
    let mut acc = vec![0.0; width * height];
    let mut weight = vec![0u32; width * height];
    for (i, &(r0, c0)) in pm.origins.iter().enumerate() {
        let col = denoised.column(i);
        let mean = pm.means[i];
        for c in 0..p {
            for r in 0..p {
                let idx = (r0 + r) * width + c0 + c;
                acc[idx] += col[c * p + r] + mean;
                weight[idx] += 1;
            }
        }
    }
    let data = acc
        .into_iter()
        .zip(weight)
        .map(|(s, k)| s / k as f64)
        .collect();
    Ok(Image::from_raw_parts(width, height, data))
}

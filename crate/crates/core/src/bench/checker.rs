use crate::error::{Error, Result};
use crate::imgcore::{add_gaussian_noise, Image, NoiseSpec};
use crate::multiscale::{Denoiser, Method, MemoDenoiser, MsConfig};

/// Tile sides of the five checkerboard regions, top to bottom.
pub const CHECKERBOARD_TILES: [usize; 5] = [4, 8, 11, 16, 32];
pub const CHECKERBOARD_WIDTH: usize = 256;
pub const CHECKERBOARD_REGION_HEIGHT: usize = 96;

/// Five horizontal bands of black/white square tiles, one tile side per band.
pub fn make_checkerboard() -> Image {
    let h = CHECKERBOARD_REGION_HEIGHT;
    Image::from_fn(CHECKERBOARD_WIDTH, h * CHECKERBOARD_TILES.len(), |r, c| {
        let t = CHECKERBOARD_TILES[r / h];
        if ((r % h) / t + c / t).is_multiple_of(2) {
            255.0
        } else {
            0.0
        }
    })
}

/// Row-major pixel masks of horizontal bands with the given heights.
pub fn horizontal_bands(width: usize, heights: &[usize]) -> Vec<Vec<bool>> {
    let total: usize = heights.iter().sum();
    let mut start = 0;
    heights
        .iter()
        .map(|&h| {
            let mask = (0..total * width)
                .map(|i| (start..start + h).contains(&(i / width)))
                .collect();
            start += h;
            mask
        })
        .collect()
}

pub fn checkerboard_regions() -> Vec<Vec<bool>> {
    horizontal_bands(
        CHECKERBOARD_WIDTH,
        &[CHECKERBOARD_REGION_HEIGHT; CHECKERBOARD_TILES.len()],
    )
}

/// PSNR restricted to each mask. The masks must partition the image.
pub fn regional_psnr(reference: &Image, test: &Image, regions: &[Vec<bool>]) -> Result<Vec<f64>> {
    reference.ensure_same_dims(test)?;
    let len = reference.data().len();
    let mut cover = vec![0u32; len];
    for (k, m) in regions.iter().enumerate() {
        if m.len() != len {
            return Err(Error::Dimension(format!(
                "region {k} has {} entries for {len} pixels",
                m.len()
            )));
        }
        for (c, &on) in cover.iter_mut().zip(m) {
            *c += on as u32;
        }
    }
    if let Some(i) = cover.iter().position(|&c| c != 1) {
        let what = if cover[i] == 0 { "covered by no region" } else { "covered twice" };
        return Err(Error::InvalidParameter(format!("pixel {i} is {what}")));
    }
    let peak = reference.peak();
    Ok(regions
        .iter()
        .map(|m| {
            let (sum, n) = reference
                .data()
                .iter()
                .zip(test.data())
                .zip(m)
                .filter(|(_, &on)| on)
                .fold((0.0, 0usize), |(s, n), ((a, b), _)| (s + (a - b) * (a - b), n + 1));
            if sum == 0.0 {
                f64::INFINITY
            } else {
                10.0 * (peak * peak * n as f64 / sum).log10()
            }
        })
        .collect())
}

/// Regional quality of one method on the checkerboard.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionalResult {
    pub method: Method,
    /// One entry per tile side of [`CHECKERBOARD_TILES`].
    pub psnr: Vec<f64>,
    /// `psnr - single-scale psnr` per region.
    pub gain: Vec<f64>,
}

/// Denoises the noisy checkerboard with every method and compares regions.
pub fn checkerboard_study(
    sigma: f64,
    seed: u64,
    methods: &[Method],
    ms: &MsConfig,
    denoiser: &dyn Denoiser,
) -> Result<Vec<RegionalResult>> {
    let clean = make_checkerboard();
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(sigma, seed)?)?;
    let regions = checkerboard_regions();
    let memo = MemoDenoiser::new(denoiser);
    let single = regional_psnr(&clean, &Method::Single.run(&noisy, sigma, ms, &memo)?, &regions)?;
    methods
        .iter()
        .map(|&method| {
            let out = method.run(&noisy, sigma, ms, &memo)?;
            let p = regional_psnr(&clean, &out, &regions)?;
            let gain = p.iter().zip(&single).map(|(a, b)| a - b).collect();
            Ok(RegionalResult { method, psnr: p, gain })
        })
        .collect()
}

pub fn checkerboard_csv(results: &[RegionalResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "tile", "psnr", "gain"])?;
    for r in results {
        for (k, t) in CHECKERBOARD_TILES.iter().enumerate() {
            w.write_record([
                r.method.label().to_string(),
                t.to_string(),
                r.psnr[k].to_string(),
                r.gain[k].to_string(),
            ])?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Format(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}
